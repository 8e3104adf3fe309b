"""Regenerate tests/data/beamforming_oracle.json (slow; a few minutes).

    python tests/make_oracle_fixtures.py
"""

import json
import os

import numpy as np

from oracles import qcqp_oracle

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    rng = np.random.default_rng(20240601)
    cases = []
    for i in range(50):
        n = int(rng.choice([2, 3]))
        k = int(rng.choice([2, 3, 4]))
        h = (rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))) / np.sqrt(2)
        phi = rng.uniform(0.5, 2.0, k)
        best = qcqp_oracle(h, phi, np.random.default_rng(1000 + i))
        cases.append({"N": n, "K": k, "h_real": h.real.tolist(), "h_imag": h.imag.tolist(),
                      "phi": phi.tolist(), "oracle_objective": best})
        print(i, n, k, best, flush=True)
    with open(os.path.join(HERE, "data", "beamforming_oracle.json"), "w") as fh:
        json.dump({"description": "min ||a||^2 s.t. |a^H h_k|^2 >= phi_k^2; oracle = best of "
                   "1000 SLSQP random restarts and 1e5 sampled directions",
                   "cases": cases}, fh, indent=1)


if __name__ == "__main__":
    main()
