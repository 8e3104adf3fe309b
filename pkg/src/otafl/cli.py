"""Command line entry point: ``otafl run --config sim.cfg --policy hybrid --out metrics.csv``."""

import argparse
import logging
import os
import sys

from . import fl
from .config import build_config
from .errors import ConfigError, OTAFLError
from .harness import emit_metrics, run_experiment, user_geometry

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _parser():
    p = argparse.ArgumentParser(prog="otafl", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--config", help="key = value configuration file")
    run.add_argument("--policy")
    run.add_argument("--seed", type=int)
    run.add_argument("--seeds", help="comma separated seeds; one CSV per seed")
    run.add_argument("--out", default="metrics.csv")
    run.add_argument("--desk", action="store_true", help="scaled-down preset (M=50, K=5, W=10, T=30)")
    run.add_argument("--geometry-out")
    run.add_argument("--checkpoint-out")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override any config key")
    run.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _seed_path(path, seed):
    root, ext = os.path.splitext(path)
    return f"{root}.seed{seed}{ext or '.csv'}"


def _run(args):
    overrides = {"policy": args.policy, "seed": args.seed}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}", "type-error")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    cfg = build_config(args.config, overrides, desk=args.desk)

    if args.seeds:
        try:
            seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        except ValueError:
            raise ConfigError(f"bad --seeds {args.seeds!r}", "type-error") from None
        jobs = [(build_config(args.config, {**overrides, "seed": s}, desk=args.desk),
                 _seed_path(args.out, s)) for s in seeds]
    else:
        jobs = [(cfg, args.out)]

    for job_cfg, out in jobs:
        final = {}

        def keep(metrics, model, channels, decision):
            final["model"] = model

        metrics = run_experiment(job_cfg, on_round=keep)
        emit_metrics(metrics, out)
        logging.info("wrote %d rounds to %s", len(metrics), out)
        if args.geometry_out:
            path = _seed_path(args.geometry_out, job_cfg.seed) if args.seeds else args.geometry_out
            user_geometry(job_cfg).to_csv(path)
        if args.checkpoint_out and "model" in final:
            path = (_seed_path(args.checkpoint_out, job_cfg.seed) if args.seeds
                    else args.checkpoint_out)
            fl.save_checkpoint(final["model"], path)


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OTAFLError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
