"""Federated learning over the air: channel model, AirComp link, receive
beamforming, user scheduling and the round-by-round simulator."""

from .aircomp import AirCompLink, AggregationResult, design_link, mse_closed_form
from .beamforming import BeamformingInstance, BeamformerSolution, solve_receiver
from .channel import ChannelSet, UserGeometry, channel_gain, draw_channels, place_users
from .config import SimConfig, build_config
from .harness import RoundMetrics, derive_seeds, emit_metrics, read_metrics, run_experiment
from .scheduling import CostLedger, ScheduleDecision

__version__ = "0.1.0"
