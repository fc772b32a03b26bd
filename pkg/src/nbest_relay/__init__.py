"""N'th-best relay selection for DF cooperative networks under Markov-Gaussian impulsive noise."""

from .analytic import AvgSnrSet, SelectionConfig
from .noise_channel import G, B, Topology, TsmgParams
from .sim_engine import SimulationConfig, SweepRecord, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AvgSnrSet",
    "B",
    "G",
    "SelectionConfig",
    "SimulationConfig",
    "SweepRecord",
    "Topology",
    "TsmgParams",
    "run_sweep",
    "__version__",
]
