"""Maximum increments of heavy-tailed random walks and their limit laws."""

__version__ = "0.1.0"

from maxinc.heavytail import Centering, HeavyTailLaw, SeedStream
from maxinc.scaling import ScalingFunction, make_power, make_power_log
from maxinc.stats import IncrementStatistic, Mode, compute, prefix_sums

__all__ = [
    "Centering",
    "HeavyTailLaw",
    "IncrementStatistic",
    "Mode",
    "ScalingFunction",
    "SeedStream",
    "compute",
    "make_power",
    "make_power_log",
    "prefix_sums",
]
