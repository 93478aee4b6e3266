"""Block-skipping shallow-water flood solver with two-grid nesting."""

from .blocks import BlockMask, compute_block_mask
from .errors import ConfigError, NumericalAbort
from .forcing import Hydrograph, PointSource, RainSource, WindForcing
from .grid import Boundaries, FlowState, PhysicalParams, Terrain, free_surface, total_volume, velocity
from .stepper import Stepper, TimestepControl

__version__ = "0.1.0"

__all__ = [
    "BlockMask", "Boundaries", "ConfigError", "FlowState", "Hydrograph", "NumericalAbort",
    "PhysicalParams", "PointSource", "RainSource", "Stepper", "Terrain", "TimestepControl",
    "WindForcing", "compute_block_mask", "free_surface", "total_volume", "velocity",
]
