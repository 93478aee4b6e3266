"""Grid geometry, bathymetry and the conserved flow state.

Arrays are stored as ``(ny, nx)`` C-ordered float64, so the flat index of
cell ``(x, y)`` is ``x + y * nx``. Row ``y = 0`` is the southern edge of the
domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BOUNDARY_KINDS = ("reflective", "open")


@dataclass
class PhysicalParams:
    """Physical constants of the flow model.

    ``manning`` may be a scalar or a per-cell ``(ny, nx)`` field.
    ``omega_z`` is the local vertical component of Earth's rotation, see
    :func:`swflood.forcing.omega_z_from_latitude`.
    """

    g: float = 9.81
    manning: float | np.ndarray = 0.03
    viscosity: float = 0.0
    omega_z: float = 0.0
    wind_drag: float = 1.0e-3
    rho_air: float = 1.2
    rho_water: float = 1000.0
    eps_dry: float = 1.0e-6

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if np.any(np.asarray(self.manning) < 0):
            raise ValueError("manning coefficient must be non-negative")
        if self.viscosity < 0:
            raise ValueError("viscosity must be non-negative")
        if not self.rho_water > 0 or self.rho_air < 0:
            raise ValueError("densities must satisfy rho_water > 0, rho_air >= 0")
        if not self.eps_dry > 0:
            raise ValueError("eps_dry must be positive")

    def manning_field(self, shape) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.manning, dtype=float), shape).copy()


@dataclass(frozen=True)
class Boundaries:
    """Per-edge boundary condition, each ``"reflective"`` or ``"open"``."""

    west: str = "reflective"
    east: str = "reflective"
    south: str = "reflective"
    north: str = "reflective"

    def __post_init__(self):
        for side in ("west", "east", "south", "north"):
            kind = getattr(self, side)
            if kind not in BOUNDARY_KINDS:
                raise ValueError(f"boundary {side}={kind!r} not in {BOUNDARY_KINDS}")

    @classmethod
    def all(cls, kind: str) -> "Boundaries":
        return cls(kind, kind, kind, kind)

    def codes(self) -> np.ndarray:
        """Integer codes (0 reflective, 1 open) ordered west, east, south, north."""
        return np.array(
            [BOUNDARY_KINDS.index(getattr(self, s)) for s in ("west", "east", "south", "north")],
            dtype=np.int32,
        )


@dataclass
class Terrain:
    """Bed elevation ``b`` on a uniform grid of square cells of size ``h``."""

    b: np.ndarray
    h: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        self.b = np.ascontiguousarray(self.b, dtype=np.float64)
        if self.b.ndim != 2 or self.b.shape[0] < 1 or self.b.shape[1] < 1:
            raise ValueError(f"bathymetry must be a non-empty 2D array, got shape {self.b.shape}")
        if not self.h > 0:
            raise ValueError(f"cell size must be positive, got {self.h}")
        if not np.all(np.isfinite(self.b)):
            raise ValueError("bathymetry contains non-finite values")
        self.b.flags.writeable = False

    @property
    def nx(self) -> int:
        return self.b.shape[1]

    @property
    def ny(self) -> int:
        return self.b.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.b.shape

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.origin[0] + (np.arange(self.nx) + 0.5) * self.h
        y = self.origin[1] + (np.arange(self.ny) + 0.5) * self.h
        return x, y


@dataclass
class FlowState:
    """Depth ``H`` and depth-integrated momentum ``HU``, ``HV`` at time ``t``."""

    H: np.ndarray
    HU: np.ndarray
    HV: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.H = np.ascontiguousarray(self.H, dtype=np.float64)
        self.HU = np.ascontiguousarray(self.HU, dtype=np.float64)
        self.HV = np.ascontiguousarray(self.HV, dtype=np.float64)
        if not (self.H.shape == self.HU.shape == self.HV.shape):
            raise ValueError("H, HU, HV shapes differ")
        for name in ("H", "HU", "HV"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite values in {name}")
        if np.any(self.H < 0):
            raise ValueError("negative depth in flow state")

    @classmethod
    def dry(cls, terrain: Terrain, t: float = 0.0) -> "FlowState":
        z = np.zeros(terrain.shape)
        return cls(z, z.copy(), z.copy(), t)

    @classmethod
    def still_water(cls, terrain: Terrain, level: float, eps_dry: float = 1.0e-6) -> "FlowState":
        """Lake at rest with free surface at ``level`` wherever the bed is below it."""
        H = np.maximum(level - terrain.b, 0.0)
        H[H <= eps_dry] = 0.0
        return cls(H, np.zeros_like(H), np.zeros_like(H))

    def copy(self) -> "FlowState":
        return FlowState(self.H.copy(), self.HU.copy(), self.HV.copy(), self.t)

    def sanitize(self, eps_dry: float) -> "FlowState":
        """Zero momentum on cells at or below the dry threshold."""
        dry = self.H <= eps_dry
        self.HU[dry] = 0.0
        self.HV[dry] = 0.0
        return self

    def velocities(self, eps_dry: float) -> tuple[np.ndarray, np.ndarray]:
        wet = self.H > eps_dry
        u = np.zeros_like(self.H)
        v = np.zeros_like(self.H)
        np.divide(self.HU, self.H, out=u, where=wet)
        np.divide(self.HV, self.H, out=v, where=wet)
        return u, v

    def bitwise_equal(self, other: "FlowState") -> bool:
        return all(
            np.array_equal(a.view(np.uint64), c.view(np.uint64))
            for a, c in ((self.H, other.H), (self.HU, other.HU), (self.HV, other.HV))
        )


def _check_index(shape, i, j):
    ny, nx = shape
    if not (0 <= i < nx and 0 <= j < ny):
        raise IndexError(f"cell ({i}, {j}) outside grid {nx}x{ny}")


def free_surface(state: FlowState, terrain: Terrain, i: int, j: int) -> float:
    """Water surface level ``H + b`` at cell ``(i, j)`` (x index, y index)."""
    _check_index(terrain.shape, i, j)
    return float(state.H[j, i] + terrain.b[j, i])


def velocity(state: FlowState, params: PhysicalParams, i: int, j: int) -> tuple[float, float]:
    _check_index(state.H.shape, i, j)
    H = state.H[j, i]
    if H > params.eps_dry:
        return float(state.HU[j, i] / H), float(state.HV[j, i] / H)
    return 0.0, 0.0


def total_volume(state: FlowState, terrain: Terrain) -> float:
    # fsum keeps the result independent of cell ordering
    return math.fsum(state.H.ravel().tolist()) * terrain.h * terrain.h
