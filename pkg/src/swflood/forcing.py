"""Force and source terms of the depth-averaged momentum and mass equations.

These are whole-grid numpy evaluations used for diagnostics, reports and as
the reference the fused stage kernels are tested against. The stepper never
calls them on its hot path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError
from .grid import FlowState, PhysicalParams, Terrain

EARTH_ROTATION = 7.2921e-5  # rad/s

FORCE_TERMS = ("gradient", "friction", "viscous", "coriolis", "wind", "exchange")


def omega_z_from_latitude(latitude_deg: float) -> float:
    """Vertical component of Earth's angular velocity at a latitude."""
    return EARTH_ROTATION * float(np.sin(np.deg2rad(latitude_deg)))


class TimeSeries:
    """Piecewise-linear series, held constant beyond its first and last knot."""

    def __init__(self, times, values):
        self.times = np.atleast_1d(np.asarray(times, dtype=float))
        self.values = np.asarray(values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if len(self.times) != len(self.values) or len(self.times) == 0:
            raise ConfigError("time series needs matching, non-empty times and values")
        if np.any(np.diff(self.times) <= 0):
            raise ConfigError("time series times must be strictly increasing")

    @classmethod
    def constant(cls, *value) -> "TimeSeries":
        return cls([0.0], [list(value)])

    def at(self, t: float) -> np.ndarray:
        return np.array([np.interp(t, self.times, col) for col in self.values.T])

    def nonzero_between(self, t0: float, t1: float) -> bool:
        """True if any component is non-zero somewhere on ``[t0, t1]``."""
        inside = self.values[(self.times > t0) & (self.times < t1)]
        probes = [self.at(t0), self.at(t1), *inside]
        return any(np.any(p != 0) for p in probes)


class Hydrograph(TimeSeries):
    """Discharge ``Q(t)`` [m^3/s] or rain rate [m/s]."""

    def __call__(self, t: float) -> float:
        return float(self.at(t)[0])


@dataclass
class WindForcing:
    """Horizontal wind velocity, constant or a time series of (Wx, Wy)."""

    series: TimeSeries = field(default_factory=lambda: TimeSeries.constant(0.0, 0.0))

    @classmethod
    def constant(cls, wx: float, wy: float) -> "WindForcing":
        return cls(TimeSeries.constant(wx, wy))

    @classmethod
    def from_samples(cls, times, wx, wy) -> "WindForcing":
        return cls(TimeSeries(times, np.column_stack([wx, wy])))

    def at(self, t: float) -> tuple[float, float]:
        w = self.series.at(t)
        return float(w[0]), float(w[1])


def _as_hydrograph(q) -> Hydrograph:
    if isinstance(q, Hydrograph):
        return q
    if isinstance(q, TimeSeries):
        return Hydrograph(q.times, q.values)
    return Hydrograph([0.0], [float(q)])


def _cells_array(cells) -> np.ndarray:
    arr = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
    if len(arr) == 0:
        raise ConfigError("source covers no cells")
    return arr


def rect_cells(i0: int, j0: int, i1: int, j1: int) -> np.ndarray:
    """All ``(i, j)`` with ``i0 <= i < i1`` and ``j0 <= j < j1``."""
    ii, jj = np.meshgrid(np.arange(i0, i1), np.arange(j0, j1), indexing="xy")
    return np.column_stack([ii.ravel(), jj.ravel()])


@dataclass
class PointSource:
    """Discharge ``Q(t)`` [m^3/s] spread evenly over a set of cells.

    Negative discharge is a drain. Water enters with velocity ``velocity``.
    """

    cells: np.ndarray
    discharge: Hydrograph
    velocity: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        self.cells = _cells_array(self.cells)
        self.discharge = _as_hydrograph(self.discharge)

    def sigma(self, t: float, h: float) -> float:
        return self.discharge(t) / (len(self.cells) * h * h)

    def active_between(self, t0: float, t1: float) -> bool:
        return self.discharge.nonzero_between(t0, t1)


@dataclass
class RainSource:
    """Uniform rain rate [m/s] over a set of cells; rain falls with zero velocity."""

    cells: np.ndarray
    rate: Hydrograph
    velocity: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        self.cells = _cells_array(self.cells)
        self.rate = _as_hydrograph(self.rate)

    def sigma(self, t: float, h: float) -> float:
        return self.rate(t)

    def active_between(self, t0: float, t1: float) -> bool:
        return self.rate.nonzero_between(t0, t1)


@dataclass
class SourceField:
    """Per-cell source density ``sigma`` [m/s], inflow velocity and activity marker."""

    sigma: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    index_q: np.ndarray

    @classmethod
    def empty(cls, shape) -> "SourceField":
        z = np.zeros(shape)
        return cls(z, z.copy(), z.copy(), np.zeros(shape, dtype=np.int32))


def check_sources(sources: Iterable, terrain: Terrain) -> None:
    for k, src in enumerate(sources):
        c = src.cells
        bad = (c[:, 0] < 0) | (c[:, 0] >= terrain.nx) | (c[:, 1] < 0) | (c[:, 1] >= terrain.ny)
        if np.any(bad):
            i, j = c[np.argmax(bad)]
            raise ConfigError(f"source {k} cell ({i}, {j}) outside {terrain.nx}x{terrain.ny} grid")


class SourceAssembler:
    """Evaluates a fixed list of sources into preallocated fields.

    Only the cells the sources cover are reset and rewritten, so repeated
    evaluation costs nothing on the rest of the grid.
    """

    def __init__(self, sources: Sequence, terrain: Terrain):
        self.sources = list(sources)
        check_sources(self.sources, terrain)
        self.terrain = terrain
        nx = terrain.nx
        if self.sources:
            flat = [src.cells[:, 1] * nx + src.cells[:, 0] for src in self.sources]
            cells = np.unique(np.concatenate(flat))
            self._j, self._i = np.divmod(cells, nx)
            self._slot = [np.searchsorted(cells, f) for f in flat]
        else:
            self._j = self._i = np.zeros(0, dtype=np.int64)
            self._slot = []

    def new_field(self) -> SourceField:
        return SourceField.empty(self.terrain.shape)

    def fill(self, field: SourceField, t: float) -> SourceField:
        """Overlapping sources add; inflow velocity is the discharge-weighted mean."""
        if not self.sources:
            return field
        n = len(self._j)
        sig = np.zeros(n)
        svx = np.zeros(n)
        svy = np.zeros(n)
        for src, slot in zip(self.sources, self._slot):
            s = src.sigma(t, self.terrain.h)
            if s == 0.0:
                continue
            np.add.at(sig, slot, s)
            np.add.at(svx, slot, s * src.velocity[0])
            np.add.at(svy, slot, s * src.velocity[1])
        nz = sig != 0.0
        vx = np.zeros(n)
        vy = np.zeros(n)
        np.divide(svx, sig, out=vx, where=nz)
        np.divide(svy, sig, out=vy, where=nz)
        at = (self._j, self._i)
        field.sigma[at] = sig
        field.vx[at] = vx
        field.vy[at] = vy
        field.index_q[at] = nz
        return field

    def activity(self, t0: float, t1: float, out: np.ndarray) -> np.ndarray:
        """Mark cells whose sources are non-zero anywhere on ``[t0, t1]``."""
        out[self._j, self._i] = 0
        for src in self.sources:
            if src.active_between(t0, t1):
                out[src.cells[:, 1], src.cells[:, 0]] = 1
        return out


def source_terms(sources: Sequence, t: float, terrain: Terrain) -> SourceField:
    """Evaluate all sources at time ``t`` into a new :class:`SourceField`."""
    asm = SourceAssembler(sources, terrain)
    return asm.fill(asm.new_field(), t)


def source_activity(sources: Sequence, t0: float, t1: float, terrain: Terrain) -> np.ndarray:
    """Cells whose sources are non-zero anywhere on ``[t0, t1]``."""
    return SourceAssembler(sources, terrain).activity(t0, t1, np.zeros(terrain.shape, dtype=np.int32))


# -- individual force terms --------------------------------------------------


def bottom_friction(U, H, params: PhysicalParams, manning=None):
    """Manning bed friction ``-(lambda/2) U |U|`` with ``lambda = 2 g n^2 / H^(4/3)``."""
    ux, uy = (np.asarray(c, dtype=float) for c in U)
    n = params.manning if manning is None else manning
    H = np.asarray(H, dtype=float)
    lam = 2.0 * params.g * np.asarray(n, dtype=float) ** 2 / H ** (4.0 / 3.0)
    speed = np.hypot(ux, uy)
    return -0.5 * lam * ux * speed, -0.5 * lam * uy * speed


def coriolis_force(U, params: PhysicalParams):
    """f-plane Coriolis acceleration ``2 U x Omega`` with vertical ``Omega``."""
    ux, uy = U
    return 2.0 * params.omega_z * np.asarray(uy), -2.0 * params.omega_z * np.asarray(ux)


def wind_force(U, H, wind: WindForcing, t: float, params: PhysicalParams):
    """Surface wind stress ``C_a rho_a/(rho H) (W-U)|W-U|``."""
    wx, wy = wind.at(t)
    rx = wx - np.asarray(U[0], dtype=float)
    ry = wy - np.asarray(U[1], dtype=float)
    k = params.wind_drag * params.rho_air / (params.rho_water * np.asarray(H, dtype=float))
    m = np.hypot(rx, ry)
    return k * rx * m, k * ry * m


def _neighbours(a: np.ndarray, fill=0.0):
    """West, east, south, north neighbour views padded with ``fill``."""
    p = np.pad(a, 1, constant_values=fill)
    return p[1:-1, :-2], p[1:-1, 2:], p[:-2, 1:-1], p[2:, 1:-1]


def _wet_neighbours(H: np.ndarray, eps: float):
    return _neighbours(H > eps, fill=False)


def surface_gradient_field(state: FlowState, terrain: Terrain, params: PhysicalParams):
    """``-g grad(eta)`` on every wet cell.

    Central differences where both neighbours are wet, one-sided toward the
    single wet neighbour otherwise, zero with no wet neighbour. Domain edges
    count as dry neighbours.
    """
    H, eps, h = state.H, params.eps_dry, terrain.h
    eta = H + terrain.b
    wet = H > eps
    ww, we, ws, wn = _wet_neighbours(H, eps)
    ew, ee, es, en = _neighbours(eta)

    def grad(lo_ok, hi_ok, lo, hi):
        g = np.zeros_like(eta)
        both = lo_ok & hi_ok
        g = np.where(both, (hi - lo) / (2.0 * h), g)
        g = np.where(hi_ok & ~lo_ok, (hi - eta) / h, g)
        g = np.where(lo_ok & ~hi_ok, (eta - lo) / h, g)
        return g

    gx = grad(ww, we, ew, ee)
    gy = grad(ws, wn, es, en)
    fx = np.where(wet, -params.g * gx, 0.0)
    fy = np.where(wet, -params.g * gy, 0.0)
    return fx, fy


def surface_gradient_force(state: FlowState, terrain: Terrain, params: PhysicalParams, i: int, j: int):
    fx, fy = surface_gradient_field(state, terrain, params)
    return float(fx[j, i]), float(fy[j, i])


def viscous_field(state: FlowState, params: PhysicalParams, terrain: Terrain):
    """``nu * laplacian(U)`` per component; dry or missing neighbours mirror the centre."""
    eps, h = params.eps_dry, terrain.h
    u, v = state.velocities(eps)
    wet = state.H > eps
    masks = _wet_neighbours(state.H, eps)

    def lap(c):
        nb = [np.where(m, n, c) for m, n in zip(masks, _neighbours(c))]
        return ((nb[0] + nb[1]) + (nb[2] + nb[3]) - 4.0 * c) / (h * h)

    return (
        np.where(wet, params.viscosity * lap(u), 0.0),
        np.where(wet, params.viscosity * lap(v), 0.0),
    )


def viscous_force(state: FlowState, params: PhysicalParams, terrain: Terrain, i: int, j: int):
    fx, fy = viscous_field(state, params, terrain)
    return float(fx[j, i]), float(fy[j, i])


@dataclass
class ForceField:
    """Total specific force on wet cells plus the source terms.

    ``fx``, ``fy`` [m/s^2] include the exchange acceleration
    ``(sigma/H)(V - U)`` on wet cells. Dry cells carry zero force; water a
    source drops onto a dry cell brings momentum ``sigma * V`` which is kept
    in ``svx``, ``svy`` [m^2/s^2].
    """

    fx: np.ndarray
    fy: np.ndarray
    sigma: np.ndarray
    svx: np.ndarray
    svy: np.ndarray


def assemble_forces(
    state: FlowState,
    terrain: Terrain,
    params: PhysicalParams,
    wind: WindForcing | None = None,
    sources: Sequence = (),
    t: float | None = None,
    terms: Iterable[str] = FORCE_TERMS,
) -> ForceField:
    """Sum the selected force terms cell by cell (``terms`` subsets :data:`FORCE_TERMS`)."""
    terms = set(terms)
    unknown = terms - set(FORCE_TERMS)
    if unknown:
        raise ValueError(f"unknown force terms {sorted(unknown)}")
    t = state.t if t is None else t
    wind = wind or WindForcing()
    eps = params.eps_dry
    H = state.H
    wet = H > eps
    Hs = np.where(wet, H, 1.0)
    u, v = state.velocities(eps)
    fx = np.zeros_like(H)
    fy = np.zeros_like(H)

    def add(pair):
        fx[...] += np.where(wet, pair[0], 0.0)
        fy[...] += np.where(wet, pair[1], 0.0)

    if "gradient" in terms:
        add(surface_gradient_field(state, terrain, params))
    if "friction" in terms:
        add(bottom_friction((u, v), Hs, params, params.manning_field(H.shape)))
    if "viscous" in terms:
        add(viscous_field(state, params, terrain))
    if "coriolis" in terms:
        add(coriolis_force((u, v), params))
    if "wind" in terms:
        add(wind_force((u, v), Hs, wind, t, params))

    src = source_terms(sources, t, terrain) if sources else SourceField.empty(H.shape)
    if "exchange" in terms:
        add(((src.sigma / Hs) * (src.vx - u), (src.sigma / Hs) * (src.vy - v)))
    return ForceField(fx, fy, src.sigma, src.sigma * src.vx, src.sigma * src.vy)
