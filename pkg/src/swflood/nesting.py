"""Two-level zoom-in: fine windows embedded in the global grid.

A window covers ``ny x nx`` global cells starting at global cell
``(i0, j0)``. Its fine grid has ``r`` cells per global cell plus a ghost
band of ``ghost`` fine cells on every side. Each coupled step:

1. the global grid takes one step of size ``tau``;
2. every window subcycles to ``t + tau`` with its own timestep, with the
   ghost band refilled before each substep by interpolating the global
   state bilinearly in space and linearly in time;
3. unless in one-way mode, the global cells under each window are replaced
   by the r x r means of the fine cells.

Ghost depth comes from the interpolated free surface, using only wet global
cells, minus the interpolated bed. With reflux on (the default) the global
cells just outside a window are corrected so that the mass crossing the
window edge equals what the fine grid actually received. The coupled
system then conserves mass to round-off. Momentum is not corrected.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalAbort
from .forcing import Hydrograph, PointSource, RainSource
from .grid import Boundaries, FlowState, PhysicalParams, Terrain
from .stepper import StepReport, Stepper

BED_TOLERANCE = 0.5  # m, mean absolute deviation of restricted fine bed


class NestingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Window:
    """Rectangle of global cells ``i0 <= i < i0 + nx``, ``j0 <= j < j0 + ny``."""

    i0: int
    j0: int
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigError(f"window must cover at least one cell, got {self.nx}x{self.ny}")

    @property
    def slices(self) -> tuple[slice, slice]:
        return slice(self.j0, self.j0 + self.ny), slice(self.i0, self.i0 + self.nx)

    def check_inside(self, shape) -> None:
        ny, nx = shape
        if not (self.i0 >= 1 and self.j0 >= 1
                and self.i0 + self.nx <= nx - 1 and self.j0 + self.ny <= ny - 1):
            raise ConfigError(
                f"window {self} must lie strictly inside the {nx}x{ny} global grid")

    def separated_from(self, other: "Window") -> bool:
        # at least one global cell between them, so refluxed cells are global-only
        return (self.i0 + self.nx < other.i0 or other.i0 + other.nx < self.i0
                or self.j0 + self.ny < other.j0 or other.j0 + other.ny < self.j0)


class _Bilinear:
    """Precomputed bilinear stencil from global cells to fine cell centres."""

    def __init__(self, window: Window, r: int, ghost: int, shape):
        NY, NX = shape
        fy = window.ny * r + 2 * ghost
        fx = window.nx * r + 2 * ghost
        # fine centre positions in global index units (global centres at k + 0.5)
        xc = window.i0 + (np.arange(fx) - ghost + 0.5) / r - 0.5
        yc = window.j0 + (np.arange(fy) - ghost + 0.5) / r - 0.5
        x0 = np.floor(xc)
        y0 = np.floor(yc)
        wx = xc - x0
        wy = yc - y0
        ix0 = np.clip(x0.astype(int), 0, NX - 1)
        ix1 = np.clip(x0.astype(int) + 1, 0, NX - 1)
        iy0 = np.clip(y0.astype(int), 0, NY - 1)
        iy1 = np.clip(y0.astype(int) + 1, 0, NY - 1)
        WX, WY = np.meshgrid(wx, wy)
        self.wx, self.wy = WX, WY
        self.idx = [np.ix_(iy0, ix0), np.ix_(iy0, ix1), np.ix_(iy1, ix0), np.ix_(iy1, ix1)]
        self.w = [(1.0 - WX) * (1.0 - WY), WX * (1.0 - WY), (1.0 - WX) * WY, WX * WY]
        # nearest global cell, for piecewise-constant fields
        self.near = np.ix_(np.clip(np.floor(yc + 0.5).astype(int), 0, NY - 1),
                           np.clip(np.floor(xc + 0.5).astype(int), 0, NX - 1))

    def __call__(self, a: np.ndarray) -> np.ndarray:
        # lerp form: exact on constants
        a00, a01, a10, a11 = (a[ix] for ix in self.idx)
        lo = a00 + self.wx * (a01 - a00)
        hi = a10 + self.wx * (a11 - a10)
        return lo + self.wy * (hi - lo)

    def masked(self, a: np.ndarray, ok: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Weighted mean of ``a`` over the stencil cells where ``ok``; also the weight sum."""
        num = np.zeros(self.w[0].shape)
        den = np.zeros(self.w[0].shape)
        for w, ix in zip(self.w, self.idx):
            wk = np.where(ok[ix], w, 0.0)
            num = num + wk * a[ix]
            den = den + wk
        out = np.zeros_like(num)
        np.divide(num, den, out=out, where=den > 0)
        full = np.ones(num.shape, dtype=bool)
        for ix in self.idx:
            full &= ok[ix]
        out[full] = self(a)[full]
        return out, den


class NestedGrid:
    """A fine window: its terrain, flow state and interpolation stencil.

    ``fine_bed`` covers the window interior, shape ``(ny * r, nx * r)``;
    when omitted it is interpolated from the global bed and shifted per
    global cell so that its block means reproduce the global bed. The ghost
    band bed is always interpolated.
    """

    def __init__(self, parent: Terrain, window: Window, r: int, fine_bed=None, ghost: int = 2):
        if int(r) != r or r < 1:
            raise ConfigError(f"refinement factor must be a positive integer, got {r}")
        if ghost < 2:
            raise ConfigError("ghost band must be at least 2 fine cells wide")
        window.check_inside(parent.shape)
        self.window = window
        self.r = r = int(r)
        self.ghost = ghost
        self.parent_h = parent.h
        self.stencil = _Bilinear(window, r, ghost, parent.shape)

        b = self.stencil(parent.b)
        inner = self.interior
        # shift each r x r block so it restricts back to the global cell
        shift = parent.b[window.slices] - self.restrict_field(b[inner])
        b[inner] += np.repeat(np.repeat(shift, r, axis=0), r, axis=1)
        self._b_interp = b.copy()
        if fine_bed is not None:
            fine_bed = np.asarray(fine_bed, dtype=float)
            want = (window.ny * r, window.nx * r)
            if fine_bed.shape != want:
                raise ConfigError(f"fine bed has shape {fine_bed.shape}, expected {want}")
            b[inner] = fine_bed
        self.terrain = Terrain(b, parent.h / r)
        self.bed_deviation = float(np.abs(self.restrict_field(b[inner])
                                          - parent.b[window.slices]).mean())
        if self.bed_deviation > BED_TOLERANCE:
            warnings.warn(
                f"restricted fine bed differs from the global bed by {self.bed_deviation:.3f} m "
                f"on average over window {window}", NestingWarning, stacklevel=2)
        self.ghost_mask = np.ones(self.terrain.shape, dtype=bool)
        self.ghost_mask[inner] = False
        self.state = FlowState.dry(self.terrain)

    @property
    def interior(self) -> tuple[slice, slice]:
        g = self.ghost
        return (slice(g, g + self.window.ny * self.r), slice(g, g + self.window.nx * self.r))

    def restrict_field(self, a: np.ndarray) -> np.ndarray:
        r = self.r
        ny, nx = a.shape[0] // r, a.shape[1] // r
        return a.reshape(ny, r, nx, r).mean(axis=(1, 3))

    def prolong(self, gstate: FlowState, parent: Terrain, eps_dry: float):
        """Fine ``(H, HU, HV)`` interpolated from the global state over the whole fine grid."""
        st = self.stencil
        wet = gstate.H > eps_dry
        Hw, den = st.masked(gstate.H, wet)
        bw, _ = st.masked(parent.b, wet)
        H = Hw + (bw - self.terrain.b)
        H = np.where(den > 0, np.maximum(H, 0.0), 0.0)
        HU = st(gstate.HU)
        HV = st(gstate.HV)
        dry = H <= eps_dry
        HU[dry] = 0.0
        HV[dry] = 0.0
        return H, HU, HV

    def init_from(self, gstate: FlowState, parent: Terrain, eps_dry: float = 1.0e-6) -> FlowState:
        H, HU, HV = self.prolong(gstate, parent, eps_dry)
        self.state = FlowState(H, HU, HV, gstate.t)
        return self.state

    def volume(self) -> float:
        H = self.state.H[self.interior]
        return math.fsum(H.ravel().tolist()) * self.terrain.h ** 2

    def map_sources(self, sources) -> list:
        """Global sources restricted to this window, on fine cells."""
        w, r, g = self.window, self.r, self.ghost
        out = []
        for src in sources:
            c = src.cells
            inside = ((c[:, 0] >= w.i0) & (c[:, 0] < w.i0 + w.nx)
                      & (c[:, 1] >= w.j0) & (c[:, 1] < w.j0 + w.ny))
            k = int(inside.sum())
            if k == 0:
                continue
            a, bb = np.meshgrid(np.arange(r), np.arange(r))
            fi = (g + (c[inside, 0] - w.i0)[:, None] * r + a.ravel()[None, :]).ravel()
            fj = (g + (c[inside, 1] - w.j0)[:, None] * r + bb.ravel()[None, :]).ravel()
            cells = np.column_stack([fi, fj])
            if isinstance(src, PointSource):
                q = src.discharge
                if k < len(c):
                    q = Hydrograph(q.times, q.values * (k / len(c)))
                out.append(PointSource(cells, q, src.velocity))
            elif isinstance(src, RainSource):
                out.append(RainSource(cells, src.rate, src.velocity))
            else:
                raise ConfigError(f"cannot map source of type {type(src).__name__}")
        return out


def prolong_boundary(gstate: FlowState, parent: Terrain, nested: NestedGrid,
                     eps_dry: float = 1.0e-6):
    """Ghost-band values ``(H, HU, HV)`` from the global state, as flat arrays."""
    H, HU, HV = nested.prolong(gstate, parent, eps_dry)
    m = nested.ghost_mask
    return H[m], HU[m], HV[m]


def restrict_feedback(nested: NestedGrid, gstate: FlowState, eps_dry: float = 1.0e-6) -> None:
    """Overwrite the global cells under the window with r x r fine means."""
    inner = nested.interior
    sl = nested.window.slices
    H = nested.restrict_field(nested.state.H[inner])
    gstate.H[sl] = H
    gstate.HU[sl] = nested.restrict_field(nested.state.HU[inner])
    gstate.HV[sl] = nested.restrict_field(nested.state.HV[inner])
    dry = H <= eps_dry
    gstate.HU[sl][dry] = 0.0
    gstate.HV[sl][dry] = 0.0


def _edge_mass(qx, qy, w: Window, r: int, g: int):
    """Per global edge face mass flux rates summed over the fine faces [m^2/s per fine h].

    Returns west, east (length ny) and south, north (length nx) arrays.
    """
    rows = slice(g, g + w.ny * r)
    cols = slice(g, g + w.nx * r)
    west = qx[rows, g].reshape(w.ny, r).sum(axis=1)
    east = qx[rows, g + w.nx * r].reshape(w.ny, r).sum(axis=1)
    south = qy[g, cols].reshape(w.nx, r).sum(axis=1)
    north = qy[g + w.ny * r, cols].reshape(w.nx, r).sum(axis=1)
    return west, east, south, north


@dataclass
class CoupledReport:
    tau: float
    global_report: StepReport
    substeps: list = field(default_factory=list)
    reflux_volume: float = 0.0
    reflux_loss: float = 0.0
    fine_clamp_volume: float = 0.0
    fine_source_volume: float = 0.0


class NestedModel:
    """Global stepper plus fine windows, advanced by :meth:`step`.

    Fine steppers copy the global stepper's settings, with open edges and
    the edge-ring forces switched off. Windows are advanced one after the
    other.
    """

    def __init__(self, stepper: Stepper, nests, *, one_way: bool = False, reflux: bool = True,
                 max_substeps: int = 10_000):
        self.stepper = stepper
        self.nests = list(nests)
        self.one_way = one_way
        self.reflux = reflux
        self.max_substeps = max_substeps
        for a in range(len(self.nests)):
            for c in range(a + 1, len(self.nests)):
                if not self.nests[a].window.separated_from(self.nests[c].window):
                    raise ConfigError("nested windows must not overlap or touch")
        p = stepper.params
        self.fine = []
        for n in self.nests:
            fp = p
            if np.ndim(p.manning) == 2:
                fp = PhysicalParams(**{**p.__dict__, "manning": np.asarray(p.manning)[n.stencil.near]})
            self.fine.append(Stepper(
                n.terrain, fp, boundaries=Boundaries.all("open"), control=stepper.control,
                wind=stepper.wind, sources=n.map_sources(stepper.sources),
                block_size=stepper.B, skip=stepper.skip, workers=stepper.workers,
                backend=stepper.backend_name, edge_forces=False))

    @property
    def eps(self) -> float:
        return self.stepper.params.eps_dry

    def initialize(self, gstate: FlowState) -> None:
        """Fill every fine grid from the global state."""
        for n in self.nests:
            n.init_from(gstate, self.stepper.terrain, self.eps)

    def system_volume(self, gstate: FlowState) -> float:
        """Global volume outside the windows plus fine volume inside them."""
        H = gstate.H.copy()
        for n in self.nests:
            H[n.window.slices] = 0.0
        h = self.stepper.terrain.h
        return math.fsum(H.ravel().tolist()) * h * h + math.fsum(n.volume() for n in self.nests)

    def step(self, gstate: FlowState, dt_cap: float | None = None) -> CoupledReport:
        parent = self.stepper.terrain
        eps = self.eps
        t0 = gstate.t
        old = [prolong_boundary(gstate, parent, n, eps) for n in self.nests]
        grep = self.stepper.step(gstate, dt_cap)
        tau = grep.tau
        t1 = gstate.t
        qx_c, qy_c = self.stepper.flux.qx, self.stepper.flux.qy
        report = CoupledReport(tau, grep)

        for n, fs, (Ha, Ua, Va) in zip(self.nests, self.fine, old):
            Hb, Ub, Vb = prolong_boundary(gstate, parent, n, eps)
            st = n.state
            if st.t != t0:
                raise NumericalAbort(f"fine grid at t={st.t} out of step with global t={t0}")
            w, r, g = n.window, n.r, n.ghost
            moved = [np.zeros(w.ny), np.zeros(w.ny), np.zeros(w.nx), np.zeros(w.nx)]
            m = n.ghost_mask
            k = 0
            done = 0.0
            while done < tau:
                if k >= self.max_substeps:
                    raise NumericalAbort(f"window {w} needed more than {self.max_substeps} substeps")
                th = done / tau
                H = (1.0 - th) * Ha + th * Hb
                dry = H <= eps
                st.H[m] = H
                st.HU[m] = np.where(dry, 0.0, (1.0 - th) * Ua + th * Ub)
                st.HV[m] = np.where(dry, 0.0, (1.0 - th) * Va + th * Vb)
                left = tau - done
                frep = fs.step(st, dt_cap=left)
                done = tau if frep.tau == left else done + frep.tau
                report.fine_clamp_volume += frep.clamp_volume
                report.fine_source_volume += frep.source_volume
                for acc, q in zip(moved, _edge_mass(fs.flux.qx, fs.flux.qy, w, r, g)):
                    acc += frep.tau * q
                k += 1
            st.t = t1
            report.substeps.append(k)

            if self.one_way:
                continue
            restrict_feedback(n, gstate, eps)
            if self.reflux:
                vol, lost = self._reflux(gstate, n, moved, qx_c, qy_c, tau)
                report.reflux_volume += vol
                report.reflux_loss += lost
        return report

    def _reflux(self, gstate, n: NestedGrid, moved, qx_c, qy_c, tau):
        """Correct the global cells bordering the window.

        Returns the volume moved into them and any volume that could not be
        recovered from the fine grid.

        A bordering cell the fine grid drained below zero is refilled from
        the fine cells of its window neighbour, so no water is created.
        """
        w = n.window
        hc = self.stepper.terrain.h
        hf = n.terrain.h
        rows = np.arange(w.j0, w.j0 + w.ny)
        cols = np.arange(w.i0, w.i0 + w.nx)
        west, east, south, north = (hf * a for a in moved)
        # positive flux points toward +x / +y; depth changes of the outside cells
        d = np.concatenate([
            (tau * hc * qx_c[rows, w.i0] - west) / hc ** 2,
            (east - tau * hc * qx_c[rows, w.i0 + w.nx]) / hc ** 2,
            (tau * hc * qy_c[w.j0, cols] - south) / hc ** 2,
            (north - tau * hc * qy_c[w.j0 + w.ny, cols]) / hc ** 2,
        ])
        one = np.ones(w.ny, dtype=int)
        two = np.ones(w.nx, dtype=int)
        oj = np.concatenate([rows, rows, (w.j0 - 1) * two, (w.j0 + w.ny) * two])
        oi = np.concatenate([(w.i0 - 1) * one, (w.i0 + w.nx) * one, cols, cols])
        ij = np.concatenate([rows, rows, w.j0 * two, (w.j0 + w.ny - 1) * two])
        ii = np.concatenate([w.i0 * one, (w.i0 + w.nx - 1) * one, cols, cols])

        H = gstate.H
        new = H[oj, oi] + d
        short = np.minimum(new, 0.0)
        H[oj, oi] = new - short
        lost = 0.0
        if short.any():
            f = n.state
            g, r = n.ghost, n.r
            for k in np.flatnonzero(short):
                fj = slice(g + (ij[k] - w.j0) * r, g + (ij[k] - w.j0 + 1) * r)
                fi = slice(g + (ii[k] - w.i0) * r, g + (ii[k] - w.i0 + 1) * r)
                have = float(f.H[fj, fi].sum()) * hf * hf
                need = -float(short[k]) * hc * hc
                keep = max(0.0, 1.0 - need / have) if have > 0 else 0.0
                lost += max(0.0, need - have)
                f.H[fj, fi] *= keep
                f.HU[fj, fi] *= keep
                f.HV[fj, fi] *= keep
            f.sanitize(self.eps)
            restrict_feedback(n, gstate, self.eps)
        gstate.sanitize(self.eps)
        return float((d - short).sum()) * hc * hc, lost

    def run(self, gstate: FlowState, duration: float, max_steps: int | None = None,
            callback=None) -> int:
        t_end = gstate.t + duration
        n = 0
        while gstate.t < t_end and (max_steps is None or n < max_steps):
            left = t_end - gstate.t
            rep = self.step(gstate, dt_cap=left)
            if rep.tau == left:
                gstate.t = t_end
                for nest in self.nests:
                    nest.state.t = t_end
            n += 1
            if callback is not None:
                callback(gstate, rep)
        return n


def coupled_step(model: NestedModel, gstate: FlowState, dt_cap: float | None = None) -> CoupledReport:
    """One global step with subcycled windows and feedback."""
    return model.step(gstate, dt_cap)
