"""Time integration: one step is the sequence of stage kernels K1..K8.

K1  block activity mask
K2  explicit accelerations at t_n (surface slope, viscosity, Coriolis, wind)
K3  timestep from the wave speed and the force-limited particle speed
K4  Lagrangian predictor: half-step particle depth and velocity
K5  accelerations on the half-step particles
K6  Lagrangian corrector: provisional depth and momentum at t_n+1
K7  Euler stage: HLL fluxes through cell faces from the shifted,
    van Leer limited particle reconstruction (hydrostatic at bed steps)
K8  final update, positivity clamp, scratch reset

Bed friction is integrated with the semi-implicit factor
``U / (1 + (lambda/2) |U| tau)`` inside K4 and K6. The source exchange
``(sigma/H)(V - U)`` is applied in conservative form, ``d(HU) = sigma V dt``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import backend as _backend
from .blocks import DEFAULT_BLOCK, BlockMask, active_fraction, compute_block_mask
from .errors import NumericalAbort
from .forcing import SourceAssembler, WindForcing
from .grid import Boundaries, FlowState, PhysicalParams, Terrain

STAGES = ("mask", "forces", "dt", "predictor", "forces_half", "corrector", "flux", "final")
KERNEL_IDS = dict(zip(STAGES, ("K1", "K2", "K3", "K4", "K5", "K6", "K7", "K8")))


@dataclass
class TimestepControl:
    courant: float = 0.5
    dt_max: float = 60.0
    dt_min: float = 1.0e-8

    def __post_init__(self):
        if not 0.0 < self.courant < 1.0:
            raise ValueError(f"Courant number must lie in (0, 1), got {self.courant}")
        if not 0.0 < self.dt_min < self.dt_max:
            raise ValueError("need 0 < dt_min < dt_max")


@dataclass
class StageTimings:
    """Accumulated wall-clock seconds per stage."""

    seconds: dict = field(default_factory=lambda: dict.fromkeys(STAGES, 0.0))
    steps: int = 0

    def add(self, other: "StageTimings") -> None:
        for k, v in other.seconds.items():
            self.seconds[k] += v
        self.steps += other.steps

    @property
    def total(self) -> float:
        return sum(self.seconds.values())

    def shares(self) -> dict:
        tot = self.total or 1.0
        return {k: v / tot for k, v in self.seconds.items()}

    def table(self) -> str:
        sh = self.shares()
        lines = [f"{'stage':<12} {'kernel':<6} {'seconds':>10} {'share':>7}"]
        for k in STAGES:
            lines.append(f"{k:<12} {KERNEL_IDS[k]:<6} {self.seconds[k]:>10.4f} {100 * sh[k]:>6.1f}%")
        return "\n".join(lines)


@dataclass
class LagrangianScratch:
    """Views of the Lagrangian-stage work arrays."""

    h_half: np.ndarray
    u_half: np.ndarray
    v_half: np.ndarray
    ht: np.ndarray
    hut: np.ndarray
    hvt: np.ndarray
    tau: float = 0.0

    @property
    def displacement(self) -> tuple[np.ndarray, np.ndarray]:
        """Full-step particle displacement ``tau * U^(n+1/2)`` [m]."""
        return self.tau * self.u_half, self.tau * self.v_half


@dataclass
class FluxField:
    """Per-cell net face fluxes and the per-face mass fluxes.

    ``fh`` [m^2/s] and ``fu``, ``fv`` [m^3/s^2] are sums over the four faces
    (inflow positive), so the update is ``H += (tau / h) * fh``. ``qx`` has
    shape ``(ny, nx + 1)`` and ``qy`` ``(ny + 1, nx)``; positive values flow
    toward +x / +y.
    """

    fh: np.ndarray
    fu: np.ndarray
    fv: np.ndarray
    qx: np.ndarray
    qy: np.ndarray


@dataclass
class StepReport:
    tau: float
    timings: StageTimings
    active_fraction: float
    blocks_total: int
    blocks_lagrangian: int
    blocks_flux: int
    source_volume: float
    outflow_volume: float
    clamp_volume: float
    max_displacement: float


class Stepper:
    """Advance a :class:`FlowState` over a fixed terrain.

    ``skip=False`` runs every stage on every block; results are bitwise equal
    to the skipping run. ``workers`` sets the compiled backend's thread
    count and never changes results.

    ``edge_forces=False`` zeroes the K2 accelerations on the outermost cell
    ring. Nested grids use it: their edge ring is overwritten from the
    parent grid every step, and its one-sided slope would otherwise pull
    the timestep below the parent's.
    """

    def __init__(self, terrain: Terrain, params: PhysicalParams | None = None, *,
                 boundaries: Boundaries | None = None, control: TimestepControl | None = None,
                 wind: WindForcing | None = None, sources: Sequence = (),
                 block_size: int = DEFAULT_BLOCK, skip: bool = True, workers: int = 1,
                 backend: str | None = None, edge_forces: bool = True):
        self.terrain = terrain
        self.params = params or PhysicalParams()
        self.boundaries = boundaries or Boundaries()
        self.control = control or TimestepControl()
        self.wind = wind or WindForcing()
        self.sources = list(sources)
        self._asm = SourceAssembler(self.sources, terrain)
        if block_size < 1:
            raise ValueError("block size must be positive")
        if workers < 1:
            raise ValueError("worker count must be at least 1")
        self.B = int(block_size)
        self.skip = skip
        self.workers = int(workers)
        self.edge_forces = edge_forces
        self.kern = _backend.kernels(backend)

        shape = terrain.shape
        ny, nx = shape
        p = self.params
        self._b = np.ascontiguousarray(terrain.b)
        self._gn2 = np.ascontiguousarray(p.g * p.manning_field(shape) ** 2)
        self._bc = self.boundaries.codes()
        z = lambda s=shape: np.zeros(s)  # noqa: E731
        self.ax, self.ay = z(), z()
        # per-step caches written by K2: velocity and H^(4/3) of wet cells
        self.u0, self.v0, self.h43 = z(), z(), z()
        self.scratch = LagrangianScratch(z(), z(), z(), z(), z(), z())
        self.flux = FluxField(z(), z(), z(), z((ny, nx + 1)), z((ny + 1, nx)))
        self._src_n = self._asm.new_field()
        self._src_half = self._asm.new_field()
        self._iq = np.zeros(shape, dtype=np.int32)
        self.mask: BlockMask | None = None
        self._lag = np.zeros((0, 2), dtype=np.int32)
        self._flx = np.zeros((0, 2), dtype=np.int32)
        self._deficit = None
        self._last_drmax = 0.0
        self._last_short = 0.0

    # -- helpers -----------------------------------------------------------

    @property
    def backend_name(self) -> str:
        return self.kern.NAME


    def _wind_coeff(self) -> float:
        p = self.params
        return p.wind_drag * p.rho_air / p.rho_water

    # -- stages ------------------------------------------------------------

    def update_mask(self, state: FlowState) -> BlockMask:
        """K1. Source cells active within the coming step count as wet."""
        shape = self.terrain.shape
        if self.skip:
            iq = self._asm.activity(state.t, state.t + self.control.dt_max, self._iq)
            self.mask = compute_block_mask(state.H, iq, self.B, self.params.eps_dry, self.kern)
        else:
            self.mask = BlockMask.full(shape, self.B)
        self._lag = self.mask.lagrangian_blocks()
        self._flx = self.mask.flux_blocks()
        return self.mask

    def forces(self, state: FlowState) -> tuple[np.ndarray, np.ndarray]:
        """K2: explicit accelerations at ``state.t`` on wet cells."""
        p = self.params
        self._asm.fill(self._src_n, state.t)
        wx, wy = self.wind.at(state.t)
        self.kern.forces_predictor(self._lag, self.B, state.H, state.HU, state.HV, self._b,
                                   self.ax, self.ay, self.u0, self.v0, self.h43, self.terrain.h, p.g, p.eps_dry, p.viscosity,
                                   2.0 * p.omega_z, self._wind_coeff(), wx, wy, self.workers)
        if not self.edge_forces:
            for a in (self.ax, self.ay):
                a[0, :] = a[-1, :] = 0.0
                a[:, 0] = a[:, -1] = 0.0
        return self.ax, self.ay

    def compute_dt(self, state: FlowState, dt_cap: float | None = None) -> float:
        """K3: ``tau = min(dt_max, K h / max(U_p, U_s))`` over wet cells."""
        p, ctl, h = self.params, self.control, self.terrain.h
        n = len(self._lag)
        smax = np.zeros(n)
        tsrc = np.full(n, np.inf)
        s = self._src_n
        self.kern.dt_reduce(self._lag, self.B, state.H, self.u0, self.v0, self.ax, self.ay,
                            s.sigma, s.vx, s.vy, h, p.g, p.eps_dry, ctl.courant, smax, tsrc,
                            self.workers)
        tau = ctl.dt_max
        speed = float(smax.max()) if n else 0.0
        if not np.isfinite(speed):
            raise NumericalAbort(f"non-finite signal speed at t={state.t:.6g} s")
        if speed > 0.0:
            tau = min(tau, ctl.courant * h / speed)
        if n:
            tau = min(tau, float(tsrc.min()))
        if p.viscosity > 0.0:
            tau = min(tau, ctl.courant * h * h / (2.0 * p.viscosity))
        if dt_cap is not None:
            tau = min(tau, dt_cap)
        if not np.isfinite(tau) or tau < ctl.dt_min:
            raise NumericalAbort(
                f"timestep {tau:.3e} s below floor {ctl.dt_min:.3e} s at t={state.t:.6g} s "
                f"(max signal speed {speed:.3e} m/s)")
        return float(tau)

    def lagrangian_predictor(self, state: FlowState, tau: float) -> LagrangianScratch:
        """K4: particle depth/velocity at ``t + tau/2``."""
        p, sc, s = self.params, self.scratch, self._src_n
        self.kern.sph_predictor(self._lag, self.B, state.H, self.u0, self.v0, self.h43,
                                self.ax, self.ay,
                                s.sigma, s.vx, s.vy, self._gn2, sc.h_half, sc.u_half, sc.v_half,
                                self.terrain.h, p.eps_dry, tau, self.workers)
        sc.tau = tau
        return sc

    def forces_half(self, state: FlowState, tau: float) -> tuple[np.ndarray, np.ndarray]:
        """K5: accelerations on the half-step particles (no surface slope term)."""
        p, sc = self.params, self.scratch
        t_half = state.t + 0.5 * tau
        self._asm.fill(self._src_half, t_half)
        wx, wy = self.wind.at(t_half)
        self.kern.forces_corrector(self._lag, self.B, sc.h_half, sc.u_half, sc.v_half,
                                   self.ax, self.ay, self.terrain.h, p.eps_dry, p.viscosity,
                                   2.0 * p.omega_z, self._wind_coeff(), wx, wy, self.workers)
        return self.ax, self.ay

    def lagrangian_corrector(self, state: FlowState, tau: float) -> LagrangianScratch:
        """K6: provisional ``Ht``, ``HVt`` at ``t + tau``; aborts if a particle leaves its cell."""
        p, sc, s = self.params, self.scratch, self._src_half
        n = len(self._lag)
        short = np.zeros(n)
        drmax = np.zeros(n)
        self.kern.sph_corrector(self._lag, self.B, state.H, state.HU, state.HV,
                                sc.h_half, sc.u_half, sc.v_half, self.ax, self.ay,
                                s.sigma, s.vx, s.vy, self._gn2, self.h43, sc.ht, sc.hut, sc.hvt,
                                self.terrain.h, p.eps_dry, tau, short, drmax, self.workers)
        self._last_short = float(short.sum()) * self.terrain.h ** 2
        self._last_drmax = float(drmax.max()) if n else 0.0
        if self._last_drmax >= 0.5:
            raise NumericalAbort(
                f"particle displacement {self._last_drmax:.3f} h >= h/2 at t={state.t:.6g} s; "
                f"Courant number {self.control.courant} too large")
        return sc

    def tvd_flux(self, state: FlowState, tau: float) -> FluxField:
        """K7: face fluxes on interior- and halo-wet blocks."""
        p, sc, fl = self.params, self.scratch, self.flux
        fl.qx.fill(0.0)
        fl.qy.fill(0.0)
        try:
            self.kern.tvd_flux(self._flx, self.B, state.H, state.HU, state.HV, self._b,
                               sc.h_half, sc.u_half, sc.v_half, fl.fh, fl.fu, fl.fv, fl.qx, fl.qy,
                               self._bc, self.terrain.h, p.g, p.eps_dry, tau, self.workers)
        except FloatingPointError as exc:
            raise NumericalAbort(f"{exc} at t={state.t:.6g} s") from exc
        return fl

    def final_update(self, state: FlowState, tau: float) -> FlowState:
        """K8: ``H = Ht + (tau/h) Fh`` clamped at zero; resets every scratch array."""
        p, sc, fl = self.params, self.scratch, self.flux
        mask = self.mask
        self._deficit = np.zeros(mask.shape)
        self.kern.final_update(self.B, mask.interior, mask.halo, state.H, state.HU, state.HV,
                               sc.ht, sc.hut, sc.hvt, fl.fh, fl.fu, fl.fv,
                               self.ax, self.ay, sc.h_half, sc.u_half, sc.v_half,
                               self.terrain.h, p.eps_dry, tau, self._deficit, self.workers)
        state.t = state.t + tau
        return state

    # -- driver ------------------------------------------------------------

    def step(self, state: FlowState, dt_cap: float | None = None) -> StepReport:
        """Advance ``state`` in place by one adaptive step."""
        tm = StageTimings(steps=1)
        sec = tm.seconds
        clock = time.perf_counter

        t0 = clock()
        self.update_mask(state)
        t1 = clock(); sec["mask"] = t1 - t0
        self.forces(state)
        t0 = clock(); sec["forces"] = t0 - t1
        tau = self.compute_dt(state, dt_cap)
        t1 = clock(); sec["dt"] = t1 - t0
        self.lagrangian_predictor(state, tau)
        t0 = clock(); sec["predictor"] = t0 - t1
        self.forces_half(state, tau)
        t1 = clock(); sec["forces_half"] = t1 - t0
        self.lagrangian_corrector(state, tau)
        t0 = clock(); sec["corrector"] = t0 - t1
        self.tvd_flux(state, tau)
        t1 = clock(); sec["flux"] = t1 - t0
        h = self.terrain.h
        qx, qy = self.flux.qx, self.flux.qy
        outflow = tau * h * (float(qx[:, -1].sum()) - float(qx[:, 0].sum())
                             + float(qy[-1, :].sum()) - float(qy[0, :].sum()))
        src_vol = tau * h * h * float(self._src_half.sigma.sum())
        self.final_update(state, tau)
        sec["final"] = clock() - t1

        mask = self.mask
        return StepReport(
            tau=tau,
            timings=tm,
            active_fraction=active_fraction(mask),
            blocks_total=mask.interior.size,
            blocks_lagrangian=len(self._lag),
            blocks_flux=len(self._flx),
            source_volume=src_vol - self._last_short,
            outflow_volume=outflow,
            clamp_volume=float(self._deficit.sum()) * h * h,
            max_displacement=self._last_drmax,
        )

    def run(self, state: FlowState, duration: float, max_steps: int | None = None,
            callback=None) -> StageTimings:
        """Step until ``state.t`` reaches ``t_start + duration`` exactly."""
        t_end = state.t + duration
        total = StageTimings(steps=0)
        n = 0
        while state.t < t_end and (max_steps is None or n < max_steps):
            left = t_end - state.t
            rep = self.step(state, dt_cap=left)
            if rep.tau == left:
                state.t = t_end
            total.add(rep.timings)
            n += 1
            if callback is not None:
                callback(state, rep)
        return total
