"""Seeded synthetic beds and initial states for the validation cases."""

from __future__ import annotations

import numpy as np

from ..forcing import Hydrograph, PointSource
from ..grid import FlowState, Terrain


def bumpy_bed(nx: int, ny: int | None = None, *, seed: int = 0, amplitude: float = 5.0,
              waves: int = 10, max_wavenumber: float = 6.0) -> np.ndarray:
    """Sum of ``waves`` random plane cosines, scaled to peak ``|b| = amplitude``.

    Wavenumbers are drawn up to ``max_wavenumber`` cycles per domain width,
    so the bed is smooth on the grid scale.
    """
    ny = nx if ny is None else ny
    rng = np.random.default_rng(seed)
    X, Y = np.meshgrid(np.arange(nx) + 0.5, np.arange(ny) + 0.5)
    b = np.zeros((ny, nx))
    n = max(nx, ny)
    for _ in range(waves):
        kx, ky = rng.uniform(-max_wavenumber, max_wavenumber, 2) * 2.0 * np.pi / n
        phase = rng.uniform(0.0, 2.0 * np.pi)
        b += np.cos(kx * X + ky * Y + phase)
    peak = np.abs(b).max()
    return amplitude * b / peak if peak > 0 else b


def gaussian(X, Y, x0, y0, width, height):
    return height * np.exp(-((X - x0) ** 2 + (Y - y0) ** 2) / width ** 2)


def lake_at_rest(n: int = 128, *, seed: int = 0, h: float = 10.0, level: float = 1.0):
    """Bumpy bed, partly emergent, with a flat still surface."""
    ter = Terrain(bumpy_bed(n, seed=seed), h)
    return ter, FlowState.still_water(ter, level)


def sloshing_basin(n: int = 256, *, seed: int = 0, h: float = 50.0, depth: float = 10.0,
                   tilt: float = 0.5):
    """Fully wet closed basin with a tilted initial surface."""
    ter = Terrain(bumpy_bed(n, seed=seed), h)
    x = (np.arange(n) + 0.5) / n - 0.5
    eta = depth + tilt * x[None, :] * np.ones((n, 1))
    H = np.maximum(eta - ter.b, 0.0)
    return ter, FlowState(H, np.zeros_like(H), np.zeros_like(H))


def smooth_bump(n: int, *, length: float = 1000.0, bed: bool = True):
    """Surface hump collapsing over a smooth bed bump; fully wet, smooth solution."""
    h = length / n
    x = (np.arange(n) + 0.5) * h
    X, Y = np.meshgrid(x, x)
    b = gaussian(X, Y, 0.6 * length, 0.45 * length, 0.15 * length, 0.3) if bed else 0.0 * X
    eta = 1.0 + gaussian(X, Y, 0.4 * length, 0.5 * length, 0.1 * length, 0.1)
    ter = Terrain(b, h)
    H = eta - b
    return ter, FlowState(H, np.zeros_like(H), np.zeros_like(H))


def dam_break_strip(n: int, *, length: float = 200.0, depth: float = 1.0):
    """One-row strip, dam at the centre, dry flat bed downstream."""
    h = length / n
    x = -0.5 * length + (np.arange(n) + 0.5) * h
    ter = Terrain(np.zeros((1, n)), h)
    H = np.where(x < 0.0, depth, 0.0)[None, :]
    return ter, FlowState(H, np.zeros_like(H), np.zeros_like(H)), x


def dry_bed_dam_break(n: int = 64, *, seed: int = 0, h: float = 10.0, depth: float = 5.0):
    """Reservoir behind a dam line at x = n/4, irregular dry bed beyond."""
    ter = Terrain(bumpy_bed(n, seed=seed, amplitude=1.0), h)
    H = np.zeros(ter.shape)
    H[:, : n // 4] = np.maximum(depth - ter.b[:, : n // 4], 0.0)
    return ter, FlowState(H, np.zeros_like(H), np.zeros_like(H))


def partial_flood(n: int = 256, *, seed: int = 1, h: float = 10.0):
    """Lake over a third of the domain, emergent land elsewhere, one inflow.

    Used for skip-equivalence and determinism: the wet front crosses block
    edges during the run.
    """
    ter = Terrain(bumpy_bed(n, seed=seed), h)
    st = FlowState.still_water(ter, -1.0)
    st.H[:, : n // 3] += 2.0
    src = [PointSource([(n // 2, n // 2)], Hydrograph.constant(50.0), velocity=(1.0, 0.5))]
    return ter, st, src


def valley(n: int = 1024, *, seed: int = 7, h: float = 50.0, wet_fraction: float = 0.35,
           discharge: float = 1.0e5):
    """Hilly plain flooded up to the level that wets ``wet_fraction`` of the cells.

    A large discharge enters at the lowest cell, so the water moves.
    """
    b = bumpy_bed(n, seed=seed, amplitude=10.0, max_wavenumber=3.0)
    ter = Terrain(b, h)
    level = float(np.quantile(b, wet_fraction))
    st = FlowState.still_water(ter, level)
    j, i = np.unravel_index(int(np.argmin(b)), b.shape)
    src = [PointSource([(int(i), int(j))], Hydrograph.constant(discharge))]
    return ter, st, src


def flood_channel(n: int = 64, *, h: float = 50.0, seed: int = 3):
    """Shallow water on a gentle bumpy plain with a high reservoir at the west edge.

    The released wave crosses the middle of the domain, where the nested
    window sits.
    """
    ter = Terrain(bumpy_bed(n, seed=seed, amplitude=2.0), h)
    st = FlowState.still_water(ter, 0.5)
    st.H[:, : n // 5] += 3.0
    return ter, st
