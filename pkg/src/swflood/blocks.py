"""Wet-block activity masks and block-level dispatch.

The grid is tiled by ``B x B`` blocks (the last row/column of blocks may be
partial). A block is *interior-wet* when one of its own cells holds water
or a source, and *halo-wet* when a face-neighbour across its edge does.
Lagrangian stages run on interior-wet blocks only; flux and final-update
stages also run on halo-wet blocks, since water crosses at most one cell
face per step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import backend as _backend

STAGE_KINDS = ("lagrangian", "flux", "final")
DEFAULT_BLOCK = 16


@dataclass
class BlockMask:
    """Per-block counts of wet interior cells and wet-halo edge cells."""

    B: int
    interior: np.ndarray
    halo: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.interior.shape

    @classmethod
    def full(cls, shape, B: int) -> "BlockMask":
        """Mask with every block flagged, used when skipping is disabled."""
        nby, nbx = -(-shape[0] // B), -(-shape[1] // B)
        ones = np.ones((nby, nbx), dtype=np.int32)
        return cls(B, ones, ones.copy())

    def lagrangian_blocks(self) -> np.ndarray:
        return np.ascontiguousarray(np.argwhere(self.interior > 0), dtype=np.int32)

    def flux_blocks(self) -> np.ndarray:
        return np.ascontiguousarray(np.argwhere((self.interior > 0) | (self.halo > 0)), dtype=np.int32)

    def blocks_for(self, stage_kind: str) -> np.ndarray:
        if stage_kind == "lagrangian":
            return self.lagrangian_blocks()
        if stage_kind in ("flux", "final"):
            return self.flux_blocks()
        raise ValueError(f"unknown stage kind {stage_kind!r}")


def compute_block_mask(H: np.ndarray, index_q: np.ndarray | None, B: int = DEFAULT_BLOCK,
                       eps_dry: float = 1.0e-6, kernels=None) -> BlockMask:
    if B < 1:
        raise ValueError("block size must be positive")
    kernels = kernels or _backend.kernels()
    ny, nx = H.shape
    nby, nbx = -(-ny // B), -(-nx // B)
    interior = np.zeros((nby, nbx), dtype=np.int32)
    halo = np.zeros((nby, nbx), dtype=np.int32)
    if index_q is None:
        index_q = np.zeros(H.shape, dtype=np.int32)
    kernels.block_mask(np.ascontiguousarray(H), np.ascontiguousarray(index_q, dtype=np.int32),
                       float(eps_dry), int(B), interior, halo)
    return BlockMask(B, interior, halo)


def for_each_active_block(mask: BlockMask, stage_kind: str, body: Callable[[int, int], None],
                          clear: Callable[[int, int], None] | None = None) -> int:
    """Call ``body(block_row, block_col)`` on every block the stage must process.

    For the final stage, ``clear`` runs on the skipped blocks. Returns the
    number of ``body`` calls.
    """
    if stage_kind not in STAGE_KINDS:
        raise ValueError(f"unknown stage kind {stage_kind!r}")
    active = mask.blocks_for(stage_kind)
    for bj, bi in active:
        body(int(bj), int(bi))
    if stage_kind == "final" and clear is not None:
        on = np.zeros(mask.shape, dtype=bool)
        on[tuple(active.T)] = True
        for bj, bi in np.argwhere(~on):
            clear(int(bj), int(bi))
    return len(active)


def active_fraction(mask: BlockMask) -> float:
    total = mask.interior.size
    return float(np.count_nonzero((mask.interior > 0) | (mask.halo > 0))) / total


def block_slices(B: int, bj: int, bi: int, shape) -> tuple[slice, slice]:
    return slice(bj * B, min((bj + 1) * B, shape[0])), slice(bi * B, min((bi + 1) * B, shape[1]))
