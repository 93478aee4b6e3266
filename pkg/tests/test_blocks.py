import numpy as np
import pytest

from swflood import backend
from swflood.blocks import BlockMask, active_fraction, block_slices, compute_block_mask, for_each_active_block


def mask_of(H, B=4, iq=None, kern=None):
    return compute_block_mask(H, iq, B, 1e-6, kern)


class TestComputeMask:
    def test_all_dry(self, backend_name):
        m = mask_of(np.zeros((12, 12)), kern=backend.kernels(backend_name))
        assert not m.interior.any() and not m.halo.any()

    def test_wet_cell_strictly_inside(self, backend_name):
        H = np.zeros((12, 12))
        H[5, 5] = 1.0  # block (1, 1), not on its edge
        m = mask_of(H, kern=backend.kernels(backend_name))
        assert m.interior[1, 1] > 0 and m.interior.sum() == m.interior[1, 1]
        assert not m.halo.any()

    def test_wet_cell_on_shared_edge(self, backend_name):
        H = np.zeros((12, 12))
        H[5, 7] = 1.0  # east column of block (1, 1)
        m = mask_of(H, kern=backend.kernels(backend_name))
        assert m.interior[1, 1] > 0
        assert m.halo[1, 2] > 0
        assert m.halo[1, 0] == 0 and m.halo[0, 1] == 0 and m.halo[2, 1] == 0

    def test_corner_cell_flags_face_neighbours_only(self, backend_name):
        H = np.zeros((12, 12))
        H[7, 7] = 1.0  # north-east corner of block (1, 1)
        m = mask_of(H, kern=backend.kernels(backend_name))
        assert m.halo[1, 2] > 0 and m.halo[2, 1] > 0
        assert m.halo[2, 2] == 0

    def test_source_marker(self, backend_name):
        iq = np.zeros((8, 8), dtype=np.int32)
        iq[0, 0] = 1
        m = mask_of(np.zeros((8, 8)), iq=iq, kern=backend.kernels(backend_name))
        assert m.interior[0, 0] > 0

    def test_partial_blocks(self, backend_name):
        H = np.zeros((10, 9))
        H[9, 8] = 1.0
        m = mask_of(H, kern=backend.kernels(backend_name))
        assert m.shape == (3, 3)
        assert m.interior[2, 2] > 0
        # one-column block: its only column is also its west edge
        assert m.halo[2, 1] > 0 and m.halo[1, 2] == 0

    def test_threshold(self, backend_name):
        H = np.full((4, 4), 1e-6)
        assert not mask_of(H, kern=backend.kernels(backend_name)).interior.any()

    def test_backends_agree(self, rng):
        if len(backend.available()) < 2:
            pytest.skip("one backend only")
        H = np.where(rng.random((37, 29)) < 0.05, 1.0, 0.0)
        iq = (rng.random((37, 29)) < 0.01).astype(np.int32)
        a = mask_of(H, 8, iq, backend.kernels("cython"))
        b = mask_of(H, 8, iq, backend.kernels("numpy"))
        assert np.array_equal(a.interior, b.interior) and np.array_equal(a.halo, b.halo)

    def test_bad_block_size(self):
        with pytest.raises(ValueError):
            compute_block_mask(np.zeros((4, 4)), None, 0)


class TestDispatch:
    def test_empty_mask(self):
        m = BlockMask(4, np.zeros((2, 2), np.int32), np.zeros((2, 2), np.int32))
        calls, cleared = [], []
        n = for_each_active_block(m, "final", lambda j, i: calls.append((j, i)), lambda j, i: cleared.append((j, i)))
        assert n == 0 and not calls
        assert sorted(cleared) == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_one_lagrangian_block(self):
        m = BlockMask(4, np.array([[0, 3], [0, 0]], np.int32), np.array([[1, 0], [0, 1]], np.int32))
        calls = []
        assert for_each_active_block(m, "lagrangian", lambda j, i: calls.append((j, i))) == 1
        assert calls == [(0, 1)]

    def test_flux_includes_halo(self):
        m = BlockMask(4, np.array([[0, 3], [0, 0]], np.int32), np.array([[1, 0], [0, 0]], np.int32))
        calls = []
        for_each_active_block(m, "flux", lambda j, i: calls.append((j, i)))
        assert sorted(calls) == [(0, 0), (0, 1)]

    def test_unknown_stage(self):
        with pytest.raises(ValueError):
            for_each_active_block(BlockMask.full((4, 4), 4), "euler", lambda j, i: None)


class TestActiveFraction:
    def test_all_dry(self):
        assert active_fraction(mask_of(np.zeros((8, 8)))) == 0.0

    def test_all_wet(self):
        assert active_fraction(mask_of(np.ones((8, 8)))) == 1.0

    def test_half(self):
        m = BlockMask(4, np.array([[1, 0], [2, 0]], np.int32), np.zeros((2, 2), np.int32))
        assert active_fraction(m) == 0.5


def test_block_slices_clamp():
    assert block_slices(4, 2, 2, (10, 9)) == (slice(8, 10), slice(8, 9))
