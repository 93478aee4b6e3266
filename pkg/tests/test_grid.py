import math

import numpy as np
import pytest

from swflood import Boundaries, FlowState, PhysicalParams, Terrain, free_surface, total_volume, velocity


def single(H, b=0.0, HU=0.0, HV=0.0, h=1.0):
    ter = Terrain(np.full((1, 1), b), h)
    st = FlowState(np.full((1, 1), H), np.full((1, 1), HU), np.full((1, 1), HV))
    return ter, st


class TestFreeSurface:
    @pytest.mark.parametrize("H,b,eta", [(2.0, 3.0, 5.0), (0.0, -1.5, -1.5), (0.75, 0.25, 1.0)])
    def test_examples(self, H, b, eta):
        ter, st = single(H, b)
        assert free_surface(st, ter, 0, 0) == eta

    def test_out_of_range(self):
        ter, st = single(1.0)
        with pytest.raises(IndexError):
            free_surface(st, ter, 1, 0)
        with pytest.raises(IndexError):
            free_surface(st, ter, 0, -1)

    def test_index_order_is_x_then_y(self):
        b = np.arange(6.0).reshape(2, 3)
        ter = Terrain(b, 1.0)
        st = FlowState.dry(ter)
        assert free_surface(st, ter, 2, 1) == b[1, 2]


class TestVelocity:
    def test_wet(self):
        _, st = single(2.0, HU=4.0)
        assert velocity(st, PhysicalParams(), 0, 0) == (2.0, 0.0)

    def test_dry(self):
        _, st = single(0.0)
        assert velocity(st, PhysicalParams(), 0, 0) == (0.0, 0.0)

    def test_below_threshold(self):
        p = PhysicalParams()
        _, st = single(p.eps_dry / 2, HU=1.0)
        assert velocity(st, p, 0, 0) == (0.0, 0.0)

    def test_field_version_matches(self):
        p = PhysicalParams()
        H = np.array([[0.0, 1e-7, 2.0]])
        st = FlowState(H, np.array([[1.0, 1.0, 3.0]]), np.array([[0.0, 5.0, -1.0]]))
        u, v = st.velocities(p.eps_dry)
        assert u.tolist() == [[0.0, 0.0, 1.5]]
        assert v.tolist() == [[0.0, 0.0, -0.5]]


class TestTotalVolume:
    def test_dry(self):
        ter = Terrain(np.zeros((4, 4)), 10.0)
        assert total_volume(FlowState.dry(ter), ter) == 0.0

    def test_uniform(self):
        ter = Terrain(np.zeros((10, 10)), 50.0)
        H = np.ones((10, 10))
        assert total_volume(FlowState(H, 0 * H, 0 * H), ter) == 250000.0

    def test_single_cell(self):
        ter, st = single(0.5, h=2.0)
        assert total_volume(st, ter) == 2.0


class TestTerrain:
    def test_geometry(self):
        ter = Terrain(np.zeros((3, 5)), 2.0, origin=(10.0, 20.0))
        assert (ter.nx, ter.ny, ter.shape) == (5, 3, (3, 5))
        x, y = ter.cell_centers()
        assert x[0] == 11.0 and y[-1] == 25.0

    @pytest.mark.parametrize("h", [0.0, -1.0])
    def test_bad_cellsize(self, h):
        with pytest.raises(ValueError):
            Terrain(np.zeros((2, 2)), h)

    def test_non_finite_bed(self):
        with pytest.raises(ValueError):
            Terrain(np.array([[0.0, np.nan]]), 1.0)

    def test_empty(self):
        with pytest.raises(ValueError):
            Terrain(np.zeros((0, 3)), 1.0)

    def test_bed_is_read_only(self):
        ter = Terrain(np.zeros((2, 2)), 1.0)
        with pytest.raises(ValueError):
            ter.b[0, 0] = 1.0


class TestFlowState:
    def test_negative_depth(self):
        with pytest.raises(ValueError, match="negative"):
            FlowState(np.array([[-1.0]]), np.zeros((1, 1)), np.zeros((1, 1)))

    def test_non_finite(self):
        with pytest.raises(ValueError, match="HV"):
            FlowState(np.ones((1, 1)), np.zeros((1, 1)), np.full((1, 1), np.inf))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            FlowState(np.ones((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))

    def test_still_water(self):
        ter = Terrain(np.array([[0.0, 1.0, 2.0]]), 1.0)
        st = FlowState.still_water(ter, 1.5)
        assert st.H.tolist() == [[1.5, 0.5, 0.0]]

    def test_sanitize(self):
        st = FlowState(np.array([[0.0, 1.0]]), np.array([[3.0, 3.0]]), np.array([[1.0, 1.0]]))
        st.sanitize(1e-6)
        assert st.HU.tolist() == [[0.0, 3.0]]

    def test_bitwise_equal_distinguishes_signed_zero(self):
        a = FlowState(np.ones((1, 1)), np.zeros((1, 1)), np.zeros((1, 1)))
        b = a.copy()
        assert a.bitwise_equal(b)
        b.HU[0, 0] = -0.0
        assert not a.bitwise_equal(b)


class TestParams:
    @pytest.mark.parametrize("kw", [{"g": 0.0}, {"manning": -0.01}, {"viscosity": -1.0},
                                    {"rho_water": 0.0}, {"rho_air": -1.0}, {"eps_dry": 0.0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            PhysicalParams(**kw)

    def test_defaults(self):
        p = PhysicalParams()
        assert (p.g, p.manning, p.eps_dry, p.wind_drag) == (9.81, 0.03, 1e-6, 1e-3)

    def test_manning_field(self):
        m = PhysicalParams(manning=0.02).manning_field((2, 3))
        assert m.shape == (2, 3) and np.all(m == 0.02)

    def test_boundaries(self):
        assert Boundaries().codes().tolist() == [0, 0, 0, 0]
        assert Boundaries(east="open").codes().tolist() == [0, 1, 0, 0]
        with pytest.raises(ValueError):
            Boundaries(west="periodic")


def test_free_surface_is_exact_sum():
    ter, st = single(0.1, 0.2)
    assert free_surface(st, ter, 0, 0) == 0.1 + 0.2
    assert math.isfinite(free_surface(st, ter, 0, 0))
