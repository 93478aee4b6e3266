import numpy as np
import pytest

from swflood import ConfigError, FlowState, Hydrograph, PhysicalParams, PointSource, RainSource, Terrain, WindForcing
from swflood.forcing import (EARTH_ROTATION, FORCE_TERMS, TimeSeries, assemble_forces, bottom_friction,
                             coriolis_force, omega_z_from_latitude, rect_cells, source_activity, source_terms,
                             surface_gradient_field, surface_gradient_force, viscous_force, wind_force)


def lake(n=5, h=1.0, depth=1.0, b=None):
    ter = Terrain(np.zeros((n, n)) if b is None else b, h)
    H = np.maximum(depth - ter.b, 0.0)
    return ter, FlowState(H, np.zeros_like(H), np.zeros_like(H))


class TestFriction:
    def test_at_rest(self):
        assert bottom_friction((0.0, 0.0), 3.0, PhysicalParams()) == (0.0, 0.0)

    def test_no_roughness(self):
        fx, fy = bottom_friction((1.0, 2.0), 1.0, PhysicalParams(manning=0.0))
        assert fx == 0.0 and fy == 0.0

    def test_hand_value(self):
        fx, fy = bottom_friction((1.0, 0.0), 1.0, PhysicalParams(g=9.81, manning=0.02))
        assert fx == pytest.approx(-3.924e-3, rel=1e-12)
        assert fy == 0.0

    def test_opposes_velocity(self, rng):
        u = rng.normal(size=50)
        v = rng.normal(size=50)
        fx, fy = bottom_friction((u, v), rng.uniform(0.01, 5, 50), PhysicalParams())
        assert np.all(fx * u + fy * v <= 0.0)


class TestViscous:
    def test_uniform_field(self):
        ter, st = lake(3)
        st.HU[:] = 0.7
        assert viscous_force(st, PhysicalParams(viscosity=2.0), ter, 1, 1) == (0.0, 0.0)

    def test_zero_viscosity(self):
        ter, st = lake(3)
        st.HU[1, 1] = 5.0
        assert viscous_force(st, PhysicalParams(viscosity=0.0), ter, 1, 1) == (0.0, 0.0)

    def test_stencil(self):
        ter, st = lake(3)
        for j, i in ((0, 1), (2, 1), (1, 0), (1, 2)):
            st.HU[j, i] = 1.0
        assert viscous_force(st, PhysicalParams(viscosity=1.0), ter, 1, 1) == (4.0, 0.0)

    def test_dry_neighbour_mirrors_centre(self):
        ter, st = lake(3)
        st.HU[1, 1] = 1.0
        st.H[1, 2] = 0.0
        fx, _ = viscous_force(st, PhysicalParams(viscosity=1.0), ter, 1, 1)
        assert fx == -3.0


class TestCoriolis:
    def test_no_rotation(self):
        assert coriolis_force((1.0, 2.0), PhysicalParams(omega_z=0.0)) == (0.0, 0.0)

    def test_at_rest(self):
        assert coriolis_force((0.0, 0.0), PhysicalParams(omega_z=1e-4)) == (0.0, 0.0)

    def test_hand_value(self):
        fx, fy = coriolis_force((1.0, 0.0), PhysicalParams(omega_z=7.292e-5))
        assert fx == 0.0 and fy == pytest.approx(-1.4584e-4, rel=1e-12)

    def test_work_free(self, rng):
        u, v = rng.normal(size=(2, 100))
        fx, fy = coriolis_force((u, v), PhysicalParams(omega_z=1e-4))
        assert np.all(np.abs(fx * u + fy * v) <= 1e-15 * np.hypot(fx, fy) * np.hypot(u, v))

    def test_latitude(self):
        assert omega_z_from_latitude(90.0) == EARTH_ROTATION
        assert omega_z_from_latitude(0.0) == 0.0
        assert omega_z_from_latitude(-30.0) == pytest.approx(-0.5 * EARTH_ROTATION)


class TestWind:
    def test_relative_wind_zero(self):
        w = WindForcing.constant(3.0, -1.0)
        assert wind_force((3.0, -1.0), 1.0, w, 0.0, PhysicalParams()) == (0.0, 0.0)

    def test_no_drag(self):
        w = WindForcing.constant(10.0, 0.0)
        fx, fy = wind_force((0.0, 0.0), 1.0, w, 0.0, PhysicalParams(wind_drag=0.0))
        assert fx == 0.0 and fy == 0.0

    def test_hand_value(self):
        w = WindForcing.constant(5.0, 0.0)
        p = PhysicalParams(wind_drag=1e-3, rho_air=1.2, rho_water=1000.0)
        fx, fy = wind_force((0.0, 0.0), 2.0, w, 0.0, p)
        assert fx == pytest.approx(1.5e-5, rel=1e-12) and fy == 0.0

    def test_pushes_along_relative_wind(self, rng):
        u, v = rng.normal(size=(2, 40))
        w = WindForcing.constant(7.0, -4.0)
        fx, fy = wind_force((u, v), 1.5, w, 0.0, PhysicalParams())
        assert np.all(fx * (7.0 - u) + fy * (-4.0 - v) >= 0.0)

    def test_series_interpolates(self):
        w = WindForcing.from_samples([0.0, 10.0], [0.0, 10.0], [2.0, 2.0])
        assert w.at(5.0) == (5.0, 2.0)
        assert w.at(-1.0) == (0.0, 2.0)
        assert w.at(99.0) == (10.0, 2.0)

    def test_series_must_increase(self):
        with pytest.raises(ConfigError):
            WindForcing.from_samples([0.0, 0.0], [1.0, 2.0], [0.0, 0.0])


class TestSurfaceGradient:
    def test_flat(self):
        ter, st = lake(5, b=np.random.default_rng(0).uniform(-0.5, 0.5, (5, 5)))
        fx, fy = surface_gradient_field(st, ter, PhysicalParams())
        assert np.all(fx == 0.0) and np.all(fy == 0.0)

    def test_ramp(self):
        ter = Terrain(np.zeros((3, 5)), 50.0)
        eta = 1.0 + 0.1 * np.arange(5)[None, :] * np.ones((3, 1))
        st = FlowState(eta, 0 * eta, 0 * eta)
        fx, fy = surface_gradient_force(st, ter, PhysicalParams(g=9.81), 2, 1)
        assert fx == pytest.approx(-0.01962, rel=1e-12)
        assert fy == 0.0

    def test_dry_bank(self):
        b = np.zeros((3, 4))
        b[:, 2:] = 2.0  # bank higher than the lake level
        ter, st = lake(4, b=np.vstack([b, b[:1]]))
        fx, fy = surface_gradient_field(st, ter, PhysicalParams())
        assert np.all(fx == 0.0) and np.all(fy == 0.0)

    def test_dry_cells_have_no_force(self):
        ter = Terrain(np.zeros((1, 3)), 1.0)
        H = np.array([[1.0, 0.0, 2.0]])
        fx, _ = surface_gradient_field(FlowState(H, 0 * H, 0 * H), ter, PhysicalParams())
        assert fx[0, 1] == 0.0


class TestSources:
    def test_none(self):
        ter = Terrain(np.zeros((3, 3)), 50.0)
        f = source_terms([], 0.0, ter)
        assert not f.sigma.any() and not f.index_q.any()

    def test_single_cell(self):
        ter = Terrain(np.zeros((3, 3)), 50.0)
        f = source_terms([PointSource([(1, 2)], 1.0e5)], 0.0, ter)
        assert f.sigma[2, 1] == 40.0
        assert f.index_q.sum() == 1 and f.index_q[2, 1] == 1

    def test_spread(self):
        ter = Terrain(np.zeros((10, 10)), 50.0)
        f = source_terms([PointSource(rect_cells(0, 0, 10, 10), 1.0e5)], 0.0, ter)
        assert np.allclose(f.sigma, 0.4, rtol=1e-15)

    def test_outside_grid(self):
        ter = Terrain(np.zeros((3, 3)), 50.0)
        with pytest.raises(ConfigError, match="outside"):
            source_terms([PointSource([(3, 0)], 1.0)], 0.0, ter)

    def test_rain_and_overlap(self):
        ter = Terrain(np.zeros((2, 2)), 10.0)
        src = [RainSource(rect_cells(0, 0, 2, 2), 1e-3), PointSource([(0, 0)], 0.1, velocity=(2.0, 0.0))]
        f = source_terms(src, 0.0, ter)
        assert f.sigma[0, 0] == pytest.approx(2e-3)
        assert f.vx[0, 0] == pytest.approx(1.0)
        assert f.sigma[1, 1] == 1e-3 and f.vx[1, 1] == 0.0

    def test_hydrograph(self):
        ter = Terrain(np.zeros((2, 2)), 1.0)
        q = Hydrograph([0.0, 10.0, 20.0], [0.0, 4.0, 0.0])
        src = [PointSource([(0, 0)], q)]
        assert source_terms(src, 5.0, ter).sigma[0, 0] == 2.0
        f = source_terms(src, 20.0, ter)
        assert f.sigma[0, 0] == 0.0 and f.index_q[0, 0] == 0
        assert source_activity(src, 19.0, 30.0, ter)[0, 0] == 1
        assert source_activity(src, 20.0, 30.0, ter)[0, 0] == 0

    def test_hydrograph_must_increase(self):
        with pytest.raises(ConfigError):
            Hydrograph([0.0, 5.0, 4.0], [1.0, 1.0, 1.0])

    def test_series_constant(self):
        assert TimeSeries.constant(3.0).at(1e9).tolist() == [3.0]


class TestAssemble:
    def patch(self):
        rng = np.random.default_rng(3)
        ter = Terrain(rng.uniform(0, 0.2, (3, 3)), 10.0)
        H = rng.uniform(0.5, 1.5, (3, 3))
        st = FlowState(H, H * rng.normal(size=(3, 3)), H * rng.normal(size=(3, 3)))
        p = PhysicalParams(viscosity=0.3, omega_z=1e-4)
        wind = WindForcing.constant(6.0, 2.0)
        src = [PointSource([(1, 1)], 50.0, velocity=(1.0, -1.0))]
        return ter, st, p, wind, src

    def test_still_lake(self):
        ter, st = lake(5, b=np.random.default_rng(1).uniform(-0.3, 0.3, (5, 5)))
        f = assemble_forces(st, ter, PhysicalParams(viscosity=1.0, omega_z=1e-4))
        # (1 - b) + b is 1 only to an ulp, so allow g * ulp / h
        assert np.abs(f.fx).max() < 1e-14 and np.abs(f.fy).max() < 1e-14

    def test_single_terms(self):
        ter, st, p, wind, src = self.patch()
        u, v = st.velocities(p.eps_dry)
        alone = {
            "gradient": surface_gradient_field(st, ter, p),
            "friction": bottom_friction((u, v), st.H, p),
            "coriolis": coriolis_force((u, v), p),
            "wind": wind_force((u, v), st.H, wind, 0.0, p),
        }
        for name, (ex, ey) in alone.items():
            f = assemble_forces(st, ter, p, wind, src, terms=[name])
            assert np.array_equal(f.fx, ex) and np.array_equal(f.fy, ey), name

    def test_sum_of_terms(self):
        ter, st, p, wind, src = self.patch()
        total = assemble_forces(st, ter, p, wind, src)
        parts = [assemble_forces(st, ter, p, wind, src, terms=[t]) for t in FORCE_TERMS]
        assert np.allclose(total.fx, sum(f.fx for f in parts), rtol=1e-13, atol=1e-16)
        assert np.allclose(total.fy, sum(f.fy for f in parts), rtol=1e-13, atol=1e-16)

    def test_dropping_a_term(self):
        ter, st, p, wind, src = self.patch()
        total = assemble_forces(st, ter, p, wind, src)
        rest = assemble_forces(st, ter, p, wind, src, terms=[t for t in FORCE_TERMS if t != "wind"])
        wx, _ = wind_force(st.velocities(p.eps_dry), st.H, wind, 0.0, p)
        assert np.allclose(total.fx - rest.fx, wx, rtol=1e-10, atol=1e-15)

    def test_exchange(self):
        ter, st, p, wind, src = self.patch()
        f = assemble_forces(st, ter, p, wind, src, terms=["exchange"])
        u, v = st.velocities(p.eps_dry)
        sig = 50.0 / 100.0
        assert f.fx[1, 1] == pytest.approx(sig / st.H[1, 1] * (1.0 - u[1, 1]))
        assert f.fx[0, 0] == 0.0

    def test_unknown_term(self):
        ter, st, p, wind, src = self.patch()
        with pytest.raises(ValueError):
            assemble_forces(st, ter, p, terms=["tides"])

    def test_dry_source_cell_keeps_inflow_momentum(self):
        ter = Terrain(np.zeros((2, 2)), 1.0)
        st = FlowState.dry(ter)
        f = assemble_forces(st, ter, PhysicalParams(), sources=[PointSource([(0, 0)], 2.0, velocity=(3.0, 0.0))])
        assert f.fx[0, 0] == 0.0 and f.svx[0, 0] == 6.0
