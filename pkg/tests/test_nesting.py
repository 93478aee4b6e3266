import warnings

import numpy as np
import pytest

from swflood import ConfigError, FlowState, PointSource, Stepper, Terrain, TimestepControl
from swflood.nesting import (NestedGrid, NestedModel, NestingWarning, Window, coupled_step, prolong_boundary,
                             restrict_feedback)
from swflood.validation.terrains import bumpy_bed, flood_channel


def ctl():
    return TimestepControl(dt_max=30.0)


class TestWindow:
    def test_must_be_strictly_inside(self):
        ter = Terrain(np.zeros((10, 10)), 1.0)
        with pytest.raises(ConfigError):
            NestedGrid(ter, Window(0, 2, 4, 4), 2)
        with pytest.raises(ConfigError):
            NestedGrid(ter, Window(2, 2, 8, 4), 2)
        NestedGrid(ter, Window(1, 1, 8, 8), 2)

    def test_empty(self):
        with pytest.raises(ConfigError):
            Window(1, 1, 0, 3)

    @pytest.mark.parametrize("r", [0, 1.5, -2])
    def test_refinement(self, r):
        with pytest.raises(ConfigError):
            NestedGrid(Terrain(np.zeros((8, 8)), 1.0), Window(2, 2, 3, 3), r)

    def test_fine_bed_shape(self):
        with pytest.raises(ConfigError, match="shape"):
            NestedGrid(Terrain(np.zeros((8, 8)), 1.0), Window(2, 2, 3, 3), 2, fine_bed=np.zeros((5, 6)))

    def test_bed_warning(self):
        ter = Terrain(np.zeros((8, 8)), 4.0)
        with pytest.warns(NestingWarning):
            NestedGrid(ter, Window(2, 2, 3, 3), 2, fine_bed=np.full((6, 6), 2.0))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            NestedGrid(ter, Window(2, 2, 3, 3), 2, fine_bed=np.full((6, 6), 0.3))

    def test_fine_cellsize(self):
        n = NestedGrid(Terrain(np.zeros((8, 8)), 50.0), Window(2, 2, 3, 3), 4)
        assert n.terrain.h == 12.5 and n.terrain.shape == (16, 16)

    def test_overlapping_windows(self):
        ter = Terrain(np.zeros((20, 20)), 1.0)
        a = NestedGrid(ter, Window(2, 2, 4, 4), 2)
        b = NestedGrid(ter, Window(6, 2, 4, 4), 2)
        with pytest.raises(ConfigError):
            NestedModel(Stepper(ter), [a, b])


class TestProlong:
    def test_constant(self):
        ter = Terrain(np.zeros((10, 10)), 8.0)
        st = FlowState.still_water(ter, 1.7)
        n = NestedGrid(ter, Window(3, 3, 4, 4), 4)
        H, HU, HV = prolong_boundary(st, ter, n)
        assert np.all(H == 1.7) and not HU.any() and not HV.any()

    def test_linear_ramp(self):
        ter = Terrain(np.zeros((10, 12)), 4.0)
        i = np.arange(12)[None, :] * np.ones((10, 1))
        eta = 2.0 + 0.05 * i
        st = FlowState(eta, np.zeros_like(eta), np.zeros_like(eta))
        n = NestedGrid(ter, Window(3, 3, 5, 4), 4)
        H, _, _ = n.prolong(st, ter, 1e-6)
        # fine centres in global index units
        g = n.ghost
        xf = 3 + (np.arange(H.shape[1]) - g + 0.5) / 4 - 0.5
        assert np.allclose(H, 2.0 + 0.05 * xf[None, :], rtol=0, atol=1e-14)

    def test_lake_at_rest_over_bed(self):
        ter = Terrain(bumpy_bed(16, seed=5, amplitude=0.5), 20.0)
        st = FlowState.still_water(ter, 2.0)
        n = NestedGrid(ter, Window(4, 4, 6, 6), 4)
        H, HU, HV = n.prolong(st, ter, 1e-6)
        assert np.allclose(H + n.terrain.b, 2.0, rtol=0, atol=1e-13)
        assert not HU.any() and not HV.any()

    def test_fine_lake_stays_still(self):
        ter = Terrain(bumpy_bed(16, seed=5, amplitude=0.5), 20.0)
        st = FlowState.still_water(ter, 2.0)
        n = NestedGrid(ter, Window(4, 4, 6, 6), 4)
        model = NestedModel(Stepper(ter, control=ctl()), [n])
        model.initialize(st)
        for _ in range(5):
            model.step(st)
        assert np.abs(n.state.HU).max() <= 1e-12 and np.abs(n.state.HV).max() <= 1e-12

    def test_dry_global_gives_dry_ghosts(self):
        ter = Terrain(np.zeros((10, 10)), 1.0)
        n = NestedGrid(ter, Window(3, 3, 4, 4), 2)
        H, _, _ = prolong_boundary(FlowState.dry(ter), ter, n)
        assert not H.any()


class TestRestrict:
    def test_checkerboard(self):
        ter = Terrain(np.zeros((8, 8)), 2.0)
        n = NestedGrid(ter, Window(2, 2, 3, 3), 2)
        H = np.zeros(n.terrain.shape)
        H[::2, ::2] = 2.0
        H[1::2, 1::2] = 2.0
        n.state = FlowState(H, np.zeros_like(H), np.zeros_like(H))
        g = FlowState.dry(ter)
        restrict_feedback(n, g)
        assert np.all(g.H[n.window.slices] == 1.0)
        assert g.H.sum() == 9.0

    def test_mass_is_preserved(self, rng):
        ter = Terrain(np.zeros((8, 8)), 3.0)
        n = NestedGrid(ter, Window(2, 2, 3, 3), 4)
        H = rng.uniform(0, 1, n.terrain.shape)
        n.state = FlowState(H, np.zeros_like(H), np.zeros_like(H))
        g = FlowState.dry(ter)
        restrict_feedback(n, g)
        assert g.H.sum() * 9.0 == pytest.approx(n.volume(), rel=1e-14)

    def test_constant_round_trip(self):
        ter = Terrain(np.zeros((10, 10)), 4.0)
        st = FlowState.still_water(ter, 0.8)
        n = NestedGrid(ter, Window(3, 3, 4, 4), 4)
        n.init_from(st, ter)
        out = FlowState.dry(ter)
        restrict_feedback(n, out)
        assert np.all(out.H[n.window.slices] == 0.8)


class TestCoupledStep:
    def test_dry_window(self, backend_name):
        ter, st = flood_channel(32)
        st.H[:, 14:] = 0.0
        st.H[:, :14] = np.maximum(st.H[:, :14], 0.0)
        # raise the bed under the window so it stays dry for a few steps
        b = ter.b.copy()
        b[6:26, 20:30] = 50.0
        ter = Terrain(b, ter.h)
        st = FlowState(np.where(b > 40, 0.0, st.H), st.HU.copy(), st.HV.copy())
        plain = st.copy()
        n = NestedGrid(ter, Window(22, 10, 6, 10), 4)
        model = NestedModel(Stepper(ter, control=ctl(), backend=backend_name), [n])
        model.initialize(st)
        ref = Stepper(ter, control=ctl(), backend=backend_name)
        for _ in range(5):
            coupled_step(model, st)
            ref.step(plain)
        assert st.bitwise_equal(plain)

    def test_unit_refinement_matches_global(self, backend_name):
        ter, st = flood_channel(32)
        plain = st.copy()
        n = NestedGrid(ter, Window(8, 8, 12, 14), 1)
        model = NestedModel(Stepper(ter, control=ctl(), backend=backend_name), [n], one_way=True)
        model.initialize(st)
        ref = Stepper(ter, control=ctl(), backend=backend_name)
        for _ in range(30):
            rep = model.step(st)
            ref.step(plain)
            assert rep.substeps == [1]
            assert np.array_equal(n.state.H[n.interior], plain.H[n.window.slices])
        assert np.abs(plain.HU[n.window.slices]).max() > 0.0

    def test_one_way_leaves_global_untouched(self, backend_name):
        ter, st = flood_channel(32)
        plain = st.copy()
        n = NestedGrid(ter, Window(10, 8, 6, 14), 4)
        model = NestedModel(Stepper(ter, control=ctl(), backend=backend_name), [n], one_way=True)
        model.initialize(st)
        ref = Stepper(ter, control=ctl(), backend=backend_name)
        for _ in range(10):
            model.step(st)
            ref.step(plain)
        assert st.bitwise_equal(plain)

    def test_two_way_mass(self, backend_name):
        ter, st = flood_channel(32)
        n = NestedGrid(ter, Window(10, 8, 6, 14), 4)
        model = NestedModel(Stepper(ter, control=ctl(), backend=backend_name), [n])
        model.initialize(st)
        v0 = model.system_volume(st)
        clamp = lost = 0.0
        for _ in range(40):
            rep = model.step(st)
            clamp += rep.global_report.clamp_volume + rep.fine_clamp_volume
            lost += rep.reflux_loss
        v1 = model.system_volume(st)
        assert abs(v1 - v0 - clamp + lost) <= 1e-8 * v0
        assert n.state.t == st.t

    def test_sources_are_mapped(self):
        ter = Terrain(np.zeros((12, 12)), 8.0)
        n = NestedGrid(ter, Window(3, 3, 4, 4), 2)
        src = [PointSource([(4, 4), (0, 0)], 10.0)]
        fine = n.map_sources(src)
        assert len(fine) == 1 and len(fine[0].cells) == 4
        assert fine[0].discharge.at(0.0)[0] == 5.0
