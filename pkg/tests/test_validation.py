import math

import numpy as np
import pytest

from swflood import ConfigError
from swflood.validation import (CASES, OracleError, ValidationReport, exact_riemann_flux, exact_riemann_state,
                                ritter_solution, run_case)
from swflood.validation.terrains import bumpy_bed, dam_break_strip, valley

G = 9.81


class TestRitter:
    def test_dam_site(self):
        H, U = ritter_solution(2.0, G, 0.0, 3.0)
        assert H == pytest.approx(4.0 / 9.0 * 2.0, rel=1e-15)
        assert U == pytest.approx(2.0 / 3.0 * math.sqrt(2.0 * G), rel=1e-15)

    def test_undisturbed(self):
        H, U = ritter_solution(1.0, G, -10.0, 1.0)
        assert H == 1.0 and U == 0.0

    def test_front(self):
        H, _ = ritter_solution(1.0, G, 2.0 * math.sqrt(G), 1.0)
        assert H == 0.0
        H, U = ritter_solution(1.0, G, 2.1 * math.sqrt(G), 1.0)
        assert H == 0.0 and U == 0.0

    def test_continuous_at_head(self):
        c = math.sqrt(G)
        H, _ = ritter_solution(1.0, G, np.array([-c - 1e-9, -c + 1e-9]), 1.0)
        assert np.allclose(H, 1.0, atol=1e-9)

    @pytest.mark.parametrize("args", [(0.0, G, 0.0, 1.0), (1.0, G, 0.0, 0.0)])
    def test_bad_input(self, args):
        with pytest.raises(ValueError):
            ritter_solution(*args)


class TestExactRiemann:
    def test_equal_states(self):
        m, _ = exact_riemann_flux((1.5, 0.0), (1.5, 0.0), G)
        assert m == 0.0

    def test_both_dry(self):
        assert exact_riemann_flux((0.0, 0.0), (0.0, 0.0), G) == (0.0, 0.0)

    def test_matches_ritter(self):
        H, U = exact_riemann_state(1.0, 0.0, 0.0, 0.0, G)
        Hr, Ur = ritter_solution(1.0, G, 0.0, 1.0)
        assert abs(H - Hr) <= 1e-10 and abs(U - Ur) <= 1e-10
        m, _ = exact_riemann_flux((1.0, 0.0), (0.0, 0.0), G)
        assert m == pytest.approx(float(Hr * Ur), abs=1e-10)

    def test_mirror(self):
        a = exact_riemann_state(2.0, 0.3, 0.5, -0.1, G, s=0.4)
        b = exact_riemann_state(0.5, 0.1, 2.0, -0.3, G, s=-0.4)
        assert a[0] == pytest.approx(b[0], rel=1e-10)
        assert a[1] == pytest.approx(-b[1], rel=1e-10)

    def test_two_shocks_conserve(self):
        # colliding streams: star state satisfies both jump conditions
        H, U = exact_riemann_state(1.0, 2.0, 1.0, -2.0, G)
        assert U == pytest.approx(0.0, abs=1e-10) and H > 1.0

    def test_dry_middle(self):
        H, U = exact_riemann_state(1.0, -10.0, 1.0, 10.0, G)
        assert H == 0.0 and U == 0.0

    def test_non_convergence(self):
        with pytest.raises(OracleError):
            exact_riemann_state(1.0, 0.0, 0.5, 0.0, G, max_iter=2)


class TestTerrains:
    def test_bumpy_bed(self):
        b = bumpy_bed(64, seed=3)
        assert b.shape == (64, 64) and np.abs(b).max() == pytest.approx(5.0)
        assert np.array_equal(b, bumpy_bed(64, seed=3))
        assert not np.array_equal(b, bumpy_bed(64, seed=4))

    def test_valley_wet_fraction(self):
        ter, st, _ = valley(256, seed=7)
        assert 0.30 <= float((st.H > 1e-6).mean()) <= 0.40

    def test_dam_break_strip(self):
        ter, st, x = dam_break_strip(100)
        assert st.H.shape == ter.shape and len(x) == ter.nx


class TestReport:
    def test_pass_fail(self):
        r = ValidationReport("demo", {"err": 0.5, "ok": True})
        r.check("err", "<=", 1.0)
        r.check("ok", "==", True)
        assert r.passed and "PASS demo" in r.format()
        r.metrics["err"] = float("nan")
        assert not r.passed

    def test_csv(self):
        r = ValidationReport("demo", {"err": 2.0})
        r.check("err", "<=", 1.0)
        assert "demo,err,2.0,<=,1.0,False" in r.to_csv()


class TestCases:
    def test_names(self):
        for name in ("lake-at-rest", "dam-break", "smooth-bump-convergence", "mass-ledger",
                     "mirror-symmetry", "skip-equivalence", "zoom-mass", "speedup", "stage-shares"):
            assert name in CASES

    def test_unknown(self):
        with pytest.raises(ConfigError, match="unknown"):
            run_case("tidal-bore")

    def test_small_lake(self):
        rep = run_case("lake-at-rest", 32, steps=20)
        assert rep.passed and rep.metrics["max_speed"] <= 1e-10

    def test_small_mirror(self):
        assert run_case("mirror-symmetry", 32, steps=20).passed

    def test_small_parallel(self):
        assert run_case("parallel-determinism", 64, steps=5).passed
