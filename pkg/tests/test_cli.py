import json

import pytest

from swflood import Terrain
from swflood.cli import EXIT_ABORT, EXIT_CONFIG, EXIT_OK, main
from swflood.raster import read_summary, write_terrain
from swflood.validation.terrains import bumpy_bed

LAKE = """
duration = 120.0
cadence = 40.0
[terrain]
generator = "bumpy"
nx = 32
cellsize = 20.0
[initial]
type = "level"
level = 1.0
"""

FLOOD = """
duration = 60.0
[terrain]
generator = "bumpy"
nx = 48
cellsize = 50.0
[[sources]]
cells = [[10, 10]]
value = 2000.0
[initial]
type = "level"
level = -1.0
"""


@pytest.fixture
def scenario(tmp_path):
    def make(text, name="case.toml"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return make


class TestRun:
    def test_lake_at_rest(self, scenario, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", scenario(LAKE), "--out", str(out), "--quiet"]) == EXIT_OK
        rows = read_summary(out / "summary.csv")
        assert len(rows) == 4 and max(r["max_speed"] for r in rows) <= 1e-10
        assert "balanced" in capsys.readouterr().out
        rep = json.loads((out / "report.json").read_text())
        assert rep["steps"] > 0 and rep["mass_ledger"]["balanced"]

    def test_engine_flags(self, scenario, tmp_path):
        out = tmp_path / "o"
        argv = ["run", scenario(FLOOD), "--out", str(out), "--quiet",
                "--workers", "2", "--no-skip", "--block-size", "8", "--seed", "3"]
        assert main(argv) == EXIT_OK
        rep = json.loads((out / "report.json").read_text())
        assert (rep["workers"], rep["skip"], rep["block_size"]) == (2, False, 8)

    def test_missing_file(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "none.toml")]) == EXIT_CONFIG
        assert "none.toml" in capsys.readouterr().err

    def test_bad_config(self, scenario, capsys):
        assert main(["run", scenario("duration = 1.0\n[terrain]\nnx = 4\n")]) == EXIT_CONFIG
        assert "terrain" in capsys.readouterr().err

    def test_numerical_abort(self, scenario, tmp_path, capsys):
        text = FLOOD + "[timestep]\ndt_max = 10.0\ndt_min = 9.0\n"
        assert main(["run", scenario(text), "--out", str(tmp_path / "o"), "--quiet"]) == EXIT_ABORT
        assert "numerical abort" in capsys.readouterr().err


class TestUsage:
    @pytest.mark.parametrize("argv", [[], ["fly"], ["run"], ["run", "x.toml", "--bogus"],
                                      ["validate", "no-such-case"], ["run", "x.toml", "--workers", "0"]])
    def test_usage_errors(self, argv, capsys):
        assert main(argv) == EXIT_CONFIG
        assert "usage" in capsys.readouterr().err

    def test_help(self, capsys):
        assert main(["--help"]) == EXIT_OK
        assert "validate" in capsys.readouterr().out


class TestOtherCommands:
    def test_bench(self, scenario, tmp_path, capsys):
        assert main(["bench", scenario(FLOOD), "--steps", "3", "--out", str(tmp_path)]) == EXIT_OK
        text = capsys.readouterr().out
        assert "speedup" in text and "K7" in text and "%" in text
        doc = json.loads((tmp_path / "bench.json").read_text())
        assert doc["identical"] is True and set(doc["skip_percent"]) >= {"flux", "corrector"}

    def test_validate(self, tmp_path, capsys):
        assert main(["validate", "skip-equivalence", "--resolution", "64", "--steps", "5",
                     "--out", str(tmp_path)]) == EXIT_OK
        assert "PASS skip-equivalence" in capsys.readouterr().out
        assert (tmp_path / "skip-equivalence.csv").exists()

    def test_validate_dam_break_prints_error(self, capsys):
        code = main(["validate", "dam-break", "--resolution", "100"])
        text = capsys.readouterr().out
        assert "l1" in text.lower() and ("PASS" in text or "FAIL" in text)
        assert code in (0, 3)

    def test_info(self, tmp_path, capsys):
        p = write_terrain(tmp_path / "dem.asc", Terrain(bumpy_bed(20, 10, seed=1), 25.0))
        assert main(["info", str(p)]) == EXIT_OK
        text = capsys.readouterr().out
        assert "20 x 10 cells" in text and "cellsize 25" in text
