import numpy as np
import pytest

from swflood import ConfigError, FlowState, Terrain
from swflood.raster import (NODATA_BED, RasterFormatError, load_raster_field, load_terrain, read_ascii_grid,
                            read_summary, write_raster, write_snapshot, write_terrain)

HEADER = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 50\nNODATA_value -9999\n"


def grid_file(tmp_path, text, name="dem.asc"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadTerrain:
    def test_two_by_two(self, tmp_path):
        ter = load_terrain(grid_file(tmp_path, HEADER + "0 1\n2 3\n"))
        assert (ter.nx, ter.ny, ter.h) == (2, 2, 50.0)
        # first data row is the north edge
        assert ter.b.tolist() == [[2.0, 3.0], [0.0, 1.0]]

    def test_nodata(self, tmp_path):
        ter = load_terrain(grid_file(tmp_path, HEADER + "0 -9999\n2 3\n"))
        assert ter.b[1, 1] == NODATA_BED == 1e4

    def test_ragged_row_names_row(self, tmp_path):
        with pytest.raises(RasterFormatError, match="data row 2 has 3 values") as ei:
            load_terrain(grid_file(tmp_path, HEADER + "0 1\n2 3 4\n"))
        assert ei.value.line == 8

    def test_missing_rows(self, tmp_path):
        with pytest.raises(RasterFormatError):
            load_terrain(grid_file(tmp_path, HEADER + "0 1\n"))

    def test_extra_rows(self, tmp_path):
        with pytest.raises(RasterFormatError):
            load_terrain(grid_file(tmp_path, HEADER + "0 1\n2 3\n4 5\n"))

    def test_bad_number(self, tmp_path):
        with pytest.raises(RasterFormatError, match=":7:"):
            load_terrain(grid_file(tmp_path, HEADER + "0 x\n2 3\n"))

    @pytest.mark.parametrize("header,msg", [
        ("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\n", "cellsize"),
        ("ncols 2\nncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n", "duplicate"),
        ("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nbogus 3\n", "bogus"),
        ("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ndx 1\ndy 2\n", "non-square"),
        ("ncols two\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n", "ncols"),
    ])
    def test_header_errors(self, tmp_path, header, msg):
        with pytest.raises(RasterFormatError, match=msg):
            load_terrain(grid_file(tmp_path, header + "0 1\n2 3\n"))

    def test_center_registration_and_case(self, tmp_path):
        text = "NCOLS 2\nNROWS 2\nXLLCENTER 5\nYLLCENTER 10\nCELLSIZE 10\n1 1\n1 1\n"
        ter = load_terrain(grid_file(tmp_path, text))
        assert ter.origin == (0.0, 5.0)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="nope.asc"):
            load_terrain(tmp_path / "nope.asc")

    def test_is_config_error(self):
        assert issubclass(RasterFormatError, ConfigError)


class TestWrite:
    def test_round_trip(self, tmp_path, rng):
        b = rng.uniform(-100, 900, (7, 5))
        ter = Terrain(b, 12.5, origin=(300.0, -40.0))
        back = load_terrain(write_terrain(tmp_path / "t.asc", ter))
        assert back.shape == ter.shape and back.h == ter.h and back.origin == ter.origin
        assert np.allclose(back.b, b, rtol=5e-7, atol=0)

    def test_field_round_trip(self, tmp_path, rng):
        ter = Terrain(np.zeros((4, 6)), 2.0)
        v = rng.uniform(0, 3, ter.shape)
        p = write_raster(tmp_path / "f.asc", v, ter)
        assert np.allclose(load_raster_field(p, ter), v, rtol=5e-7)
        vals, hdr = read_ascii_grid(p)
        assert vals.shape == (4, 6) and hdr.ncols == 6

    def test_field_shape_mismatch(self, tmp_path):
        ter = Terrain(np.zeros((4, 6)), 2.0)
        p = write_raster(tmp_path / "f.asc", np.zeros((4, 6)), ter)
        with pytest.raises(ConfigError):
            load_raster_field(p, Terrain(np.zeros((4, 5)), 2.0))

    def test_dry_snapshot_eta_is_bed(self, tmp_path):
        ter = Terrain(np.arange(12.0).reshape(3, 4), 5.0)
        paths = write_snapshot(FlowState.dry(ter), ter, 0.0, tmp_path, index=0)
        eta = load_raster_field(paths["eta"], ter)
        assert np.array_equal(eta, ter.b)

    def test_summary_rows(self, tmp_path):
        ter = Terrain(np.zeros((3, 3)), 1.0)
        st = FlowState.still_water(ter, 1.0)
        for k in range(4):
            write_snapshot(st, ter, 10.0 * k, tmp_path, index=k, tau=0.5)
        rows = read_summary(tmp_path / "summary.csv")
        assert len(rows) == 4
        assert rows[2]["t"] == 20.0 and rows[0]["volume"] == 9.0 and rows[0]["wet_fraction"] == 1.0
        assert sorted(p.name for p in tmp_path.glob("H_*.asc")) == [f"H_{k:05d}.asc" for k in range(4)]

    def test_unwritable(self, tmp_path):
        ter = Terrain(np.zeros((2, 2)), 1.0)
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError) as ei:
            write_snapshot(FlowState.dry(ter), ter, 0.0, blocker / "sub")
        assert "file" in str(ei.value)
