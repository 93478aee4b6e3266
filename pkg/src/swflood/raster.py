"""ESRI ASCII grids and simulation snapshots.

Header keys are case-insensitive. Either ``xllcorner``/``yllcorner`` or
``xllcenter``/``yllcenter`` may be given; ``dx``/``dy`` are accepted in
place of ``cellsize`` only when equal. Data rows run north to south, one
raster row per line; they are flipped on read so row 0 is the southern
edge, matching :class:`swflood.grid.Terrain`.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grid import FlowState, Terrain

NODATA_BED = 1.0e4  # NODATA cells become impermeable high ground
NODATA_OUT = -9999.0
VALUE_FMT = "%.6e"
SUMMARY_COLUMNS = ("t", "volume", "wet_fraction", "max_speed", "tau")


class RasterFormatError(ConfigError):
    """Malformed ESRI ASCII file; carries the 1-based line number."""

    def __init__(self, path, line, msg):
        self.path = str(path)
        self.line = line
        where = f"{path}:{line}" if line else str(path)
        super().__init__(f"{where}: {msg}")


@dataclass
class RasterHeader:
    ncols: int
    nrows: int
    xll: float
    yll: float
    cellsize: float
    nodata: float | None = None

    @property
    def origin(self) -> tuple[float, float]:
        return (self.xll, self.yll)


_INT_KEYS = ("ncols", "nrows")
_KNOWN = {"ncols", "nrows", "xllcorner", "yllcorner", "xllcenter", "yllcenter", "cellsize",
          "dx", "dy", "nodata_value"}


def _parse_header(path, lines):
    """Consume header lines; returns (header, index of the first data line)."""
    vals = {}
    k = 0
    while k < len(lines):
        parts = lines[k].split()
        if not parts:
            k += 1
            continue
        key = parts[0].lower()
        if key not in _KNOWN:
            try:
                float(parts[0])
            except ValueError:
                raise RasterFormatError(path, k + 1, f"unknown header key {parts[0]!r}") from None
            break
        if len(parts) != 2:
            raise RasterFormatError(path, k + 1, f"header line {parts[0]!r} needs exactly one value")
        if key in vals:
            raise RasterFormatError(path, k + 1, f"duplicate header key {parts[0]!r}")
        try:
            vals[key] = (int(parts[1]) if key in _INT_KEYS else float(parts[1]), k + 1)
        except ValueError:
            kind = "an integer" if key in _INT_KEYS else "a number"
            raise RasterFormatError(path, k + 1, f"{parts[0]} must be {kind}, got {parts[1]!r}") from None
        k += 1

    def need(key):
        if key not in vals:
            raise RasterFormatError(path, k + 1, f"missing header key {key!r}")
        return vals[key][0]

    ncols, nrows = need("ncols"), need("nrows")
    for key in _INT_KEYS:
        if vals[key][0] < 1:
            raise RasterFormatError(path, vals[key][1], f"{key} must be positive")
    if "cellsize" in vals:
        if "dx" in vals or "dy" in vals:
            raise RasterFormatError(path, vals["cellsize"][1], "give cellsize or dx/dy, not both")
        cs = vals["cellsize"][0]
    elif "dx" in vals and "dy" in vals:
        cs = vals["dx"][0]
        if vals["dy"][0] != cs:
            raise RasterFormatError(path, vals["dy"][1],
                                    f"non-square cells (dx={cs}, dy={vals['dy'][0]}) are not supported")
    else:
        cs = need("cellsize")
    if not (cs > 0 and math.isfinite(cs)):
        raise RasterFormatError(path, k, f"cellsize must be positive, got {cs}")

    def corner(axis):
        c, m = f"{axis}llcorner", f"{axis}llcenter"
        if c in vals and m in vals:
            raise RasterFormatError(path, vals[m][1], f"both {c} and {m} given")
        if c in vals:
            return vals[c][0]
        if m in vals:
            return vals[m][0] - 0.5 * cs
        return need(c)

    xll, yll = corner("x"), corner("y")
    nodata = vals["nodata_value"][0] if "nodata_value" in vals else None
    return RasterHeader(ncols, nrows, xll, yll, cs, nodata), k


def read_ascii_grid(path) -> tuple[np.ndarray, RasterHeader]:
    """Values as stored in the file (first row = north) and the header.

    NODATA entries are returned unchanged; compare against ``header.nodata``.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read raster {path}: {exc.strerror or exc}") from exc
    lines = text.splitlines()
    hdr, k = _parse_header(path, lines)
    rows = []
    for n in range(k, len(lines)):
        parts = lines[n].split()
        if not parts:
            continue
        r = len(rows) + 1
        if r > hdr.nrows:
            raise RasterFormatError(path, n + 1, f"more than nrows={hdr.nrows} data rows")
        if len(parts) != hdr.ncols:
            raise RasterFormatError(path, n + 1, f"data row {r} has {len(parts)} values, expected ncols={hdr.ncols}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            bad = next(p for p in parts if not _is_number(p))
            raise RasterFormatError(path, n + 1, f"data row {r}: {bad!r} is not a number") from None
    if len(rows) != hdr.nrows:
        raise RasterFormatError(path, len(lines), f"found {len(rows)} data rows, expected nrows={hdr.nrows}")
    a = np.array(rows, dtype=float)
    if not np.all(np.isfinite(a)):
        raise RasterFormatError(path, 0, "non-finite values in data")
    return a, hdr


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_terrain(path) -> Terrain:
    """Read an ESRI ASCII elevation grid; NODATA becomes ``NODATA_BED``."""
    a, hdr = read_ascii_grid(path)
    if hdr.nodata is not None:
        a = np.where(a == hdr.nodata, NODATA_BED, a)
    return Terrain(np.ascontiguousarray(a[::-1]), hdr.cellsize, origin=hdr.origin)


def load_raster_field(path, terrain: Terrain, fill: float = 0.0) -> np.ndarray:
    """Read a raster that must match ``terrain``'s grid; NODATA becomes ``fill``."""
    a, hdr = read_ascii_grid(path)
    if (hdr.nrows, hdr.ncols) != terrain.shape:
        raise ConfigError(f"{path}: grid {hdr.ncols}x{hdr.nrows} does not match terrain "
                          f"{terrain.nx}x{terrain.ny}")
    if not math.isclose(hdr.cellsize, terrain.h, rel_tol=1e-9):
        raise ConfigError(f"{path}: cellsize {hdr.cellsize} differs from terrain cellsize {terrain.h}")
    if hdr.nodata is not None:
        a = np.where(a == hdr.nodata, fill, a)
    return np.ascontiguousarray(a[::-1])


def write_raster(path, values: np.ndarray, terrain: Terrain, nodata: float | None = None) -> Path:
    """Write ``values`` (row 0 south) in ESRI ASCII with ``%.6e`` precision."""
    path = Path(path)
    values = np.asarray(values, dtype=float)
    if values.shape != terrain.shape:
        raise ValueError(f"raster shape {values.shape} does not match terrain {terrain.shape}")
    head = [
        f"ncols {terrain.nx}",
        f"nrows {terrain.ny}",
        f"xllcorner {terrain.origin[0]!r}",
        f"yllcorner {terrain.origin[1]!r}",
        f"cellsize {terrain.h!r}",
    ]
    if nodata is not None:
        head.append(f"NODATA_value {nodata!r}")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(head) + "\n")
            np.savetxt(fh, values[::-1], fmt=VALUE_FMT)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write raster: {exc.strerror}", str(path)) from exc
    return path


def write_terrain(path, terrain: Terrain) -> Path:
    return write_raster(path, terrain.b, terrain)


def snapshot_fields(state: FlowState, terrain: Terrain, eps_dry: float = 1.0e-6) -> dict:
    ux, uy = state.velocities(eps_dry)
    return {"H": state.H, "Ux": ux, "Uy": uy, "eta": state.H + terrain.b}


def write_snapshot(state: FlowState, terrain: Terrain, t: float, out_dir, *, index: int | None = None,
                   tau: float = 0.0, eps_dry: float = 1.0e-6) -> dict:
    """Write H, Ux, Uy and eta rasters and append one row to ``summary.csv``.

    Files are named ``<field>_<index>.asc``; without ``index`` the time in
    seconds is used. Returns ``{field: path}`` plus ``"summary"``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{index:05d}" if index is not None else f"t{t:013.3f}"
    fields = snapshot_fields(state, terrain, eps_dry)
    paths = {k: write_raster(out / f"{k}_{stem}.asc", v, terrain) for k, v in fields.items()}
    wet = state.H > eps_dry
    speed = np.hypot(fields["Ux"], fields["Uy"])
    row = (t, float(state.H.sum()) * terrain.h ** 2, float(wet.mean()), float(speed.max()), tau)
    paths["summary"] = append_summary(out / "summary.csv", row)
    return paths


def append_summary(path, row) -> Path:
    path = Path(path)
    new = not path.exists() or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(SUMMARY_COLUMNS)
        w.writerow([repr(float(v)) for v in row])
    return path


def read_summary(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in r.items()} for r in csv.DictReader(fh)]
