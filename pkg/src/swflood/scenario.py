"""Scenario files and the run driver.

A scenario is a TOML file. Only ``duration`` and a ``[terrain]`` table are
required; everything else falls back to :data:`DEFAULTS`::

    duration = 72000.0          # s
    cadence = 3600.0            # snapshot interval, s (default: duration)

    [terrain]
    path = "dem.asc"            # ESRI ASCII grid, or a generated bed:
    # generator = "bumpy"       # "bumpy" | "flat"
    # nx = 1024, ny = 1024, cellsize = 50.0, seed = 0, amplitude = 5.0

    [physics]                   # g, manning (number or raster path), viscosity,
    manning = 0.03              # omega_z or latitude, wind_drag, rho_air,
                                # rho_water, eps_dry
    [timestep]
    courant = 0.5               # also dt_max, dt_min

    [boundaries]
    default = "reflective"      # per edge: west, east, south, north

    [[sources]]
    type = "discharge"          # "discharge" [m^3/s] or "rain" [m/s]
    cells = [[512, 512]]        # or region = [i0, j0, i1, j1], half-open
    value = 1.0e5               # or hydrograph = [[t, value], ...]
    velocity = [0.0, 0.0]

    [wind]
    velocity = [0.0, 0.0]       # or series = [[t, wx, wy], ...]

    [initial]
    type = "dry"                # "dry" | "level" (with level = ...) |
                                # "raster" (path = ..., field = "depth"|"level")
    [engine]
    block_size = 16             # also skip, workers, backend

    [nesting]
    one_way = false             # also reflux
    [[nesting.windows]]
    i0 = 100                    # j0, nx, ny, refinement, optional terrain path
                                # covering the window at the fine resolution

Cell indices are ``(i, j)`` = (column from the west, row from the south).
Relative paths are resolved against the scenario file's directory.
"""

from __future__ import annotations

import json
import math
import sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .forcing import Hydrograph, PointSource, RainSource, WindForcing, omega_z_from_latitude, rect_cells
from .grid import BOUNDARY_KINDS, Boundaries, FlowState, PhysicalParams, Terrain, total_volume
from .nesting import NestedGrid, NestedModel, Window
from .raster import load_raster_field, load_terrain, read_ascii_grid, write_snapshot
from .stepper import STAGES, StageTimings, Stepper, TimestepControl

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


def _field_defaults(cls) -> dict:
    return {f.name: f.default for f in fields(cls)}


# Every default in one place; the dataclasses hold the same values.
DEFAULTS = {
    "physics": _field_defaults(PhysicalParams),  # g 9.81, manning 0.03, eps_dry 1e-6, C_a 1e-3 ...
    "timestep": _field_defaults(TimestepControl),  # courant 0.5, dt_max 60 s, dt_min 1e-8 s
    "boundaries": {"default": "reflective"},
    "engine": {"block_size": 16, "skip": True, "workers": 1, "backend": "auto"},
    "initial": {"type": "dry"},
    "nesting": {"one_way": False, "reflux": True, "refinement": 4},
    "terrain": {"cellsize": 50.0, "seed": 0, "amplitude": 5.0},
}

BALANCE_TOLERANCE = 1.0e-10
_MISSING = object()


class _Table:
    """A TOML table being validated; remembers which keys were read."""

    def __init__(self, data, where: str, origin: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{origin}: {where or 'top level'}: expected a table")
        self.d = data
        self.where = where
        self.origin = origin
        self.used = set()

    def path(self, key) -> str:
        return f"{self.where}.{key}" if self.where else str(key)

    def fail(self, key, msg) -> ConfigError:
        return ConfigError(f"{self.origin}: {self.path(key)}: {msg}")

    def has(self, key) -> bool:
        return key in self.d

    def raw(self, key, default=_MISSING):
        self.used.add(key)
        if key not in self.d:
            if default is _MISSING:
                raise self.fail(key, "required key missing")
            return default
        return self.d[key]

    def number(self, key, default=_MISSING, *, positive=False, nonneg=False, integer=False):
        v = self.raw(key, default)
        if v is None:
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise self.fail(key, f"expected a number, got {v!r}")
        if integer and not (isinstance(v, int) or float(v).is_integer()):
            raise self.fail(key, f"expected an integer, got {v!r}")
        if not math.isfinite(v):
            raise self.fail(key, "must be finite")
        if positive and not v > 0:
            raise self.fail(key, f"must be positive, got {v!r}")
        if nonneg and v < 0:
            raise self.fail(key, f"must be non-negative, got {v!r}")
        return int(v) if integer else float(v)

    def string(self, key, default=_MISSING, choices=None):
        v = self.raw(key, default)
        if v is not None and not isinstance(v, str):
            raise self.fail(key, f"expected a string, got {v!r}")
        if choices is not None and v not in choices:
            raise self.fail(key, f"must be one of {', '.join(map(repr, choices))}, got {v!r}")
        return v

    def boolean(self, key, default=_MISSING):
        v = self.raw(key, default)
        if not isinstance(v, bool):
            raise self.fail(key, f"expected true or false, got {v!r}")
        return v

    def table(self, key) -> "_Table":
        return _Table(self.raw(key, {}), self.path(key), self.origin)

    def tables(self, key) -> list:
        v = self.raw(key, [])
        if not isinstance(v, list):
            raise self.fail(key, "expected an array of tables")
        return [_Table(t, f"{self.path(key)}[{k}]", self.origin) for k, t in enumerate(v)]

    def matrix(self, key, ncols, default=_MISSING) -> np.ndarray | None:
        v = self.raw(key, default)
        if v is None:
            return None
        try:
            a = np.array(v, dtype=float)
        except (TypeError, ValueError):
            raise self.fail(key, "expected an array of numbers") from None
        if a.ndim == 1:
            a = a[:, None] if ncols == 1 else a[None, :]
        if a.ndim != 2 or a.shape[1] != ncols or len(a) == 0:
            raise self.fail(key, f"expected a non-empty list of {ncols}-element rows")
        if not np.all(np.isfinite(a)):
            raise self.fail(key, "must be finite")
        return a

    def done(self) -> None:
        extra = sorted(set(self.d) - self.used)
        if extra:
            raise self.fail(extra[0], "unknown key" + (f" (also: {', '.join(extra[1:])})" if extra[1:] else ""))


@dataclass
class WindowSpec:
    window: Window
    refinement: int = 4
    terrain_path: Path | None = None

    def build(self, parent: Terrain) -> NestedGrid:
        bed = None
        if self.terrain_path is not None:
            a, hdr = read_ascii_grid(self.terrain_path)
            want = (self.window.ny * self.refinement, self.window.nx * self.refinement)
            if a.shape != want:
                raise ConfigError(f"{self.terrain_path}: window terrain is {a.shape[1]}x{a.shape[0]}, "
                                  f"expected {want[1]}x{want[0]}")
            if hdr.nodata is not None:
                a = np.where(a == hdr.nodata, 1.0e4, a)
            bed = a[::-1]
        return NestedGrid(parent, self.window, self.refinement, fine_bed=bed)


@dataclass
class InitialSpec:
    kind: str = "dry"
    level: float | None = None
    path: Path | None = None
    field: str = "depth"


@dataclass
class ScenarioConfig:
    terrain: Terrain
    duration: float
    cadence: float
    params: PhysicalParams = field(default_factory=PhysicalParams)
    control: TimestepControl = field(default_factory=TimestepControl)
    boundaries: Boundaries = field(default_factory=Boundaries)
    sources: list = field(default_factory=list)
    wind: WindForcing = field(default_factory=WindForcing)
    initial: InitialSpec = field(default_factory=InitialSpec)
    block_size: int = 16
    skip: bool = True
    workers: int = 1
    backend: str | None = None
    windows: list = field(default_factory=list)
    one_way: bool = False
    reflux: bool = True
    path: Path | None = None
    terrain_label: str = ""

    def __post_init__(self):
        if not self.duration > 0:
            raise ConfigError(f"duration must be positive, got {self.duration}")
        if not self.cadence > 0:
            raise ConfigError(f"cadence must be positive, got {self.cadence}")

    @property
    def name(self) -> str:
        return self.path.stem if self.path is not None else "scenario"

    def with_overrides(self, *, workers=None, skip=None, block_size=None) -> "ScenarioConfig":
        kw = {k: v for k, v in (("workers", workers), ("skip", skip), ("block_size", block_size))
              if v is not None}
        return replace(self, **kw)

    def snapshot_times(self) -> list:
        n = int(math.floor(self.duration / self.cadence))
        return [k * self.cadence for k in range(n + 1)]

    def initial_state(self) -> FlowState:
        ini, ter = self.initial, self.terrain
        if ini.kind == "dry":
            return FlowState.dry(ter)
        if ini.kind == "level":
            return FlowState.still_water(ter, ini.level, self.params.eps_dry)
        a = load_raster_field(ini.path, ter)
        H = np.maximum(a - ter.b, 0.0) if ini.field == "level" else a
        if np.any(H < 0):
            raise ConfigError(f"{ini.path}: negative depth in initial raster")
        H = np.where(H <= self.params.eps_dry, 0.0, H)
        return FlowState(H, np.zeros_like(H), np.zeros_like(H))

    def stepper(self) -> Stepper:
        return Stepper(self.terrain, self.params, boundaries=self.boundaries, control=self.control,
                       wind=self.wind, sources=self.sources, block_size=self.block_size,
                       skip=self.skip, workers=self.workers, backend=self.backend)

    def model(self) -> tuple[Stepper, NestedModel | None]:
        st = self.stepper()
        if not self.windows:
            return st, None
        nests = [w.build(self.terrain) for w in self.windows]
        return st, NestedModel(st, nests, one_way=self.one_way, reflux=self.reflux)


def _resolve(base: Path, p: str) -> Path:
    q = Path(p).expanduser()
    return q if q.is_absolute() else base / q


def _terrain(t: _Table, base: Path, seed: int | None) -> tuple[Terrain, str]:
    from .validation.terrains import bumpy_bed

    if t.has("path") and t.has("generator"):
        raise t.fail("generator", "give either path or generator, not both")
    if t.has("path"):
        p = _resolve(base, t.string("path"))
        t.done()
        if not p.is_file():
            raise t.fail("path", f"file not found: {p}")
        return load_terrain(p), str(p)
    gen = t.string("generator", choices=("bumpy", "flat"))
    nx = t.number("nx", integer=True, positive=True)
    ny = t.number("ny", nx, integer=True, positive=True)
    h = t.number("cellsize", DEFAULTS["terrain"]["cellsize"], positive=True)
    s = t.number("seed", DEFAULTS["terrain"]["seed"], integer=True, nonneg=True)
    amp = t.number("amplitude", DEFAULTS["terrain"]["amplitude"], nonneg=True)
    t.done()
    if seed is not None:
        s = seed
    b = bumpy_bed(nx, ny, seed=s, amplitude=amp) if gen == "bumpy" else np.zeros((ny, nx))
    return Terrain(b, h), f"{gen} {nx}x{ny} seed={s}"


def _physics(t: _Table, base: Path, terrain: Terrain) -> PhysicalParams:
    d = DEFAULTS["physics"]
    kw = {k: t.number(k, d[k]) for k in ("g", "viscosity", "wind_drag", "rho_air", "rho_water", "eps_dry")}
    m = t.raw("manning", d["manning"])
    if isinstance(m, str):
        kw["manning"] = load_raster_field(_resolve(base, m), terrain)
    else:
        kw["manning"] = t.number("manning", d["manning"], nonneg=True)
    if t.has("omega_z") and t.has("latitude"):
        raise t.fail("latitude", "give omega_z or latitude, not both")
    if t.has("latitude"):
        lat = t.number("latitude")
        if not -90.0 <= lat <= 90.0:
            raise t.fail("latitude", f"must lie in [-90, 90], got {lat}")
        kw["omega_z"] = omega_z_from_latitude(lat)
    else:
        kw["omega_z"] = t.number("omega_z", d["omega_z"])
    t.done()
    try:
        return PhysicalParams(**kw)
    except ValueError as exc:
        raise ConfigError(f"{t.origin}: physics: {exc}") from None


def _series(t: _Table, scalar_key: str, ncols: int):
    """(times, values) from either a constant or a ``hydrograph``/``series`` table."""
    key = "hydrograph" if ncols == 1 else "series"
    if t.has(key) and t.has(scalar_key):
        raise t.fail(key, f"give {scalar_key} or {key}, not both")
    if t.has(key):
        a = t.matrix(key, ncols + 1)
        if np.any(np.diff(a[:, 0]) <= 0):
            raise t.fail(key, "times must be strictly increasing")
        return a[:, 0], a[:, 1:]
    if ncols == 1:
        return [0.0], [[t.number(scalar_key)]]
    return [0.0], t.matrix(scalar_key, 1, default=[0.0] * ncols).T


def _cells(t: _Table, terrain: Terrain) -> np.ndarray:
    if t.has("cells") == t.has("region"):
        raise t.fail("cells", "give exactly one of cells or region")
    nx, ny = terrain.nx, terrain.ny
    if t.has("cells"):
        c = t.matrix("cells", 2)
        if not np.all(c == np.round(c)):
            raise t.fail("cells", "cell indices must be integers")
        c = c.astype(np.int64)
        bad = (c[:, 0] < 0) | (c[:, 0] >= nx) | (c[:, 1] < 0) | (c[:, 1] >= ny)
        if bad.any():
            i, j = c[np.argmax(bad)]
            raise t.fail("cells", f"cell ({i}, {j}) outside the {nx}x{ny} grid")
        return c
    r = t.matrix("region", 4).ravel()
    if len(r) != 4 or not np.all(r == np.round(r)):
        raise t.fail("region", "expected [i0, j0, i1, j1] integers")
    i0, j0, i1, j1 = (int(v) for v in r)
    if not (0 <= i0 < i1 <= nx and 0 <= j0 < j1 <= ny):
        raise t.fail("region", f"[{i0}, {j0}, {i1}, {j1}] is empty or outside the {nx}x{ny} grid")
    return rect_cells(i0, j0, i1, j1)


def _source(t: _Table, terrain: Terrain):
    kind = t.string("type", "discharge", choices=("discharge", "rain"))
    cells = _cells(t, terrain)
    times, vals = _series(t, "value", 1)
    vel = tuple(t.matrix("velocity", 1, default=[0.0, 0.0]).ravel())
    if len(vel) != 2:
        raise t.fail("velocity", "expected [vx, vy]")
    t.done()
    series = Hydrograph(times, vals)
    if kind == "rain":
        return RainSource(cells, series, velocity=vel)
    return PointSource(cells, series, velocity=vel)


def _wind(t: _Table) -> WindForcing:
    times, vals = _series(t, "velocity", 2)
    t.done()
    if len(times) == 1:
        return WindForcing.constant(*vals[0])
    return WindForcing.from_samples(times, vals[:, 0], vals[:, 1])


def _initial(t: _Table, base: Path) -> InitialSpec:
    kind = t.string("type", DEFAULTS["initial"]["type"], choices=("dry", "level", "raster"))
    if kind == "level":
        spec = InitialSpec(kind, level=t.number("level"))
    elif kind == "raster":
        p = _resolve(base, t.string("path"))
        if not p.is_file():
            raise t.fail("path", f"file not found: {p}")
        spec = InitialSpec(kind, path=p, field=t.string("field", "depth", choices=("depth", "level")))
    else:
        spec = InitialSpec()
    t.done()
    return spec


def _windows(t: _Table, base: Path, terrain: Terrain):
    d = DEFAULTS["nesting"]
    one_way = t.boolean("one_way", d["one_way"])
    reflux = t.boolean("reflux", d["reflux"])
    out = []
    for w in t.tables("windows"):
        win = Window(w.number("i0", integer=True, nonneg=True), w.number("j0", integer=True, nonneg=True),
                     w.number("nx", integer=True, positive=True), w.number("ny", integer=True, positive=True))
        r = w.number("refinement", d["refinement"], integer=True, positive=True)
        p = w.string("terrain", None)
        p = _resolve(base, p) if p is not None else None
        if p is not None and not p.is_file():
            raise w.fail("terrain", f"file not found: {p}")
        w.done()
        try:
            win.check_inside(terrain.shape)
        except ConfigError as exc:
            raise ConfigError(f"{w.origin}: {w.where}: {exc}") from None
        out.append(WindowSpec(win, r, p))
    for a in range(len(out)):
        for c in range(a + 1, len(out)):
            if not out[a].window.separated_from(out[c].window):
                raise t.fail("windows", f"windows {a} and {c} overlap or touch")
    t.done()
    return out, one_way, reflux


def parse_scenario(data: dict, base: Path, *, origin: str = "<scenario>",
                   seed: int | None = None) -> ScenarioConfig:
    """Validate an already-parsed TOML document."""
    top = _Table(data, "", origin)
    duration = top.number("duration", positive=True)
    cadence = top.number("cadence", duration, positive=True)
    terrain, label = _terrain(top.table("terrain"), base, seed)
    params = _physics(top.table("physics"), base, terrain)

    t = top.table("timestep")
    d = DEFAULTS["timestep"]
    try:
        control = TimestepControl(t.number("courant", d["courant"]), t.number("dt_max", d["dt_max"]),
                                  t.number("dt_min", d["dt_min"]))
    except ValueError as exc:
        raise ConfigError(f"{origin}: timestep: {exc}") from None
    t.done()

    t = top.table("boundaries")
    dflt = t.string("default", DEFAULTS["boundaries"]["default"], choices=BOUNDARY_KINDS)
    sides = {s: t.string(s, dflt, choices=BOUNDARY_KINDS) for s in ("west", "east", "south", "north")}
    t.done()

    sources = [_source(s, terrain) for s in top.tables("sources")]
    wind = _wind(top.table("wind"))
    initial = _initial(top.table("initial"), base)

    t = top.table("engine")
    d = DEFAULTS["engine"]
    block = t.number("block_size", d["block_size"], integer=True, positive=True)
    skip = t.boolean("skip", d["skip"])
    workers = t.number("workers", d["workers"], integer=True, positive=True)
    be = t.string("backend", d["backend"], choices=("auto", "cython", "numpy"))
    t.done()

    windows, one_way, reflux = _windows(top.table("nesting"), base, terrain)
    top.done()
    return ScenarioConfig(
        terrain=terrain, duration=duration, cadence=cadence, params=params, control=control,
        boundaries=Boundaries(**sides), sources=sources, wind=wind, initial=initial,
        block_size=block, skip=skip, workers=workers, backend=None if be == "auto" else be,
        windows=windows, one_way=one_way, reflux=reflux, terrain_label=label)


def load_scenario(path, *, seed: int | None = None) -> ScenarioConfig:
    """Read and validate a scenario file.

    ``seed`` replaces the seed of a generated terrain.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    cfg = parse_scenario(data, path.resolve().parent, origin=str(path), seed=seed)
    cfg.path = path
    return cfg


# -- run driver ----------------------------------------------------------------


@dataclass
class MassLedger:
    """Volume budget of a run [m^3]; ``residual`` should be round-off."""

    initial: float = 0.0
    final: float = 0.0
    sources: float = 0.0
    outflow: float = 0.0
    clamp: float = 0.0
    unrecovered: float = 0.0

    @property
    def residual(self) -> float:
        return self.final - (self.initial + self.sources - self.outflow + self.clamp + self.unrecovered)

    @property
    def relative(self) -> float:
        scale = max(abs(self.initial), abs(self.final), abs(self.sources), abs(self.outflow), 1e-300)
        return abs(self.residual) / scale

    @property
    def balanced(self) -> bool:
        return self.relative <= BALANCE_TOLERANCE

    def as_dict(self) -> dict:
        return {"initial_volume": self.initial, "final_volume": self.final,
                "source_volume": self.sources, "outflow_volume": self.outflow,
                "clamp_volume": self.clamp, "unrecovered_volume": self.unrecovered,
                "residual": self.residual, "relative_residual": self.relative,
                "balanced": self.balanced}


@dataclass
class RunResult:
    state: FlowState
    ledger: MassLedger
    timings: StageTimings
    steps: int
    taus: list
    snapshots: list
    wall_seconds: float
    out_dir: Path | None = None

    @property
    def max_speed(self) -> float:
        return self.snapshots[-1]["max_speed"] if self.snapshots else 0.0


class _Budget:
    """Accumulates ledger terms with compensated sums."""

    def __init__(self):
        self.terms = {"sources": [], "outflow": [], "clamp": [], "unrecovered": []}

    def add(self, **kw):
        for k, v in kw.items():
            self.terms[k].append(v)

    def fill(self, ledger: MassLedger) -> MassLedger:
        for k, v in self.terms.items():
            setattr(ledger, k, math.fsum(v))
        return ledger


def _nested_terms(model: NestedModel, rep, budget: _Budget) -> None:
    """Ledger terms of a two-way coupled step.

    Global cells under a window are overwritten by the fine solution, so
    their sources and clamps are replaced by the fine grid's.
    """
    st = model.stepper
    g = rep.global_report
    h2 = st.terrain.h ** 2
    inside_src = inside_clamp = 0.0
    for n in model.nests:
        sl = n.window.slices
        inside_src += rep.tau * h2 * float(st._src_half.sigma[sl].sum())
        inside_clamp += float(st._deficit[sl].sum()) * h2
    budget.add(sources=g.source_volume - inside_src, outflow=g.outflow_volume,
               clamp=g.clamp_volume - inside_clamp + rep.fine_clamp_volume,
               unrecovered=rep.reflux_loss)
    budget.add(sources=rep.fine_source_volume)


def _window_terrain(parent: Terrain, n: NestedGrid) -> Terrain:
    w, r = n.window, n.r
    origin = (parent.origin[0] + w.i0 * parent.h, parent.origin[1] + w.j0 * parent.h)
    return Terrain(n.terrain.b[n.interior], parent.h / r, origin=origin)


def run_scenario(cfg: ScenarioConfig, out_dir=None, *, log=None) -> RunResult:
    """Simulate ``cfg`` for its duration, writing snapshots when ``out_dir`` is set.

    Snapshots are taken at every multiple of the cadence up to the duration,
    ``floor(duration / cadence) + 1`` in all. Writes ``summary.csv`` (one
    row per snapshot), ``steps.csv`` (tau history) and ``report.json``.
    """
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.csv").unlink(missing_ok=True)
    stepper, model = cfg.model()
    coupled = model is not None and not model.one_way
    state = cfg.initial_state()
    ter, eps = cfg.terrain, cfg.params.eps_dry
    if model is not None:
        model.initialize(state)
        wter = [_window_terrain(ter, n) for n in model.nests]

    def volume():
        return model.system_volume(state) if coupled else total_volume(state, ter)

    ledger = MassLedger(initial=volume())
    budget = _Budget()
    timings = StageTimings(steps=0)
    taus, actives, subs, snaps = [], [], [], []

    def on_step(_, rep):
        grep = rep.global_report if model is not None else rep
        timings.add(grep.timings)
        taus.append(rep.tau)
        actives.append(grep.active_fraction)
        if coupled:
            _nested_terms(model, rep, budget)
        else:
            budget.add(sources=grep.source_volume, outflow=grep.outflow_volume, clamp=grep.clamp_volume)
        if model is not None:
            subs.append(sum(rep.substeps))

    def snapshot(k):
        tau = taus[-1] if taus else 0.0
        ux, uy = state.velocities(eps)
        row = {"t": state.t, "volume": volume(), "wet_fraction": float((state.H > eps).mean()),
               "max_speed": float(np.hypot(ux, uy).max()), "tau": tau}
        snaps.append(row)
        if out is not None:
            write_snapshot(state, ter, state.t, out, index=k, tau=tau, eps_dry=eps)
            if model is not None:
                for m, (n, wt) in enumerate(zip(model.nests, wter)):
                    fs = n.state
                    sub = FlowState(fs.H[n.interior], fs.HU[n.interior], fs.HV[n.interior], fs.t)
                    write_snapshot(sub, wt, state.t, out / f"window{m}", index=k, tau=tau, eps_dry=eps)
        if log is not None:
            log(f"t={state.t:12.2f} s  steps={len(taus):7d}  volume={row['volume']:.6e} m3  "
                f"wet={row['wet_fraction']:.4f}  max|U|={row['max_speed']:.4f} m/s")

    wall = time.perf_counter()
    runner = model if model is not None else stepper
    snapshot(0)
    times = cfg.snapshot_times()
    for k, tk in enumerate(times[1:], start=1):
        runner.run(state, tk - state.t, callback=on_step)
        state.t = tk
        snapshot(k)
    if state.t < cfg.duration:
        runner.run(state, cfg.duration - state.t, callback=on_step)
        state.t = cfg.duration
    wall = time.perf_counter() - wall

    ledger.final = volume()
    budget.fill(ledger)
    result = RunResult(state, ledger, timings, len(taus), taus, snaps, wall, out)
    if out is not None:
        _write_steps(out / "steps.csv", taus, actives, subs)
        report = {
            "scenario": cfg.name, "terrain": cfg.terrain_label,
            "grid": [ter.nx, ter.ny], "cellsize": ter.h,
            "backend": stepper.backend_name, "workers": cfg.workers, "skip": cfg.skip,
            "block_size": cfg.block_size, "duration": cfg.duration, "cadence": cfg.cadence,
            "steps": len(taus), "wall_seconds": wall,
            "tau": {"min": min(taus, default=0.0), "max": max(taus, default=0.0),
                    "mean": float(np.mean(taus)) if taus else 0.0},
            "mass_ledger": ledger.as_dict(),
            "stage_seconds": timings.seconds,
            "stage_percent": {k: 100.0 * v for k, v in timings.shares().items()},
            "snapshots": snaps,
        }
        (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    return result


def _write_steps(path: Path, taus, actives, subs) -> None:
    with open(path, "w") as fh:
        fh.write("step,tau,active_fraction" + (",substeps" if subs else "") + "\n")
        for k, (t, a) in enumerate(zip(taus, actives), start=1):
            fh.write(f"{k},{t!r},{a!r}" + (f",{subs[k - 1]}" if subs else "") + "\n")


def bench_scenario(cfg: ScenarioConfig, steps: int = 20) -> dict:
    """Time ``steps`` steps from the initial state with skipping off and on."""
    out = {}
    for skip in (False, True):
        st = cfg.with_overrides(skip=skip).stepper()
        state = cfg.initial_state()
        st.step(state.copy())  # warm-up, allocations
        tm = StageTimings(steps=0)
        wall = time.perf_counter()
        for _ in range(steps):
            tm.add(st.step(state).timings)
        out["skip" if skip else "noskip"] = {"wall": time.perf_counter() - wall, "timings": tm,
                                            "state": state}
    out["speedup"] = out["noskip"]["wall"] / out["skip"]["wall"]
    out["identical"] = out["skip"]["state"].bitwise_equal(out["noskip"]["state"])
    out["stages"] = STAGES
    return out
