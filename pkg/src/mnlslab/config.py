"""Run configuration: a YAML document with nested blocks and strict keys."""

from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from . import spectral
from .evolve import DEFAULT_CFL, NonlinearitySpec
from .gauge import FAMILIES, GaugePotential, coulomb_project, make_potential
from .grid import Grid


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class GridBlock:
    N: int = 32
    L: float = 8.0


@dataclass
class GaugeBlock:
    family: str = "zero"
    params: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)  # sampled: A1, A2, A3, A0 snapshot paths


@dataclass
class NlBlock:
    mu: int = 1
    p: float = 1.0


@dataclass
class SchemeBlock:
    name: str = "rk4"
    dt: float | str = "auto"
    T: float = 1.0
    output_stride: float = 0.1
    cfl: float = DEFAULT_CFL


@dataclass
class InitialBlock:
    kind: str = "gaussian"  # gaussian | random
    amplitude: float = 0.25
    width: float = 2.0
    center: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    kick: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    smoothing: float = 1.0  # random: spectral filter length


@dataclass
class AuditBlock:
    M: float = 1.0
    b: float = 0.75
    grid: GridBlock | None = None


@dataclass
class DiagnosticsBlock:
    conservation: bool = True
    balance: bool = True
    norms: bool = True
    smoothing: bool = True
    virial: bool = True
    epsilon_cells: float = 4.0
    save_snapshots: bool = False
    scatter_threshold: float = 0.01


@dataclass
class CounterexampleBlock:
    p: list = field(default_factory=lambda: [1.0, 0.0, 0.0])
    x0: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    rho: float = 1.0


@dataclass
class RunConfig:
    grid: GridBlock = field(default_factory=GridBlock)
    gauge: GaugeBlock = field(default_factory=GaugeBlock)
    nl: NlBlock = field(default_factory=NlBlock)
    scheme: SchemeBlock = field(default_factory=SchemeBlock)
    initial: InitialBlock = field(default_factory=InitialBlock)
    audit: AuditBlock = field(default_factory=AuditBlock)
    diagnostics: DiagnosticsBlock = field(default_factory=DiagnosticsBlock)
    counterexample: CounterexampleBlock = field(default_factory=CounterexampleBlock)
    seed: int = 0
    out: str = "run"
    base_dir: str = field(default=".", repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    # builders -----------------------------------------------------------

    def build_grid(self) -> Grid:
        return Grid(self.grid.N, self.grid.L)

    def build_nl(self) -> NonlinearitySpec:
        return NonlinearitySpec(self.nl.mu, self.nl.p)

    def build_potential(self, grid: Grid | None = None) -> GaugePotential:
        grid = grid or self.build_grid()
        g = self.gauge
        if g.family == "sampled":
            from .fieldio import load_field

            arrays = {}
            for key in ("A1", "A2", "A3", "A0"):
                path = Path(self.base_dir) / g.files[key]
                try:
                    fgrid, values, _ = load_field(path)
                except (OSError, ValueError) as exc:
                    raise ConfigError(f"gauge.files.{key}: {exc}") from None
                if fgrid != grid:
                    raise ConfigError(f"gauge.files.{key}: grid {fgrid} differs from run grid")
                arrays[key] = values.real
            params = {"A": np.stack([arrays["A1"], arrays["A2"], arrays["A3"]]),
                      "A0": arrays["A0"]}
            return coulomb_project(make_potential("sampled", params, grid))
        return coulomb_project(make_potential(g.family, dict(g.params), grid))

    def build_initial(self, grid: Grid | None = None) -> np.ndarray:
        grid = grid or self.build_grid()
        ini = self.initial
        x = grid.coords - np.asarray(ini.center, dtype=float)[:, None, None, None]
        r2 = np.sum(x**2, axis=0)
        envelope = np.exp(-r2 / (2.0 * ini.width**2))
        phase = np.exp(1j * np.einsum("j,j...->...", np.asarray(ini.kick, float), x))
        u = ini.amplitude * envelope * phase
        if ini.kind == "random":
            rng = np.random.default_rng(self.seed)
            noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
            filt = np.exp(-0.5 * grid.k_squared * ini.smoothing**2)
            noise = spectral.ifft(filt * spectral.fft(noise))
            noise /= np.max(np.abs(noise))
            u = u * noise
        return spectral.dealias(grid, u.astype(complex))

    def resolved_dt(self, grid: Grid) -> float:
        bound = self.scheme.cfl * grid.spacing**2
        return bound if self.scheme.dt == "auto" else float(self.scheme.dt)


_BLOCKS = {
    "grid": GridBlock, "gauge": GaugeBlock, "nl": NlBlock, "scheme": SchemeBlock,
    "initial": InitialBlock, "audit": AuditBlock, "diagnostics": DiagnosticsBlock,
    "counterexample": CounterexampleBlock,
}


def _build(cls, data, where):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(data).__name__}")
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}; allowed {sorted(names)}")
    kwargs = {}
    for k, v in data.items():
        if cls is AuditBlock and k == "grid" and v is not None:
            v = _build(GridBlock, v, f"{where}.grid")
        kwargs[k] = v
    return cls(**kwargs)


def _num(value, where, kind=float, positive=False, allow_zero=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    value = kind(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    if positive and (value < 0 or (value == 0 and not allow_zero)):
        raise ConfigError(f"{where}: must be positive, got {value!r}")
    return value


def _vec3(value, where):
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{where}: expected a list of 3 numbers")
    return [_num(v, f"{where}[{i}]") for i, v in enumerate(value)]


def validate(cfg: RunConfig) -> RunConfig:
    """Check every field; raises ConfigError naming the first bad one."""
    g = cfg.grid
    g.N = _num(g.N, "grid.N", int)
    g.L = _num(g.L, "grid.L", positive=True, allow_zero=False)
    if g.N < 8 or g.N & (g.N - 1):
        raise ConfigError(f"grid.N: must be a power of two >= 8, got {g.N}")
    if cfg.gauge.family not in FAMILIES:
        raise ConfigError(f"gauge.family: unknown family {cfg.gauge.family!r}; "
                          f"expected one of {list(FAMILIES)}")
    if not isinstance(cfg.gauge.params, dict):
        raise ConfigError("gauge.params: expected a mapping")
    for k, v in cfg.gauge.params.items():
        cfg.gauge.params[k] = _num(v, f"gauge.params.{k}")
    if cfg.gauge.family == "sampled":
        missing = {"A1", "A2", "A3", "A0"} - set(cfg.gauge.files or {})
        if missing:
            raise ConfigError(f"gauge.files: sampled family needs paths for {sorted(missing)}")
        extra = set(cfg.gauge.files) - {"A1", "A2", "A3", "A0"}
        if extra:
            raise ConfigError(f"gauge.files: unknown key(s) {sorted(extra)}")
    elif cfg.gauge.files:
        raise ConfigError("gauge.files: only used with family 'sampled'")
    else:
        try:
            make_potential(cfg.gauge.family, dict(cfg.gauge.params), Grid(8, 1.0))
        except ValueError as exc:
            raise ConfigError(f"gauge.params: {exc}") from None
    cfg.nl.mu = _num(cfg.nl.mu, "nl.mu", int)
    if cfg.nl.mu not in (-1, 0, 1):
        raise ConfigError(f"nl.mu: must be -1, 0 or 1, got {cfg.nl.mu}")
    cfg.nl.p = _num(cfg.nl.p, "nl.p", positive=True, allow_zero=False)
    s = cfg.scheme
    if s.name not in ("rk4", "strang"):
        raise ConfigError(f"scheme.name: expected 'rk4' or 'strang', got {s.name!r}")
    s.cfl = _num(s.cfl, "scheme.cfl", positive=True, allow_zero=False)
    s.T = _num(s.T, "scheme.T", positive=True, allow_zero=False)
    s.output_stride = _num(s.output_stride, "scheme.output_stride", positive=True,
                           allow_zero=False)
    n_out = round(s.T / s.output_stride)
    if abs(n_out * s.output_stride - s.T) > 1e-9 * s.T:
        raise ConfigError("scheme.output_stride: must divide scheme.T")
    if s.dt != "auto":
        s.dt = _num(s.dt, "scheme.dt", positive=True, allow_zero=False)
        bound = s.cfl * (2 * g.L / g.N) ** 2
        if s.dt > bound * (1 + 1e-12):
            raise ConfigError(f"scheme.dt: {s.dt} exceeds the stability bound "
                              f"{bound:.6g} = cfl·h²")
    ini = cfg.initial
    if ini.kind not in ("gaussian", "random"):
        raise ConfigError(f"initial.kind: expected 'gaussian' or 'random', got {ini.kind!r}")
    ini.amplitude = _num(ini.amplitude, "initial.amplitude")
    ini.width = _num(ini.width, "initial.width", positive=True, allow_zero=False)
    ini.smoothing = _num(ini.smoothing, "initial.smoothing", positive=True)
    ini.center = _vec3(ini.center, "initial.center")
    ini.kick = _vec3(ini.kick, "initial.kick")
    a = cfg.audit
    a.M = _num(a.M, "audit.M", positive=True, allow_zero=False)
    a.b = _num(a.b, "audit.b")
    if not 0 < a.b < 1:
        raise ConfigError(f"audit.b: must lie in (0, 1), got {a.b}")
    if a.grid is not None:
        a.grid.N = _num(a.grid.N, "audit.grid.N", int)
        a.grid.L = _num(a.grid.L, "audit.grid.L", positive=True, allow_zero=False)
        if a.grid.N < 8 or a.grid.N & (a.grid.N - 1):
            raise ConfigError("audit.grid.N: must be a power of two >= 8")
    d = cfg.diagnostics
    for name in ("conservation", "balance", "norms", "smoothing", "virial", "save_snapshots"):
        if not isinstance(getattr(d, name), bool):
            raise ConfigError(f"diagnostics.{name}: expected true or false")
    d.epsilon_cells = _num(d.epsilon_cells, "diagnostics.epsilon_cells", positive=True,
                           allow_zero=False)
    d.scatter_threshold = _num(d.scatter_threshold, "diagnostics.scatter_threshold",
                               positive=True, allow_zero=False)
    c = cfg.counterexample
    c.p = _vec3(c.p, "counterexample.p")
    c.x0 = _vec3(c.x0, "counterexample.x0")
    c.rho = _num(c.rho, "counterexample.rho", positive=True)
    cfg.seed = _num(cfg.seed, "seed", int, positive=True)
    if cfg.seed >= 2**64:
        raise ConfigError("seed: must fit in an unsigned 64-bit integer")
    if not isinstance(cfg.out, str):
        raise ConfigError("out: expected a path string")
    return cfg


def from_dict(data: dict | None, base_dir: str = ".") -> RunConfig:
    data = copy.deepcopy(data or {})
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a mapping")
    allowed = set(_BLOCKS) | {"seed", "out"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"config: unknown key(s) {sorted(unknown)}; allowed {sorted(allowed)}")
    kwargs = {name: _build(cls, data.get(name), name) for name, cls in _BLOCKS.items()}
    for k in ("seed", "out"):
        if k in data:
            kwargs[k] = data[k]
    try:
        cfg = RunConfig(**kwargs, base_dir=base_dir)
    except TypeError as exc:  # pragma: no cover - guarded by the key checks
        raise ConfigError(str(exc)) from None
    return validate(cfg)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: {path} is not valid YAML: {exc}") from None
    return from_dict(data, base_dir=str(path.parent))
