"""Run configuration: dataclasses plus a strict YAML loader.

Schema version 1::

    version: 1
    slab:
      dim: 1                  # 1, 2 or 3
      n_horizontal: 1         # ignored in 1D
      n_vertical: 64
      order: 6
      vertical_scheme: fd     # fd | sbp
    initial_data:
      density: linear         # linear | quadratic | square | constant
      velocity: zero          # zero | gradient | rotational
      amplitude: 0.0
      vacuum_slope_check: 1.0e-6
    time:
      T_final: 0.05
      dt: 1.0e-4              # fixed step; omit to derive one from cfl
      cfl: 0.25
      integrator_order: 4
    dynamics:
      form: vorticity         # vorticity | conservative
      stack_depth: 4
      filter: false
      stack_check: true
    diagnostics:
      cadence: 0.005
      bound_C: 1.0
      bound_P: [0, 0, 1]      # ascending coefficients, here P(f) = f^2
    output:
      dir: out

Unknown keys are rejected with their line number.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .dynamics import DENSITIES, VELOCITIES
from .errors import ConfigError
from .grid import VERTICAL_SCHEMES

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "SlabConfig",
    "InitialDataConfig",
    "TimeConfig",
    "DynamicsConfig",
    "DiagnosticsConfig",
    "OutputConfig",
    "RunConfig",
    "load_config",
    "parse_config",
]


@dataclass
class SlabConfig:
    dim: int = 1
    n_horizontal: int = 1
    n_vertical: int = 64
    order: int = 6
    vertical_scheme: str = "fd"


@dataclass
class InitialDataConfig:
    density: str = "linear"
    velocity: str = "zero"
    amplitude: float = 0.0
    vacuum_slope_check: float = 1e-6


@dataclass
class TimeConfig:
    T_final: float = 0.05
    dt: float | None = 1e-4
    cfl: float = 0.25
    integrator_order: int = 4


@dataclass
class DynamicsConfig:
    form: str = "vorticity"
    stack_depth: int = 4
    filter: bool = False
    stack_check: bool = True


@dataclass
class DiagnosticsConfig:
    cadence: float = 0.005
    bound_C: float = 1.0
    bound_P: list = field(default_factory=lambda: [0.0, 0.0, 1.0])


@dataclass
class OutputConfig:
    dir: str = "out"


@dataclass
class RunConfig:
    slab: SlabConfig = field(default_factory=SlabConfig)
    initial_data: InitialDataConfig = field(default_factory=InitialDataConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    version: int = SCHEMA_VERSION

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        t, d = self.time, self.dynamics
        if not t.T_final >= 0 or not math.isfinite(t.T_final):
            raise ConfigError("time.T_final must be a finite non-negative number")
        if t.dt is not None and not t.dt > 0:
            raise ConfigError("time.dt must be positive")
        if not t.cfl > 0:
            raise ConfigError("time.cfl must be positive")
        if t.integrator_order != 4:
            raise ConfigError("time.integrator_order: only classical RK4 (4) is available")
        if d.form not in ("vorticity", "conservative"):
            raise ConfigError(f"dynamics.form must be vorticity or conservative, got {d.form!r}")
        if not 1 <= d.stack_depth <= 8:
            raise ConfigError("dynamics.stack_depth must be in 1..8")
        if not self.diagnostics.cadence > 0:
            raise ConfigError("diagnostics.cadence must be positive")
        s, ic = self.slab, self.initial_data
        if s.dim not in (1, 2, 3):
            raise ConfigError(f"slab.dim must be 1, 2 or 3, got {s.dim}")
        if s.vertical_scheme not in VERTICAL_SCHEMES:
            raise ConfigError(f"slab.vertical_scheme must be one of {VERTICAL_SCHEMES}")
        if s.order not in (2, 4, 6, 8) or (s.vertical_scheme == "sbp" and s.order != 6):
            raise ConfigError("slab.order must be 2, 4, 6 or 8 (6 for the sbp scheme)")
        if s.n_vertical < max(8, s.order + 1) or (s.dim > 1 and s.n_horizontal < 4):
            raise ConfigError("slab resolution too small (n_vertical >= 8, n_horizontal >= 4)")
        if ic.density not in DENSITIES:
            raise ConfigError(f"initial_data.density must be one of {DENSITIES}")
        if ic.velocity not in VELOCITIES or (ic.velocity == "rotational" and s.dim == 1):
            raise ConfigError(f"initial_data.velocity must be one of {VELOCITIES} (rotational needs dim >= 2)")
        if self.version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config version {self.version}")

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {
    "slab": SlabConfig,
    "initial_data": InitialDataConfig,
    "time": TimeConfig,
    "dynamics": DynamicsConfig,
    "diagnostics": DiagnosticsConfig,
    "output": OutputConfig,
}


def _line(node) -> int:
    return node.start_mark.line + 1


def _coerce(value, default, where: str):
    """Light type check against the dataclass default."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float) or default is None:
        if value is None and default is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
        ):
            raise ConfigError(f"{where}: expected a list of numbers, got {value!r}")
        return [float(x) for x in value]
    return value


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    """Parse YAML text into a RunConfig, rejecting unknown keys."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: YAML parse error: {exc}") from None
    if root is None:
        data, root = {}, None
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    node_of = {k.value: (k, v) for k, v in root.value} if root is not None else {}
    kwargs = {}
    for key, value in data.items():
        knode, vnode = node_of[key]
        where = f"{source}:{_line(knode)}: {key}"
        if key == "version":
            kwargs["version"] = _coerce(value, SCHEMA_VERSION, where)
            continue
        if key not in _SECTIONS:
            raise ConfigError(f"{where}: unknown section (allowed: version, {', '.join(_SECTIONS)})")
        cls = _SECTIONS[key]
        value = value or {}
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: section must be a mapping")
        defaults = cls()
        allowed = {f.name for f in fields(cls)}
        sub_nodes = {k.value: k for k, _ in vnode.value} if vnode.value else {}
        sub = {}
        for name, item in value.items():
            w = f"{source}:{_line(sub_nodes[name])}: {key}.{name}"
            if name not in allowed:
                raise ConfigError(f"{w}: unknown key (allowed: {', '.join(sorted(allowed))})")
            sub[name] = _coerce(item, getattr(defaults, name), w)
        kwargs[key] = cls(**sub)
    try:
        return RunConfig(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return parse_config(text, str(path))
