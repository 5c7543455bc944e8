"""Run configuration: JSON schema, dotted overrides and validation.

Every key has a default, so ``{}`` is a complete configuration. Unknown keys
and wrongly typed values raise :class:`SchemaError` naming the dotted key;
values outside their admissible range raise :class:`RangeError` naming the
leaf (``"sigma"``, ``"n_points"``, ...).
"""

from __future__ import annotations

import json
import logging
import math
import typing
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Optional, Union

from wavelab.errors import IoError, ParseError, RangeError, SchemaError
from wavelab.series import SERIES_FORMATS
from wavelab.spectral import DEFAULT_DEALIAS
from wavelab.timestepper import SCHEMES, StepperConfig
from wavelab.waterwave import PhysParams

logger = logging.getLogger(__name__)

INITIAL_KINDS: tuple[str, ...] = ("single_mode", "random_smooth", "from_checkpoint", "wavy")
TARGETS: tuple[str, ...] = ("W", "Q")

# ---------------------------------------------------------------------------
# Sections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridConfig:
    n_points: int = 256
    period: float = 2.0 * math.pi


@dataclass(frozen=True)
class InitialConfig:
    kind: str = "random_smooth"
    k: int = 1
    eps: float = 1e-2
    target: str = "W"
    seed: int = 0
    decay_rate: float = 0.2
    modes: int = 16
    path: Optional[str] = None
    truncation: Optional[int] = None


@dataclass(frozen=True)
class AnalysisConfig:
    zygmund_eps: float = 1.0 / 16.0
    sobolev_index: float = 2.0
    holder_index: float = 1.0
    eps1: float = 0.1
    eps2: float = 0.3
    truncation_offset: int = 3
    k_min: int = 4
    k_max: int = 8


@dataclass(frozen=True)
class ExperimentConfig:
    modes: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8)
    param_sets: tuple[tuple[float, ...], ...] = (
        (1.0, 1.0, 0.0),
        (1.0, 1.0, 2.0),
        (0.0, 1.0, 1.0),
        (1.0, 0.1, 0.5),
    )
    dt_halvings: int = 3
    ensemble: int = 10
    resolutions: tuple[int, ...] = (64, 128)
    truncations: tuple[int, ...] = (4, 5, 6, 7)
    t_end: float = 0.5
    tolerance: float = 1e-3
    wavy_target: float = 0.2


@dataclass(frozen=True)
class OutputConfig:
    out_dir: str = "."
    series_format: str = "csv"
    checkpoint_name: str = "checkpoint.wvl"


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    params: PhysParams = field(default_factory=PhysParams)
    initial: InitialConfig = field(default_factory=InitialConfig)
    stepper: StepperConfig = field(default_factory=StepperConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


# ---------------------------------------------------------------------------
# Typed coercion
# ---------------------------------------------------------------------------


def _coerce(key: str, value: Any, hint: Any) -> Any:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin is Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(key, value, inner[0])
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise SchemaError(key, f"{key} must be a list, got {type(value).__name__}.")
        item = args[0]
        return tuple(_coerce(f"{key}[{i}]", v, item) for i, v in enumerate(value))
    if hint is bool:
        if not isinstance(value, bool):
            raise SchemaError(key, f"{key} must be true or false, got {value!r}.")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(key, f"{key} must be an integer, got {value!r}.")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(key, f"{key} must be a number, got {value!r}.")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise SchemaError(key, f"{key} must be a string, got {value!r}.")
        return value
    raise SchemaError(key, f"{key} has unsupported type {hint!r}.")


def _build_section(section: str, cls: type, raw: Any) -> Any:
    if not isinstance(raw, dict):
        raise SchemaError(section, f"Section {section!r} must be an object.")
    hints = typing.get_type_hints(cls)
    known = {f.name for f in fields(cls) if f.init}
    for key in raw:
        if key not in known:
            raise SchemaError(f"{section}.{key}", f"Unknown configuration key {section}.{key}.")
    values = {k: _coerce(f"{section}.{k}", v, hints[k]) for k, v in raw.items()}
    return values


_SECTIONS: dict[str, type] = {
    "grid": GridConfig,
    "params": PhysParams,
    "initial": InitialConfig,
    "stepper": StepperConfig,
    "analysis": AnalysisConfig,
    "experiment": ExperimentConfig,
    "output": OutputConfig,
}

# ---------------------------------------------------------------------------
# Range validation
# ---------------------------------------------------------------------------


def _require(ok: bool, leaf: str, message: str) -> None:
    if not ok:
        raise RangeError(leaf, message)


def _check_ranges(section: str, v: dict[str, Any]) -> None:
    if section == "grid":
        n = v.get("n_points", GridConfig.n_points)
        _require(n >= 4 and n & (n - 1) == 0, "n_points", f"n_points must be a power of two >= 4, got {n}.")
        _require(v.get("period", 1.0) > 0, "period", "period must be positive.")
    elif section == "params":
        _require(v.get("g", 1.0) >= 0, "g", f"g must be >= 0, got {v.get('g')}.")
        _require(v.get("sigma", 1.0) > 0, "sigma", f"sigma must be > 0, got {v.get('sigma')}.")
        _require(math.isfinite(v.get("gamma", 0.0)), "gamma", "gamma must be finite.")
    elif section == "initial":
        _require(v.get("kind", "random_smooth") in INITIAL_KINDS, "kind",
                 f"initial.kind must be one of {INITIAL_KINDS}, got {v.get('kind')!r}.")
        _require(v.get("target", "W") in TARGETS, "target", f"target must be W or Q, got {v.get('target')!r}.")
        _require(v.get("k", 1) >= 1, "k", "k must be >= 1.")
        _require(v.get("eps", 1.0) > 0, "eps", "eps must be positive.")
        _require(v.get("decay_rate", 1.0) > 0, "decay_rate", "decay_rate must be positive.")
        _require(v.get("modes", 1) >= 1, "modes", "modes must be >= 1.")
        _require(v.get("seed", 0) >= 0, "seed", "seed must be >= 0.")
        trunc = v.get("truncation")
        _require(trunc is None or trunc >= 1, "truncation", "truncation must be >= 1.")
        if v.get("kind") == "from_checkpoint":
            _require(bool(v.get("path")), "path", "from_checkpoint needs initial.path.")
    elif section == "stepper":
        dt = v.get("dt")
        _require(dt is None or dt > 0, "dt", f"dt must be positive, got {dt}.")
        _require(v.get("scheme", "if_rk4") in SCHEMES, "scheme", f"scheme must be one of {SCHEMES}.")
        rule = v.get("dealias_rule", DEFAULT_DEALIAS)
        _require(0 < rule <= 1, "dealias_rule", f"dealias_rule must lie in (0, 1], got {rule}.")
        _require(v.get("t_end", 0.0) >= 0, "t_end", "t_end must be >= 0.")
        _require(v.get("diagnostics_stride", 1) >= 1, "diagnostics_stride", "diagnostics_stride must be >= 1.")
        _require(v.get("checkpoint_every", 0) >= 0, "checkpoint_every", "checkpoint_every must be >= 0.")
    elif section == "analysis":
        e1, e2 = v.get("eps1", 0.1), v.get("eps2", 0.3)
        _require(0 < e1 < e2 < 1, "eps1", f"cutoffs need 0 < eps1 < eps2 < 1, got {e1}, {e2}.")
        _require(v.get("zygmund_eps", 1.0) > 0, "zygmund_eps", "zygmund_eps must be positive.")
        _require(v.get("truncation_offset", 3) >= 1, "truncation_offset", "truncation_offset must be >= 1.")
        _require(v.get("k_min", 0) >= 0, "k_min", "k_min must be >= 0.")
        k_min, k_max = v.get("k_min", AnalysisConfig.k_min), v.get("k_max", AnalysisConfig.k_max)
        _require(k_max >= k_min + 2, "k_max", "k_max must exceed k_min by at least 2.")
    elif section == "experiment":
        _require(all(m >= 1 for m in v.get("modes", (1,))), "modes", "modes must be >= 1.")
        for ps in v.get("param_sets", ()):
            _require(len(ps) == 3, "param_sets", "each parameter set is [g, sigma, gamma].")
            _require(ps[0] >= 0, "g", "g must be >= 0.")
            _require(ps[1] > 0, "sigma", f"sigma must be > 0, got {ps[1]}.")
        _require(v.get("dt_halvings", 3) >= 2, "dt_halvings", "dt_halvings must be >= 2.")
        _require(v.get("ensemble", 1) >= 1, "ensemble", "ensemble must be >= 1.")
        for n in v.get("resolutions", (64,)):
            _require(n >= 4 and n & (n - 1) == 0, "resolutions", f"resolution {n} is not a power of two >= 4.")
        _require(v.get("t_end", 0.0) >= 0, "t_end", "t_end must be >= 0.")
        _require(v.get("tolerance", 1.0) > 0, "tolerance", "tolerance must be positive.")
        _require(v.get("wavy_target", 0.0) >= 0, "wavy_target", "wavy_target must be >= 0.")
    elif section == "output":
        _require(v.get("series_format", "csv") in SERIES_FORMATS, "series_format",
                 f"series_format must be one of {SERIES_FORMATS}.")


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def parse_override(item: str) -> tuple[list[str], Any]:
    """``"a.b=value"`` → (["a", "b"], value); values are JSON literals or strings."""
    if "=" not in item:
        raise ParseError(item, f"Override {item!r} is not of the form key=value.")
    key, raw = item.split("=", 1)
    path = [p for p in key.strip().split(".") if p]
    if len(path) < 2:
        raise ParseError(key, f"Override key {key!r} must be a dotted path such as params.sigma.")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_overrides(raw: dict[str, Any], overrides: Iterable[str]) -> dict[str, Any]:
    out = json.loads(json.dumps(raw))
    for item in overrides:
        path, value = parse_override(item)
        node = out
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise SchemaError(".".join(path), f"Cannot override inside non-object {part!r}.")
            node = child
        node[path[-1]] = value
    return out


def config_from_dict(raw: Any, overrides: Iterable[str] = ()) -> RunConfig:
    """Validate *raw* (after *overrides*) into a :class:`RunConfig`.

    Raises
    ------
    SchemaError
        Unknown key or wrong type.
    RangeError
        Value outside its range.
    """
    if not isinstance(raw, dict):
        raise SchemaError("<root>", "Configuration must be a JSON object.")
    raw = apply_overrides(raw, overrides)
    sections: dict[str, Any] = {}
    for name in raw:
        if name not in _SECTIONS:
            raise SchemaError(name, f"Unknown configuration section {name!r}.")
    for name, cls in _SECTIONS.items():
        values = _build_section(name, cls, raw.get(name, {}))
        _check_ranges(name, values)
        sections[name] = cls(**values)
    cfg = RunConfig(**sections)
    logger.debug("Configuration: %s", cfg)
    return cfg


def load_config(path: Optional[Path], overrides: Iterable[str] = ()) -> RunConfig:
    """Read and validate a JSON configuration; ``None`` means all defaults.

    Raises
    ------
    IoError
        If the file cannot be read.
    ParseError
        If it is not valid JSON.
    """
    if path is None:
        return config_from_dict({}, overrides)
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"Cannot read configuration {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("<root>", f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}.") from exc
    return config_from_dict(raw, overrides)


def config_to_dict(cfg: RunConfig) -> dict[str, Any]:
    """Plain JSON-ready dict; tuples become lists."""
    return json.loads(json.dumps(asdict(cfg)))


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"
