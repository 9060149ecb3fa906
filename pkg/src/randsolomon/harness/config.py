"""Experiment configuration: a versioned ``key = value`` file format.

One setting per line, ``#`` starts a comment, blank lines are ignored.
Strategy parameters use a ``strategy.`` prefix, e.g. ``strategy.victims = 0``.
Every error names the source and line it came from.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from ..adversary import STRATEGIES, AdversarySpec, StrategySpec
from ..codec import CodeParams, ParameterError, derive_params
from ..consensus import Policy
from ..gf import SUPPORTED_WIDTHS
from ..netsim import Schedule
from ..protocol import ProtocolConfig

SCHEMA_VERSION = 1

# pinned for the statistical experiments
MASTER_SEED = 20211


class ConfigError(ValueError):
    def __init__(self, message: str, origin: str = "<config>", line: int = 0):
        self.message = message
        self.origin = origin
        self.line = line
        where = f"{origin}:{line}" if line else origin
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class _Field:
    name: str
    kind: str  # int | auto_int | bool | str | ids
    default: Any
    help: str


FIELDS: tuple[_Field, ...] = (
    _Field("schema", "int", SCHEMA_VERSION, "config format version"),
    _Field("n", "int", 4, "number of processes N (>= 4)"),
    _Field("f", "auto_int", None, "fault bound; auto = floor((N-1)/3)"),
    _Field("z", "auto_int", None, "symbol width in bits (8, 16, 32); auto = smallest that fits"),
    _Field("b", "auto_int", None, "symbols per block; auto = ceil(256/z)"),
    _Field("relax", "bool", False, "allow b*z < 256 bits (small examples only)"),
    _Field("seed", "int", 0, "seed of the first run; run i uses seed + i"),
    _Field("runs", "int", 1, "number of runs"),
    _Field("gst", "int", 20, "global stabilisation time (ticks)"),
    _Field("tau", "int", 5, "post-GST delay bound (ticks)"),
    _Field("pre_gst_cap", "int", 30, "pre-GST delay bound (ticks)"),
    _Field("start_spread", "int", 0, "processes start at a seeded tick in [0, start_spread]"),
    _Field("byzantine", "ids", (), "comma-separated Byzantine ids; empty = none; auto = the last f ids"),
    _Field("strategy", "str", "honest", "adversary strategy: " + ", ".join(sorted(STRATEGIES))),
    _Field("collusion", "bool", True, "Byzantine processes share one blackboard"),
    _Field("policy", "str", Policy.FIRST.value, "consensus policy: first or adversary"),
    _Field("view_changes", "bool", False, "charge 1+f consensus rounds under the adversary policy"),
    _Field("retrace", "bool", True, "re-encode check on decoded numbers (disable only to demo the attack)"),
)

_BY_NAME = {f.name: f for f in FIELDS}
_PREFIX = "strategy."


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 4
    f: Optional[int] = None
    z: Optional[int] = None
    b: Optional[int] = None
    relax: bool = False
    seed: int = 0
    runs: int = 1
    gst: int = 20
    tau: int = 5
    pre_gst_cap: int = 30
    start_spread: int = 0
    byzantine: Any = ()  # tuple of ids, or "auto"
    strategy: str = "honest"
    strategy_params: tuple[tuple[str, Any], ...] = ()
    collusion: bool = True
    policy: str = Policy.FIRST.value
    view_changes: bool = False
    retrace: bool = True
    # key -> (origin, line); only for diagnostics
    sources: tuple[tuple[str, tuple[str, int]], ...] = field(default=(), compare=False, repr=False)

    # -- derived ----------------------------------------------------------

    @property
    def fault_bound(self) -> int:
        return self.f if self.f is not None else (self.n - 1) // 3

    @property
    def byzantine_ids(self) -> tuple[int, ...]:
        if self.byzantine == "auto":
            return tuple(range(self.n - self.fault_bound, self.n))
        return tuple(self.byzantine)

    def code_params(self) -> CodeParams:
        return derive_params(self.n, self.fault_bound, self.z, self.b, self.relax)

    def protocol_config(self) -> ProtocolConfig:
        p = self.code_params()
        return ProtocolConfig(p.n, p.f, p.z, p.b, self.relax, self.retrace)

    def adversary(self) -> AdversarySpec:
        ids = self.byzantine_ids
        if not ids:
            return AdversarySpec.none()
        spec = StrategySpec(self.strategy, tuple(sorted(self.strategy_params)))
        return AdversarySpec(tuple((p, spec) for p in sorted(ids)), self.collusion)

    def seeds(self) -> list[int]:
        return [self.seed + i for i in range(self.runs)]

    def schedule(self, seed: int) -> Schedule:
        return Schedule(seed=seed, gst=self.gst, tau=self.tau, pre_gst_cap=self.pre_gst_cap, start_spread=self.start_spread)

    # -- validation -------------------------------------------------------

    def _where(self, *keys: str) -> tuple[str, int]:
        src = dict(self.sources)
        for k in keys:
            if k in src:
                return src[k]
        return ("<config>", 0)

    def _fail(self, message: str, *keys: str) -> ConfigError:
        origin, line = self._where(*keys)
        return ConfigError(message, origin, line)

    def validate(self) -> "ExperimentConfig":
        """Check every rule a run depends on; errors point at the offending line."""
        n, f = self.n, self.fault_bound
        if n < 4:
            raise self._fail(f"N must be at least 4, got {n}", "n")
        if f < 0 or n < 3 * f + 1:
            raise self._fail(f"need N >= 3f+1, got N={n}, f={f}", "f", "n")
        if self.z is not None and self.z not in SUPPORTED_WIDTHS:
            raise self._fail(f"z must be one of {SUPPORTED_WIDTHS}, got {self.z}", "z")
        if self.b is not None and self.b < 1:
            raise self._fail(f"b must be positive, got {self.b}", "b")
        try:
            params = self.code_params()
        except ParameterError as exc:
            keys = ("relax", "b", "z") if "relax" in str(exc) else ("b", "z", "n")
            raise self._fail(str(exc), *keys) from None
        for name in ("runs", "tau", "pre_gst_cap"):
            if getattr(self, name) < 1:
                raise self._fail(f"{name} must be at least 1", name)
        for name in ("gst", "start_spread"):
            if getattr(self, name) < 0:
                raise self._fail(f"{name} must be non-negative", name)
        if self.policy not in {p.value for p in Policy}:
            raise self._fail(f"unknown policy {self.policy!r}; expected first or adversary", "policy")
        if self.strategy not in STRATEGIES:
            raise self._fail(f"unknown strategy {self.strategy!r}; known: {', '.join(sorted(STRATEGIES))}", "strategy")
        ids = self.byzantine_ids
        if len(set(ids)) != len(ids):
            raise self._fail("duplicate Byzantine id", "byzantine")
        for pid in ids:
            if not 0 <= pid < n:
                raise self._fail(f"Byzantine id {pid} out of range 0..{n - 1}", "byzantine")
        if len(ids) > f:
            raise self._fail(f"{len(ids)} Byzantine processes exceed f={f}", "byzantine", "f")
        try:
            self.adversary().validate(params)
        except (TypeError, ValueError) as exc:
            keys = tuple(_PREFIX + k for k, _ in self.strategy_params) + ("strategy",)
            raise self._fail(f"strategy {self.strategy!r}: {exc}", *keys) from None
        return self

    # -- rendering --------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"schema = {SCHEMA_VERSION}"]
        for fd in FIELDS[1:]:
            lines.append(f"{fd.name} = {_render(getattr(self, fd.name))}")
        for k, v in self.strategy_params:
            lines.append(f"{_PREFIX}{k} = {_render(v)}")
        return "\n".join(lines) + "\n"


def _render(v: Any) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (tuple, list)):
        return ",".join(str(x) for x in v)
    return str(v)


# -- value parsing ----------------------------------------------------------------


def _parse_int(raw: str) -> int:
    try:
        return int(raw, 0)
    except ValueError:
        raise ValueError(f"expected an integer, got {raw!r}") from None


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected true or false, got {raw!r}")


def _parse_value(kind: str, raw: str) -> Any:
    if kind == "int":
        return _parse_int(raw)
    if kind == "auto_int":
        return None if raw.lower() == "auto" else _parse_int(raw)
    if kind == "bool":
        return _parse_bool(raw)
    if kind == "ids":
        if raw.lower() == "auto":
            return "auto"
        return tuple(_parse_int(x.strip()) for x in raw.split(",") if x.strip())
    return raw


def parse_literal(raw: str) -> Any:
    """Best-effort typing for strategy parameters."""
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", "auto", ""):
        return None
    if "," in raw:
        return tuple(parse_literal(x.strip()) for x in raw.split(",") if x.strip())
    try:
        return int(raw, 0)
    except ValueError:
        return raw


def _split_line(text: str) -> Optional[tuple[str, str]]:
    body = text.split("#", 1)[0].strip()
    if not body:
        return None
    if "=" not in body:
        raise ValueError("expected 'key = value'")
    key, value = body.split("=", 1)
    key = key.strip()
    if not key:
        raise ValueError("missing key before '='")
    return key, value.strip()


def _assign(values: dict, params: dict, sources: dict, key: str, raw: str, origin: str, line: int) -> None:
    if key.startswith(_PREFIX):
        name = key[len(_PREFIX):]
        if not name.isidentifier():
            raise ConfigError(f"bad strategy parameter name {name!r}", origin, line)
        params[name] = parse_literal(raw)
    elif key in _BY_NAME:
        try:
            values[key] = _parse_value(_BY_NAME[key].kind, raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", origin, line) from None
    else:
        raise ConfigError(f"unknown key {key!r}", origin, line)
    sources[key] = (origin, line)


def _build(values: dict, params: dict, sources: dict, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    values = dict(values)
    values.pop("schema", None)
    if base is None:
        base = ExperimentConfig()
    merged = dict(base.strategy_params)
    if "strategy" in values and values["strategy"] != base.strategy:
        merged = {}
    merged.update(params)
    old_sources = dict(base.sources)
    old_sources.update(sources)
    return dataclasses.replace(
        base,
        **values,
        strategy_params=tuple(sorted(merged.items())),
        sources=tuple(sorted(old_sources.items())),
    )


def parse_config(text: str, origin: str = "<config>") -> ExperimentConfig:
    """Parse and validate a config file."""
    values: dict[str, Any] = {}
    params: dict[str, Any] = {}
    sources: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        try:
            kv = _split_line(line)
        except ValueError as exc:
            raise ConfigError(str(exc), origin, lineno) from None
        if kv is None:
            continue
        key, raw = kv
        if key in sources:
            raise ConfigError(f"duplicate key {key!r} (first set on line {sources[key][1]})", origin, lineno)
        _assign(values, params, sources, key, raw, origin, lineno)
    if "schema" not in values:
        raise ConfigError(f"missing 'schema = {SCHEMA_VERSION}' line", origin, 0)
    if values["schema"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema {values['schema']}; this version reads schema {SCHEMA_VERSION}",
            origin, sources["schema"][1],
        )
    return _build(values, params, sources).validate()


def apply_overrides(cfg: ExperimentConfig, overrides: Iterable[str], origin: str = "--set") -> ExperimentConfig:
    """Apply ``key=value`` overrides; ``line`` in errors is the override's position."""
    values: dict[str, Any] = {}
    params: dict[str, Any] = {}
    sources: dict[str, tuple[str, int]] = {}
    for i, item in enumerate(overrides, 1):
        try:
            kv = _split_line(item)
        except ValueError as exc:
            raise ConfigError(str(exc), origin, i) from None
        if kv is None:
            continue
        if kv[0] == "schema":
            raise ConfigError("schema cannot be overridden", origin, i)
        _assign(values, params, sources, kv[0], kv[1], origin, i)
    return _build(values, params, sources, cfg).validate()


def defaults_text() -> str:
    """The default config, one documented key per line."""
    width = max(len(f"{fd.name} = {_render(fd.default)}") for fd in FIELDS)
    out = [f"# randsolomon experiment config (schema {SCHEMA_VERSION})"]
    for fd in FIELDS:
        setting = f"{fd.name} = {_render(fd.default)}"
        out.append(f"{setting.ljust(width)}  # {fd.help}")
    out.append("# strategy parameters: strategy.<name> = value, e.g. strategy.victims = 0")
    return "\n".join(out) + "\n"


# -- presets ----------------------------------------------------------------------


def paper_example() -> ExperimentConfig:
    """N=4, f=1, one 8-bit symbol per block, with process 3 equivocating.

    Process 3 sends two commitments whose codewords are wrong at different
    positions and the consensus adversary picks an RNL that holds one of them,
    so retrace nullifies it.
    """
    return ExperimentConfig(
        n=4, f=1, z=8, b=1, relax=True, seed=0, runs=1,
        byzantine=(3,), strategy="equivocate", policy=Policy.ADVERSARY.value,
    ).validate()


PRESETS = {"paper-example": paper_example}


__all__: Sequence[str] = (
    "ConfigError", "ExperimentConfig", "FIELDS", "MASTER_SEED", "PRESETS", "SCHEMA_VERSION",
    "apply_overrides", "defaults_text", "paper_example", "parse_config", "parse_literal",
)
