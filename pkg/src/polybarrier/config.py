"""Experiment configuration: flat key = value files with [section] headers.

Grammar (see README for the full key list)::

    [experiment]
    target = abs                # abs | runge | abs_sum | ck_spline:K
                                # | realizable:ACT | poly:a0,a1,...
    activation = tanh           # catalog name
    mode = analytic             # analytic | strip | gevrey
    dim = 1                     # 1, 2 or 3
    rho = 2.0                   # optional, analytic mode only
    safety = 0.5                # ellipse safety factor in (0, 1)

    [schedule]
    m = 2:16:2                  # start:stop:step (inclusive) or m1,m2,...
    B = const:1                 # const:c | poly:a  (m^a) | exp:a  (e^(a m))
    L = const:1                 # explicit alternative: rows = m B L; m B L; ...

    [fit]
    n_restarts = 16
    max_iters = 2000
    grid_size = 257             # per-axis points of the surrogate grid
    report_grid_size = 1028     # per-axis points of the sup-norm grid
    seed = 42
    initial_step = 0.5
    backtrack = 0.5

Inline comments start with '#' (';' separates explicit schedule rows).

Unknown sections or keys, malformed values and broken schedule rules are
configuration errors carrying a line/column position.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from typing import Optional

from .activations import catalog_names, get_activation
from .barrier import Schedule
from .network import FitConfig, StepRule

MODES = ("analytic", "strip", "gevrey")

_KNOWN_KEYS = {
    "experiment": {"target", "activation", "mode", "dim", "rho", "safety",
                   "e_grid_per_axis"},
    "schedule": {"m", "B", "L", "rows"},
    "fit": {"n_restarts", "max_iters", "grid_size", "report_grid_size",
            "seed", "initial_step", "backtrack"},
}


class ConfigError(ValueError):
    """Bad configuration; ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}, column {column if column is not None else 1}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class ExperimentConfig:
    target: str
    activation: str
    mode: str
    dim: int
    schedule: Schedule
    fit: FitConfig
    rho: Optional[float] = None
    safety: float = 0.5
    e_grid_per_axis: Optional[int] = None


def _locate(text: str, key: str) -> tuple:
    """Best-effort (line, column) of a key's value in the raw text."""
    for ln, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#")[0]
        if "=" not in stripped:
            continue
        k, _, v = stripped.partition("=")
        if k.strip() == key:
            col = raw.index("=") + 2 + (len(v) - len(v.lstrip()))
            return ln, col
    return None, None


def _rule(expr: str, text: str, key: str):
    """Parse a schedule rule: const:c, poly:a (m^a) or exp:a (e^(a m))."""
    kind, _, arg = expr.partition(":")
    kind = kind.strip()
    ln, col = _locate(text, key)
    try:
        value = float(arg)
    except ValueError:
        raise ConfigError(f"rule {expr!r} needs a numeric argument", ln, col)
    if not math.isfinite(value):
        raise ConfigError(f"rule argument must be finite in {expr!r}", ln, col)
    if kind == "const":
        if value <= 0:
            raise ConfigError(f"const rule must be positive in {expr!r}", ln, col)
        return lambda m: value
    if kind == "poly":
        return lambda m: float(m) ** value
    if kind == "exp":
        return lambda m: math.exp(value * m)
    raise ConfigError(
        f"unknown rule kind {kind!r} (use const, poly or exp)", ln, col
    )


def _parse_widths(spec: str, text: str):
    ln, col = _locate(text, "m")
    spec = spec.strip()
    try:
        if ":" in spec:
            parts = [int(tok) for tok in spec.split(":")]
            if len(parts) == 2:
                start, stop, step = parts[0], parts[1], 1
            elif len(parts) == 3:
                start, stop, step = parts
            else:
                raise ValueError
            if step < 1 or stop < start:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"bad width specification {spec!r}", ln, col) from None


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if getattr(exc, "errors", None) else None
        raise ConfigError(f"cannot parse config: {exc.message.splitlines()[0]}",
                          line, 1) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("cannot parse config: missing section header",
                          exc.lineno, 1) from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in {k.lower() for k in _KNOWN_KEYS[section]}:
                ln, col = _locate(text, key)
                raise ConfigError(f"unknown key {key!r} in [{section}]", ln, col)

    def get(section, key, default=None):
        if parser.has_option(section, key):
            return parser.get(section, key)
        return default

    def get_typed(section, key, cast, default):
        raw = get(section, key)
        if raw is None:
            return default
        try:
            return cast(raw)
        except ValueError:
            ln, col = _locate(text, key)
            raise ConfigError(
                f"bad value {raw!r} for {key} (expected {cast.__name__})", ln, col
            ) from None

    target = get("experiment", "target", "abs")
    activation = get("experiment", "activation", "tanh")
    mode = get("experiment", "mode", "analytic")
    dim = get_typed("experiment", "dim", int, 1)
    rho = get_typed("experiment", "rho", float, None)
    safety = get_typed("experiment", "safety", float, 0.5)
    e_grid = get_typed("experiment", "e_grid_per_axis", int, None)

    if mode not in MODES:
        ln, col = _locate(text, "mode")
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}", ln, col)
    if dim not in (1, 2, 3):
        ln, col = _locate(text, "dim")
        raise ConfigError(f"dim must be 1, 2 or 3, got {dim}", ln, col)
    if activation not in catalog_names():
        ln, col = _locate(text, "activation")
        raise ConfigError(
            f"unknown activation {activation!r}; catalog: {', '.join(catalog_names())}",
            ln, col,
        )
    get_activation(activation)
    if rho is not None and rho <= 1:
        ln, col = _locate(text, "rho")
        raise ConfigError(f"rho must exceed 1, got {rho}", ln, col)
    if not (0 < safety < 1):
        ln, col = _locate(text, "safety")
        raise ConfigError(f"safety must lie in (0, 1), got {safety}", ln, col)

    rows_spec = get("schedule", "rows")
    try:
        if rows_spec is not None:
            rows = []
            for chunk in rows_spec.split(";"):
                if not chunk.strip():
                    continue
                fields = chunk.split()
                if len(fields) != 3:
                    raise ConfigError(
                        f"schedule row {chunk.strip()!r} needs 'm B L'",
                        *_locate(text, "rows"),
                    )
                rows.append((int(fields[0]), float(fields[1]), float(fields[2])))
            schedule = Schedule(tuple(rows))
        else:
            widths = _parse_widths(get("schedule", "m", "2:16:2"), text)
            b_rule = _rule(get("schedule", "B", "const:1"), text, "B")
            l_rule = _rule(get("schedule", "L", "const:1"), text, "L")
            schedule = Schedule(tuple((m, b_rule(m), l_rule(m)) for m in widths))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad schedule: {exc}", *_locate(text, "rows")) from None

    default_grid = 257 if dim == 1 else 33
    grid_size = get_typed("fit", "grid_size", int, default_grid)
    report_default = 4 * grid_size
    fit_kwargs = dict(
        n_restarts=get_typed("fit", "n_restarts", int, 16),
        max_iters=get_typed("fit", "max_iters", int, 2000),
        grid_size=grid_size,
        report_grid_size=get_typed("fit", "report_grid_size", int, report_default),
        seed=get_typed("fit", "seed", int, 42),
        step_rule=StepRule(
            initial_step=get_typed("fit", "initial_step", float, 0.5),
            backtrack=get_typed("fit", "backtrack", float, 0.5),
        ),
    )
    try:
        fit = FitConfig(**fit_kwargs)
    except ValueError as exc:
        raise ConfigError(f"bad fit configuration: {exc}") from None

    return ExperimentConfig(
        target=target,
        activation=activation,
        mode=mode,
        dim=dim,
        schedule=schedule,
        fit=fit,
        rho=rho,
        safety=safety,
        e_grid_per_axis=e_grid,
    )


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())
