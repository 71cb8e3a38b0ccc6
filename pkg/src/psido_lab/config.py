"""Run configuration: a strict line-oriented ``section.key = value`` format.

Grammar
-------
One assignment per line, ``#`` starts a comment outside quoted strings, blank
lines are ignored.  Values are integers, reals, ``true``/``false`` or
double-quoted strings (JSON escapes).  List-valued settings are quoted strings
of comma-separated items, e.g. ``output.formats = "json,csv"``.

Every key has a default, so the empty text is a valid configuration with all
experiments enabled.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

SECTIONS: dict[str, dict[str, object]] = {
    "grid": {"dim": 1, "N": 128, "L": 8.0},
    "run": {"seed": 1},
    "identity": {"enabled": True, "pairs": 50},
    "domination": {
        "enabled": True,
        "symbols": "bessel_multiplier,oscillating_exotic,rough_sample",
        "delta": 0.5,
        "inputs": 20,
    },
    "lemma_scaling": {
        "enabled": True,
        "lemma": "L2",
        "symbol": "random_phase",
        "m": -1.0,
        "delta": 0.5,
        "l": 0.25,
        "j_min": 4,
        "j_max": 7,
        "N": 256,
        "L": 2.0,
    },
    "schedule": {"enabled": True, "deltas": "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9", "dims": "1,2"},
    "fefferman_stein": {"enabled": True, "weights": "one,power:0.5", "bumps": 5},
    "weak_type": {"enabled": True, "symbol": "bessel_multiplier", "inputs": 5},
    "counterexample": {
        "enabled": True,
        "m": -0.2,
        "a": 0.9,
        "b": 0.9,
        "eta": 0.25,
        "eps_ladder": "0.2,0.14,0.1,0.07,0.05",
        "N": 1024,
        "L": 8.0,
        "contrast_N": "256,512,1024",
        "singular": "cell_average",
    },
    "fio_check": {"enabled": True, "inputs": 10, "speed": 1.0},
    "tolerances": {
        "identity": 1e-10,
        "adjoint": 1e-10,
        "domination_spread": 10.0,
        "domination_stability": 2.0,
        "slope": 0.3,
        "r_squared": 0.9,
        "fs_stability": 2.0,
        "weak_type_stability": 2.0,
        "convolution": 1e-8,
        "bessel_slope": 0.2,
        "monotone_dip": 0.1,
        "contrast_stable": 1.2,
        "contrast_growth": 1.3,
        "fio": 1e-12,
    },
    "output": {"directory": "psido-lab-out", "formats": "json,csv"},
}

EXPERIMENTS = ("identity", "domination", "lemma_scaling", "schedule", "fefferman_stein",
               "weak_type", "counterexample", "fio_check")

_INT = re.compile(r"[+-]?\d+\Z")
_KEY = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\.([A-Za-z_][A-Za-z0-9_]*)\Z")


class ConfigParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class RunConfig:
    values: dict[str, dict[str, object]] = field(default_factory=lambda: {
        s: dict(keys) for s, keys in SECTIONS.items()})

    def __getitem__(self, section: str) -> dict[str, object]:
        return self.values[section]

    @property
    def seed(self) -> int:
        return int(self.values["run"]["seed"])

    def enabled(self) -> list[str]:
        return [e for e in EXPERIMENTS if self.values[e]["enabled"]]

    def set(self, section: str, key: str, value, line: int | None = None) -> None:
        if section not in SECTIONS:
            raise ConfigParseError(f"unknown section {section!r}", line)
        if key not in SECTIONS[section]:
            raise ConfigParseError(f"unknown key {section}.{key}", line)
        self.values[section][key] = _coerce(SECTIONS[section][key], value, f"{section}.{key}", line)

    def echo(self) -> str:
        """Effective configuration in the input grammar; parsing it gives this config back."""
        lines = []
        for s, keys in self.values.items():
            for k, v in keys.items():
                lines.append(f"{s}.{k} = {format_value(v)}")
        return "\n".join(lines) + "\n"


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return json.dumps(v, ensure_ascii=False)


def split_list(text: str, cast=str) -> list:
    return [cast(p.strip()) for p in str(text).split(",") if p.strip()]


def _coerce(default, value, name: str, line: int | None):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigParseError(f"{name} expects true/false", line)
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigParseError(f"{name} expects an integer", line)
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigParseError(f"{name} expects a real", line)
        if not math.isfinite(value):
            raise ConfigParseError(f"{name} must be finite", line)
        return float(value)
    if not isinstance(value, str):
        raise ConfigParseError(f"{name} expects a quoted string", line)
    return value


def _strip_comment(line: str) -> str:
    quoted = False
    escaped = False
    for i, ch in enumerate(line):
        if escaped:
            escaped = False
        elif ch == "\\" and quoted:
            escaped = True
        elif ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def parse_value(text: str, line: int | None = None):
    text = text.strip()
    if not text:
        raise ConfigParseError("missing value", line)
    if text in ("true", "false"):
        return text == "true"
    if text.startswith('"'):
        try:
            v = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigParseError(f"bad string literal {text}", line) from exc
        if not isinstance(v, str):
            raise ConfigParseError(f"bad string literal {text}", line)
        return v
    if _INT.match(text):
        return int(text)
    try:
        v = float(text)
    except ValueError:
        raise ConfigParseError(f"cannot parse value {text!r}", line) from None
    if not math.isfinite(v):
        raise ConfigParseError(f"non-finite value {text!r}", line)
    return v


def validate(cfg: RunConfig) -> None:
    g = cfg["grid"]
    if g["dim"] not in (1, 2):
        raise ConfigParseError("grid.dim must be 1 or 2")
    for sec in ("grid", "lemma_scaling", "counterexample"):
        if cfg[sec]["N"] < 2 or cfg[sec]["N"] % 2:
            raise ConfigParseError(f"{sec}.N must be an even integer >= 2")
        if not cfg[sec]["L"] > 0:
            raise ConfigParseError(f"{sec}.L must be positive")
    for k, v in cfg["tolerances"].items():
        if not v > 0:
            raise ConfigParseError(f"tolerances.{k} must be positive")
    for sec, key in (("identity", "pairs"), ("domination", "inputs"), ("fefferman_stein", "bumps"),
                     ("weak_type", "inputs"), ("fio_check", "inputs")):
        if cfg[sec][key] < 1:
            raise ConfigParseError(f"{sec}.{key} must be at least 1")
    fmts = split_list(cfg["output"]["formats"])
    if not set(fmts) <= {"json", "csv"}:
        raise ConfigParseError("output.formats must be a subset of json,csv")
    try:
        split_list(cfg["counterexample"]["eps_ladder"], float)
        split_list(cfg["counterexample"]["contrast_N"], int)
        split_list(cfg["schedule"]["deltas"], float)
        split_list(cfg["schedule"]["dims"], int)
    except ValueError as exc:
        raise ConfigParseError(f"bad list value: {exc}") from None
    if cfg["lemma_scaling"]["lemma"] not in ("L1", "L2", "L3", "L4", "L5"):
        raise ConfigParseError("lemma_scaling.lemma must be one of L1..L5")
    if cfg["counterexample"]["singular"] not in ("cell_average", "half_cell"):
        raise ConfigParseError("counterexample.singular must be cell_average or half_cell")


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises :class:`ConfigParseError` with the offending line number."""
    cfg = RunConfig()
    seen: dict[str, int] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError("expected 'section.key = value'", no)
        lhs, rhs = line.split("=", 1)
        m = _KEY.match(lhs.strip())
        if not m:
            raise ConfigParseError(f"malformed key {lhs.strip()!r}", no)
        name = m.group(0)
        if name in seen:
            raise ConfigParseError(f"{name} already set on line {seen[name]}", no)
        seen[name] = no
        cfg.set(m.group(1), m.group(2), parse_value(rhs, no), no)
        try:
            validate(cfg)
        except ConfigParseError as exc:
            raise ConfigParseError(str(exc), no) from None
    validate(cfg)
    return cfg
