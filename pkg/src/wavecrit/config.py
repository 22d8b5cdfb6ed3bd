"""Line-oriented system description files.

    [system]
    dimension = 3
    fields = phi1, phi2

    [[term]]
    equation = phi1
    source = phi2
    derivative = none      # none | dt | du | dv
    power = 3/2

    [data.phi1]
    kind = compact         # compact | tail
    amplitude = 0.01

    [grid]                 # optional simulator defaults
    h = 0.03125

Exponents and weights are read exactly (``p/q`` or decimal strings);
coefficients, amplitudes and grid values are floats.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .decay import DERIVATIVES, DataSpec, NonlinearTerm, WaveSystem


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line, self.path = line, path
        where = f"{path or '<config>'}:{line}: " if line is not None else ""
        super().__init__(where + message)


TERM_KEYS = {"equation", "source", "derivative", "power", "coefficient", "t_weight", "u_weight"}
DATA_KEYS = {"kind", "tail_exponent", "amplitude", "radius", "profile"}
GRID_KEYS = {"h", "u_max", "v_max", "stretch", "uniform_radius"}
SYSTEM_KEYS = {"dimension", "fields"}

_SECTION = re.compile(r"^\[(\[)?\s*([A-Za-z_][\w.]*)\s*\]?\]$")


@dataclass
class ConfigFile:
    system: WaveSystem
    grid: dict = field(default_factory=dict)


def exact(text: str) -> Fraction:
    """Exact rational from '3', '-1/2', '2.41' or '1e-3'."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational number: {text!r}") from None


def _split(raw: str) -> str:
    return raw.split("#", 1)[0].strip()


def parse_text(text: str, path: str | None = None) -> ConfigFile:
    sections: list[tuple[str, int, dict]] = []  # (name, line, {key: (value, line)})
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _split(raw)
        if not line:
            continue
        if line.startswith("["):
            m = _SECTION.match(line)
            if not m or (m.group(1) is not None) != line.endswith("]]"):
                raise ConfigError(f"malformed section header {line!r}", lineno, path)
            name = m.group(2)
            if m.group(1) and name != "term":
                raise ConfigError(f"unknown array section [[{name}]]", lineno, path)
            if not m.group(1) and name == "term":
                raise ConfigError("terms are declared with [[term]]", lineno, path)
            current = {}
            sections.append((name, lineno, current))
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno, path)
        if current is None:
            raise ConfigError("key outside of any section", lineno, path)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in current:
            raise ConfigError(f"duplicate key {key!r}", lineno, path)
        current[key] = (value, lineno)
    return _build(sections, path)


def _check_keys(entries: dict, allowed: set, what: str, path):
    for key, (_, lineno) in entries.items():
        if key not in allowed:
            raise ConfigError(f"unknown field {key!r} in {what}", lineno, path)


def _build(sections, path) -> ConfigFile:
    systems = [s for s in sections if s[0] == "system"]
    if len(systems) != 1:
        line = systems[1][1] if len(systems) > 1 else None
        raise ConfigError("exactly one [system] section is required", line, path)
    _, sys_line, entries = systems[0]
    _check_keys(entries, SYSTEM_KEYS, "[system]", path)
    if "fields" not in entries:
        raise ConfigError("[system] needs 'fields'", sys_line, path)
    fields = tuple(f.strip() for f in entries["fields"][0].split(","))
    if not all(re.fullmatch(r"[A-Za-z_]\w*", f) for f in fields):
        raise ConfigError("field names must be identifiers", entries["fields"][1], path)
    if len(set(fields)) != len(fields):
        raise ConfigError("field names must be distinct", entries["fields"][1], path)
    n = 3
    if "dimension" in entries:
        value, lineno = entries["dimension"]
        try:
            n = int(value)
        except ValueError:
            raise ConfigError(f"dimension must be an integer, got {value!r}", lineno, path) from None
        if n < 2:
            raise ConfigError("dimension must be at least 2", lineno, path)

    def field_index(value, lineno):
        if value not in fields:
            raise ConfigError(f"reference to undeclared field {value!r}", lineno, path)
        return fields.index(value)

    def number(entries, key, conv, default):
        if key not in entries:
            return default
        value, lineno = entries[key]
        try:
            return conv(value)
        except ValueError as exc:
            raise ConfigError(str(exc), lineno, path) from None

    terms, data, grid = [], {}, {}
    for name, line, entries in sections:
        if name == "system":
            continue
        if name == "term":
            _check_keys(entries, TERM_KEYS, "[[term]]", path)
            for key in ("equation", "source", "power"):
                if key not in entries:
                    raise ConfigError(f"[[term]] needs {key!r}", line, path)
            deriv, dline = entries.get("derivative", ("none", line))
            if deriv not in DERIVATIVES + ("null",):
                raise ConfigError(f"unknown derivative kind {deriv!r}", dline, path)
            power = number(entries, "power", exact, None)
            if power <= 1:
                raise ConfigError("power must exceed 1", entries["power"][1], path)
            terms.append(NonlinearTerm(
                field_index(*entries["equation"]), field_index(*entries["source"]), deriv, power,
                number(entries, "coefficient", float, 1.0),
                number(entries, "t_weight", exact, Fraction(0)),
                number(entries, "u_weight", exact, Fraction(0))))
        elif name.startswith("data."):
            target = name[5:]
            field_index(target, line)
            if target in data:
                raise ConfigError(f"duplicate data section for {target!r}", line, path)
            _check_keys(entries, DATA_KEYS, f"[{name}]", path)
            kwargs = {}
            if "kind" in entries:
                kwargs["kind"] = entries["kind"][0]
            if "profile" in entries:
                kwargs["profile"] = entries["profile"][0]
            kwargs["tail_exponent"] = number(entries, "tail_exponent", exact, None)
            kwargs["amplitude"] = number(entries, "amplitude", float, 1.0)
            kwargs["radius"] = number(entries, "radius", float, 1.0)
            try:
                data[target] = DataSpec(**kwargs)
            except ValueError as exc:
                raise ConfigError(str(exc), line, path) from None
        elif name == "grid":
            _check_keys(entries, GRID_KEYS, "[grid]", path)
            grid = {k: number(entries, k, float, None) for k in entries}
        else:
            raise ConfigError(f"unknown section [{name}]", line, path)
    try:
        system = WaveSystem(n, fields, tuple(terms), data)
    except ValueError as exc:
        raise ConfigError(str(exc), sys_line, path) from None
    return ConfigFile(system, grid)


def load(path) -> ConfigFile:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"no such config file: {p}")
    return parse_text(p.read_text(), str(p))


def parse_config(path) -> WaveSystem:
    return load(path).system


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


def print_config(sys: WaveSystem, grid: dict | None = None) -> str:
    out = ["[system]", f"dimension = {sys.n}", f"fields = {', '.join(sys.fields)}"]
    for t in sys.terms:
        out += ["", "[[term]]",
                f"equation = {sys.fields[t.equation]}",
                f"source = {sys.fields[t.source]}",
                f"derivative = {t.derivative}",
                f"power = {_fmt(t.power)}"]
        if t.coefficient != 1.0:
            out.append(f"coefficient = {_fmt(t.coefficient)}")
        if t.t_weight:
            out.append(f"t_weight = {_fmt(t.t_weight)}")
        if t.u_weight:
            out.append(f"u_weight = {_fmt(t.u_weight)}")
    for name in sys.fields:
        spec = sys.data.get(name)
        if spec is None:
            continue
        out += ["", f"[data.{name}]", f"kind = {spec.kind}"]
        if spec.tail_exponent is not None:
            out.append(f"tail_exponent = {_fmt(spec.tail_exponent)}")
        out += [f"amplitude = {_fmt(spec.amplitude)}", f"radius = {_fmt(spec.radius)}",
                f"profile = {spec.profile}"]
    if grid:
        out += ["", "[grid]"] + [f"{k} = {_fmt(v)}" for k, v in grid.items()]
    return "\n".join(out) + "\n"
