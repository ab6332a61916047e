"""The declarative network file format and the exact curve dump format.

A network file is line-oriented ``key = value`` text under bracketed
section headers (``[units]``, ``[server NAME]``, ``[flow NAME]``,
``[window NAME]``, ``[analysis]``).  Keys are case-sensitive, ``#`` and
``;`` start comments.  Numbers are integers, decimals, or ``p/q``
rationals, optionally followed by a unit token; a bare number takes the
default unit of its quantity kind from the ``[units]`` section.  Every
quantity is converted to bits and seconds here, at the boundary, and is
exact from then on.

The curve dump format (:func:`dump_curve_text`) lists a function's
breakpoints exactly: value at zero, the transient segments, then one
period plus its repetition step, or an ``infinite-after`` marker.
:func:`parse_curve_text` reverses it bit for bit.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass
from fractions import Fraction

from .curves import (
    Curve,
    constant_rate,
    rate_latency,
    token_bucket,
    transmission_delay,
)
from .feedback import FeedbackNetwork, FeedbackTriple
from .tandem import FlowSpec, TandemNetwork
from .upp import (
    INF,
    DomainError,
    NetcalcError,
    Segment,
    UppFunction,
    all_infinite,
)

__all__ = [
    "AnalysisDef",
    "FlowDef",
    "NetworkFile",
    "SchemaError",
    "ServerDef",
    "Units",
    "WindowDef",
    "dump_curve_text",
    "load_network",
    "parse_curve_text",
    "parse_network",
]


class SchemaError(NetcalcError):
    """The document does not match the file grammar."""


DATA_UNITS = {"bit": Fraction(1), "kb": Fraction(10 ** 3),
              "Mb": Fraction(10 ** 6), "Gb": Fraction(10 ** 9)}
RATE_UNITS = {"bps": Fraction(1), "kbps": Fraction(10 ** 3),
              "Mbps": Fraction(10 ** 6), "Gbps": Fraction(10 ** 9)}
TIME_UNITS = {"s": Fraction(1), "ms": Fraction(1, 10 ** 3),
              "us": Fraction(1, 10 ** 6)}

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.-]*\Z")
_SERVICE_KINDS = ("strict", "subadditive", "minplus")
_METHODS = ("pmoo", "sequential", "feedback")


@dataclass(frozen=True)
class Units:
    """Default unit applied to bare numbers, one per quantity kind."""

    data: str = "Mb"
    rate: str = "Mbps"
    time: str = "ms"


@dataclass(frozen=True)
class ServerDef:
    name: str
    curve: Curve


@dataclass(frozen=True)
class FlowDef:
    name: str
    alpha: Curve
    path: tuple[int, int]
    min_alpha: tuple[Fraction, Fraction] | None


@dataclass(frozen=True)
class WindowDef:
    name: str
    start: int
    end: int
    size: Fraction
    scope: tuple[str, ...] | None


@dataclass(frozen=True)
class AnalysisDef:
    method: str
    flow_of_interest: str
    dt: Fraction | None
    horizon: Fraction | None


@dataclass(frozen=True)
class NetworkFile:
    """A fully validated document; quantities are bits and seconds."""

    units: Units
    servers: tuple[ServerDef, ...]
    flows: tuple[FlowDef, ...]
    windows: tuple[WindowDef, ...]
    analysis: AnalysisDef

    def tandem(self) -> TandemNetwork:
        """The open network: servers in file order, windows ignored."""
        return TandemNetwork(
            tuple(s.curve for s in self.servers),
            tuple(FlowSpec(f.name, f.alpha, f.path, f.min_alpha)
                  for f in self.flows),
            self.analysis.flow_of_interest)

    def feedback(self) -> FeedbackNetwork:
        triples = tuple(FeedbackTriple(w.start, w.end, w.size)
                        for w in self.windows)
        scopes = [frozenset(w.scope) if w.scope is not None else None
                  for w in self.windows]
        return FeedbackNetwork(self.tandem(), triples, scopes)


# --- scalar parsing ----------------------------------------------------------

def _rational(text: str, where: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"{where}: not a number: {text!r}") from None


def _quantity(text: str, table: dict[str, Fraction], default_unit: str,
              where: str) -> Fraction:
    parts = text.split()
    if len(parts) == 1:
        unit = default_unit
    elif len(parts) == 2:
        unit = parts[1]
    else:
        raise SchemaError(f"{where}: expected 'NUMBER [UNIT]', got {text!r}")
    if unit not in table:
        raise SchemaError(f"{where}: unknown unit {unit!r} "
                          f"(expected one of {', '.join(table)})")
    value = _rational(parts[0], where)
    if value < 0:
        raise SchemaError(f"{where}: negative quantity {text!r}")
    return value * table[unit]


def _index(text: str, where: str) -> int:
    if not text.isdigit() or int(text) < 1:
        raise SchemaError(f"{where}: expected a server index >= 1, "
                          f"got {text!r}")
    return int(text)


def _path(text: str, where: str) -> tuple[int, int]:
    if ".." in text:
        lo_text, _, hi_text = text.partition("..")
        lo = _index(lo_text.strip(), where)
        hi = _index(hi_text.strip(), where)
        if hi < lo:
            raise SchemaError(f"{where}: path {text!r} runs backwards")
        return (lo, hi)
    only = _index(text.strip(), where)
    return (only, only)


def _name(text: str, what: str) -> str:
    if not _NAME.match(text):
        raise SchemaError(f"bad {what} name {text!r}")
    return text


class _Section:
    """One parsed section; every key must be consumed exactly once."""

    def __init__(self, label: str, pairs: dict[str, str]) -> None:
        self.label = label
        self.pairs = dict(pairs)

    def take(self, key: str, required: bool = False) -> str | None:
        if key in self.pairs:
            return self.pairs.pop(key)
        if required:
            raise SchemaError(f"[{self.label}] is missing {key!r}")
        return None

    def done(self) -> None:
        if self.pairs:
            extra = ", ".join(sorted(self.pairs))
            raise SchemaError(f"[{self.label}] has unknown keys: {extra}")


# --- section builders --------------------------------------------------------

def _parse_units(sec: _Section) -> Units:
    def pick(key: str, table: dict[str, Fraction], default: str) -> str:
        raw = sec.take(key)
        if raw is None:
            return default
        if raw not in table:
            raise SchemaError(f"[units] {key}: unknown unit {raw!r} "
                              f"(expected one of {', '.join(table)})")
        return raw

    units = Units(data=pick("data", DATA_UNITS, "Mb"),
                  rate=pick("rate", RATE_UNITS, "Mbps"),
                  time=pick("time", TIME_UNITS, "ms"))
    sec.done()
    return units


def _parse_server(name: str, sec: _Section, units: Units) -> ServerDef:
    where = sec.label
    kind = sec.take("kind", required=True)
    try:
        if kind in ("rate-latency", "constant-rate"):
            rate = _quantity(sec.take("rate", required=True),
                             RATE_UNITS, units.rate, where)
            service = sec.take("service")
            if service is not None and service not in _SERVICE_KINDS:
                raise SchemaError(
                    f"{where}: service must be one of "
                    f"{', '.join(_SERVICE_KINDS)}, got {service!r}")
            if kind == "rate-latency":
                latency = _quantity(sec.take("latency", required=True),
                                    TIME_UNITS, units.time, where)
                curve = rate_latency(rate, latency, kind=service or "strict")
            else:
                curve = constant_rate(rate, kind=service or "subadditive")
        elif kind == "delay":
            hi = _quantity(sec.take("max", required=True),
                           TIME_UNITS, units.time, where)
            lo_raw = sec.take("min")
            lo = (_quantity(lo_raw, TIME_UNITS, units.time, where)
                  if lo_raw is not None else Fraction(0))
            curve = transmission_delay(lo, hi)
        else:
            raise SchemaError(f"{where}: unknown server kind {kind!r} "
                              "(rate-latency, constant-rate, delay)")
    except DomainError as err:
        raise SchemaError(f"{where}: {err}") from None
    sec.done()
    return ServerDef(name, curve)


def _parse_flow(name: str, sec: _Section, units: Units) -> FlowDef:
    where = sec.label
    arrival = sec.take("arrival", required=True)
    if arrival != "token-bucket":
        raise SchemaError(f"{where}: unknown arrival kind {arrival!r} "
                          "(only token-bucket)")
    rate = _quantity(sec.take("rate", required=True),
                     RATE_UNITS, units.rate, where)
    burst = _quantity(sec.take("burst", required=True),
                      DATA_UNITS, units.data, where)
    path = _path(sec.take("path", required=True), where)
    min_rate_raw = sec.take("min-rate")
    min_lat_raw = sec.take("min-latency")
    if min_lat_raw is not None and min_rate_raw is None:
        raise SchemaError(f"{where}: min-latency needs min-rate")
    min_alpha = None
    if min_rate_raw is not None:
        min_alpha = (
            _quantity(min_rate_raw, RATE_UNITS, units.rate, where),
            _quantity(min_lat_raw, TIME_UNITS, units.time, where)
            if min_lat_raw is not None else Fraction(0))
    try:
        alpha = token_bucket(rate, burst)
    except DomainError as err:
        raise SchemaError(f"{where}: {err}") from None
    sec.done()
    return FlowDef(name, alpha, path, min_alpha)


def _parse_window(name: str, sec: _Section, units: Units) -> WindowDef:
    where = sec.label
    start = _index(sec.take("from", required=True), where)
    end = _index(sec.take("to", required=True), where)
    if end < start:
        raise SchemaError(f"{where}: span {start}..{end} runs backwards")
    size = _quantity(sec.take("size", required=True),
                     DATA_UNITS, units.data, where)
    if size <= 0:
        raise SchemaError(f"{where}: window size must be positive")
    scope_raw = sec.take("scope")
    scope = None
    if scope_raw is not None:
        names = [part.strip() for part in scope_raw.split(",")]
        if not all(names) or not names:
            raise SchemaError(f"{where}: scope is a comma-separated "
                              "list of flow names")
        scope = tuple(names)
    sec.done()
    return WindowDef(name, start, end, size, scope)


def _parse_analysis(sec: _Section, units: Units) -> AnalysisDef:
    where = sec.label
    method = sec.take("method", required=True)
    if method not in _METHODS:
        raise SchemaError(f"{where}: method must be one of "
                          f"{', '.join(_METHODS)}, got {method!r}")
    foi = sec.take("flow-of-interest", required=True)
    dt_raw = sec.take("dt")
    horizon_raw = sec.take("horizon")
    dt = (_quantity(dt_raw, TIME_UNITS, units.time, where)
          if dt_raw is not None else None)
    horizon = (_quantity(horizon_raw, TIME_UNITS, units.time, where)
               if horizon_raw is not None else None)
    for label, value in (("dt", dt), ("horizon", horizon)):
        if value is not None and value <= 0:
            raise SchemaError(f"{where}: {label} must be positive")
    sec.done()
    return AnalysisDef(method, foi, dt, horizon)


# --- the document ------------------------------------------------------------

def parse_network(text: str) -> NetworkFile:
    """Parse and fully validate one document.

    Raises :class:`SchemaError` on any structural problem: unknown
    sections or keys, missing requirements, out-of-range indices,
    duplicated window spans, or windows combined with a non-feedback
    analysis method.
    """
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#", ";"),
        interpolation=None, strict=True, empty_lines_in_values=False)
    parser.optionxform = str  # type: ignore[assignment]
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise SchemaError(f"bad document structure: {err}") from None

    units = Units()
    servers: list[ServerDef] = []
    flows: list[FlowDef] = []
    windows: list[WindowDef] = []
    analysis: AnalysisDef | None = None

    for label in parser.sections():
        sec = _Section(label, dict(parser.items(label)))
        words = label.split()
        if label == "units":
            if servers or flows or windows or analysis is not None:
                raise SchemaError("[units] must be the first section")
            units = _parse_units(sec)
        elif label == "analysis":
            analysis = _parse_analysis(sec, units)
        elif len(words) == 2 and words[0] == "server":
            servers.append(_parse_server(_name(words[1], "server"),
                                         sec, units))
        elif len(words) == 2 and words[0] == "flow":
            flows.append(_parse_flow(_name(words[1], "flow"), sec, units))
        elif len(words) == 2 and words[0] == "window":
            windows.append(_parse_window(_name(words[1], "window"),
                                         sec, units))
        else:
            raise SchemaError(f"unknown section [{label}]")

    if analysis is None:
        raise SchemaError("missing [analysis] section")
    if not servers:
        raise SchemaError("no [server NAME] sections")
    if not flows:
        raise SchemaError("no [flow NAME] sections")

    n = len(servers)
    flow_names = {f.name for f in flows}
    for f in flows:
        if f.path[1] > n:
            raise SchemaError(f"[flow {f.name}]: path {f.path[0]}.."
                              f"{f.path[1]} leaves the {n}-server tandem")
    spans: dict[tuple[int, int], str] = {}
    for w in windows:
        if w.end > n:
            raise SchemaError(f"[window {w.name}]: span {w.start}..{w.end} "
                              f"leaves the {n}-server tandem")
        if (w.start, w.end) in spans:
            raise SchemaError(
                f"[window {w.name}] repeats the span of "
                f"[window {spans[(w.start, w.end)]}]")
        spans[(w.start, w.end)] = w.name
        for flow_name in w.scope or ():
            if flow_name not in flow_names:
                raise SchemaError(f"[window {w.name}]: scope names "
                                  f"unknown flow {flow_name!r}")
    if analysis.flow_of_interest not in flow_names:
        raise SchemaError(f"[analysis]: flow-of-interest "
                          f"{analysis.flow_of_interest!r} is not a flow")
    if windows and analysis.method != "feedback":
        raise SchemaError("window sections require method = feedback")

    return NetworkFile(units, tuple(servers), tuple(flows),
                       tuple(windows), analysis)


def load_network(path: str) -> NetworkFile:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_network(handle.read())


# --- exact curve dumps -------------------------------------------------------

def _seg_line(tag: str, seg: Segment) -> str:
    return (f"{tag} ({seg.start},{seg.end}] "
            f"value={seg.value} slope={seg.slope}")


def dump_curve_text(fn: UppFunction) -> str:
    """Exact breakpoint listing; re-parsing yields the identical function.

    One line per breakpoint: the value at zero, the transient segments,
    then either one period with its repetition step or the point beyond
    which the function is infinite.
    """
    if fn.v0 is INF:
        return "upp v0=inf\n"
    lines = [f"upp v0={fn.v0}"]
    for seg in fn.transient:
        lines.append(_seg_line("seg", seg))
    if fn.period_segments is None:
        lines.append(f"infinite-after {fn.rank}")
    else:
        lines.append(f"period d={fn.d} c={fn.c}")
        for seg in fn.period_segments:
            lines.append(_seg_line("pseg", seg))
    return "\n".join(lines) + "\n"


_UPP_LINE = re.compile(r"upp v0=(\S+)\Z")
_SEG_PAT = re.compile(r"(seg|pseg) \((\S+),(\S+)\] value=(\S+) slope=(\S+)\Z")
_PERIOD_PAT = re.compile(r"period d=(\S+) c=(\S+)\Z")
_INF_PAT = re.compile(r"infinite-after (\S+)\Z")


def parse_curve_text(text: str) -> UppFunction:
    """Parse :func:`dump_curve_text` output back into a function.

    Blank lines and ``#`` comments are skipped; everything else must
    match the dump grammar exactly.
    """
    lines = [ln for ln in (raw.strip() for raw in text.splitlines())
             if ln and not ln.startswith("#")]
    if not lines:
        raise SchemaError("curve dump: empty input")
    head = _UPP_LINE.match(lines[0])
    if head is None:
        raise SchemaError(f"curve dump: bad first line {lines[0]!r}")
    if head.group(1) == "inf":
        if len(lines) > 1:
            raise SchemaError("curve dump: the all-infinite function "
                              "has exactly one line")
        return all_infinite()
    v0 = _rational(head.group(1), "curve dump")

    def segment(match: re.Match[str]) -> Segment:
        try:
            return Segment(*(_rational(match.group(k), "curve dump")
                             for k in range(2, 6)))
        except DomainError as err:
            raise SchemaError(f"curve dump: {err}") from None

    transient: list[Segment] = []
    i = 1
    while i < len(lines):
        match = _SEG_PAT.match(lines[i])
        if match is None or match.group(1) != "seg":
            break
        transient.append(segment(match))
        i += 1
    if i >= len(lines):
        raise SchemaError("curve dump: missing period or "
                          "infinite-after line")
    try:
        inf_match = _INF_PAT.match(lines[i])
        if inf_match is not None:
            if i + 1 != len(lines):
                raise SchemaError("curve dump: trailing lines after "
                                  "infinite-after")
            rank = _rational(inf_match.group(1), "curve dump")
            return UppFunction(v0, tuple(transient), rank, None,
                               Fraction(0), Fraction(0))
        period_match = _PERIOD_PAT.match(lines[i])
        if period_match is None:
            raise SchemaError(f"curve dump: bad line {lines[i]!r}")
        d = _rational(period_match.group(1), "curve dump")
        c = _rational(period_match.group(2), "curve dump")
        i += 1
        period: list[Segment] = []
        while i < len(lines):
            match = _SEG_PAT.match(lines[i])
            if match is None or match.group(1) != "pseg":
                raise SchemaError(f"curve dump: bad line {lines[i]!r}")
            period.append(segment(match))
            i += 1
        if not period:
            raise SchemaError("curve dump: period without pseg lines")
        rank = transient[-1].end if transient else Fraction(0)
        return UppFunction(v0, tuple(transient), rank, tuple(period), d, c)
    except DomainError as err:
        raise SchemaError(f"curve dump: {err}") from None
