"""Window flow control on tandems: throttles and the open-loop transform.

A window controller admits traffic into a span of servers only while the
amount in flight inside the span stays below a fixed size.  On the
admitted side this is equivalent to one extra server placed in front of
the span: the sub-additive closure of (span service + window), called
the *throttle* here.  Once every window has been replaced by its
throttle, the network is an ordinary open tandem and the analyses from
:mod:`netcalc.tandem` apply unchanged.

Not every gated topology unrolls this way.  :func:`classify_structure`
sorts a network into the supported shapes and reports two failure modes:

* interleaved window spans, where the admission fixed points no longer
  factor into one throttle per window, and
* a gating mismatch, where a window's gated set is not exactly the
  traffic crossing its span.  That is the classic misconfiguration in
  which an uncontrolled competitor consumes the acknowledged span and
  the window ends up throttling the wrong flow;
  :func:`instability_witness` quantifies the resulting starvation.

The transform is exact for a single flow.  For the multi-flow shapes it
composes per-flow or nested residuals before closing the loop, which is
a sound lower bound on what each gated aggregate receives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from netcalc.curves import (
    SERVICE,
    Curve,
    KindError,
    wfc_curve,
)
from netcalc.tandem import (
    AnalysisRefused,
    AnalysisReport,
    FlowSpec,
    TandemNetwork,
    _as_rate_latency,
    _as_token_bucket,
    _delay_constant,
    _per_flow_residuals,
    sequential_analysis,
    stability_margins,
)
from netcalc.upp import (
    INF,
    DomainError,
    NetcalcError,
    ResourceError,
    UppFunction,
    add,
    convolve,
    delta,
    horizontal_deviation,
    impulse,
    monus,
    rational,
    subadditive_closure,
    vertical_deviation,
    zero_function,
)

__all__ = [
    "FeedbackNetwork",
    "FeedbackTriple",
    "GATING_MISMATCH",
    "GatingMismatch",
    "INTERLEAVED",
    "InstabilityReport",
    "NESTED",
    "PER_FLOW_WINDOWS",
    "SINGLE_FLOW",
    "StructureClass",
    "StructureRefused",
    "classify_structure",
    "feedback_analysis",
    "instability_witness",
    "is_stable",
    "open_loop_transform",
    "stability_check",
    "throttle_curve",
    "throttle_lower_bound",
]

Value = Fraction | float

SINGLE_FLOW = "single-flow"
PER_FLOW_WINDOWS = "per-flow-windows"
NESTED = "nested"
INTERLEAVED = "interleaved"
GATING_MISMATCH = "gating-mismatch"

SUPPORTED_CLASSES = frozenset({SINGLE_FLOW, PER_FLOW_WINDOWS, NESTED})


# --- model -------------------------------------------------------------------

@dataclass(frozen=True)
class FeedbackTriple:
    """One window controller: gate admission into servers ``start..end``
    (1-based, inclusive) while more than ``window`` data is in flight."""

    start: int
    end: int
    window: Fraction

    def __post_init__(self) -> None:
        if not (isinstance(self.start, int) and isinstance(self.end, int)):
            raise DomainError("window span indices must be integers")
        if not 1 <= self.start <= self.end:
            raise DomainError(
                f"bad window span [{self.start}, {self.end}]")
        object.__setattr__(self, "window", rational(self.window))
        if self.window <= 0:
            raise DomainError("window size must be positive")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class GatingMismatch:
    """Evidence that a window gates the wrong set of flows.

    ``escaped`` lists gated flows that leave the span before its end, so
    their in-flight count never drains through the acknowledged server;
    ``uncontrolled`` lists flows that cross the span without being gated
    and can fill it unchecked.  Either way the window closes against
    traffic it does not control.
    """

    triple: FeedbackTriple
    escaped: tuple[str, ...]
    uncontrolled: tuple[str, ...]
    reason: str


@dataclass(frozen=True)
class StructureClass:
    """Classification outcome; ``mismatch`` is set for gating mismatches."""

    name: str
    mismatch: GatingMismatch | None = None

    @property
    def supported(self) -> bool:
        return self.name in SUPPORTED_CLASSES


class StructureRefused(NetcalcError):
    """The gated topology has no sound open-loop transform here."""

    def __init__(self, message: str, structure: StructureClass) -> None:
        super().__init__(message)
        self.structure = structure


def _covers(path: tuple[int, int], span: tuple[int, int]) -> bool:
    return path[0] <= span[0] and span[1] <= path[1]


def _meets(path: tuple[int, int], span: tuple[int, int]) -> bool:
    return path[0] <= span[1] and span[0] <= path[1]


def _laminar(a: tuple[int, int], b: tuple[int, int]) -> bool:
    """Nested or disjoint."""
    return _covers(a, b) or _covers(b, a) or not _meets(a, b)


@dataclass(frozen=True)
class FeedbackNetwork:
    """A tandem plus window controllers.

    ``scopes`` gives, per triple, the ids of the flows the controller
    gates; an entry of ``None`` (or omitting ``scopes`` entirely)
    defaults to every flow whose path covers the span.  Triples are
    normalised on construction: sorted by start ascending then end
    descending, and same-span duplicates collapse to the tightest
    window.
    """

    base: TandemNetwork
    triples: tuple[FeedbackTriple, ...]
    scopes: tuple[frozenset[str], ...] = field(default=())

    def __init__(self, base: TandemNetwork,
                 triples=(), scopes=None) -> None:
        object.__setattr__(self, "base", base)
        triples = tuple(triples)
        ids = {f.id for f in base.flows}
        if scopes is None:
            raw: list[frozenset[str] | None] = [None] * len(triples)
        else:
            raw = list(scopes)
            if len(raw) != len(triples):
                raise DomainError("need one scope entry per window triple")
        resolved: list[tuple[FeedbackTriple, frozenset[str]]] = []
        for t, s in zip(triples, raw):
            if t.end > base.n:
                raise DomainError(
                    f"window span [{t.start}, {t.end}] leaves the "
                    f"{base.n}-server tandem")
            if s is None:
                scope = self.covering_flows(t)
            else:
                scope = frozenset(s)
                unknown = scope - ids
                if unknown:
                    raise DomainError(
                        f"window scope names unknown flows: "
                        f"{sorted(unknown)}")
            resolved.append((t, scope))
        by_span: dict[tuple[int, int], tuple[FeedbackTriple,
                                             frozenset[str]]] = {}
        for t, scope in resolved:
            kept = by_span.get(t.span)
            if kept is None or t.window < kept[0].window:
                by_span[t.span] = (t, scope)
        ordered = sorted(by_span.values(),
                         key=lambda pair: (pair[0].start, -pair[0].end))
        object.__setattr__(self, "triples",
                           tuple(t for t, _ in ordered))
        object.__setattr__(self, "scopes",
                           tuple(s for _, s in ordered))

    def covering_flows(self, triple: FeedbackTriple) -> frozenset[str]:
        return frozenset(f.id for f in self.base.flows
                         if _covers(f.path, triple.span))

    @property
    def n(self) -> int:
        return self.base.n


# --- throttles ---------------------------------------------------------------

def throttle_curve(span_service: Curve, window: Fraction | int | str,
                   ) -> Curve:
    """The server equivalent to a window controller over ``span_service``.

    Exact form: sub-additive closure of (span service + window).  When
    the closure runs out of segments and the span service is a
    rate-latency curve, falls back to :func:`throttle_lower_bound`.
    """
    window = rational(window)
    if window <= 0:
        raise DomainError("window size must be positive")
    if span_service.role != SERVICE:
        raise KindError("the throttle is built from the span's service "
                        "curve")
    gated = convolve(span_service.fn, impulse(window))
    try:
        closed = subadditive_closure(gated)
    except ResourceError:
        shape = _as_rate_latency(span_service.fn)
        if shape is None:
            raise
        return throttle_lower_bound(shape[0], shape[1], window)
    return Curve(closed.canonical(), SERVICE, "subadditive")


def throttle_lower_bound(rate: Fraction | int | str,
                         latency: Fraction | int | str,
                         window: Fraction | int | str) -> Curve:
    """Closed-form lower bound of the throttle of a rate-latency span.

    0 at 0, then ``window + min(rate, window/latency) * (t - latency)_+``:
    one window per round trip, never more than the span's own rate.
    Always sub-additive, and below (often equal to) the exact closure.
    """
    rate, latency = rational(rate), rational(latency)
    window = rational(window)
    if rate <= 0 or latency <= 0 or window <= 0:
        raise DomainError("need positive rate, latency, and window")
    return wfc_curve(window, min(rate, window / latency), latency)


# --- classification ----------------------------------------------------------

def classify_structure(net: FeedbackNetwork) -> StructureClass:
    """Sort a gated tandem into the shapes the transform supports.

    Checked in order: gating mismatch (a scoped flow leaves its span
    early, or a scope is empty); single flow over the whole chain;
    one gated flow per window; a laminar family (every two of the window
    spans and flow paths nested or disjoint) with default scopes.
    Everything else is interleaved and unsupported.
    """
    flows = net.base.flows
    by_id = {f.id: f for f in flows}
    for t, scope in zip(net.triples, net.scopes):
        escaped = tuple(sorted(
            fid for fid in scope if not _covers(by_id[fid].path, t.span)))
        if escaped or not scope:
            uncontrolled = tuple(sorted(
                f.id for f in flows
                if _meets(f.path, t.span) and f.id not in scope))
            if escaped:
                reason = (f"window over [{t.start}, {t.end}] gates "
                          f"{list(escaped)} which leave the span early")
            else:
                reason = (f"window over [{t.start}, {t.end}] gates no "
                          "flow at all")
            return StructureClass(
                GATING_MISMATCH,
                GatingMismatch(t, escaped, uncontrolled, reason))
    if len(flows) == 1 and flows[0].path == (1, net.n):
        return StructureClass(SINGLE_FLOW)
    if all(len(scope) == 1 for scope in net.scopes):
        return StructureClass(PER_FLOW_WINDOWS)
    intervals = [t.span for t in net.triples] + [f.path for f in flows]
    laminar = all(_laminar(intervals[i], intervals[k])
                  for i in range(len(intervals))
                  for k in range(i + 1, len(intervals)))
    if laminar and all(scope == net.covering_flows(t)
                       for t, scope in zip(net.triples, net.scopes)):
        return StructureClass(NESTED)
    return StructureClass(INTERLEAVED)


# --- the open-loop transform -------------------------------------------------

def _span_floor(server: Curve) -> UppFunction:
    """The server's full forwarding guarantee as one function.

    Inside a feedback loop the fixed part of a delay server holds data
    in flight like any other latency, so it cannot be split off the way
    the open-network delay bounds do.
    """
    if server.kind == "delay" and server.min_delay:
        return convolve(delta(server.min_delay), server.fn)
    return server.fn


def _require_residual_kinds(net: FeedbackNetwork) -> None:
    for t in net.triples:
        for j in range(t.start, t.end + 1):
            kind = net.base.servers[j - 1].kind
            if kind not in ("strict", "subadditive"):
                raise AnalysisRefused(
                    f"server {j} inside the window span [{t.start}, "
                    f"{t.end}] offers a {kind!r} guarantee; removing "
                    "competing flows there needs a strict or "
                    "sub-additive one")


def _single_flow_psi(net: FeedbackNetwork, i: int,
                     psis: dict[int, UppFunction]) -> UppFunction:
    t = net.triples[i]
    fn = delta(Fraction(0))
    for j in range(t.start, t.end + 1):
        fn = convolve(fn, _span_floor(net.base.servers[j - 1]))
    for k, other in enumerate(net.triples):
        if k != i and t.start < other.start <= t.end:
            fn = convolve(fn, psis[k])
    return subadditive_closure(convolve(fn, impulse(t.window)))


def _per_flow_psi(net: FeedbackNetwork, i: int,
                  residuals: dict[tuple[int, str], Curve]) -> UppFunction:
    t = net.triples[i]
    (flow_id,) = tuple(net.scopes[i])
    fn = delta(Fraction(0))
    for j in range(t.start, t.end + 1):
        fn = convolve(fn, residuals[(j, flow_id)].fn)
    return subadditive_closure(convolve(fn, impulse(t.window)))


def _nested_block(net: FeedbackNetwork, a: int, b: int, skip: int,
                  psis: dict[int, UppFunction]) -> UppFunction:
    """Service of servers ``a..b`` for the flows covering the block, with
    every flow strictly inside stripped off innermost-first."""
    base = net.base
    inner = [f for f in base.flows
             if a <= f.path[0] and f.path[1] <= b and f.path != (a, b)]
    paths = {f.path for f in inner}
    maximal = [p for p in paths
               if not any(q != p and _covers(q, p) for q in paths)]
    fn = delta(Fraction(0))
    j = a
    while j <= b:
        for k, t in enumerate(net.triples):
            if (k != skip and k in psis and t.start == j and t.end <= b
                    and not any(_covers(p, t.span) for p in maximal)):
                fn = convolve(fn, psis[k])
        sub_span = next((p for p in maximal if p[0] == j), None)
        if sub_span is not None:
            sub = _nested_block(net, sub_span[0], sub_span[1], skip, psis)
            stripped = zero_function()
            for f in inner:
                if f.path == sub_span:
                    stripped = add(stripped, f.alpha.fn)
            fn = convolve(fn, monus(sub, stripped, service_curve=True))
            j = sub_span[1] + 1
        else:
            fn = convolve(fn, base.servers[j - 1].fn)
            j += 1
    return fn


def _nested_psi(net: FeedbackNetwork, i: int,
                psis: dict[int, UppFunction]) -> UppFunction:
    t = net.triples[i]
    fn = _nested_block(net, t.start, t.end, i, psis)
    return subadditive_closure(convolve(fn, impulse(t.window)))


def _window_psis(net: FeedbackNetwork) -> dict[int, UppFunction]:
    structure = classify_structure(net)
    if not structure.supported:
        detail = ""
        if structure.mismatch is not None:
            detail = f": {structure.mismatch.reason}"
        article = "an" if structure.name[0] in "aeiou" else "a"
        raise StructureRefused(
            f"no open-loop transform for {article} {structure.name} "
            f"network{detail}", structure)
    psis: dict[int, UppFunction] = {}
    if not net.triples:
        return psis
    order = sorted(range(len(net.triples)),
                   key=lambda i: (-net.triples[i].start,
                                  net.triples[i].end))
    if structure.name == SINGLE_FLOW:
        for i in order:
            psis[i] = _single_flow_psi(net, i, psis)
    elif structure.name == PER_FLOW_WINDOWS:
        _require_residual_kinds(net)
        residuals, _ = _per_flow_residuals(net.base)
        for i in order:
            psis[i] = _per_flow_psi(net, i, residuals)
    else:
        _require_residual_kinds(net)
        for i in order:
            psis[i] = _nested_psi(net, i, psis)
    return psis


def window_throttles(net: FeedbackNetwork) -> tuple[Curve, ...]:
    """The throttle service curve of each window, in ``net.triples``
    order.  Same refusals as :func:`open_loop_transform`."""
    psis = _window_psis(net)
    return tuple(Curve(psis[i].canonical(), SERVICE, "subadditive")
                 for i in range(len(net.triples)))


def open_loop_transform(net: FeedbackNetwork) -> TandemNetwork:
    """Replace every window controller by its throttle server.

    The result has one extra server per window, inserted right before
    the first server of its span (wider windows first at a shared
    point), and flow paths widened to cover the throttles that gate
    them.  Raises :class:`StructureRefused` for interleaved or
    mismatched gating, where no per-window throttle is sound.
    """
    psis = _window_psis(net)
    if not net.triples:
        return net.base
    base = net.base
    servers: list[Curve] = []
    pos_server: dict[int, int] = {}
    pos_throttle: dict[int, int] = {}
    for j in range(1, base.n + 1):
        for i, t in enumerate(net.triples):
            if t.start == j:
                servers.append(Curve(psis[i].canonical(), SERVICE,
                                     "subadditive"))
                pos_throttle[i] = len(servers)
        servers.append(base.servers[j - 1])
        pos_server[j] = len(servers)
    flows: list[FlowSpec] = []
    for f in base.flows:
        positions = [pos_server[j]
                     for j in range(f.path[0], f.path[1] + 1)]
        positions += [pos_throttle[i]
                      for i, scope in enumerate(net.scopes)
                      if f.id in scope]
        flows.append(FlowSpec(f.id, f.alpha,
                              (min(positions), max(positions)),
                              f.min_alpha))
    return TandemNetwork(tuple(servers), tuple(flows),
                         base.flow_of_interest)


# --- stability ---------------------------------------------------------------

def stability_check(net: TandemNetwork | FeedbackNetwork,
                    ) -> tuple[tuple[int, Value, Value], ...]:
    """Per-server (index, aggregate arrival rate, service rate) margins;
    a gated network is unrolled first, so throttle rates are included."""
    if isinstance(net, FeedbackNetwork):
        net = open_loop_transform(net)
    return stability_margins(net)


def is_stable(margins: tuple[tuple[int, Value, Value], ...]) -> bool:
    """Strict inequality everywhere; a rate meeting its server exactly
    already lets backlog grow without bound."""
    return all(agg < srv for (_j, agg, srv) in margins)


def feedback_analysis(net: FeedbackNetwork) -> AnalysisReport:
    """Unroll the windows, check stability, then bound the flow of
    interest on the transformed tandem.

    When some server (a throttle included) cannot sustain its offered
    load the bounds are withheld: the report carries infinite delay and
    backlog, no curve, and an ``unstable`` diagnostic.
    """
    open_net = open_loop_transform(net)
    margins = stability_margins(open_net)
    if not is_stable(margins):
        diagnostics = ["unstable: a window throttle or server cannot "
                       "sustain the offered load; bounds withheld"]
        for (j, agg, srv) in margins:
            if not agg < srv:
                diagnostics.append(
                    f"server {j} is saturated: aggregate rate {agg} >= "
                    f"service rate {srv}")
        return AnalysisReport(None, INF, INF, margins,
                              tuple(diagnostics))
    if len(open_net.flows) == 1:
        foi = open_net.foi
        fn = delta(Fraction(0))
        for j in range(1, open_net.n + 1):
            fn = convolve(fn, open_net.servers[j - 1].fn)
        curve = Curve(fn.canonical(), SERVICE, "minplus")
        delay = horizontal_deviation(foi.alpha.fn, curve.fn)
        if delay is not INF:
            delay += _delay_constant(open_net, (1, open_net.n))
        backlog = vertical_deviation(foi.alpha.fn, curve.fn)
        return AnalysisReport(curve, delay, backlog, margins, ())
    return sequential_analysis(open_net)


# --- the misconfiguration witness --------------------------------------------

@dataclass(frozen=True)
class InstabilityReport:
    """Quantified starvation under mismatched gating.

    The window admits the gated flow only as the uncontrolled
    competitor's departures make room.  When the gated flow offers rate
    above what the competitor releases, un-admitted data grows at
    ``growth_rate`` from time ``onset`` on.  Independently,
    ``buffer_bound`` is how much the competitor alone can park inside
    the span: once it exceeds the window, the gate can shut with the
    gated flow contributing nothing.
    """

    triple: FeedbackTriple
    gated_flow: str
    uncontrolled_flow: str
    window: Fraction
    growth_rate: Fraction | None
    onset: Fraction | None
    buffer_bound: Value

    @property
    def window_exceeded(self) -> bool:
        return self.buffer_bound > self.window


def instability_witness(net: FeedbackNetwork) -> InstabilityReport:
    """Diagnose a gating mismatch on token-bucket flows.

    Requires :func:`classify_structure` to report a mismatch with at
    least one uncontrolled flow crossing the span; both the gated and
    the uncontrolled flow need token-bucket arrival curves.
    """
    structure = classify_structure(net)
    if structure.name != GATING_MISMATCH or structure.mismatch is None:
        raise DomainError("the gating of this network matches its "
                          "flows; nothing to witness")
    evidence = structure.mismatch
    t = evidence.triple
    by_id = {f.id: f for f in net.base.flows}
    if evidence.escaped:
        gated = by_id[evidence.escaped[0]]
    else:
        gated = next((f for f in net.base.flows
                      if _meets(f.path, t.span)), None)
        if gated is None:
            raise DomainError("no flow crosses the mismatched span")
    if not evidence.uncontrolled:
        raise DomainError("every flow crossing the span is gated; "
                          "the mismatch starves nothing")
    loose = by_id[evidence.uncontrolled[0]]
    tb_gated = _as_token_bucket(gated.alpha.fn)
    tb_loose = _as_token_bucket(loose.alpha.fn)
    if tb_gated is None or tb_loose is None:
        raise DomainError("the starvation witness needs token-bucket "
                          "arrival curves")
    (r1, b1), (r2, b2) = tb_gated, tb_loose
    growth: Fraction | None = None
    onset: Fraction | None = None
    if r1 > r2:
        growth = r1 - r2
        onset = max(Fraction(0), (b1 - t.window - b2) / (r1 - r2))
    floor = delta(Fraction(0))
    for j in range(loose.path[0], loose.path[1] + 1):
        floor = convolve(floor, _span_floor(net.base.servers[j - 1]))
    buffer_bound = vertical_deviation(loose.alpha.fn, floor)
    return InstabilityReport(t, gated.id, loose.id, t.window,
                             growth, onset, buffer_bound)
