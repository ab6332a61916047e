"""Tandem networks: model, end-to-end analyses, and comparison bounds.

Two analysis styles live here.  The aggregate one pays each cross flow's
burst once over the whole chain: a numeric search over time partitions
that works for any mix of delay / strict / sub-additive servers, and a
linear closed form when every arrival is a token bucket and every server
is rate-latency.  The sequential one applies residual + output-arrival
propagation hop by hop, which is simpler, needs stronger per-server kinds,
and pays bursts at every hop; it exists as the baseline the aggregate
analysis improves on.

The "unconventional" delay bound reproduces a published alternative that
folds the whole tandem into one server and leans on a minimum arrival
curve for the flow of interest; it is computed for comparison only and is
never smaller than the aggregate bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from netcalc.curves import (
    ARRIVAL,
    Curve,
    KindError,
    constant_rate,
    output_arrival,
    pure_delay,
    residual_strict,
    residual_subadditive,
    token_bucket,
)
from netcalc.oracle import GridTrajectory
from netcalc.upp import (
    INF,
    DomainError,
    NetcalcError,
    ResourceError,
    UppFunction,
    add,
    affine,
    convolve,
    delta,
    horizontal_deviation,
    rate_latency_fn,
    rational,
    vertical_deviation,
    zero_function,
)

__all__ = [
    "AnalysisRefused",
    "AnalysisReport",
    "FlowSpec",
    "TandemNetwork",
    "conventional_delay_closed_form",
    "e2e_backlog_bound",
    "e2e_delay_bound",
    "homogeneous_tandem",
    "pmoo_analysis",
    "pmoo_closed_form",
    "pmoo_curve_numeric",
    "sequential_analysis",
    "stability_margins",
    "unconventional_delay_bound",
]

Value = Fraction | float


class AnalysisRefused(NetcalcError):
    """The requested analysis would be unsound or inapplicable here.

    Raised instead of returning a bound whenever the model leaves room
    for behaviours the bound would not cover.
    """


@dataclass(frozen=True)
class FlowSpec:
    """One flow: its arrival bound and the contiguous servers it crosses.

    ``min_alpha`` is an optional (rate, latency) lower arrival envelope,
    used only by the unconventional comparison bound.
    """

    id: str
    alpha: Curve
    path: tuple[int, int]
    min_alpha: tuple[Fraction, Fraction] | None = None

    def __post_init__(self) -> None:
        if self.alpha.role != ARRIVAL:
            raise KindError(f"flow {self.id!r} needs an arrival curve")
        lo, hi = self.path
        if not (1 <= lo <= hi):
            raise DomainError(f"flow {self.id!r} has invalid path {self.path}")
        if self.min_alpha is not None:
            r_min, lat = self.min_alpha
            if r_min < 0 or lat < 0:
                raise DomainError("minimum arrival envelope needs "
                                  "rate, latency >= 0")
            if r_min > self.alpha.fn.long_run_rate:
                raise DomainError(
                    f"flow {self.id!r}: minimum rate {r_min} exceeds the "
                    f"arrival curve's long-run rate")

    def crosses(self, server: int) -> bool:
        return self.path[0] <= server <= self.path[1]


@dataclass(frozen=True)
class TandemNetwork:
    servers: tuple[Curve, ...]
    flows: tuple[FlowSpec, ...]
    flow_of_interest: str

    def __post_init__(self) -> None:
        if not self.servers:
            raise DomainError("a tandem needs at least one server")
        for k, c in enumerate(self.servers, start=1):
            if c.role != "service":
                raise KindError(f"server {k} is not a service curve")
        n = len(self.servers)
        seen: set[str] = set()
        for f in self.flows:
            if f.id in seen:
                raise DomainError(f"duplicate flow id {f.id!r}")
            seen.add(f.id)
            if f.path[1] > n:
                raise DomainError(
                    f"flow {f.id!r} path {f.path} leaves the tandem of {n}")
        if self.flow_of_interest not in seen:
            raise DomainError(
                f"flow of interest {self.flow_of_interest!r} is not a flow")
        for j in range(1, n + 1):
            if not any(f.crosses(j) for f in self.flows):
                raise DomainError(f"server {j} is crossed by no flow")

    @property
    def n(self) -> int:
        return len(self.servers)

    @property
    def foi(self) -> FlowSpec:
        for f in self.flows:
            if f.id == self.flow_of_interest:
                return f
        raise AssertionError("validated in __post_init__")

    def cross_flows(self) -> list[FlowSpec]:
        return [f for f in self.flows if f.id != self.flow_of_interest]


@dataclass(frozen=True)
class AnalysisReport:
    e2e_curve: Curve | None
    delay_bound: Value
    backlog_bound: Value
    stability_margins: tuple[tuple[int, Value, Value], ...]
    diagnostics: tuple[str, ...]

    @property
    def stable(self) -> bool:
        return all(agg < srv for (_j, agg, srv) in self.stability_margins)


def stability_margins(net: TandemNetwork) -> tuple[tuple[int, Value, Value], ...]:
    """Per server: (index, aggregate long-run arrival rate, service rate)."""
    out = []
    for j in range(1, net.n + 1):
        agg = Fraction(0)
        for f in net.flows:
            if f.crosses(j):
                r = f.alpha.fn.long_run_rate
                agg = r if r is INF else (agg if agg is INF else agg + r)
        out.append((j, agg, net.servers[j - 1].fn.long_run_rate))
    return tuple(out)


def _delay_constant(net: TandemNetwork, path: tuple[int, int]) -> Fraction:
    """Sum of fixed minimum delays over the path (delay servers only)."""
    total = Fraction(0)
    for j in range(path[0], path[1] + 1):
        c = net.servers[j - 1]
        if c.kind == "delay":
            total += c.min_delay
    return total


# --- linear closed form ------------------------------------------------------

def _as_token_bucket(fn: UppFunction) -> tuple[Fraction, Fraction] | None:
    """(rate, burst) if ``fn`` is exactly burst + rate*t beyond 0."""
    if fn.is_all_infinite or fn.eventually_infinite:
        return None
    rate = fn.long_run_rate
    burst = fn.eval_right(Fraction(0))
    if fn.equivalent(affine(burst, rate)):
        return (rate, burst)
    return None


def _as_rate_latency(fn: UppFunction) -> tuple[Fraction, Fraction] | None:
    """(rate, latency) if ``fn`` is exactly rate * (t - latency)_+."""
    if fn.is_all_infinite or fn.eventually_infinite:
        return None
    rate = fn.long_run_rate
    if rate <= 0:
        return None
    latency = Fraction(0)
    for s in fn.transient:
        if s.slope == 0 and s.value == 0:
            latency = s.end
        else:
            break
    if fn.equivalent(rate_latency_fn(rate, latency)):
        return (rate, latency)
    return None


def _require_aggregate_kinds(net: TandemNetwork) -> None:
    """The aggregate analysis assumes each server's guarantee survives
    arbitrary competing traffic; a plain min-plus guarantee does not."""
    for j, c in enumerate(net.servers, start=1):
        if c.kind == "minplus":
            raise AnalysisRefused(
                f"server {j} offers only a plain min-plus guarantee, "
                "which the aggregate analysis cannot use soundly (see "
                "netcalc.oracle.simulate_priority_starvation)")
    if net.foi.path != (1, net.n):
        raise AnalysisRefused(
            "the aggregate analysis needs the flow of interest to cross "
            "the whole tandem")


def _linear_model(net: TandemNetwork):
    """Extract (rates, latencies per server; rate, burst per cross flow) or
    refuse: the closed form only speaks token-bucket vs rate-latency."""
    _require_aggregate_kinds(net)
    servers: list[tuple[Value, Fraction]] = []
    for j, c in enumerate(net.servers, start=1):
        if c.kind == "delay":
            servers.append((INF, c.max_delay - c.min_delay))
            continue
        rl = _as_rate_latency(c.fn)
        if rl is None:
            raise AnalysisRefused(
                f"server {j} is not rate-latency: the linear closed form "
                "does not apply (use the numeric analysis)")
        servers.append(rl)
    flows: list[tuple[FlowSpec, Fraction, Fraction]] = []
    for f in net.flows:
        tb = _as_token_bucket(f.alpha.fn)
        if tb is None:
            raise AnalysisRefused(
                f"flow {f.id!r} is not token-bucket: the linear closed "
                "form does not apply")
        flows.append((f, tb[0], tb[1]))
    return servers, flows


def pmoo_closed_form(net: TandemNetwork) -> Curve:
    """Rate-latency end-to-end service curve for the flow of interest,
    paying each cross burst only once.

    rate: min over servers of what the cross flows leave of R_j;
    latency: the summed latencies plus every cross flow's burst (inflated
    by its rate over the latencies it spans) served at that rate.
    Collapses to plain concatenation when there is no cross traffic.  An
    exhausted rate comes back as the zero curve flagged ``unstable``.
    """
    servers, flows = _linear_model(net)
    cross = [(f, r, b) for (f, r, b) in flows
             if f.id != net.flow_of_interest]
    r_e2e: Value = INF
    for j, (r_j, _t_j) in enumerate(servers, start=1):
        if r_j is INF:
            continue
        left = r_j - sum(r for (f, r, _b) in cross if f.crosses(j))
        if r_e2e is INF or left < r_e2e:
            r_e2e = left
    if r_e2e is INF:
        # pure-delay chain: exact, latency only
        total = sum(t for (_r, t) in servers)
        return Curve(delta(total), "service", "minplus")
    if r_e2e <= 0:
        return Curve(zero_function(), "service", "minplus",
                     flags=("unstable",))
    latency = sum(t for (_r, t) in servers)
    burst_term = Fraction(0)
    for (f, r, b) in cross:
        spanned = sum(servers[j - 1][1]
                      for j in range(f.path[0], f.path[1] + 1))
        burst_term += b + r * spanned
    latency += burst_term / r_e2e
    return Curve(rate_latency_fn(r_e2e, latency), "service", "minplus")


def e2e_delay_bound(net: TandemNetwork) -> Value:
    """Worst-case delay: horizontal deviation against the end-to-end curve
    plus the fixed part of every delay server on the path."""
    curve = pmoo_closed_form(net)
    dev = horizontal_deviation(net.foi.alpha.fn, curve.fn)
    if dev is INF:
        return INF
    return dev + _delay_constant(net, net.foi.path)


def e2e_backlog_bound(net: TandemNetwork) -> Value:
    """Worst-case backlog: vertical deviation (no fixed-delay credit)."""
    curve = pmoo_closed_form(net)
    return vertical_deviation(net.foi.alpha.fn, curve.fn)


def pmoo_analysis(net: TandemNetwork) -> AnalysisReport:
    margins = stability_margins(net)
    diagnostics: list[str] = []
    for (j, agg, srv) in margins:
        if srv is not INF and (agg is INF or agg >= srv):
            diagnostics.append(
                f"server {j} is saturated: aggregate rate {agg} >= "
                f"service rate {srv}")
    curve = pmoo_closed_form(net)
    if "unstable" in curve.flags:
        diagnostics.append(
            "cross traffic exhausts some server: end-to-end rate <= 0")
        return AnalysisReport(curve, INF, INF, margins, tuple(diagnostics))
    delay = e2e_delay_bound(net)
    backlog = e2e_backlog_bound(net)
    if delay is INF:
        diagnostics.append("unstable: flow of interest exceeds the "
                           "end-to-end service rate")
    return AnalysisReport(curve, delay, backlog, margins, tuple(diagnostics))


# --- numeric partition search ------------------------------------------------

def pmoo_curve_numeric(net: TandemNetwork, dt: Fraction | int | str,
                       horizon: Fraction | int | str,
                       max_servers: int = 4) -> GridTrajectory:
    """Certified grid lower bound of the aggregate end-to-end curve.

    For each grid time t the search minimizes sum_j beta_j(u_j) minus each
    cross flow's alpha over the time it spans, across all grid partitions
    of t.  Because the true optimum may fall between grid points, the
    objective is bounded below cell-wise: server curves are taken at the
    cell's left edge (partitions summing up to n steps short) and cross
    arrivals at the right edge (their span padded by one step per server
    crossed).  The result never overestimates the true curve, which keeps
    every bound derived from it sound.

    Exponential in the server count: refuses beyond ``max_servers``.
    """
    dt, horizon = rational(dt), rational(horizon)
    if dt <= 0 or horizon <= 0:
        raise DomainError("need dt > 0 and horizon > 0")
    n = net.n
    if n > max_servers:
        raise ResourceError(
            f"the partition search is exponential in servers: {n} > "
            f"cap {max_servers}")
    _require_aggregate_kinds(net)
    steps = int(horizon / dt)
    cross = net.cross_flows()
    betas = [net.servers[j].fn for j in range(n)]
    beta_vals: list[list[Value]] = [
        [b.eval(k * dt) for k in range(steps + 1)] for b in betas]
    alpha_vals: list[list[Value]] = [
        [f.alpha.fn.eval(k * dt) for k in range(steps + 1 + (f.path[1] - f.path[0] + 1))]
        for f in cross]
    spans = [(f.path[0] - 1, f.path[1] - 1) for f in cross]

    out: list[Value] = []
    parts = [0] * n

    def search(j: int, remaining: int, acc: Value) -> Value:
        if acc is INF:
            return INF
        if j == n - 1:
            parts[j] = remaining
            total = acc
            bv = beta_vals[j][remaining]
            if bv is INF:
                return INF
            total += bv
            for idx, (lo, hi) in enumerate(spans):
                spanned = sum(parts[lo:hi + 1]) + (hi - lo + 1)
                total -= alpha_vals[idx][spanned]
            return total
        best: Value = INF
        for u in range(remaining + 1):
            parts[j] = u
            bv = beta_vals[j][u]
            if bv is INF:
                continue
            got = search(j + 1, remaining - u, acc + bv)
            if got is not INF and (best is INF or got < best):
                best = got
        return best

    for k in range(steps + 1):
        best: Value = INF
        lo_total = max(0, k - n + 1)
        for total in range(lo_total, k + 1):
            got = search(0, total, Fraction(0))
            if got is not INF and (best is INF or got < best):
                best = got
        if best is INF:
            out.append(INF)
        elif best < 0:
            out.append(Fraction(0))
        else:
            out.append(best)
    return GridTrajectory(dt, tuple(out))


# --- sequential baseline -----------------------------------------------------

def _hop_residual(server: Curve, cross_fns: list[UppFunction],
                  j: int) -> Curve:
    if not cross_fns:
        agg = Curve(zero_function(), ARRIVAL)
    else:
        fn = cross_fns[0]
        for other in cross_fns[1:]:
            fn = add(fn, other)
        agg = Curve(fn, ARRIVAL)
    if server.kind == "strict":
        return residual_strict(server, agg)
    if server.kind == "subadditive":
        return residual_subadditive(server, agg)
    if server.kind == "delay":
        raise AnalysisRefused(
            f"server {j} is a pure delay: the hop-by-hop analysis has no "
            "per-flow residual for it; use the aggregate analysis")
    raise AnalysisRefused(
        f"server {j} offers only a plain min-plus guarantee: no sound "
        "per-flow residual exists, a competitor served greedily can "
        "starve the flow (see netcalc.oracle.simulate_priority_starvation)")


def _per_flow_residuals(net: TandemNetwork,
                        ) -> tuple[dict[tuple[int, str], Curve], list[str]]:
    """Residual curve of every (server, flow) pair under hop-by-hop
    propagation: each flow's envelope is pushed through its own residual
    to the next hop before the next server is resolved.  Returns the
    residual map keyed by (1-based server index, flow id) plus any
    divergence diagnostics."""
    diagnostics: list[str] = []
    current: dict[str, Curve] = {f.id: f.alpha for f in net.flows}
    residuals: dict[tuple[int, str], Curve] = {}
    for j in range(1, net.n + 1):
        server = net.servers[j - 1]
        here = [f for f in net.flows if f.crosses(j)]
        for f in here:
            others = [current[g.id].fn for g in here if g.id != f.id]
            residuals[(j, f.id)] = _hop_residual(server, others, j)
        for f in here:
            if f.path[1] > j:
                nxt = output_arrival(current[f.id], residuals[(j, f.id)])
                if "unstable" in nxt.flags:
                    diagnostics.append(
                        f"flow {f.id!r} diverges after server {j}")
                current[f.id] = nxt
    return residuals, diagnostics


def sequential_analysis(net: TandemNetwork) -> AnalysisReport:
    """Hop-by-hop baseline: at each server, the flow of interest gets the
    residual after the other flows' current envelopes, and every flow's
    envelope is pushed through its own residual to the next hop.

    Pays every cross burst at every shared hop, so its delay bound is
    never better than the aggregate analysis on the same network; kept as
    the comparison baseline and for flows that do not span the whole
    tandem.  All servers must be strict or sub-additive.
    """
    margins = stability_margins(net)
    residuals, diagnostics = _per_flow_residuals(net)
    foi = net.foi
    fn = delta(Fraction(0))
    for j in range(foi.path[0], foi.path[1] + 1):
        res = residuals[(j, foi.id)]
        if "unstable" in res.flags:
            diagnostics.append(
                f"server {j}: cross traffic leaves the flow of "
                "interest no long-run rate")
        fn = convolve(fn, res.fn)
    curve = Curve(fn.canonical(), "service", "minplus")
    delay = horizontal_deviation(foi.alpha.fn, curve.fn)
    backlog = vertical_deviation(foi.alpha.fn, curve.fn)
    if delay is INF:
        diagnostics.append("unstable: unbounded delay in sequential analysis")
    return AnalysisReport(curve, delay, backlog, margins, tuple(diagnostics))


# --- the homogeneous comparison instance -------------------------------------

def homogeneous_tandem(n: int, rate: Fraction, link_delay: Fraction,
                       foi_rate: Fraction, foi_burst: Fraction,
                       long_rate: Fraction, long_burst: Fraction,
                       hop_rate: Fraction, hop_burst: Fraction,
                       min_alpha: tuple[Fraction, Fraction] | None = None,
                       ) -> TandemNetwork:
    """n identical link+switch subsystems: a pure delay followed by a
    constant-rate server.  The flow of interest and one long cross flow
    span everything; a fresh cross flow enters at each subsystem and
    leaves after it."""
    if n < 1:
        raise DomainError("need at least one subsystem")
    servers: list[Curve] = []
    for _ in range(n):
        servers.append(pure_delay(link_delay))
        servers.append(constant_rate(rate))
    flows = [
        FlowSpec("foi", token_bucket(foi_rate, foi_burst), (1, 2 * n),
                 min_alpha),
        FlowSpec("long", token_bucket(long_rate, long_burst), (1, 2 * n)),
    ]
    for i in range(n):
        flows.append(FlowSpec(f"hop{i + 1}",
                              token_bucket(hop_rate, hop_burst),
                              (2 * i + 1, 2 * i + 2)))
    return TandemNetwork(tuple(servers), tuple(flows), "foi")


def conventional_delay_closed_form(n: int, rate: Fraction,
                                   link_delay: Fraction, foi_burst: Fraction,
                                   long_rate: Fraction, long_burst: Fraction,
                                   hop_rate: Fraction, hop_burst: Fraction,
                                   ) -> Value:
    """The aggregate bound for the homogeneous instance, written out:
    n*T + (b_long + n*(b_hop + (r_long + r_hop)*T)) / R' + b_foi / R'
    with R' the rate left over.  Matches pmoo_analysis on the same
    instance exactly; kept explicit for the comparison sweep."""
    left = rate - long_rate - hop_rate
    if left <= 0:
        return INF
    return (n * link_delay
            + (long_burst + n * (hop_burst + (long_rate + hop_rate)
                                 * link_delay)) / left
            + foi_burst / left)


def unconventional_delay_bound(n: int, rate: Fraction, link_delay: Fraction,
                               foi_burst: Fraction,
                               long_rate: Fraction, long_burst: Fraction,
                               hop_rate: Fraction, hop_burst: Fraction,
                               min_rate: Fraction, min_latency: Fraction,
                               ) -> Value:
    """Comparison bound folding the tandem into one rate-latency server
    with all cross traffic aggregated, then leaning on the flow of
    interest's minimum arrival envelope (rate ``min_rate`` after
    ``min_latency``) to bound how long its backlog can linger.

    The first max-term reproduces the aggregate bound; the second grows
    as 1/min_rate, so the result is never below the aggregate bound and
    diverges as the minimum rate vanishes.
    """
    if min_rate < 0 or min_latency < 0:
        raise DomainError("minimum envelope needs rate, latency >= 0")
    agg_latency = n * link_delay
    cross_rate = long_rate + hop_rate
    cross_burst = long_burst + n * hop_burst
    left = rate - cross_rate
    if left <= 0:
        return INF
    lingering = cross_burst + cross_rate * agg_latency
    first = agg_latency + (lingering + foi_burst) / left
    if min_rate == 0:
        return INF
    second = agg_latency + min_latency + lingering / min_rate
    return max(first, second)
