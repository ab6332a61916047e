"""Named curves, their roles and kinds, and per-server transformations.

A ``Curve`` pairs a piecewise function with what it claims about a system:
an arrival bound, or a service guarantee in one of four flavours.  The
flavours matter because the residual-service theorems need more than the
bare convolution guarantee:

* ``"strict"``: during any backlogged interval of length t the server
  delivers at least fn(t).  Residual service under cross traffic is sound.
* ``"subadditive"``: a convolution-form guarantee whose curve is
  sub-additive.  The same residual formula is sound, which is what makes
  window-based feedback analyzable at all.
* ``"minplus"``: only the convolution guarantee.  Residual service is
  UNSOUND here (a greedy competitor can starve a flow forever), so the
  residual entry point for this kind refuses and points at the executable
  counterexample.
* ``"delay"``: a transmission link traversed in between ``min_delay`` and
  ``max_delay``; its analysis curve is the pure-delay function of the
  spread, with the fixed part accounted separately by the tandem layer.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

from netcalc.upp import (
    DomainError,
    NetcalcError,
    UppFunction,
    affine,
    convolve,
    deconvolve,
    delta,
    impulse,
    is_subadditive,
    minimum,
    monus,
    rate_latency_fn,
    rational,
)

__all__ = [
    "ARRIVAL",
    "SERVICE",
    "Curve",
    "KindError",
    "ResidualRefusal",
    "concatenate",
    "constant_rate",
    "output_arrival",
    "pure_delay",
    "rate_latency",
    "residual_minplus_unsafe",
    "residual_strict",
    "residual_subadditive",
    "token_bucket",
    "transmission_delay",
    "wfc_curve",
    "window_curve",
]

ARRIVAL = "arrival"
SERVICE = "service"

_SERVICE_KINDS = ("minplus", "subadditive", "strict", "delay")


class KindError(NetcalcError, TypeError):
    """An operation was applied to a curve of the wrong role or kind."""


def _is_nondecreasing(fn: UppFunction) -> bool:
    if fn.is_all_infinite:
        return True
    pieces = list(fn.transient)
    if fn.period_segments is not None:
        pieces += list(fn.period_segments)
    prev = fn.v0
    for s in pieces:
        if s.slope < 0:
            return False
        if s.value < prev:
            return False
        prev = s.end_value
    if fn.period_segments is not None:
        first = fn.period_segments[0]
        if first.value + fn.c < prev:
            return False
    return True


@dataclass(frozen=True)
class Curve:
    fn: UppFunction
    role: str
    kind: str | None = None
    min_delay: Fraction | None = None
    max_delay: Fraction | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.role not in (ARRIVAL, SERVICE):
            raise KindError(f"unknown curve role {self.role!r}")
        if self.role == ARRIVAL:
            if self.kind is not None:
                raise KindError("arrival curves carry no service kind")
            if not self.fn.is_all_infinite and self.fn.v0 != 0:
                raise DomainError("an arrival curve must be 0 at 0")
        else:
            if self.kind not in _SERVICE_KINDS:
                raise KindError(
                    f"service kind must be one of {_SERVICE_KINDS}, "
                    f"got {self.kind!r}")
            if self.kind == "subadditive" and not is_subadditive(self.fn):
                raise DomainError(
                    "curve tagged sub-additive fails the f (/) f = f test")
        if not _is_nondecreasing(self.fn):
            raise DomainError("curves must be non-decreasing")
        if self.kind == "delay":
            if self.min_delay is None or self.max_delay is None:
                raise DomainError("delay servers need min_delay and max_delay")
            if not (0 <= self.min_delay <= self.max_delay):
                raise DomainError("delay servers need 0 <= min <= max")
            if not self.fn.equivalent(delta(self.max_delay - self.min_delay)):
                raise DomainError(
                    "a delay server's curve must be the pure delay of its "
                    "spread max - min")
        elif self.min_delay is not None or self.max_delay is not None:
            raise DomainError("delay bounds only apply to kind 'delay'")

    @property
    def is_service(self) -> bool:
        return self.role == SERVICE

    def with_flags(self, *extra: str) -> "Curve":
        merged = tuple(dict.fromkeys(self.flags + extra))
        return replace(self, flags=merged)


def _require_service(c: Curve, what: str) -> None:
    if c.role != SERVICE:
        raise KindError(f"{what} needs a service curve, got role {c.role!r}")


def _require_arrival(c: Curve, what: str) -> None:
    if c.role != ARRIVAL:
        raise KindError(f"{what} needs an arrival curve, got role {c.role!r}")


# --- the curve zoo -----------------------------------------------------------

def token_bucket(rate: Fraction | int | str,
                 burst: Fraction | int | str) -> Curve:
    """Arrival bound ``burst + rate * t`` for t > 0 (0 at 0)."""
    return Curve(affine(rational(burst), rational(rate)), ARRIVAL)


def rate_latency(rate: Fraction | int | str, latency: Fraction | int | str,
                 kind: str = "strict") -> Curve:
    """Service ``rate * (t - latency)_+``; strict by default because that is
    what schedulers offering rate-latency guarantees actually provide."""
    return Curve(rate_latency_fn(rational(rate), rational(latency)),
                 SERVICE, kind)


def constant_rate(rate: Fraction | int | str,
                  kind: str = "subadditive") -> Curve:
    """Service at a fixed rate; sub-additive, so residuals are sound."""
    return Curve(affine(Fraction(0), rational(rate)), SERVICE, kind)


def pure_delay(d: Fraction | int | str) -> Curve:
    """A link crossed in at most ``d``: delay kind with spread [0, d]."""
    return transmission_delay(Fraction(0), rational(d))


def transmission_delay(min_delay: Fraction | int | str,
                       max_delay: Fraction | int | str) -> Curve:
    m, big_m = rational(min_delay), rational(max_delay)
    return Curve(delta(big_m - m), SERVICE, "delay",
                 min_delay=m, max_delay=big_m)


def window_curve(size: Fraction | int | str) -> Curve:
    """The burst-window curve: ``size`` at 0, +inf after.  Convolving a
    service curve with it caps what a feedback window lets through."""
    return Curve(impulse(rational(size)), SERVICE, "minplus")


def wfc_curve(size: Fraction | int | str, rate: Fraction | int | str,
              latency: Fraction | int | str) -> Curve:
    """0 at 0, then ``size + rate * (t - latency)_+``.

    Sub-additive exactly when size >= rate * latency; below that boundary
    the curve is tagged plain minplus.
    """
    size, rate, latency = rational(size), rational(rate), rational(latency)
    fn = minimum(delta(Fraction(0)),
                 convolve(rate_latency_fn(rate, latency),
                          impulse(size))).canonical()
    kind = "subadditive" if size >= rate * latency else "minplus"
    return Curve(fn, SERVICE, kind)


# --- per-server transformations ----------------------------------------------

def output_arrival(alpha: Curve, beta: Curve) -> Curve:
    """Arrival bound for the departures of ``alpha``-traffic served with
    guarantee ``beta``: the deconvolution of the two curves.

    A divergent result (arrival rate above the service rate) comes back as
    the all-infinite bound flagged ``unstable``.
    """
    _require_arrival(alpha, "output_arrival")
    _require_service(beta, "output_arrival")
    out = deconvolve(alpha.fn, beta.fn)
    flags = alpha.flags
    if out.is_all_infinite:
        flags = tuple(dict.fromkeys(flags + ("unstable",)))
    return Curve(out, ARRIVAL, flags=flags)


def concatenate(servers: Sequence[Curve] | Iterable[Curve]) -> Curve:
    """End-to-end service of a chain: the convolution of the members.

    The result is only ever a plain convolution guarantee: chaining strict
    servers does not give a strict chain.  When the convolved curve happens
    to be sub-additive (checkable exactly), it is re-tagged so, which is
    what keeps residual computations available after concatenation.
    """
    servers = list(servers)
    for c in servers:
        _require_service(c, "concatenate")
    fn = delta(Fraction(0))
    for c in servers:
        fn = convolve(fn, c.fn)
    fn = fn.canonical()
    kind = "minplus"
    if not fn.is_all_infinite and fn.v0 == 0 and is_subadditive(fn):
        kind = "subadditive"
    return Curve(fn, SERVICE, kind)


def _residual(beta: Curve, cross: Curve) -> Curve:
    out = monus(beta.fn, cross.fn, service_curve=True)
    flags = ()
    if out.long_run_rate == 0 and beta.fn.long_run_rate > 0:
        flags = ("unstable",)
    return Curve(out, SERVICE, "minplus", flags=flags)


def residual_strict(beta: Curve, cross: Curve) -> Curve:
    """Service left to one flow when a strict server also carries ``cross``.

    ``(beta - cross)_+`` made non-decreasing; the result is only a plain
    convolution guarantee, and it is flagged ``unstable`` when the cross
    traffic eats the whole long-run rate.
    """
    _require_service(beta, "residual_strict")
    _require_arrival(cross, "residual_strict")
    if beta.kind != "strict":
        raise KindError(
            "residual_strict needs a strict service curve; a plain "
            "convolution guarantee can leave a flow entirely unserved "
            "behind a greedy competitor (simulate_priority_starvation "
            "shows the schedule). Use residual_subadditive for "
            "sub-additive curves.")
    return _residual(beta, cross)


def residual_subadditive(beta: Curve, cross: Curve) -> Curve:
    """Same formula as residual_strict, sound because the curve is
    sub-additive rather than because the server is strict.

    Note the output is in general NOT sub-additive itself, hence kind
    ``minplus``: chaining residuals needs care.
    """
    _require_service(beta, "residual_subadditive")
    _require_arrival(cross, "residual_subadditive")
    if beta.kind != "subadditive":
        raise KindError(
            "residual_subadditive needs a curve tagged sub-additive "
            "(checked by f (/) f = f); for strict servers use "
            "residual_strict, and for plain convolution guarantees no "
            "sound residual exists")
    return _residual(beta, cross)


@dataclass(frozen=True)
class ResidualRefusal:
    """Why no residual curve is returned, with a pointer to the executable
    scenario that would break any claimed bound."""

    reason: str
    scenario: str = "netcalc.oracle.simulate_priority_starvation"
    advice: str = ""


def residual_minplus_unsafe(beta: Curve, cross: Curve) -> ResidualRefusal:
    """Deliberately returns a refusal, never a curve.

    With only a convolution guarantee the server may defer one flow
    indefinitely while still honouring the aggregate bound: the priority
    split simulation produces departures D1 = 0 for all time.  Any curve
    returned here would certify a delay bound the system can violate.
    """
    _require_service(beta, "residual_minplus_unsafe")
    _require_arrival(cross, "residual_minplus_unsafe")
    advice = ""
    if not beta.fn.is_all_infinite and beta.fn.v0 == 0 \
            and is_subadditive(beta.fn):
        advice = ("this curve is actually sub-additive: reclassify it and "
                  "call residual_subadditive")
    elif beta.kind == "strict":
        advice = "the server is strict: call residual_strict"
    return ResidualRefusal(
        reason=("a plain convolution-form guarantee does not bound how "
                "long the server may starve one flow of an aggregate; "
                "the minimal-departure schedule with a greedy competitor "
                "serves the victim flow nothing, ever"),
        advice=advice)
