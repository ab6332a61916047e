"""Exact arithmetic on ultimately pseudo-periodic piecewise-affine functions.

The function class handled here is the standard finite representation that is
closed under the (min,plus) operations used in deterministic network calculus:
a value at 0, finitely many affine segments on (0, rank], and then either

* a periodic tail: ``f(t + d) = f(t) + c`` for all ``t > rank``, with period
  ``d > 0`` and increment ``c >= 0``, or
* no tail at all: ``f(t) = +inf`` for ``t > rank`` (used for pure delays and
  window impulses).

All breakpoints, values and slopes are exact ``fractions.Fraction`` values;
``float('inf')`` is the only non-rational value and always means +inf.
Functions are non-negative and interpreted as left-continuous: a segment owns
the half-open interval ``(start, end]`` and stores the value just after
``start`` (its right limit there).

Binary operations first derive a candidate shape (rank, period, increment)
for the result from affine bounding lines, then *verify* one full period of
the assembled result against the next and grow the computation window until
the check passes.  Results are therefore exact by construction rather than by
trust in window arithmetic.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, gcd, inf
from typing import Callable, Sequence

__all__ = [
    "INF",
    "DomainError",
    "NetcalcError",
    "ResourceError",
    "Segment",
    "UppFunction",
    "add",
    "affine",
    "all_infinite",
    "convolve",
    "deconvolve",
    "delta",
    "horizontal_deviation",
    "impulse",
    "is_subadditive",
    "minimum",
    "monotone_minorant",
    "monus",
    "rate_latency_fn",
    "rational",
    "subadditive_closure",
    "vertical_deviation",
    "zero_function",
]

INF = inf

_MAX_SEGMENTS_ENV = "NETCALC_MAX_SEGMENTS"
_DEFAULT_MAX_SEGMENTS = 100_000


class NetcalcError(Exception):
    """Base class for all library errors."""


class DomainError(NetcalcError, ValueError):
    """A precondition on operands was violated."""


class ResourceError(NetcalcError, RuntimeError):
    """A configured complexity guard was exceeded."""


def rational(x: int | str | Fraction) -> Fraction:
    """Coerce ``x`` to an exact rational.

    Accepts ints, Fractions and strings like ``"3/16"`` or ``"0.05"``.
    Floats are rejected so that inexact values never enter the kernel by
    accident.
    """
    if isinstance(x, float):
        raise DomainError(f"refusing float {x!r}; pass an exact rational")
    return Fraction(x)


def _max_segments() -> int:
    raw = os.environ.get(_MAX_SEGMENTS_ENV)
    if raw is None:
        return _DEFAULT_MAX_SEGMENTS
    try:
        value = int(raw)
    except ValueError as exc:
        raise DomainError(f"{_MAX_SEGMENTS_ENV} must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise DomainError(f"{_MAX_SEGMENTS_ENV} must be positive, got {value}")
    return value


def _guard_segments(count: int, context: str) -> None:
    limit = _max_segments()
    if count > limit:
        raise ResourceError(
            f"{context} would materialize {count} segments, exceeding the "
            f"limit of {limit} (override with {_MAX_SEGMENTS_ENV})"
        )


def _lcm_fraction(a: Fraction, b: Fraction) -> Fraction:
    """Least common multiple of two positive rationals."""
    p = a.numerator * b.denominator
    q = b.numerator * a.denominator
    return Fraction(p * q // gcd(p, q), a.denominator * b.denominator)


@dataclass(frozen=True)
class Segment:
    """One affine piece on the half-open interval ``(start, end]``.

    ``value`` is the right limit at ``start``; on the interval the function
    is ``value + slope * (t - start)``.
    """

    start: Fraction
    end: Fraction
    value: Fraction
    slope: Fraction

    def __post_init__(self) -> None:
        if self.end <= self.start:
            raise DomainError(f"empty segment ({self.start}, {self.end}]")

    def at(self, t: Fraction) -> Fraction:
        return self.value + self.slope * (t - self.start)

    @property
    def end_value(self) -> Fraction:
        return self.value + self.slope * (self.end - self.start)

    def shifted(self, dt: Fraction, dv: Fraction) -> "Segment":
        return Segment(self.start + dt, self.end + dt, self.value + dv, self.slope)


def _check_cover(segments: Sequence[Segment], lo: Fraction, hi: Fraction) -> None:
    if hi == lo:
        if segments:
            raise DomainError("segments given for an empty interval")
        return
    if not segments:
        raise DomainError(f"no segments covering ({lo}, {hi}]")
    cursor = lo
    for seg in segments:
        if seg.start != cursor:
            raise DomainError(f"segment gap at {cursor}: next starts at {seg.start}")
        cursor = seg.end
    if cursor != hi:
        raise DomainError(f"segments end at {cursor}, expected {hi}")


@dataclass(frozen=True)
class UppFunction:
    """An ultimately pseudo-periodic piecewise-affine function.

    ``period_segments is None`` means the function is +inf beyond ``rank``
    (the eventually-infinite mode).  ``v0`` is ``INF`` only for the single
    everywhere-infinite function produced by diverging deconvolutions.
    """

    v0: Fraction | float
    transient: tuple[Segment, ...]
    rank: Fraction
    period_segments: tuple[Segment, ...] | None
    d: Fraction
    c: Fraction

    def __post_init__(self) -> None:
        if self.v0 is INF:
            if self.transient or self.period_segments is not None or self.rank != 0:
                raise DomainError("the all-infinite function has no finite parts")
            return
        if self.v0 < 0:
            raise DomainError(f"negative value at 0: {self.v0}")
        if self.rank < 0:
            raise DomainError(f"negative rank {self.rank}")
        _check_cover(self.transient, Fraction(0), self.rank)
        for seg in self.transient:
            if seg.value < 0 or seg.end_value < 0:
                raise DomainError("negative segment value")
        if self.period_segments is None:
            if self.d != 0 or self.c != 0:
                raise DomainError("eventually-infinite mode must have d = c = 0")
            return
        if self.d <= 0:
            raise DomainError(f"period must be positive, got {self.d}")
        if self.c < 0:
            raise DomainError(f"negative increment {self.c}")
        _check_cover(self.period_segments, self.rank, self.rank + self.d)
        for seg in self.period_segments:
            if seg.value < 0 or seg.end_value < 0:
                raise DomainError("negative segment value")

    # ------------------------------------------------------------------
    # classification

    @property
    def is_all_infinite(self) -> bool:
        return self.v0 is INF

    @property
    def eventually_infinite(self) -> bool:
        return not self.is_all_infinite and self.period_segments is None

    @property
    def long_run_rate(self) -> Fraction | float:
        """c/d for periodic functions, INF otherwise."""
        if self.is_all_infinite or self.period_segments is None:
            return INF
        return self.c / self.d

    # ------------------------------------------------------------------
    # evaluation

    def __call__(self, t: Fraction | int | str) -> Fraction | float:
        return self.eval(rational(t))

    def eval(self, t: Fraction) -> Fraction | float:
        """Value at ``t`` (left-continuous convention)."""
        if t < 0:
            raise DomainError(f"negative time {t}")
        if self.is_all_infinite:
            return INF
        if t == 0:
            return self.v0
        if t <= self.rank:
            for seg in self.transient:
                if t <= seg.end:
                    return seg.at(t)
            raise AssertionError("transient segments did not cover the point")
        if self.period_segments is None:
            return INF
        shift = (t - self.rank) / self.d
        k = shift.numerator // shift.denominator
        base = t - k * self.d
        if base <= self.rank:
            k -= 1
            base = t - k * self.d
        for seg in self.period_segments:
            if base <= seg.end:
                return seg.at(base) + k * self.c
        raise AssertionError("period segments did not cover the reduced point")

    def eval_right(self, t: Fraction) -> Fraction | float:
        """Right limit at ``t`` (the value just after ``t``)."""
        if t < 0:
            raise DomainError(f"negative time {t}")
        if self.is_all_infinite:
            return INF
        if self.eventually_infinite and t >= self.rank:
            return INF
        for seg in self.segments_on(t, t + Fraction(1)):
            if seg.start == t:
                return seg.value
            if seg.start < t < seg.end:
                return seg.at(t)
        raise AssertionError("no segment just after the point")

    # ------------------------------------------------------------------
    # materialization

    def segments_on(self, lo: Fraction, hi: Fraction) -> list[Segment]:
        """Affine pieces of the function on ``(lo, hi]``, clipped.

        For eventually-infinite functions the list simply stops at the
        rank; the caller interprets the missing region as +inf.
        """
        if self.is_all_infinite:
            return []
        lo = max(lo, Fraction(0))
        if self.eventually_infinite:
            hi = min(hi, self.rank)
        if hi <= lo:
            return []
        out: list[Segment] = []
        for seg in self.transient:
            if seg.end <= lo or seg.start >= hi:
                continue
            out.append(_clip_segment(seg, lo, hi))
        if self.period_segments is not None:
            first_k = 0
            if lo > self.rank:
                shift = (lo - self.rank) / self.d
                first_k = max(0, shift.numerator // shift.denominator)
            copies = int((hi - self.rank) / self.d) + 2 - first_k
            _guard_segments(len(self.period_segments) * max(0, copies), "unrolling")
            k = first_k
            while self.rank + k * self.d < hi:
                for seg in self.period_segments:
                    moved = seg.shifted(k * self.d, k * self.c)
                    if moved.end <= lo or moved.start >= hi:
                        continue
                    out.append(_clip_segment(moved, lo, hi))
                k += 1
        out.sort(key=lambda s: s.start)
        return out

    def breakpoints_on(self, lo: Fraction, hi: Fraction) -> list[Fraction]:
        pts: set[Fraction] = set()
        for seg in self.segments_on(lo, hi):
            pts.add(seg.start)
            pts.add(seg.end)
        return sorted(p for p in pts if lo <= p <= hi)

    # ------------------------------------------------------------------
    # equality and canonical form

    def equivalent(self, other: "UppFunction") -> bool:
        """Exact semantic equality, independent of representation."""
        if self.is_all_infinite or other.is_all_infinite:
            return self.is_all_infinite and other.is_all_infinite
        if self.v0 != other.v0:
            return False
        if self.eventually_infinite or other.eventually_infinite:
            if not (self.eventually_infinite and other.eventually_infinite):
                return False
            if self.rank != other.rank:
                return False
            return _piecewise_equal(self, other, Fraction(0), self.rank)
        if self.long_run_rate != other.long_run_rate:
            return False
        big_d = _lcm_fraction(self.d, other.d)
        window = max(self.rank, other.rank) + big_d
        return _piecewise_equal(self, other, Fraction(0), window)

    def canonical(self) -> "UppFunction":
        """Merge collinear segments, reduce the period, peel the rank."""
        if self.is_all_infinite:
            return self
        transient = _merge_collinear(list(self.transient))
        if self.period_segments is None:
            return UppFunction(self.v0, tuple(transient), self.rank,
                               None, Fraction(0), Fraction(0))
        period = _merge_collinear(list(self.period_segments))
        rank, d, c = self.rank, self.d, self.c
        if len(period) == 1 and d != 1:
            seg = period[0]
            if c == seg.slope * d:
                # a flat or single-line tail is the same function with d = 1
                one = Fraction(1)
                period = [Segment(rank, rank + one, seg.value, seg.slope)]
                d, c = one, seg.slope
        changed = True
        while changed and len(period) > 1:
            changed = False
            n = len(period)
            for k in range(2, n + 1):
                if n % k:
                    continue
                m = n // k
                if _is_repetition(period, m, d / k, c / k):
                    period = period[:m]
                    d, c = d / k, c / k
                    changed = True
                    break
        while rank >= d and transient:
            chunk_lo = rank - d
            chunk = [s for s in transient if s.start >= chunk_lo]
            if not chunk or chunk[0].start != chunk_lo:
                break
            if _segment_lists_equal([s.shifted(d, c) for s in chunk], period):
                rank = chunk_lo
                transient = [s for s in transient if s.start < chunk_lo]
                period = chunk
            else:
                break
        return UppFunction(self.v0, tuple(transient), rank, tuple(period), d, c)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        if self.is_all_infinite:
            return "UppFunction(+inf everywhere)"
        parts = [f"v0={self.v0}"]
        parts.extend(f"({s.start},{s.end}]:{s.value}+{s.slope}t" for s in self.transient)
        if self.period_segments is None:
            parts.append(f"+inf after {self.rank}")
        else:
            parts.append("|".join(f"({s.start},{s.end}]:{s.value}+{s.slope}t"
                                  for s in self.period_segments))
            parts.append(f"d={self.d},c={self.c}")
        return "UppFunction<" + "; ".join(parts) + ">"


def _clip_segment(seg: Segment, lo: Fraction, hi: Fraction) -> Segment:
    start, value = seg.start, seg.value
    if start < lo:
        value = seg.at(lo)
        start = lo
    return Segment(start, min(seg.end, hi), value, seg.slope)


def _is_repetition(period: list[Segment], m: int, sub_d: Fraction,
                   sub_c: Fraction) -> bool:
    head = period[:m]
    for j in range(1, len(period) // m):
        moved = [s.shifted(j * sub_d, j * sub_c) for s in head]
        if not _segment_lists_equal(moved, period[j * m:(j + 1) * m]):
            return False
    return True


def _segment_lists_equal(a: Sequence[Segment], b: Sequence[Segment]) -> bool:
    return len(a) == len(b) and all(x == y for x, y in zip(a, b))


def _merge_collinear(segments: list[Segment]) -> list[Segment]:
    out: list[Segment] = []
    for seg in segments:
        if out:
            prev = out[-1]
            if (prev.slope == seg.slope and prev.end == seg.start
                    and prev.end_value == seg.value):
                out[-1] = Segment(prev.start, seg.end, prev.value, prev.slope)
                continue
        out.append(seg)
    return out


def _piecewise_equal(f: UppFunction, g: UppFunction, lo: Fraction,
                     hi: Fraction) -> bool:
    if hi <= lo:
        return True
    pts = sorted(set(f.breakpoints_on(lo, hi)) | set(g.breakpoints_on(lo, hi))
                 | {lo, hi})
    for a, b in zip(pts, pts[1:]):
        if f.eval_right(a) != g.eval_right(a):
            return False
        if f.eval(b) != g.eval(b):
            return False
    return True


# ----------------------------------------------------------------------
# constructors


def zero_function() -> UppFunction:
    """The function that is 0 everywhere."""
    z = Fraction(0)
    return UppFunction(z, (), z, (Segment(z, Fraction(1), z, z),), Fraction(1), z)


def affine(burst: Fraction | int | str, rate: Fraction | int | str) -> UppFunction:
    """``0 at 0; burst + rate*t for t > 0`` (the token-bucket shape)."""
    burst, rate = rational(burst), rational(rate)
    if burst < 0 or rate < 0:
        raise DomainError("affine curves need burst, rate >= 0")
    z = Fraction(0)
    return UppFunction(z, (), z, (Segment(z, Fraction(1), burst, rate),),
                       Fraction(1), rate)


def rate_latency_fn(rate: Fraction | int | str,
                    latency: Fraction | int | str) -> UppFunction:
    """``rate * (t - latency)_+``."""
    rate, latency = rational(rate), rational(latency)
    if rate < 0 or latency < 0:
        raise DomainError("rate-latency curves need rate, latency >= 0")
    z = Fraction(0)
    one = Fraction(1)
    if latency == 0:
        return UppFunction(z, (), z, (Segment(z, one, z, rate),), one, rate)
    return UppFunction(z, (Segment(z, latency, z, z),), latency,
                       (Segment(latency, latency + one, z, rate),), one, rate)


def delta(dly: Fraction | int | str) -> UppFunction:
    """0 on [0, d], +inf after (left-continuous, so the value *at* d is 0)."""
    dly = rational(dly)
    if dly < 0:
        raise DomainError("delay must be >= 0")
    z = Fraction(0)
    if dly == 0:
        return UppFunction(z, (), z, None, z, z)
    return UppFunction(z, (Segment(z, dly, z, z),), dly, None, z, z)


def impulse(height: Fraction | int | str) -> UppFunction:
    """The (min,plus) impulse: ``height`` at 0, +inf for t > 0.

    Convolving with it adds ``height`` pointwise, which is exactly the
    window-size offset used by the feedback construction.  ``impulse(0)``
    is the convolution unit ``delta(0)``.
    """
    height = rational(height)
    if height < 0:
        raise DomainError("impulse height must be >= 0")
    z = Fraction(0)
    return UppFunction(height, (), z, None, z, z)


def all_infinite() -> UppFunction:
    """The everywhere-+inf function (the diverging deconvolution result)."""
    return UppFunction(INF, (), Fraction(0), None, Fraction(0), Fraction(0))


# ----------------------------------------------------------------------
# affine bounding lines


def _bounding_offsets(f: UppFunction) -> tuple[Fraction, Fraction]:
    """(mu, nu) with ``mu + rho*t <= f(t) <= nu + rho*t`` for all t >= 0.

    Valid for periodic-mode functions only: the offsets repeat from period
    to period because the increment equals rho * d.
    """
    assert not f.is_all_infinite and f.period_segments is not None
    rho = f.long_run_rate
    lo = hi = f.v0
    for seg in f.segments_on(Fraction(0), f.rank + f.d):
        for t, v in ((seg.start, seg.value), (seg.end, seg.end_value)):
            off = v - rho * t
            lo = min(lo, off)
            hi = max(hi, off)
    return lo, hi


def _sup_difference_on(f: UppFunction, g: UppFunction, hi: Fraction) -> Fraction:
    """``sup_{0 <= u <= hi} f(u) - g(u)`` where both operands are finite."""
    best = f.v0 - g.v0
    pts = sorted(set(f.breakpoints_on(Fraction(0), hi))
                 | set(g.breakpoints_on(Fraction(0), hi)) | {Fraction(0), hi})
    for t in pts:
        fv, gv = f.eval(t), g.eval(t)
        if fv is not INF and gv is not INF:
            best = max(best, fv - gv)
        if t < hi:
            fr, gr = f.eval_right(t), g.eval_right(t)
            if fr is not INF and gr is not INF:
                best = max(best, fr - gr)
    return best


# ----------------------------------------------------------------------
# envelopes of affine pieces


def _line_min_hull(lines: list[tuple[Fraction, Fraction]], a: Fraction,
                   b: Fraction) -> list[tuple[Fraction, Fraction, Fraction]]:
    """Lower envelope of lines on ``(a, b]``.

    ``lines`` are (value at a, slope) pairs; returns (start, value at start,
    slope) knots of the concave minimum, with increasing starts from ``a``.
    """
    best_by_slope: dict[Fraction, Fraction] = {}
    for v, m in lines:
        if m not in best_by_slope or v < best_by_slope[m]:
            best_by_slope[m] = v
    cand = [(v, m) for m, v in best_by_slope.items()]
    v_t, m_t = min(cand, key=lambda p: (p[0], p[1]))
    t = a
    knots = [(t, v_t, m_t)]
    while True:
        cut: tuple[Fraction, Fraction, Fraction] | None = None
        for v, m in cand:
            if m >= m_t:
                continue
            value_at_t = v + m * (t - a)
            if value_at_t <= v_t:
                continue
            x = t + (value_at_t - v_t) / (m_t - m)
            if x >= b:
                continue
            if cut is None or x < cut[0] or (x == cut[0] and m < cut[2]):
                cut = (x, v + m * (x - a), m)
        if cut is None:
            return knots
        t, v_t, m_t = cut
        knots.append(cut)


def _envelope(pieces: list[Segment], lo: Fraction, hi: Fraction, upper: bool,
              context: str) -> tuple[list[Segment], list[tuple[Fraction, Fraction]]]:
    """Lower (or upper) envelope of affine pieces over ``(lo, hi]``.

    Returns covering segments plus the gap intervals where no piece was
    active (used to detect eventually-infinite regions).
    """
    _guard_segments(len(pieces), context)
    if upper:
        flipped = [Segment(p.start, p.end, -p.value, -p.slope) for p in pieces]
        segs, gaps = _envelope(flipped, lo, hi, False, context)
        return ([Segment(s.start, s.end, -s.value, -s.slope) for s in segs], gaps)
    events = {lo, hi}
    for p in pieces:
        if p.end <= lo or p.start >= hi:
            continue
        events.add(max(p.start, lo))
        events.add(min(p.end, hi))
    pts = sorted(events)
    out: list[Segment] = []
    gaps: list[tuple[Fraction, Fraction]] = []
    for a, b in zip(pts, pts[1:]):
        lines = [(p.at(a) if p.start < a else p.value, p.slope)
                 for p in pieces if p.start <= a and p.end >= b]
        if not lines:
            gaps.append((a, b))
            continue
        knots = _line_min_hull(lines, a, b)
        for i, (t, v, m) in enumerate(knots):
            end = knots[i + 1][0] if i + 1 < len(knots) else b
            out.append(Segment(t, end, v, m))
    return _merge_collinear(out), gaps


# ----------------------------------------------------------------------
# pointwise binary operations


def _atoms(f: UppFunction, g: UppFunction, hi: Fraction):
    """Yield (a, b, f-line, g-line) with each operand affine on ``(a, b]``.

    A line is a (value just after a, slope) pair, or None where the operand
    is +inf on the whole atom.
    """
    pts = sorted(set(f.breakpoints_on(Fraction(0), hi))
                 | set(g.breakpoints_on(Fraction(0), hi)) | {Fraction(0), hi})
    for a, b in zip(pts, pts[1:]):
        fv, gv = f.eval_right(a), g.eval_right(a)
        fb, gb = f.eval(b), g.eval(b)
        fp = None if fv is INF else (fv, (fb - fv) / (b - a))
        gp = None if gv is INF else (gv, (gb - gv) / (b - a))
        yield a, b, fp, gp


def _pointwise_min_segments(f: UppFunction, g: UppFunction,
                            hi: Fraction) -> list[Segment]:
    out: list[Segment] = []
    for a, b, fp, gp in _atoms(f, g, hi):
        if fp is None and gp is None:
            continue
        if fp is None or gp is None:
            v, m = fp if gp is None else gp
            out.append(Segment(a, b, v, m))
            continue
        (fv, fm), (gv, gm) = fp, gp
        lead = (fv, fm) if (fv, fm) <= (gv, gm) else (gv, gm)
        trail = (gv, gm) if lead == (fv, fm) else (fv, fm)
        if trail[1] < lead[1] and trail[0] > lead[0]:
            cross = a + (trail[0] - lead[0]) / (lead[1] - trail[1])
            if cross < b:
                out.append(Segment(a, cross, lead[0], lead[1]))
                out.append(Segment(cross, b, lead[0] + lead[1] * (cross - a), trail[1]))
                continue
        out.append(Segment(a, b, lead[0], lead[1]))
    return _merge_collinear(out)


def _pointwise_sum_segments(f: UppFunction, g: UppFunction,
                            hi: Fraction) -> list[Segment]:
    out: list[Segment] = []
    for a, b, fp, gp in _atoms(f, g, hi):
        if fp is None or gp is None:
            continue
        out.append(Segment(a, b, fp[0] + gp[0], fp[1] + gp[1]))
    return _merge_collinear(out)


def _difference_segments(f: UppFunction, g: UppFunction,
                         hi: Fraction) -> list[Segment]:
    """Pieces of ``(f - g)_+`` on (0, hi]; a +inf subtrahend clips to 0."""
    out: list[Segment] = []
    for a, b, fp, gp in _atoms(f, g, hi):
        if gp is None:
            out.append(Segment(a, b, Fraction(0), Fraction(0)))
            continue
        if fp is None:
            raise DomainError("monus of a +inf minuend inside the finite window")
        out.append(Segment(a, b, fp[0] - gp[0], fp[1] - gp[1]))
    return _clip_negative(out)


def _clip_negative(segments: list[Segment]) -> list[Segment]:
    out: list[Segment] = []
    for seg in segments:
        v, e = seg.value, seg.end_value
        if v >= 0 and e >= 0:
            out.append(seg)
        elif v <= 0 and e <= 0:
            out.append(Segment(seg.start, seg.end, Fraction(0), Fraction(0)))
        else:
            cross = seg.start + (Fraction(0) - v) / seg.slope
            if v < 0:
                out.append(Segment(seg.start, cross, Fraction(0), Fraction(0)))
                out.append(Segment(cross, seg.end, Fraction(0), seg.slope))
            else:
                out.append(Segment(seg.start, cross, v, seg.slope))
                out.append(Segment(cross, seg.end, Fraction(0), Fraction(0)))
    return _merge_collinear(out)


# ----------------------------------------------------------------------
# periodic assembly with verification


def _assemble_periodic(build: Callable[[Fraction], list[Segment]],
                       v0: Fraction, base_rank: Fraction, d: Fraction,
                       c: Fraction, context: str) -> UppFunction:
    """Assemble a periodic function from an exact window builder.

    ``build(hi)`` returns the exact affine pieces of the result on
    ``(0, hi]``.  The candidate (base_rank, d, c) is verified by comparing
    one period of the built pieces with the next; the rank advances in
    ``d``-steps (and the window regrows geometrically) until it checks out.
    """
    pad = Fraction(0)
    for _ in range(10):
        hi = base_rank + pad + 2 * d
        pieces = build(hi)
        rank = base_rank
        while rank + 2 * d <= hi:
            if _periodicity_holds(pieces, rank, d, c):
                transient = [_clip_segment(s, Fraction(0), rank) for s in pieces
                             if s.start < rank]
                pattern = [_clip_segment(s, rank, rank + d) for s in pieces
                           if s.end > rank and s.start < rank + d]
                out = UppFunction(v0, tuple(transient), rank, tuple(pattern), d, c)
                return out.canonical()
            rank += d
        pad = d if pad == 0 else 2 * pad
    raise AssertionError(f"{context}: periodic structure did not verify; "
                         "this is a bug, not a property of the input")


def _periodicity_holds(pieces: list[Segment], rank: Fraction, d: Fraction,
                       c: Fraction) -> bool:
    def left_value(t: Fraction) -> Fraction | None:
        for s in pieces:
            if s.start < t <= s.end:
                return s.at(t)
        return None

    def right_value(t: Fraction) -> Fraction | None:
        for s in pieces:
            if s.start <= t < s.end:
                return s.value if s.start == t else s.at(t)
        return None

    pts = {rank, rank + d}
    for s in pieces:
        for x in (s.start, s.end):
            if rank <= x <= rank + d:
                pts.add(x)
            if rank + d <= x <= rank + 2 * d:
                pts.add(x - d)
    ordered = sorted(pts)
    for a, b in zip(ordered, ordered[1:]):
        ra, rb = right_value(a), right_value(a + d)
        if ra is None or rb is None or rb - ra != c:
            return False
        la, lb = left_value(b), left_value(b + d)
        if la is None or lb is None or lb - la != c:
            return False
    return True


# ----------------------------------------------------------------------
# minimum, sum, monus, minorant


def minimum(f: UppFunction, g: UppFunction) -> UppFunction:
    """Pointwise minimum."""
    if f.is_all_infinite:
        return g
    if g.is_all_infinite:
        return f
    v0 = min(f.v0, g.v0)
    if f.eventually_infinite and g.eventually_infinite:
        rank = max(f.rank, g.rank)
        segs = _pointwise_min_segments(f, g, rank)
        return UppFunction(v0, tuple(segs), rank, None,
                           Fraction(0), Fraction(0)).canonical()
    if f.eventually_infinite or g.eventually_infinite:
        periodic, finite_support = (g, f) if f.eventually_infinite else (f, g)
        base_rank = max(periodic.rank, finite_support.rank)
        return _assemble_periodic(
            lambda hi: _pointwise_min_segments(f, g, hi),
            v0, base_rank, periodic.d, periodic.c, "minimum")
    rho_f, rho_g = f.long_run_rate, g.long_run_rate
    if rho_f == rho_g:
        big_d = _lcm_fraction(f.d, g.d)
        return _assemble_periodic(
            lambda hi: _pointwise_min_segments(f, g, hi),
            v0, max(f.rank, g.rank), big_d, f.c * (big_d / f.d), "minimum")
    if rho_f > rho_g:
        f, g = g, f
        rho_f, rho_g = rho_g, rho_f
    _, nu_f = _bounding_offsets(f)
    mu_g, _ = _bounding_offsets(g)
    # beyond t_star f's upper bounding line sits below g's lower one
    t_star = (nu_f - mu_g) / (rho_g - rho_f)
    base_rank = max(f.rank, g.rank, t_star)
    return _assemble_periodic(
        lambda hi: _pointwise_min_segments(f, g, hi),
        v0, base_rank, f.d, f.c, "minimum")


def add(f: UppFunction, g: UppFunction) -> UppFunction:
    """Pointwise sum (aggregation of arrival curves)."""
    if f.is_all_infinite or g.is_all_infinite:
        return all_infinite()
    v0 = f.v0 + g.v0
    if f.eventually_infinite or g.eventually_infinite:
        rank = min(h.rank for h in (f, g) if h.eventually_infinite)
        segs = _pointwise_sum_segments(f, g, rank)
        return UppFunction(v0, tuple(segs), rank, None,
                           Fraction(0), Fraction(0)).canonical()
    big_d = _lcm_fraction(f.d, g.d)
    big_c = f.c * (big_d / f.d) + g.c * (big_d / g.d)
    return _assemble_periodic(
        lambda hi: _pointwise_sum_segments(f, g, hi),
        v0, max(f.rank, g.rank), big_d, big_c, "add")


def monus(f: UppFunction, g: UppFunction, service_curve: bool = False) -> UppFunction:
    """``(f - g)_+``, the clipped pointwise difference.

    The raw result may be non-monotone.  With ``service_curve=True`` the
    greatest non-decreasing minorant is taken instead: any non-decreasing
    function below the raw difference keeps a residual-service guarantee
    valid, whereas a non-decreasing *upper* closure does not.
    """
    if g.is_all_infinite:
        return zero_function()
    if f.is_all_infinite:
        return all_infinite()
    v0 = max(Fraction(0), f.v0 - g.v0)
    if f.eventually_infinite:
        if g.eventually_infinite:
            raise DomainError(
                "difference of two eventually-infinite functions is undefined "
                "beyond their finite supports")
        segs = _difference_segments(f, g, f.rank)
        out = UppFunction(v0, tuple(segs), f.rank, None,
                          Fraction(0), Fraction(0)).canonical()
        return monotone_minorant(out) if service_curve else out

    def build(hi: Fraction) -> list[Segment]:
        return _difference_segments(f, g, hi)

    if g.eventually_infinite:
        # beyond g's support the subtrahend is +inf and the monus is 0
        out = _assemble_periodic(build, v0, max(f.rank, g.rank),
                                 Fraction(1), Fraction(0), "monus")
        return monotone_minorant(out) if service_curve else out
    rho_f, rho_g = f.long_run_rate, g.long_run_rate
    big_d = _lcm_fraction(f.d, g.d)
    if rho_f > rho_g:
        mu_f, _ = _bounding_offsets(f)
        _, nu_g = _bounding_offsets(g)
        t_star = (nu_g - mu_f) / (rho_f - rho_g)
        out = _assemble_periodic(build, v0, max(f.rank, g.rank, t_star),
                                 big_d, (rho_f - rho_g) * big_d, "monus")
    elif rho_f == rho_g:
        out = _assemble_periodic(build, v0, max(f.rank, g.rank),
                                 big_d, Fraction(0), "monus")
    else:
        _, nu_f = _bounding_offsets(f)
        mu_g, _ = _bounding_offsets(g)
        t_star = (nu_f - mu_g) / (rho_g - rho_f)
        out = _assemble_periodic(build, v0, max(f.rank, g.rank, t_star),
                                 Fraction(1), Fraction(0), "monus")
    return monotone_minorant(out) if service_curve else out


def monotone_minorant(f: UppFunction) -> UppFunction:
    """Greatest non-decreasing function below ``f``: ``inf_{s >= t} f(s)``."""
    if f.is_all_infinite:
        return f
    if f.eventually_infinite:
        segs = _minorant_segments(list(f.transient), None)
        head = segs[0].value if segs else f.v0
        return UppFunction(min(f.v0, head), tuple(segs), f.rank, None,
                           Fraction(0), Fraction(0)).canonical()
    assert f.period_segments is not None
    pattern = list(f.period_segments)
    # with increment c >= 0 every later period sits at least c higher, so
    # everything beyond the first pattern window is floored by its inf + c
    pattern_inf = min(min(s.value, s.end_value) for s in pattern)
    period = _minorant_segments(pattern, pattern_inf + f.c)
    transient = _minorant_segments(list(f.transient), pattern_inf)
    head = transient[0].value if transient else (
        period[0].value if period else pattern_inf)
    v0 = min(f.v0, head)
    return UppFunction(v0, tuple(transient), f.rank, tuple(period),
                       f.d, f.c).canonical()


def _minorant_segments(segments: list[Segment],
                       floor: Fraction | None) -> list[Segment]:
    """Right-to-left running infimum; ``floor`` is the inf beyond the window."""
    out: list[Segment] = []
    running = floor
    for seg in reversed(segments):
        if seg.slope >= 0:
            base = seg  # the inf over [t, end] is the value at t itself
        else:
            base = Segment(seg.start, seg.end, seg.end_value, Fraction(0))
        if running is None:
            out.append(base)
        else:
            v, e = base.value, base.end_value
            if v >= running and e >= running:
                out.append(Segment(base.start, base.end, running, Fraction(0)))
            elif base.slope > 0 and v < running <= e:
                cross = base.start + (running - v) / base.slope
                if cross < base.end:
                    out.append(Segment(cross, base.end, running, Fraction(0)))
                out.append(Segment(base.start, min(cross, base.end), v, base.slope))
            else:
                out.append(base)
        seg_inf = min(seg.value, seg.end_value)
        running = seg_inf if running is None else min(running, seg_inf)
    out.reverse()
    return _merge_collinear(out)


# ----------------------------------------------------------------------
# (min,plus) convolution


def convolve(f: UppFunction, g: UppFunction) -> UppFunction:
    """Exact (min,plus) convolution ``inf_{0 <= s <= t} f(s) + g(t - s)``."""
    if f.is_all_infinite or g.is_all_infinite:
        return all_infinite()
    v0 = f.v0 + g.v0
    if f.eventually_infinite and g.eventually_infinite:
        span = f.rank + g.rank
        if span == 0:
            return UppFunction(v0, (), Fraction(0), None, Fraction(0), Fraction(0))
        pieces = _conv_pieces(f, g, span, f.rank, g.rank)
        segs, gaps = _envelope(pieces, Fraction(0), span, False, "convolve")
        if gaps:
            raise AssertionError("convolution of finite supports left a gap")
        return UppFunction(v0, tuple(segs), span, None,
                           Fraction(0), Fraction(0)).canonical()
    if f.eventually_infinite or g.eventually_infinite:
        if g.eventually_infinite:
            f, g = g, f
        # f has finite support [0, f.rank]; the tail follows g shifted
        base_rank = f.rank + g.rank + g.d

        def build(hi: Fraction) -> list[Segment]:
            pieces = _conv_pieces(f, g, hi, f.rank, hi)
            segs, gaps = _envelope(pieces, Fraction(0), hi, False, "convolve")
            if gaps:
                raise AssertionError("unexpected gap in convolution window")
            return segs

        return _assemble_periodic(build, v0, base_rank, g.d, g.c, "convolve")
    rho_f, rho_g = f.long_run_rate, g.long_run_rate
    if rho_f > rho_g:
        f, g = g, f
        rho_f, rho_g = rho_g, rho_f
    if rho_f == rho_g:
        big_d = _lcm_fraction(f.d, g.d)
        base_rank = f.rank + g.rank + big_d

        def build_eq(hi: Fraction) -> list[Segment]:
            pieces = _conv_pieces(f, g, hi, hi, hi)
            segs, gaps = _envelope(pieces, Fraction(0), hi, False, "convolve")
            if gaps:
                raise AssertionError("unexpected gap in convolution window")
            return segs

        return _assemble_periodic(build_eq, v0, base_rank, big_d,
                                  rho_f * big_d, "convolve")
    mu_f, nu_f = _bounding_offsets(f)
    mu_g, _ = _bounding_offsets(g)
    # splits sending more than s_star to the faster operand are dominated
    # by giving the excess to the slower one instead
    s_star = (nu_f + g.v0 - mu_f - mu_g) / (rho_g - rho_f)
    g_window = max(s_star, g.rank) + g.d
    base_rank = f.rank + g_window + f.d

    def build_neq(hi: Fraction) -> list[Segment]:
        pieces = _conv_pieces(f, g, hi, hi, g_window)
        segs, gaps = _envelope(pieces, Fraction(0), hi, False, "convolve")
        if gaps:
            raise AssertionError("unexpected gap in convolution window")
        return segs

    return _assemble_periodic(build_neq, v0, base_rank, f.d, f.c, "convolve")


def _conv_pieces(f: UppFunction, g: UppFunction, hi: Fraction,
                 f_window: Fraction, g_window: Fraction) -> list[Segment]:
    """Candidate affine pieces for the convolution on ``(0, hi]``.

    Each pair of operand segments contributes its smaller slope first, then
    the larger; together with the two pure shifts (one operand pinned at 0)
    these candidates cover the exact convolution, which is their lower
    envelope.
    """
    f_segs = f.segments_on(Fraction(0), min(f_window, hi))
    g_segs = g.segments_on(Fraction(0), min(g_window, hi))
    _guard_segments((len(f_segs) + 1) * (len(g_segs) + 1), "convolve")
    pieces: list[Segment] = []
    for seg in g_segs:
        if seg.start < hi:
            pieces.append(Segment(seg.start, min(seg.end, hi),
                                  seg.value + f.v0, seg.slope))
    for seg in f_segs:
        if seg.start < hi:
            pieces.append(Segment(seg.start, min(seg.end, hi),
                                  seg.value + g.v0, seg.slope))
    for sf in f_segs:
        for sg in g_segs:
            start = sf.start + sg.start
            if start >= hi:
                continue
            end = sf.end + sg.end
            v = sf.value + sg.value
            first = sf if sf.slope <= sg.slope else sg
            second = sg if first is sf else sf
            mid = start + (first.end - first.start)
            if mid >= hi:
                pieces.append(Segment(start, hi, v, first.slope))
                continue
            pieces.append(Segment(start, mid, v, first.slope))
            pieces.append(Segment(mid, min(end, hi),
                                  v + first.slope * (mid - start), second.slope))
    return pieces


# ----------------------------------------------------------------------
# (min,plus) deconvolution


def deconvolve(f: UppFunction, g: UppFunction) -> UppFunction:
    """Exact ``sup_{u >= 0} f(t + u) - g(u)`` in arrival-curve canonical
    form: clipped below at 0, with the value at t = 0 pinned to 0 (an
    arrival constraint only binds on positive horizons).

    When g cannot keep up with f's long-run growth the supremum is +inf for
    every t and the all-infinite function is returned; callers attach their
    own divergence diagnostics.
    """
    if f.is_all_infinite:
        return all_infinite()
    if g.is_all_infinite:
        return zero_function()
    if f.eventually_infinite and not g.eventually_infinite:
        return all_infinite()
    if f.eventually_infinite:
        if f.rank < g.rank:
            return all_infinite()
        rank = f.rank - g.rank
        u_window = g.rank
        if rank == 0:
            return delta(Fraction(0))
        pieces = _deconv_pieces(f, g, rank, u_window)
        segs, _ = _envelope(pieces, Fraction(0), rank, True, "deconvolve")
        segs = _clip_negative(segs)
        return UppFunction(Fraction(0), tuple(segs), rank, None,
                           Fraction(0), Fraction(0)).canonical()
    if g.eventually_infinite:
        u_window = g.rank
    else:
        rho_f, rho_g = f.long_run_rate, g.long_run_rate
        if rho_f > rho_g:
            return all_infinite()
        if rho_f == rho_g:
            big_d = _lcm_fraction(f.d, g.d)
            u_window = f.rank + g.rank + 2 * big_d
        else:
            mu_f, nu_f = _bounding_offsets(f)
            mu_g, _ = _bounding_offsets(g)
            # shifts beyond u_star are dominated by u = 0
            u_star = (nu_f - mu_g - mu_f + g.v0) / (rho_g - rho_f)
            u_window = max(u_star, g.rank) + g.d

    def build(hi: Fraction) -> list[Segment]:
        pieces = _deconv_pieces(f, g, hi, u_window)
        segs, gaps = _envelope(pieces, Fraction(0), hi, True, "deconvolve")
        if gaps:
            raise AssertionError("unexpected gap in deconvolution window")
        return _clip_negative(segs)

    # the value at 0 is pinned to 0: the arrival-curve canonical form only
    # constrains positive horizons, and exact comparisons expect it
    return _assemble_periodic(build, Fraction(0), f.rank + f.d, f.d, f.c,
                              "deconvolve")


def _deconv_pieces(f: UppFunction, g: UppFunction, hi: Fraction,
                   u_window: Fraction) -> list[Segment]:
    """Candidate pieces for ``sup_u f(t+u) - g(u)`` on ``(0, hi]``.

    The shift u ranges over [0, u_window]; the caller guarantees larger
    shifts are dominated or infeasible.  The supremum is the upper envelope
    of these pieces.  Where a supremum is only approached at an open
    endpoint, using the limit value is still sound: the result is
    non-decreasing, so the limit never exceeds the true value there.
    """
    f_segs = f.segments_on(Fraction(0), hi + u_window)
    g_segs = g.segments_on(Fraction(0), u_window)
    _guard_segments((len(f_segs) + 1) * (len(g_segs) + 1), "deconvolve")
    pieces: list[Segment] = []

    def emit(lo: Fraction, hi_open: Fraction, anchor: Fraction,
             value_at_anchor: Fraction, slope: Fraction) -> None:
        lo = max(lo, Fraction(0))
        end = min(hi_open, hi)
        if end <= lo:
            return
        pieces.append(Segment(lo, end, value_at_anchor + slope * (lo - anchor), slope))

    # u = 0: f's segments against g's value at 0
    for sf in f_segs:
        if sf.start < hi:
            pieces.append(Segment(sf.start, min(sf.end, hi),
                                  sf.value - g.v0, sf.slope))
    for sf in f_segs:
        a1, b1, v1, m1 = sf.start, sf.end, sf.value, sf.slope
        for sg in g_segs:
            a2, b2, v2, m2 = sg.start, sg.end, sg.value, sg.slope
            lo_t, hi_t = a1 - b2, b1 - a2  # feasible t range (open ends)
            if hi_t <= 0 or lo_t >= hi:
                continue
            if m1 == m2:
                # the shift cancels out of the difference
                emit(lo_t, hi_t, a1 - a2, v1 - v2, m1)
            elif m1 > m2:
                # supremum at the largest feasible u = min(b2, b1 - t)
                switch = b1 - b2
                if switch > lo_t:
                    emit(lo_t, min(switch, hi_t), a1 - b2, v1 - sg.at(b2), m1)
                if hi_t > switch:
                    emit(max(switch, lo_t), hi_t, b1 - a2, sf.at(b1) - v2, m2)
            else:
                # supremum approached at the smallest feasible u
                switch = a1 - a2
                if hi_t > switch:
                    emit(max(switch, lo_t), hi_t, a1 - a2, v1 - v2, m1)
                if switch > lo_t:
                    emit(lo_t, min(switch, hi_t), a1 - b2, v1 - sg.at(b2), m2)
    return pieces


# ----------------------------------------------------------------------
# sub-additive closure


def subadditive_closure(f: UppFunction) -> UppFunction:
    """Value 0 at 0, then the infimum over all convolution powers of ``f``.

    Dispatch, in order:

    * ``f`` identically 0 on an initial interval: collapses to the zero
      function (splitting t into n equal parts drives every power to 0);
    * a flat gate on a finite support (``W`` on (0, p], +inf after): the
      staircase of period p and increment W;
    * the gated rate-latency pattern ``B + R(t - T)_+`` for t > 0 with
      B > 0: exact analytic closure (the input itself beyond 0 when
      RT <= B, otherwise the staircase of period T and increment B);
    * otherwise iterated squaring ``h <- conv(h, h)`` with stabilization
      detected by exact semantic equality.  This terminates whenever the
      infimum of f(t)/t is not attained at any finite t; hitting the
      iteration cap is a hard error, never a silent approximation.
    """
    if f.is_all_infinite:
        raise DomainError("closure of the all-infinite function is undefined")
    h = minimum(delta(Fraction(0)), f).canonical()
    first = (h.transient[0] if h.transient else
             (h.period_segments[0] if h.period_segments else None))
    if first is not None and first.value == 0 and first.slope == 0:
        return zero_function()
    if h.eventually_infinite:
        if not h.transient:
            return h  # delta(0) is already closed
        flat = _match_flat_gate(h)
        if flat is None:
            raise ResourceError(
                "closure of a general eventually-infinite function is not "
                "supported; flat gates over a finite support are")
        support, height = flat
        seg = Segment(Fraction(0), support, height, Fraction(0))
        return UppFunction(Fraction(0), (), Fraction(0), (seg,), support, height)
    pattern = _match_gate_pattern(h)
    if pattern is not None:
        return _gate_closure(*pattern)
    for _ in range(64):
        squared = convolve(h, h).canonical()
        if squared.equivalent(h):
            return h
        h = squared
    raise ResourceError(
        "sub-additive closure did not stabilize within 64 squarings; the "
        "input is outside the exactly-supported classes")


def _match_gate_pattern(h: UppFunction) -> tuple[Fraction, Fraction, Fraction] | None:
    """Recognize ``B + R(t - T)_+`` for t > 0; returns (B, R, T) or None.

    Matched semantically, not on the segment layout: a convolution of
    rate-latency curves may canonicalize with its final ray split across
    transient and period segments, and the closed-form closure must
    still fire for it.
    """
    if h.period_segments is None:
        return None
    gate = h.eval_right(Fraction(0))
    rate = h.long_run_rate
    if gate is INF or gate <= 0 or rate is INF:
        return None
    latency = Fraction(0)
    for seg in h.transient:
        if seg.slope == 0 and seg.value == gate:
            latency = seg.end
        else:
            break
    period = (Segment(latency, latency + 1, gate, rate),)
    ideal = UppFunction(Fraction(0),
                        (Segment(Fraction(0), latency, gate, Fraction(0)),)
                        if latency > 0 else (),
                        latency, period, Fraction(1), rate)
    if h.equivalent(ideal):
        return (gate, rate, latency)
    return None


def _match_flat_gate(h: UppFunction) -> tuple[Fraction, Fraction] | None:
    """Recognize ``W`` on (0, p] with +inf after; returns (p, W) or None."""
    if not h.eventually_infinite or len(h.transient) != 1:
        return None
    seg = h.transient[0]
    if seg.slope != 0 or seg.value <= 0:
        return None
    return (h.rank, seg.value)


def _gate_closure(gate: Fraction, rate: Fraction, latency: Fraction) -> UppFunction:
    """Exact closure of ``gate + rate*(t - latency)_+`` (t > 0), gate > 0."""
    z = Fraction(0)
    one = Fraction(1)
    if latency == 0 or rate * latency <= gate:
        # already sub-additive beyond 0: the closure is the input with 0 at 0
        if latency == 0:
            return UppFunction(z, (), z, (Segment(z, one, gate, rate),), one, rate)
        return UppFunction(
            z, (Segment(z, latency, gate, z),), latency,
            (Segment(latency, latency + one, gate, rate),), one, rate,
        ).canonical()
    # rate * latency > gate: on (kT, (k+1)T] the closure is
    # min(k*gate + rate*(t - kT), (k+1)*gate): a ramp, then a flat shelf
    ramp = gate / rate
    period = (
        Segment(latency, latency + ramp, gate, rate),
        Segment(latency + ramp, 2 * latency, 2 * gate, z),
    )
    return UppFunction(
        z, (Segment(z, latency, gate, z),), latency, period, latency, gate,
    ).canonical()


def is_subadditive(f: UppFunction) -> bool:
    """Exact sub-additivity test via the fixed point ``deconvolve(f, f) = f``.

    Requires ``f(0) = 0``; without that normalization the fixed-point
    characterization breaks down.
    """
    if f.is_all_infinite:
        raise DomainError("sub-additivity of the all-infinite function is undefined")
    if f.v0 != 0:
        raise DomainError("is_subadditive requires f(0) = 0")
    return deconvolve(f, f).equivalent(f)


# ----------------------------------------------------------------------
# deviations


def vertical_deviation(alpha: UppFunction, beta: UppFunction) -> Fraction | float:
    """``sup_t alpha(t) - beta(t)``, clipped at 0; may be +inf."""
    if alpha.is_all_infinite:
        return INF
    if beta.is_all_infinite:
        return Fraction(0)
    rho_a, rho_b = alpha.long_run_rate, beta.long_run_rate
    if rho_a is INF and rho_b is not INF:
        return INF  # alpha turns infinite where beta stays finite
    if rho_a is not INF and rho_b is not INF and rho_a > rho_b:
        return INF
    if alpha.eventually_infinite and beta.eventually_infinite:
        if alpha.rank > beta.rank:
            return INF
        window = alpha.rank
    elif alpha.eventually_infinite:
        window = alpha.rank
    elif beta.eventually_infinite:
        window = max(alpha.rank, beta.rank) + alpha.d
    else:
        big_d = _lcm_fraction(alpha.d, beta.d)
        window = max(alpha.rank, beta.rank) + 2 * big_d
    return max(_sup_difference_on(alpha, beta, window), Fraction(0))


def _sup_on_window(f: UppFunction, hi: Fraction) -> Fraction:
    """Max of a finite-valued function over [0, hi]."""
    best = f.v0
    for seg in f.segments_on(Fraction(0), hi):
        best = max(best, seg.value, seg.at(min(seg.end, hi)))
    return best


def _pseudo_inverse(beta: UppFunction, y: Fraction) -> Fraction | float:
    """``inf { x >= 0 : beta(x) >= y }`` for non-decreasing beta."""
    if y <= beta.v0:
        return Fraction(0)
    if beta.is_all_infinite:
        return Fraction(0)
    if beta.eventually_infinite:
        for seg in beta.segments_on(Fraction(0), beta.rank):
            if seg.end_value >= y:
                if seg.value >= y:
                    return seg.start
                return seg.start + (y - seg.value) / seg.slope
        return beta.rank  # +inf right beyond the rank clears any level
    window = beta.rank + beta.d
    guard = 0
    while beta.eval(window) < y:
        if beta.c == 0:
            return INF
        deficit = y - beta.eval(window)
        window += beta.d * max(1, ceil(deficit / beta.c))
        guard += 1
        if guard > 64:
            return INF
    for seg in beta.segments_on(Fraction(0), window):
        if seg.end_value >= y:
            if seg.value >= y:
                return seg.start
            return seg.start + (y - seg.value) / seg.slope
    raise AssertionError("pseudo-inverse scan failed")


def horizontal_deviation(alpha: UppFunction, beta: UppFunction) -> Fraction | float:
    """``sup_t [ inf{x : beta(x) >= alpha(t)} - t ]``; may be +inf.

    The classic delay bound: the largest horizontal distance from the
    arrival curve rightward to the service curve.
    """
    if alpha.is_all_infinite:
        if beta.is_all_infinite:
            return Fraction(0)
        if beta.eventually_infinite:
            return beta.rank
        return INF
    rho_a = alpha.long_run_rate
    beta_jumps_infinite = beta.is_all_infinite or beta.eventually_infinite
    if not beta_jumps_infinite:
        rho_b = beta.long_run_rate
        if rho_a is INF:
            return INF
        if rho_a > rho_b:
            return INF
        if rho_b == 0:
            # beta is bounded: finite delay only if alpha stays below its top
            top_b = _sup_on_window(beta, beta.rank + beta.d)
            if rho_a > 0 or alpha.eventually_infinite:
                return INF
            if _sup_on_window(alpha, alpha.rank + alpha.d) > top_b:
                return INF
    # candidate window for t: far enough out that the periodic-shift
    # argument makes the deviation non-increasing period over period
    if alpha.eventually_infinite:
        window_a = alpha.rank
    elif beta_jumps_infinite:
        rank_b = beta.rank if not beta.is_all_infinite else Fraction(0)
        window_a = max(alpha.rank, rank_b) + 2 * alpha.d
    else:
        big_d = _lcm_fraction(alpha.d, beta.d)
        window_a = max(alpha.rank, beta.rank) + 2 * big_d
        if rho_a > 0:
            # push the window past the level where beta's inverse becomes
            # purely periodic, so the per-period comparison applies beyond
            top_transient_b = _sup_on_window(beta, beta.rank + beta.d)
            reach = _pseudo_inverse(alpha, top_transient_b)
            if reach is not INF:
                window_a = max(window_a, reach + 2 * big_d)
    best: Fraction | float = Fraction(0)
    pts: set[Fraction] = set(alpha.breakpoints_on(Fraction(0), window_a))
    pts.add(Fraction(0))
    pts.add(window_a)
    # corner levels of beta, mapped back through alpha, are the only other
    # places a piecewise-affine deviation can peak
    corner_levels: set[Fraction] = set()
    if not beta.is_all_infinite:
        if beta.eventually_infinite:
            scan_b = beta.rank
        else:
            scan_b = beta.rank + beta.d
            top_alpha = alpha.eval(window_a)
            if top_alpha is not INF and beta.c > 0:
                deficit = top_alpha - beta.eval(scan_b)
                if deficit > 0:
                    scan_b += beta.d * ceil(deficit / beta.c)
        for seg in beta.segments_on(Fraction(0), scan_b):
            corner_levels.add(seg.value)
            corner_levels.add(seg.end_value)
    for level in corner_levels:
        for seg in alpha.segments_on(Fraction(0), window_a):
            if seg.slope > 0 and seg.value <= level <= seg.end_value:
                pts.add(seg.start + (level - seg.value) / seg.slope)
    rank_b = beta.rank if not beta.is_all_infinite else Fraction(0)
    for t in sorted(pts):
        for value in (alpha.eval(t), alpha.eval_right(t)):
            if value is INF:
                if beta_jumps_infinite:
                    best = max(best, rank_b - t)
                    continue
                return INF
            x = _pseudo_inverse(beta, value)
            if x is INF:
                return INF
            best = max(best, x - t)
    return max(best, Fraction(0))
