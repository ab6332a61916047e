"""Grid-sampled trajectory oracles.

Everything in here deliberately avoids the exact piecewise representation:
functions are sampled onto a uniform rational grid and the (min,plus)
operators are evaluated by brute force.  That makes the module an
independent cross-check for the exact algebra, and a way to simulate server
behaviours (priority splits, feedback loops) that the algebra only bounds.

Grid evaluations are exact for piecewise-affine operands whose breakpoints
lie on the grid; the random generators in the test-suite draw parameters
that keep them there.  Values are ``Fraction`` or +inf, never floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from netcalc.upp import INF, DomainError, UppFunction, rational

__all__ = [
    "GridTrajectory",
    "closure_on_grid",
    "conv_on_grid",
    "deconv_on_grid",
    "sample",
    "simulate_ack_starvation",
    "simulate_minimal_departure",
    "simulate_priority_starvation",
    "simulate_weak_vs_minplus",
    "simulate_window_network",
]

Value = Fraction | float  # float only ever holds +inf


@dataclass(frozen=True)
class GridTrajectory:
    """Samples ``values[k] = f(k * dt)`` of a cumulative function."""

    dt: Fraction
    values: tuple[Value, ...]

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise DomainError(f"grid step must be positive, got {self.dt}")
        if not self.values:
            raise DomainError("empty trajectory")

    def __len__(self) -> int:
        return len(self.values)

    def time(self, k: int) -> Fraction:
        return k * self.dt


def sample(f: UppFunction, dt: Fraction | int | str, n: int) -> GridTrajectory:
    """Sample ``f`` at 0, dt, ..., (n-1)*dt (left-continuous values)."""
    dt = rational(dt)
    return GridTrajectory(dt, tuple(f.eval(k * dt) for k in range(n)))


def _require_same_grid(a: GridTrajectory, b: GridTrajectory) -> None:
    if a.dt != b.dt:
        raise DomainError(f"grid mismatch: {a.dt} vs {b.dt}")


def conv_on_grid(a: GridTrajectory, b: GridTrajectory) -> GridTrajectory:
    """(min,plus) convolution restricted to grid split points.

    Exact when both operands are piecewise-affine with grid-aligned
    breakpoints; an upper bound on the true convolution otherwise.
    """
    _require_same_grid(a, b)
    n = min(len(a), len(b))
    out: list[Value] = []
    for k in range(n):
        best: Value = INF
        for i in range(k + 1):
            x, y = a.values[i], b.values[k - i]
            if x is INF or y is INF:
                continue
            s = x + y
            if best is INF or s < best:
                best = s
        out.append(best)
    return GridTrajectory(a.dt, tuple(out))


def deconv_on_grid(f: GridTrajectory, g: GridTrajectory,
                   sup_steps: int) -> tuple[GridTrajectory, int]:
    """``h[k] = sup_{0<=j<=sup_steps} f[k+j] - g[j]``, clipped below at 0.

    Returns the trajectory together with the number of leading entries that
    are authoritative: beyond ``len(f) - sup_steps`` the window is cut off
    by the horizon.  The entry at index 0 is pinned to 0, matching the
    arrival canonical form of the exact operator (an arrival constraint
    only binds on positive horizons).
    """
    _require_same_grid(f, g)
    n = len(f)
    valid = max(0, n - sup_steps)
    out: list[Value] = []
    for k in range(n):
        best: Value | None = None
        for j in range(min(sup_steps, len(g) - 1) + 1):
            if k + j >= n:
                break
            gv = g.values[j]
            if gv is INF:
                continue
            fv = f.values[k + j]
            if fv is INF:
                best = INF
                break
            term = fv - gv
            if best is None or (best is not INF and term > best):
                best = term
        if best is None:
            best = Fraction(0)
        if best is not INF and best < 0:
            best = Fraction(0)
        out.append(best)
    if out and out[0] is not INF:
        out[0] = Fraction(0)
    return GridTrajectory(f.dt, tuple(out)), valid


def closure_on_grid(f: GridTrajectory) -> GridTrajectory:
    """Iterated self-convolution down to the fixed point, with 0 at index 0.

    On a finite grid the squaring sequence stabilizes after at most
    log2(n) + 1 rounds; the result is the sub-additive closure restricted
    to grid points (exact under the alignment convention above).
    """
    unit: list[Value] = [Fraction(0)] + [INF] * (len(f) - 1)
    h = GridTrajectory(f.dt, tuple(
        min(u, v) for u, v in zip(unit, f.values)))
    while True:
        squared = conv_on_grid(h, h)
        if squared.values == h.values:
            return h
        h = squared


def simulate_minimal_departure(arrival: GridTrajectory,
                               beta: GridTrajectory) -> GridTrajectory:
    """Departures of the least service consistent with a convolution-form
    guarantee: ``D = conv(A, beta)`` on the grid."""
    return conv_on_grid(arrival, beta)


def simulate_priority_starvation(a1: GridTrajectory, a2: GridTrajectory,
                                 beta: GridTrajectory,
                                 ) -> tuple[GridTrajectory, GridTrajectory]:
    """Split aggregate departures giving flow 2 absolute priority.

    The server delivers ``D = conv(A1 + A2, beta)`` in aggregate; every
    increment goes to flow 2 first (capped by its arrivals), the remainder
    to flow 1.  Returns (D1, D2).
    """
    _require_same_grid(a1, a2)
    _require_same_grid(a1, beta)
    n = min(len(a1), len(a2), len(beta))
    agg_in = GridTrajectory(a1.dt, tuple(
        a1.values[k] + a2.values[k] for k in range(n)))
    agg_out = conv_on_grid(agg_in, GridTrajectory(beta.dt, beta.values[:n]))
    d2: list[Value] = []
    d1: list[Value] = []
    prev_out: Value = Fraction(0)
    prev_d2: Value = Fraction(0)
    for k in range(n):
        increment = agg_out.values[k] - prev_out
        take2 = min(a2.values[k], prev_d2 + increment)
        d2.append(take2)
        d1.append(agg_out.values[k] - take2)
        prev_out = agg_out.values[k]
        prev_d2 = take2
    return (GridTrajectory(a1.dt, tuple(d1)), GridTrajectory(a1.dt, tuple(d2)))


def simulate_weak_vs_minplus(alpha: UppFunction, rate: Fraction | int | str,
                             tau: Fraction | int | str,
                             dt: Fraction | int | str,
                             ) -> tuple[GridTrajectory, GridTrajectory]:
    """Least departures under the per-backlogged-period reading of a
    constant-rate guarantee versus the convolution reading.

    A greedy source emits ``A(t) = alpha(t)`` up to ``tau`` and then stops.
    Both servers drain at rate ``rate`` and empty the backlog at ``tau/2``
    (an allowed behaviour).  From there the per-backlogged-period server
    must restart its guarantee, ``D_ws(t) = min(A(t), A(tau/2) +
    rate*(t - tau/2))``, while the convolution form only has to stay above
    ``A * (rate * t)``, which pins ``D_mp`` at ``A(tau/2)`` until the line
    ``rate*t`` catches up.  Whenever ``alpha`` outruns the service line on
    the window, some grid point in ``(tau/2, tau)`` has ``D_mp < D_ws``:
    the two readings are genuinely different guarantees.

    Returns ``(D_ws, D_mp)`` sampled on ``[0, tau]``; ``tau/2`` need not be
    grid-aligned, values are evaluated exactly either way.
    """
    rate, tau, dt = rational(rate), rational(tau), rational(dt)
    if rate <= 0:
        raise DomainError("the service rate must be positive")
    if tau <= 0:
        raise DomainError("the source stop time tau must be positive")
    half = tau / 2

    def arrivals(t: Fraction) -> Value:
        return alpha.eval(min(t, tau))

    a_half = arrivals(half)
    d_ws: list[Value] = []
    d_mp: list[Value] = []
    k = 0
    while k * dt <= tau:
        t = k * dt
        a_t = arrivals(t)
        if t < half:
            served = min(a_t, rate * t)
            d_ws.append(served)
            d_mp.append(served)
        else:
            restarted = a_half + rate * (t - half)
            d_ws.append(min(a_t, restarted))
            d_mp.append(min(a_t, max(a_half, min(rate * t, restarted))))
        k += 1
    return (GridTrajectory(dt, tuple(d_ws)), GridTrajectory(dt, tuple(d_mp)))


def simulate_window_network(arrival: GridTrajectory,
                            betas: Sequence[GridTrajectory],
                            windows: Sequence[tuple[int, int, Fraction]],
                            max_rounds: int = 10_000,
                            ) -> tuple[GridTrajectory, list[GridTrajectory]]:
    """Fixed-point simulation of one flow through a tandem with windows.

    ``windows`` are (start_server, end_server, size) with 1-based inclusive
    server indices: admission into ``start_server`` never exceeds the
    departures of ``end_server`` plus ``size``.  Servers deliver the least
    convolution-form output.  Iterates the admission/departure equations
    from the unthrottled state down to the greatest fixed point; returns
    the admitted arrivals and the per-server departures.
    """
    for s, u, _w in windows:
        if not (1 <= s <= u <= len(betas)):
            raise DomainError(f"window span [{s}, {u}] outside the tandem")
    n = len(arrival)
    deps: list[GridTrajectory] = [
        GridTrajectory(arrival.dt, arrival.values) for _ in betas]
    admitted = arrival
    for _ in range(max_rounds):
        new_deps: list[GridTrajectory] = []
        current = admitted
        for j, beta in enumerate(betas, start=1):
            gate: list[Value] = list(current.values[:n])
            for s, u, w in windows:
                if s == j:
                    ref = deps[u - 1]
                    for k in range(n):
                        cap = ref.values[k] + w
                        if cap < gate[k]:
                            gate[k] = cap
            gated = GridTrajectory(arrival.dt, tuple(gate))
            out = conv_on_grid(gated, beta)
            new_deps.append(out)
            current = out
        a_new: list[Value] = list(arrival.values)
        for s, u, w in windows:
            if s == 1:
                ref = new_deps[u - 1]
                for k in range(n):
                    cap = ref.values[k] + w
                    if cap < a_new[k]:
                        a_new[k] = cap
        admitted_new = GridTrajectory(arrival.dt, tuple(a_new))
        changed = admitted_new.values != admitted.values or any(
            x.values != y.values for x, y in zip(new_deps, deps))
        deps = new_deps
        admitted = admitted_new
        if not changed:
            return admitted, deps
    raise AssertionError("window-network simulation did not reach a fixed point")


def simulate_ack_starvation(a1: GridTrajectory, a2: GridTrajectory,
                            beta1: GridTrajectory, beta2: GridTrajectory,
                            window: Fraction,
                            max_rounds: int = 10_000,
                            ) -> tuple[GridTrajectory, GridTrajectory]:
    """Feedback over two servers where an uncontrolled flow starves the
    acknowledgements.

    Flow 1 crosses server 1 then server 2 and is window-gated on the
    departures of server 2; flow 2 enters at server 2 only and receives
    absolute priority there.  Returns (admitted flow-1 arrivals, flow-1
    departures from server 2); a growing gap between offered and admitted
    flow-1 traffic certifies the throttling diagnosis.
    """
    window = rational(window)
    _require_same_grid(a1, a2)
    n = min(len(a1), len(a2), len(beta1), len(beta2))
    admitted = GridTrajectory(a1.dt, a1.values[:n])
    d1_at_2 = GridTrajectory(a1.dt, a1.values[:n])
    for _ in range(max_rounds):
        out1 = conv_on_grid(admitted, GridTrajectory(a1.dt, beta1.values[:n]))
        d1_new, _d2 = simulate_priority_starvation(
            out1, GridTrajectory(a1.dt, a2.values[:n]),
            GridTrajectory(a1.dt, beta2.values[:n]))
        capped = tuple(min(a1.values[k], d1_new.values[k] + window)
                       for k in range(n))
        if capped == admitted.values and d1_new.values == d1_at_2.values:
            return admitted, d1_at_2
        admitted = GridTrajectory(a1.dt, capped)
        d1_at_2 = d1_new
    raise AssertionError("feedback starvation simulation did not converge")
