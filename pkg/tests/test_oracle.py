"""Grid oracles: brute-force agreement with the exact kernel, and the
trajectory scenarios the analyses rely on."""

from fractions import Fraction as F

import pytest

from netcalc.oracle import (
    GridTrajectory,
    closure_on_grid,
    conv_on_grid,
    deconv_on_grid,
    sample,
    simulate_ack_starvation,
    simulate_minimal_departure,
    simulate_priority_starvation,
    simulate_weak_vs_minplus,
    simulate_window_network,
)
from netcalc.upp import (
    DomainError,
    Segment,
    UppFunction,
    affine,
    convolve,
    deconvolve,
    delta,
    impulse,
    rate_latency_fn,
    subadditive_closure,
    zero_function,
)

DT = F(1, 16)
N = 8 * 16 + 1  # horizon 8


def grid(f, n=N):
    return sample(f, DT, n)


class TestSampling:
    def test_left_continuous_values(self):
        tr = grid(delta(F(1)))
        assert tr.values[16] == 0       # value at the jump itself
        assert tr.values[17] == float("inf")

    def test_zero_delay_is_unit_trajectory(self):
        tr = grid(delta(F(0)))
        assert tr.values[0] == 0
        assert all(v == float("inf") for v in tr.values[1:])

    def test_grid_step_must_be_positive(self):
        with pytest.raises(DomainError):
            GridTrajectory(F(0), (F(0),))


class TestConvOracle:
    def test_matches_exact_convolution(self):
        b1, b2 = rate_latency_fn(F(20), F(1, 2)), rate_latency_fn(F(10), F(1, 4))
        got = conv_on_grid(grid(b1), grid(b2))
        assert got.values == grid(convolve(b1, b2)).values

    def test_matches_exact_on_mixed_shapes(self):
        f, g = affine(F(3), F(2)), rate_latency_fn(F(5), F(1, 2))
        got = conv_on_grid(grid(f), grid(g))
        assert got.values == grid(convolve(f, g)).values

    def test_unit_trajectory_is_neutral(self):
        a = grid(affine(F(1), F(2)))
        assert conv_on_grid(a, grid(delta(F(0)))).values == a.values


class TestDeconvOracle:
    def test_matches_exact_in_valid_window(self):
        f, g = affine(F(3), F(2)), rate_latency_fn(F(5), F(1, 2))
        exact = deconvolve(f, g)
        got, valid = deconv_on_grid(grid(f), grid(g), 4 * 16)
        assert valid == N - 4 * 16
        assert all(got.values[k] == exact.eval(k * DT) for k in range(valid))

    def test_beyond_window_underestimates_only(self):
        f, g = affine(F(3), F(2)), rate_latency_fn(F(5), F(1, 2))
        exact = deconvolve(f, g)
        got, valid = deconv_on_grid(grid(f), grid(g), 4 * 16)
        assert all(got.values[k] <= exact.eval(k * DT)
                   for k in range(valid, N))


class TestClosureOracle:
    def test_matches_exact_staircase(self):
        wfc = convolve(rate_latency_fn(F(1), F(2)), impulse(F(1)))
        got = closure_on_grid(grid(wfc))
        assert got.values == grid(subadditive_closure(wfc)).values

    def test_constant_rate_is_its_own_closure(self):
        lam = affine(F(0), F(3))
        got = closure_on_grid(grid(lam))
        want = list(grid(lam).values)
        assert list(got.values) == want

    def test_flat_gate_staircase(self):
        gate = convolve(delta(F(2)), impulse(F(3)))
        exact = subadditive_closure(gate)
        got = closure_on_grid(grid(gate))
        assert got.values == grid(exact).values
        assert exact.eval(F(4)) == 6


class TestMinimalDeparture:
    def test_is_grid_convolution(self):
        a = grid(affine(F(2), F(3)))
        b = grid(rate_latency_fn(F(5), F(1, 2)))
        assert simulate_minimal_departure(a, b).values == conv_on_grid(a, b).values

    def test_zero_delay_service_returns_arrivals(self):
        a = grid(affine(F(2), F(3)))
        assert simulate_minimal_departure(a, grid(delta(F(0)))).values == a.values

    def test_output_speed_is_service_limited(self):
        # departures of A * beta never climb faster than beta over any window
        a = grid(affine(F(4), F(1)))
        beta = subadditive_closure(convolve(rate_latency_fn(F(2), F(1)),
                                            impulse(F(2))))
        bt = grid(beta)
        d = simulate_minimal_departure(a, bt)
        for s in range(0, N, 7):
            for t in range(s, N, 11):
                assert d.values[t] - d.values[s] <= beta.eval((t - s) * DT)


class TestPrioritySplit:
    def test_greedy_competitor_starves_low_priority(self):
        a1 = grid(affine(F(1), F(2)))
        a2 = grid(affine(F(0), F(5)))   # exactly the server rate, greedy
        beta = grid(rate_latency_fn(F(5), F(1, 2)))
        d1, d2 = simulate_priority_starvation(a1, a2, beta)
        assert all(v == 0 for v in d1.values)

    def test_split_conserves_aggregate(self):
        a1 = grid(affine(F(1), F(2)))
        a2 = grid(affine(F(2), F(3)))
        beta = grid(rate_latency_fn(F(7), F(1, 4)))
        d1, d2 = simulate_priority_starvation(a1, a2, beta)
        agg = conv_on_grid(GridTrajectory(DT, tuple(
            a1.values[k] + a2.values[k] for k in range(N))), beta)
        assert all(d1.values[k] + d2.values[k] == agg.values[k]
                   for k in range(N))

    def test_no_competitor_gives_full_service(self):
        a1 = grid(affine(F(1), F(2)))
        beta = grid(rate_latency_fn(F(5), F(1, 2)))
        d1, d2 = simulate_priority_starvation(a1, grid(zero_function()), beta)
        assert d1.values == conv_on_grid(a1, beta).values
        assert all(v == 0 for v in d2.values)

    def test_stable_competitor_cannot_starve_forever(self):
        # competitor rate strictly below the service rate: flow 1 drains
        a1 = grid(affine(F(1), F(1)))
        a2 = grid(affine(F(0), F(3)))
        beta = grid(affine(F(0), F(5)))  # constant-rate server
        d1, _ = simulate_priority_starvation(a1, a2, beta)
        assert d1.values[-1] > 0


class TestWeakVsMinplus:
    @staticmethod
    def staircase():
        return UppFunction(F(0), (
            Segment(F(0), F(1), F(2), F(0)),
            Segment(F(1), F(5, 2), F(3), F(0)),
            Segment(F(5, 2), F(4), F(4), F(0)),
            Segment(F(4), F(5), F(5), F(0)),
        ), F(5), (Segment(F(5), F(6), F(5), F(0)),), F(1), F(0))

    def test_staircase_separates_the_two_guarantees(self):
        d_ws, d_mp = simulate_weak_vs_minplus(self.staircase(), F(1), F(5),
                                              F(1, 4))
        gaps = [k for k in range(len(d_ws))
                if d_mp.values[k] < d_ws.values[k]]
        assert gaps
        assert all(F(5, 2) < k * F(1, 4) < F(5) for k in gaps)

    def test_exact_values_after_the_forced_idle(self):
        d_ws, d_mp = simulate_weak_vs_minplus(self.staircase(), F(1), F(5),
                                              F(1, 4))
        k = 11  # t = 11/4
        assert d_ws.values[k] == F(13, 4)
        assert d_mp.values[k] == 3

    def test_witness_survives_unaligned_grid(self):
        d_ws, d_mp = simulate_weak_vs_minplus(self.staircase(), F(1), F(5),
                                              F(1, 3))
        assert any(d_mp.values[k] < d_ws.values[k]
                   for k in range(len(d_ws)))

    def test_light_load_collapses_both_to_arrivals(self):
        alpha = affine(F(0), F(1, 2))
        d_ws, d_mp = simulate_weak_vs_minplus(alpha, F(1), F(4), F(1, 4))
        want = [alpha.eval(min(k * F(1, 4), F(4))) for k in range(len(d_ws))]
        assert list(d_ws.values) == want
        assert list(d_mp.values) == want


class TestWindowNetwork:
    def test_admissions_respect_transformed_service(self):
        R, T, W = F(5), F(1, 2), F(4)
        beta = rate_latency_fn(R, T)
        psi = subadditive_closure(convolve(beta, impulse(W)))
        a = grid(affine(F(3), F(2)))
        admitted, deps = simulate_window_network(a, [grid(beta)], [(1, 1, W)])
        floor = conv_on_grid(a, grid(psi))
        assert all(admitted.values[k] >= floor.values[k] for k in range(N))
        assert all(deps[0].values[k] <= admitted.values[k] for k in range(N))

    def test_two_hop_window_over_both(self):
        b1, b2 = rate_latency_fn(F(4), F(1, 4)), rate_latency_fn(F(6), F(1, 2))
        W = F(3)
        chain = convolve(b1, b2)
        psi = subadditive_closure(convolve(chain, impulse(W)))
        a = grid(affine(F(2), F(2)))
        admitted, deps = simulate_window_network(
            a, [grid(b1), grid(b2)], [(1, 2, W)])
        floor = conv_on_grid(a, grid(psi))
        assert all(admitted.values[k] >= floor.values[k] for k in range(N))

    def test_window_span_validated(self):
        a = grid(affine(F(1), F(1)))
        with pytest.raises(DomainError):
            simulate_window_network(a, [grid(delta(F(0)))], [(1, 2, F(1))])

    def test_huge_window_never_binds(self):
        beta = rate_latency_fn(F(5), F(1, 2))
        a = grid(affine(F(1), F(2)))
        admitted, _ = simulate_window_network(a, [grid(beta)],
                                              [(1, 1, F(1000))])
        assert admitted.values == a.values


class TestAckStarvation:
    def test_gap_between_offered_and_admitted_grows(self):
        n = 12 * 16 + 1
        a1 = sample(affine(F(5), F(2)), DT, n)
        a2 = sample(affine(F(1), F(1)), DT, n)
        b1 = sample(rate_latency_fn(F(100), F(0)), DT, n)
        b2 = sample(rate_latency_fn(F(1), F(0)), DT, n)
        admitted, through = simulate_ack_starvation(a1, a2, b1, b2, F(1))
        gap = [a1.values[k] - admitted.values[k] for k in range(n)]
        assert gap[12 * 16] > gap[3 * 16] > 0
        assert all(x <= y for x, y in zip(gap, gap[1:]))
        assert all(through.values[k] <= admitted.values[k] for k in range(n))
