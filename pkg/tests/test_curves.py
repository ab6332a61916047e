"""Curve roles/kinds, the constructor zoo, and per-server transformations."""

from fractions import Fraction as F

import pytest

from netcalc.curves import (
    Curve,
    KindError,
    ResidualRefusal,
    concatenate,
    constant_rate,
    output_arrival,
    pure_delay,
    rate_latency,
    residual_minplus_unsafe,
    residual_strict,
    residual_subadditive,
    token_bucket,
    transmission_delay,
    wfc_curve,
    window_curve,
)
from netcalc.oracle import conv_on_grid, sample, simulate_minimal_departure
from netcalc.upp import (
    DomainError,
    affine,
    convolve,
    delta,
    impulse,
    rate_latency_fn,
    subadditive_closure,
    zero_function,
)

DT = F(1, 16)
N = 8 * 16 + 1


class TestZoo:
    def test_token_bucket_shape(self):
        c = token_bucket(F(3), F(2))
        assert c.role == "arrival"
        assert c.fn.eval(F(0)) == 0
        assert c.fn.eval(F(1)) == 5

    def test_degenerate_token_bucket_is_zero(self):
        assert token_bucket(0, 0).fn.equivalent(zero_function())

    def test_rate_latency_defaults_strict(self):
        assert rate_latency(F(5), F(1, 2)).kind == "strict"

    def test_constant_rate_defaults_subadditive(self):
        assert constant_rate(F(3)).kind == "subadditive"

    def test_pure_delay_is_delay_kind(self):
        c = pure_delay(F(2))
        assert c.kind == "delay"
        assert (c.min_delay, c.max_delay) == (0, 2)
        assert c.fn.equivalent(delta(F(2)))

    def test_transmission_delay_spread(self):
        c = transmission_delay(F(1), F(3))
        assert c.fn.equivalent(delta(F(2)))

    def test_transmission_delay_order_enforced(self):
        with pytest.raises(DomainError):
            transmission_delay(F(3), F(1))

    def test_window_curve_holds_size_at_zero(self):
        assert window_curve(F(4)).fn.eval(F(0)) == 4

    def test_wfc_kind_boundary(self):
        assert wfc_curve(F(2), F(2), F(1)).kind == "subadditive"
        assert wfc_curve(F(2) - F(1, 16), F(2), F(1)).kind == "minplus"

    def test_wfc_values(self):
        c = wfc_curve(F(2), F(2), F(1))
        assert c.fn.eval(F(0)) == 0
        assert c.fn.eval(F(1, 2)) == 2
        assert c.fn.eval(F(2)) == 4

    def test_negative_parameter_rejected(self):
        with pytest.raises(DomainError):
            token_bucket(F(-1), F(0))


class TestCurveValidation:
    def test_subadditive_tag_is_checked(self):
        with pytest.raises(DomainError):
            Curve(rate_latency_fn(F(5), F(1)), "service", "subadditive")

    def test_arrival_carries_no_kind(self):
        with pytest.raises(KindError):
            Curve(affine(F(1), F(2)), "arrival", "strict")

    def test_arrival_must_start_at_zero(self):
        with pytest.raises(DomainError):
            Curve(impulse(F(1)), "arrival")

    def test_unknown_kind_rejected(self):
        with pytest.raises(KindError):
            Curve(affine(F(0), F(1)), "service", "bogus")

    def test_delay_kind_needs_bounds(self):
        with pytest.raises(DomainError):
            Curve(delta(F(2)), "service", "delay")


class TestOutputArrival:
    def test_token_bucket_through_rate_latency(self):
        got = output_arrival(token_bucket(F(2), F(3)),
                             rate_latency(F(5), F(1, 2)))
        assert got.fn.equivalent(affine(F(4), F(2)))

    def test_zero_delay_server_is_transparent(self):
        alpha = token_bucket(F(3), F(2))
        srv = Curve(delta(F(0)), "service", "minplus")
        assert output_arrival(alpha, srv).fn.equivalent(alpha.fn)

    def test_divergence_flagged_unstable(self):
        got = output_arrival(token_bucket(F(7), F(0)),
                             rate_latency(F(5), F(1, 2)))
        assert got.fn.is_all_infinite
        assert "unstable" in got.flags

    def test_throttle_does_not_inflate_slow_arrivals(self):
        # feedback window large relative to the arrival rate: departures
        # keep the original envelope exactly
        thr = Curve(subadditive_closure(convolve(rate_latency_fn(F(5), F(1)),
                                                 impulse(F(4)))),
                    "service", "subadditive")
        alpha = token_bucket(F(2), F(3))
        got = output_arrival(alpha, thr)
        assert got.fn.equivalent(alpha.fn)

    def test_result_bounds_simulated_departures(self):
        alpha = token_bucket(F(2), F(3))
        beta = rate_latency(F(5), F(1, 2))
        got = output_arrival(alpha, beta)
        a = sample(alpha.fn, DT, N)
        d = simulate_minimal_departure(a, sample(beta.fn, DT, N))
        for s in range(0, N, 5):
            for t in range(s, N, 7):
                assert (d.values[t] - d.values[s]
                        <= got.fn.eval((t - s) * DT))

    def test_role_checks(self):
        with pytest.raises(KindError):
            output_arrival(rate_latency(F(5), F(1)), rate_latency(F(5), F(1)))
        with pytest.raises(KindError):
            output_arrival(token_bucket(F(1), F(1)), token_bucket(F(1), F(1)))


class TestConcatenate:
    def test_rate_latency_chain(self):
        got = concatenate([rate_latency(F(20), F(1, 2)),
                           rate_latency(F(10), F(1, 4))])
        assert got.fn.equivalent(rate_latency_fn(F(10), F(3, 4)))
        assert got.kind == "minplus"

    def test_constant_rate_chain_stays_subadditive(self):
        got = concatenate([constant_rate(F(3)), constant_rate(F(2))])
        assert got.fn.equivalent(affine(F(0), F(2)))
        assert got.kind == "subadditive"

    def test_empty_chain_is_neutral_server(self):
        assert concatenate([]).fn.equivalent(delta(F(0)))

    def test_single_strict_server_downgrades(self):
        got = concatenate([rate_latency(F(5), F(1))])
        assert got.kind == "minplus"

    def test_delay_servers_shift(self):
        got = concatenate([pure_delay(F(1)), rate_latency(F(4), F(1, 2))])
        assert got.fn.equivalent(rate_latency_fn(F(4), F(3, 2)))

    def test_matches_grid_oracle(self):
        members = [rate_latency(F(4), F(1, 4)), constant_rate(F(6)),
                   pure_delay(F(1, 2))]
        got = concatenate(members)
        acc = sample(delta(F(0)), DT, N)
        for m in members:
            acc = conv_on_grid(acc, sample(m.fn, DT, N))
        assert acc.values == sample(got.fn, DT, N).values

    def test_rejects_arrival_member(self):
        with pytest.raises(KindError):
            concatenate([token_bucket(F(1), F(1))])


class TestResiduals:
    def test_strict_residual_closed_form(self):
        got = residual_strict(rate_latency(F(10), F(1, 4)),
                              token_bucket(F(4), F(1)))
        assert got.fn.equivalent(rate_latency_fn(F(6), F(7, 12)))
        assert got.kind == "minplus"

    def test_zero_cross_traffic_keeps_curve(self):
        beta = rate_latency(F(10), F(1, 4))
        got = residual_strict(beta, token_bucket(0, 0))
        assert got.fn.equivalent(beta.fn)

    def test_overload_collapses_and_flags(self):
        got = residual_strict(constant_rate(F(1), kind="strict"),
                              token_bucket(F(2), F(0)))
        assert got.fn.equivalent(zero_function())
        assert "unstable" in got.flags

    def test_subadditive_residual(self):
        got = residual_subadditive(constant_rate(F(5)),
                                   token_bucket(F(2), F(1)))
        assert got.fn.long_run_rate == 3
        assert got.kind == "minplus"

    def test_wrong_kind_rejected_both_ways(self):
        with pytest.raises(KindError):
            residual_strict(constant_rate(F(5)), token_bucket(F(2), F(1)))
        with pytest.raises(KindError):
            residual_subadditive(rate_latency(F(5), F(1)),
                                 token_bucket(F(2), F(1)))

    def test_delay_server_has_no_residual(self):
        with pytest.raises(KindError):
            residual_strict(pure_delay(F(1)), token_bucket(F(1), F(1)))

    def test_residual_is_monotone_and_below_original(self):
        beta = wfc_curve(F(2), F(1), F(1))
        got = residual_subadditive(beta, token_bucket(F(1, 2), F(1, 2)))
        prev = None
        for k in range(N):
            v = got.fn.eval(k * DT)
            assert v <= beta.fn.eval(k * DT)
            if prev is not None:
                assert v >= prev
            prev = v


class TestMinplusRefusal:
    def test_returns_refusal_value(self):
        got = residual_minplus_unsafe(
            rate_latency(F(5), F(1), kind="minplus"),
            token_bucket(F(2), F(1)))
        assert isinstance(got, ResidualRefusal)
        assert "starve" in got.reason
        assert "simulate_priority_starvation" in got.scenario

    def test_uniform_even_for_harmless_inputs(self):
        got = residual_minplus_unsafe(
            Curve(delta(F(0)), "service", "minplus"), token_bucket(0, 0))
        assert isinstance(got, ResidualRefusal)

    def test_advises_reclassification_when_possible(self):
        got = residual_minplus_unsafe(constant_rate(F(5), kind="minplus"),
                                      token_bucket(F(2), F(1)))
        assert "residual_subadditive" in got.advice


class TestResidualSoundnessOnTrajectories:
    def test_priority_schedule_respects_residual_floor(self):
        # sub-additive server shared with a greedy competitor: the
        # adversarial split never dips below A1 * (beta - alpha2)_+
        from netcalc.oracle import simulate_priority_starvation
        from netcalc.upp import monus

        beta = wfc_curve(F(2), F(1), F(1))
        alpha2 = token_bucket(F(1, 2), F(1, 2))
        alpha1 = token_bucket(F(1, 4), F(1))
        a1 = sample(alpha1.fn, DT, N)
        a2 = sample(alpha2.fn, DT, N)
        d1, _ = simulate_priority_starvation(a1, a2, sample(beta.fn, DT, N))
        floor = conv_on_grid(a1, sample(monus(beta.fn, alpha2.fn), DT, N))
        assert all(d1.values[k] >= floor.values[k] for k in range(N))
