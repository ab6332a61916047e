"""Tandem analyses: closed form, numeric partition search, sequential
baseline, and the comparison bound built on minimum arrival envelopes."""

from __future__ import annotations

from fractions import Fraction as F

import pytest

from netcalc.curves import (
    Curve,
    KindError,
    concatenate,
    constant_rate,
    pure_delay,
    rate_latency,
    token_bucket,
)
from netcalc.oracle import GridTrajectory, sample, simulate_priority_starvation
from netcalc.tandem import (
    AnalysisRefused,
    FlowSpec,
    TandemNetwork,
    conventional_delay_closed_form,
    e2e_backlog_bound,
    e2e_delay_bound,
    homogeneous_tandem,
    pmoo_analysis,
    pmoo_closed_form,
    pmoo_curve_numeric,
    sequential_analysis,
    stability_margins,
    unconventional_delay_bound,
)
from netcalc.upp import (
    INF,
    DomainError,
    ResourceError,
    rate_latency_fn,
)

R, T = F(20), F(1, 20)
UNIT = F(1)
FIVE = F(5)


def reference_net(n: int = 1, min_alpha=None) -> TandemNetwork:
    return homogeneous_tandem(n, R, T, FIVE, UNIT, FIVE, UNIT, FIVE, UNIT,
                              min_alpha)


class TestModelValidation:
    def test_every_server_needs_a_flow(self):
        with pytest.raises(DomainError, match="crossed by no flow"):
            TandemNetwork(
                (constant_rate(F(1)), constant_rate(F(1))),
                (FlowSpec("f", token_bucket(F(1, 2), F(1)), (1, 1)),),
                "f")

    def test_duplicate_flow_ids_rejected(self):
        with pytest.raises(DomainError, match="duplicate"):
            TandemNetwork(
                (constant_rate(F(1)),),
                (FlowSpec("f", token_bucket(F(1, 4), F(1)), (1, 1)),
                 FlowSpec("f", token_bucket(F(1, 4), F(1)), (1, 1))),
                "f")

    def test_path_must_stay_inside_the_tandem(self):
        with pytest.raises(DomainError):
            TandemNetwork(
                (constant_rate(F(1)),),
                (FlowSpec("f", token_bucket(F(1, 4), F(1)), (1, 2)),),
                "f")

    def test_flow_of_interest_must_exist(self):
        with pytest.raises(DomainError):
            TandemNetwork(
                (constant_rate(F(1)),),
                (FlowSpec("f", token_bucket(F(1, 4), F(1)), (1, 1)),),
                "g")

    def test_arrival_role_enforced(self):
        with pytest.raises(KindError):
            FlowSpec("f", constant_rate(F(1)), (1, 1))

    def test_min_envelope_rate_capped_by_arrival_rate(self):
        with pytest.raises(DomainError, match="exceeds"):
            FlowSpec("f", token_bucket(F(1), F(1)), (1, 1),
                     min_alpha=(F(2), F(0)))

    def test_margins_report_every_server(self):
        net = reference_net(2)
        ms = stability_margins(net)
        assert len(ms) == 4
        # delay servers have infinite rate; switches carry all three flows
        assert ms[0][2] is INF
        assert ms[1] == (2, F(15), F(20))
        assert ms[3] == (4, F(15), F(20))


class TestClosedForm:
    def test_reference_instance_curve(self):
        curve = pmoo_closed_form(reference_net())
        assert curve.fn.equivalent(rate_latency_fn(F(10), F(3, 10)))

    def test_reference_instance_delay_is_two_fifths(self):
        assert e2e_delay_bound(reference_net()) == F(2, 5)

    def test_reference_instance_backlog(self):
        assert e2e_backlog_bound(reference_net()) == F(5, 2)

    def test_cross_burst_paid_once_per_span(self):
        # cross flow only on the second server: its burst inflates the
        # latency by (b + r*T2) / leftover
        net = TandemNetwork(
            (rate_latency(F(1), F(1)), rate_latency(F(1), F(1))),
            (FlowSpec("foi", token_bucket(F(1, 8), F(1, 2)), (1, 2)),
             FlowSpec("x", token_bucket(F(1, 4), F(1)), (2, 2))),
            "foi")
        curve = pmoo_closed_form(net)
        assert curve.fn.equivalent(rate_latency_fn(F(3, 4), F(11, 3)))

    def test_no_cross_traffic_collapses_to_concatenation(self):
        servers = (rate_latency(F(2), F(1, 2)), rate_latency(F(1), F(1)))
        net = TandemNetwork(
            servers,
            (FlowSpec("foi", token_bucket(F(1, 2), F(1)), (1, 2)),),
            "foi")
        assert pmoo_closed_form(net).fn.equivalent(
            concatenate(list(servers)).fn)

    def test_exhausted_server_reports_unstable(self):
        net = TandemNetwork(
            (rate_latency(F(1), F(0)),),
            (FlowSpec("foi", token_bucket(F(1, 2), F(1)), (1, 1)),
             FlowSpec("x", token_bucket(F(2), F(1)), (1, 1))),
            "foi")
        curve = pmoo_closed_form(net)
        assert "unstable" in curve.flags
        assert curve.fn.eval(F(100)) == 0
        rep = pmoo_analysis(net)
        assert rep.delay_bound is INF
        assert rep.backlog_bound is INF
        assert not rep.stable
        assert any("saturated" in d for d in rep.diagnostics)

    def test_partial_path_refused(self):
        net = TandemNetwork(
            (constant_rate(F(2)), constant_rate(F(2))),
            (FlowSpec("foi", token_bucket(F(1, 2), F(1)), (1, 1)),
             FlowSpec("x", token_bucket(F(1, 2), F(1)), (1, 2))),
            "foi")
        with pytest.raises(AnalysisRefused, match="whole tandem"):
            pmoo_closed_form(net)

    def test_plain_minplus_server_refused(self):
        net = TandemNetwork(
            (Curve(rate_latency_fn(F(1), F(1)), "service", "minplus"),),
            (FlowSpec("foi", token_bucket(F(1, 2), F(1)), (1, 1)),),
            "foi")
        with pytest.raises(AnalysisRefused, match="min-plus"):
            pmoo_closed_form(net)

    def test_non_token_bucket_arrival_refused(self):
        net = TandemNetwork(
            (constant_rate(F(2)),),
            (FlowSpec("foi", Curve(rate_latency_fn(F(1), F(1)), "arrival"),
                      (1, 1)),),
            "foi")
        with pytest.raises(AnalysisRefused, match="token-bucket"):
            pmoo_closed_form(net)

    def test_delay_only_chain_is_exact(self):
        net = TandemNetwork(
            (pure_delay(T), pure_delay(T)),
            (FlowSpec("foi", token_bucket(F(1), F(1)), (1, 2)),),
            "foi")
        curve = pmoo_closed_form(net)
        assert curve.fn.eval(F(2, 20)) == 0
        assert curve.fn.eval_right(F(2, 20)) is INF
        assert e2e_delay_bound(net) == F(2, 20)


class TestMonotonicity:
    def test_delay_never_drops_when_a_cross_burst_grows(self):
        prev = None
        for b3 in (F(0), F(1, 2), F(1), F(2), F(4)):
            net = homogeneous_tandem(2, R, T, FIVE, UNIT, FIVE, UNIT,
                                     FIVE, b3)
            d = e2e_delay_bound(net)
            if prev is not None:
                assert d >= prev
            prev = d

    def test_delay_grows_with_chain_length(self):
        prev = None
        for n in range(1, 6):
            d = e2e_delay_bound(reference_net(n))
            if prev is not None:
                assert d > prev
            prev = d


class TestNumeric:
    DT = F(1, 8)

    def test_certified_lower_bound_and_tightness(self):
        net = TandemNetwork(
            (rate_latency(F(1), F(1)), rate_latency(F(1), F(1))),
            (FlowSpec("foi", token_bucket(F(1, 8), F(1, 2)), (1, 2)),
             FlowSpec("x", token_bucket(F(1, 4), F(1)), (2, 2))),
            "foi")
        closed = pmoo_closed_form(net).fn
        num = pmoo_curve_numeric(net, self.DT, F(6))
        for k in range(len(num)):
            t = k * self.DT
            assert num.values[k] <= closed.eval(t)
            # within one padded grid cell: n + span = 3 steps at slope <= 1
            assert closed.eval(t) - num.values[k] <= 3 * self.DT

    def test_three_server_instance_stays_within_a_cell(self):
        net = TandemNetwork(
            (constant_rate(F(2)), constant_rate(F(2)), constant_rate(F(2))),
            (FlowSpec("foi", token_bucket(F(1, 4), F(1)), (1, 3)),
             FlowSpec("x", token_bucket(F(1, 2), F(1, 2)), (2, 3))),
            "foi")
        closed = pmoo_closed_form(net).fn
        dt = F(1, 4)
        num = pmoo_curve_numeric(net, dt, F(4))
        for k in range(len(num)):
            t = k * dt
            assert num.values[k] <= closed.eval(t)
            assert closed.eval(t) - num.values[k] <= (3 + 2) * dt * 2

    def test_no_cross_matches_concatenation_samples(self):
        servers = (rate_latency(F(2), F(1, 2)), rate_latency(F(1), F(1)))
        net = TandemNetwork(
            servers,
            (FlowSpec("foi", token_bucket(F(1, 2), F(1)), (1, 2)),),
            "foi")
        chain = concatenate(list(servers)).fn
        num = pmoo_curve_numeric(net, F(1, 4), F(4))
        for k in range(len(num)):
            assert num.values[k] <= chain.eval(k * F(1, 4))

    def test_server_count_cap(self):
        with pytest.raises(ResourceError, match="cap"):
            pmoo_curve_numeric(reference_net(3), F(1, 4), F(2))
        # raising the cap admits the same network
        out = pmoo_curve_numeric(reference_net(3), F(1, 2), F(1),
                                 max_servers=6)
        assert isinstance(out, GridTrajectory)

    def test_handles_delay_servers(self):
        net = reference_net()
        closed = pmoo_closed_form(net).fn
        dt = F(1, 20)
        num = pmoo_curve_numeric(net, dt, F(1))
        for k in range(len(num)):
            assert num.values[k] <= closed.eval(k * dt)

    def test_bad_grid_rejected(self):
        with pytest.raises(DomainError):
            pmoo_curve_numeric(reference_net(), F(0), F(1))


class TestSequential:
    def two_hop(self) -> TandemNetwork:
        return TandemNetwork(
            (rate_latency(F(4), F(1, 4)), rate_latency(F(4), F(1, 2))),
            (FlowSpec("foi", token_bucket(F(1), F(1)), (1, 2)),
             FlowSpec("x", token_bucket(F(1), F(2)), (1, 2))),
            "foi")

    def test_single_server_single_flow(self):
        net = TandemNetwork(
            (rate_latency(F(2), F(1, 2)),),
            (FlowSpec("foi", token_bucket(F(1), F(1)), (1, 1)),),
            "foi")
        rep = sequential_analysis(net)
        assert rep.e2e_curve.fn.equivalent(rate_latency_fn(F(2), F(1, 2)))
        assert rep.delay_bound == F(1)
        assert rep.stable

    def test_pays_the_cross_burst_at_every_hop(self):
        seq = sequential_analysis(self.two_hop())
        agg = pmoo_analysis(self.two_hop())
        assert seq.delay_bound >= agg.delay_bound
        assert seq.backlog_bound >= agg.backlog_bound

    def test_refuses_pure_delay_servers(self):
        with pytest.raises(AnalysisRefused, match="pure delay"):
            sequential_analysis(reference_net())

    def test_refuses_plain_minplus_servers(self):
        net = TandemNetwork(
            (Curve(rate_latency_fn(F(1), F(1)), "service", "minplus"),),
            (FlowSpec("foi", token_bucket(F(1, 2), F(1)), (1, 1)),
             FlowSpec("x", token_bucket(F(1, 4), F(1)), (1, 1))),
            "foi")
        with pytest.raises(AnalysisRefused,
                           match="simulate_priority_starvation"):
            sequential_analysis(net)

    def test_partial_path_flow_is_analyzable(self):
        # the flow of interest only crosses server 1; sequential still
        # answers where the aggregate analysis refuses
        net = TandemNetwork(
            (constant_rate(F(2)), constant_rate(F(2))),
            (FlowSpec("foi", token_bucket(F(1, 2), F(1)), (1, 1)),
             FlowSpec("x", token_bucket(F(1, 2), F(1)), (1, 2))),
            "foi")
        rep = sequential_analysis(net)
        assert rep.delay_bound < INF
        with pytest.raises(AnalysisRefused):
            pmoo_analysis(net)


class TestDelayBoundVersusTrajectory:
    def test_bound_covers_a_starved_trajectory(self):
        # one strict server shared with a competitor that is served first:
        # the worst split the residual has to cover
        beta = rate_latency(F(2), F(1, 2))
        a_foi = token_bucket(F(1, 2), F(1))
        a_x = token_bucket(F(1), F(2))
        net = TandemNetwork(
            (beta,),
            (FlowSpec("foi", a_foi, (1, 1)), FlowSpec("x", a_x, (1, 1))),
            "foi")
        bound = e2e_delay_bound(net)
        dt = F(1, 8)
        n = 8 * 8 + 1
        arr1 = sample(a_foi.fn, dt, n)
        arr2 = sample(a_x.fn, dt, n)
        d1, _d2 = simulate_priority_starvation(arr1, arr2,
                                               sample(beta.fn, dt, n))
        worst = F(0)
        for k in range(n):
            target = arr1.values[k]
            kk = k
            while kk < n and d1.values[kk] < target:
                kk += 1
            if kk < n:
                worst = max(worst, (kk - k) * dt)
        assert bound >= worst


class TestComparisonBound:
    def test_reference_point_is_two_fifths(self):
        d = conventional_delay_closed_form(1, R, T, UNIT, FIVE, UNIT,
                                           FIVE, UNIT)
        assert d == F(2, 5)

    def test_unconventional_reference_point_is_three_fifths(self):
        d = unconventional_delay_bound(1, R, T, UNIT, FIVE, UNIT, FIVE,
                                       UNIT, FIVE, T)
        assert d == F(3, 5)

    def test_closed_form_matches_the_general_analysis(self):
        for n in (1, 2, 3, 4):
            via_formula = conventional_delay_closed_form(
                n, R, T, UNIT, FIVE, UNIT, FIVE, UNIT)
            via_curve = e2e_delay_bound(reference_net(n))
            assert via_formula == via_curve

    def test_never_below_the_conventional_bound(self):
        rates = (F(1, 2), F(5, 4), F(5, 2), F(15, 4), F(5))
        for n in range(1, 21):
            d = conventional_delay_closed_form(n, R, T, UNIT, FIVE, UNIT,
                                               FIVE, UNIT)
            for r_min in rates:
                dnc = unconventional_delay_bound(n, R, T, UNIT, FIVE, UNIT,
                                                 FIVE, UNIT, r_min, T)
                assert dnc >= d

    def test_collapses_to_conventional_for_a_fast_minimum(self):
        d = conventional_delay_closed_form(1, R, T, UNIT, FIVE, UNIT,
                                           FIVE, UNIT)
        dnc = unconventional_delay_bound(1, R, T, UNIT, FIVE, UNIT, FIVE,
                                         UNIT, F(10 ** 6), F(0))
        assert dnc == d

    def test_vanishing_minimum_rate_diverges(self):
        assert unconventional_delay_bound(
            1, R, T, UNIT, FIVE, UNIT, FIVE, UNIT, F(0), T) is INF

    def test_saturated_tandem_diverges(self):
        assert conventional_delay_closed_form(
            1, F(10), T, UNIT, FIVE, UNIT, FIVE, UNIT) is INF
        assert unconventional_delay_bound(
            1, F(10), T, UNIT, FIVE, UNIT, FIVE, UNIT, FIVE, T) is INF


class TestHomogeneousBuilder:
    def test_shape(self):
        net = reference_net(3)
        assert net.n == 6
        assert len(net.flows) == 5
        assert net.foi.path == (1, 6)
        assert net.flows[2].path == (1, 2)
        assert net.flows[4].path == (5, 6)

    def test_minimum_envelope_is_threaded_through(self):
        net = reference_net(1, min_alpha=(F(5, 2), T))
        assert net.foi.min_alpha == (F(5, 2), T)

    def test_rejects_empty_chain(self):
        with pytest.raises(DomainError):
            reference_net(0)
