import math

import numpy as np
import pytest
from scipy.special import ndtr

from levyexotic import (
    ContourOffsets,
    MonitoringSchedule,
    PayoffParameterSet,
    default_offsets,
    delta,
    make_gaussian,
    make_nig,
    mc_price,
    price_digital,
    price_single_period,
    psi_aggregate,
)
from levyexotic.contracts import Digital
from levyexotic.errors import DimensionTooLarge, NoFeasibleOffsets

GAUSS = make_gaussian(0.2, 0.05)
NIG = make_nig(8.0, -2.0, 0.3, 0.05)
SPOT = 100.0
ATM_LOG = math.log(100.0)


def plain_digital(k_log, w=1, gamma=0.0):
    return PayoffParameterSet((gamma,), (k_log,), (w,), ((1.0,),))


class TestPsiAggregate:
    def test_single_leg_reduction(self):
        sched = MonitoringSchedule(0.0, (2.0,))
        p = plain_digital(0.0)
        for xi in (0.5, 1.0 - 0.3j):
            got = psi_aggregate(GAUSS, sched, p, np.array([xi]))
            assert got == pytest.approx(2.0 * GAUSS.psi(xi), abs=1e-14)

    def test_emm_telescope_at_zero(self):
        # gamma = e_M makes every leg's argument -i, so the sum discounts to -r(T_M - t)
        sched = MonitoringSchedule(0.0, (0.4, 1.3))
        p = PayoffParameterSet((0.0, 1.0), (0.0,), (1,), ((0.7, -0.2),))
        got = psi_aggregate(GAUSS, sched, p, np.array([0.0 + 0.0j]))
        assert got == pytest.approx(-0.05 * 1.3, abs=1e-12)

    def test_forward_start_legs(self):
        sched = MonitoringSchedule(0.0, (0.5, 1.0))
        p = PayoffParameterSet((0.0, 1.0), (0.0,), (1,), ((-1.0, 1.0),))
        xi = 0.8 - 0.5j
        got = psi_aggregate(GAUSS, sched, p, np.array([xi]))
        expected = -0.05 * 0.5 + 0.5 * GAUSS.psi(xi - 1j)
        assert got == pytest.approx(expected, abs=1e-13)


class TestDefaultOffsets:
    def test_nig_digital_midpoint(self):
        # interval ]0, -lambda_minus[ = ]0, 10[, midpoint kept
        sched = MonitoringSchedule(0.0, (1.0,))
        off = default_offsets(NIG, plain_digital(ATM_LOG), sched, SPOT)
        assert off.omega == (5.0,)

    def test_gaussian_offsets_above_floor(self):
        sched = MonitoringSchedule(0.0, (1.0,))
        for k_log in (ATM_LOG, -50.0, ATM_LOG + 3.0):
            for w in (1, -1):
                off = default_offsets(GAUSS, plain_digital(k_log, w), sched, SPOT)
                assert all(o >= 0.25 for o in off.omega)

    def test_infeasible_payoff_index(self):
        # gamma_M = 11 exceeds -lambda_minus = 10 for every positive offset
        p = PayoffParameterSet((11.0,), (ATM_LOG,), (1,), ((1.0,),))
        with pytest.raises(NoFeasibleOffsets):
            default_offsets(NIG, p)

    def test_large_feasible_payoff_index(self):
        # gamma_M = 7 still fits: 7 + omega < 10 leaves omega in ]0, 3[
        p = PayoffParameterSet((7.0,), (ATM_LOG,), (1,), ((1.0,),))
        off = default_offsets(NIG, p)
        assert 0.0 < off.omega[0] < 3.0


class TestPriceDigital:
    def test_certain_cash_digital(self):
        sched = MonitoringSchedule(0.0, (1.0,))
        res = price_digital(GAUSS, sched, plain_digital(-50.0), SPOT)
        assert res.value == pytest.approx(math.exp(-0.05), abs=1e-6)

    def test_certain_power_digital_is_spot(self):
        sched = MonitoringSchedule(0.0, (1.0,))
        res = price_digital(GAUSS, sched, plain_digital(-50.0, gamma=1.0), SPOT)
        assert res.value == pytest.approx(SPOT, rel=1e-4)

    def test_atm_digital_closed_form(self):
        sched = MonitoringSchedule(0.0, (1.0,))
        res = price_digital(GAUSS, sched, plain_digital(ATM_LOG), SPOT, tol=1e-10)
        expected = math.exp(-0.05) * ndtr(0.15)
        assert res.value == pytest.approx(expected, abs=1e-8)
        assert expected == pytest.approx(0.532325, abs=5e-7)

    def test_call_plus_put_is_bond(self):
        sched = MonitoringSchedule(0.0, (1.0,))
        call = price_digital(GAUSS, sched, plain_digital(ATM_LOG, 1), SPOT, tol=1e-9)
        put = price_digital(GAUSS, sched, plain_digital(ATM_LOG, -1), SPOT, tol=1e-9)
        assert call.value + put.value == pytest.approx(math.exp(-0.05), abs=1e-8)

    def test_single_period_consistency(self):
        sched = MonitoringSchedule(0.0, (1.0,))
        a = price_digital(NIG, sched, plain_digital(ATM_LOG), SPOT)
        b = price_single_period(NIG, 1.0, 0.0, 1.0, 1, ATM_LOG, SPOT)
        assert abs(a.value - b.value) <= 2.0 * (a.quadrature_error + b.quadrature_error) + 1e-12

    def test_negated_condition_identity(self):
        # 1(-X >= K) equals 1(X <= -K)
        k = 0.1
        via_negated_a = price_single_period(GAUSS, 1.0, 0.0, -1.0, 1, k, SPOT, tol=1e-10)
        via_flipped_w = price_single_period(GAUSS, 1.0, 0.0, 1.0, -1, -k, SPOT, tol=1e-10)
        assert via_negated_a.value == pytest.approx(via_flipped_w.value, abs=1e-8)

    def test_nig_digital_against_mc(self):
        sched = MonitoringSchedule(0.0, (1.0,))
        res = price_single_period(NIG, 1.0, 0.0, 1.0, 1, ATM_LOG, SPOT)
        mc = mc_price(Digital(sched, plain_digital(ATM_LOG)), NIG, SPOT, 10**6, 123)
        assert abs(res.value - mc.estimate) <= 3.0 * mc.stderr

    def test_offset_invariance(self):
        sched = MonitoringSchedule(0.0, (1.0,))
        p = plain_digital(ATM_LOG)
        res_a = price_digital(NIG, sched, p, SPOT, offsets=ContourOffsets((2.0,)))
        res_b = price_digital(NIG, sched, p, SPOT, offsets=ContourOffsets((7.0,)))
        gap = abs(res_a.value - res_b.value)
        assert gap <= 10.0 * (res_a.quadrature_error + res_b.quadrature_error) + 1e-12

    def test_monotone_in_strike(self):
        sched = MonitoringSchedule(0.0, (1.0,))
        values = [
            price_digital(GAUSS, sched, plain_digital(k), SPOT).value
            for k in (ATM_LOG - 0.3, ATM_LOG, ATM_LOG + 0.3)
        ]
        assert values[0] > values[1] > values[2]

    def test_log_moneyness_translation(self):
        # gamma = 0: price(lambda*spot, K + rho*ln lambda) == price(spot, K)
        sched = MonitoringSchedule(0.0, (0.5, 1.0))
        a = ((0.6, 0.4),)
        rho = 1.0
        lam = 1.7
        p_base = PayoffParameterSet((0.0, 0.0), (ATM_LOG,), (1,), a)
        p_shift = PayoffParameterSet((0.0, 0.0), (ATM_LOG + rho * math.log(lam),), (1,), a)
        base = price_digital(GAUSS, sched, p_base, SPOT, tol=1e-10)
        shifted = price_digital(GAUSS, sched, p_shift, lam * SPOT, tol=1e-10)
        assert shifted.value == pytest.approx(base.value, abs=1e-9)

    def test_dimension_cap(self):
        sched = MonitoringSchedule(0.0, tuple(0.2 * k for k in range(1, 6)))
        eye = tuple(tuple(1.0 if i == j else 0.0 for j in range(5)) for i in range(5))
        p = PayoffParameterSet((0.0,) * 5, (0.0,) * 5, (1,) * 5, eye)
        with pytest.raises(DimensionTooLarge):
            price_digital(GAUSS, sched, p, SPOT)

    def test_two_dim_matches_independent_legs(self):
        # both increments nonnegative: the joint probability factorizes
        sched = MonitoringSchedule(0.0, (0.5, 1.0))
        p = PayoffParameterSet(
            (0.0, 0.0), (ATM_LOG, 0.0), (1, 1), ((1.0, 0.0), (-1.0, 1.0))
        )
        res = price_digital(GAUSS, sched, p, SPOT, tol=1e-9)
        mu = 0.05 - 0.02
        prob = ndtr(mu * 0.5 / (0.2 * math.sqrt(0.5))) ** 2
        assert res.value == pytest.approx(math.exp(-0.05) * prob, abs=1e-7)


class TestGaussianReduction:
    # generic payoff parameter sets against the normal-CDF closed form

    def test_two_dim_general_matrix(self):
        from levyexotic.gaussian import closed_form_price
        sched = MonitoringSchedule(0.0, (0.4, 1.0))
        p = PayoffParameterSet(
            (0.0, 0.6), (0.5 * ATM_LOG, -0.2), (1, -1), ((0.7, 0.3), (1.0, -1.0))
        )
        contract = Digital(sched, p)
        engine = price_digital(GAUSS, sched, p, SPOT, tol=1e-9).value
        reference = closed_form_price(contract, 0.2, 0.05, SPOT)
        assert abs(engine - reference) / abs(reference) < 1e-6

    def test_three_dim_general_matrix(self):
        from levyexotic.gaussian import closed_form_price
        sched = MonitoringSchedule(0.0, (1 / 3, 2 / 3, 1.0))
        p = PayoffParameterSet(
            (0.0, 0.0, 1.0),
            (math.log(85.0), math.log(90.0), ATM_LOG),
            (1, 1, 1),
            ((1.0, 0.0, 0.0), (0.5, 0.5, 0.0), (0.0, 0.0, 1.0)),
        )
        contract = Digital(sched, p)
        engine = price_digital(GAUSS, sched, p, SPOT, tol=1e-6).value
        reference = closed_form_price(contract, 0.2, 0.05, SPOT)
        assert abs(engine - reference) / abs(reference) < 1e-4


class TestDelta:
    def test_forward_start_delta_times_spot_is_price(self):
        sched = MonitoringSchedule(0.0, (0.5, 1.0))
        p = PayoffParameterSet((0.0, 1.0), (0.0,), (1,), ((-1.0, 1.0),))
        price = price_digital(GAUSS, sched, p, SPOT)
        slope = delta(GAUSS, sched, p, SPOT)
        assert slope * SPOT == pytest.approx(price.value, rel=1e-10)

    def test_certain_digital_has_zero_delta(self):
        sched = MonitoringSchedule(0.0, (1.0,))
        slope = delta(GAUSS, sched, plain_digital(-50.0), SPOT)
        assert abs(slope) < 1e-10

    def test_atm_digital_matches_finite_difference(self):
        sched = MonitoringSchedule(0.0, (1.0,))
        p = plain_digital(ATM_LOG)
        slope = delta(GAUSS, sched, p, SPOT, tol=1e-11)
        h = 1e-4 * SPOT
        up = price_digital(GAUSS, sched, p, SPOT + h, tol=1e-11).value
        dn = price_digital(GAUSS, sched, p, SPOT - h, tol=1e-11).value
        fd = (up - dn) / (2 * h)
        assert slope == pytest.approx(fd, rel=1e-5)
