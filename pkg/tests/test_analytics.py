import math
import warnings
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from ewensrec import analytics as A
from ewensrec.analytics import AsymptoticRegime, OddSizeWarning, UnsupportedRegime
from ewensrec.sampler import ThetaSpec
import oracles

GRID = [0.5, 1.0, 2.0, 5.0]
H10 = 7381 / 2520


class TestSpecialFunctions:
    def test_rising_factorial_log(self):
        assert A.rising_factorial_log(1, 5) == pytest.approx(math.log(120))
        assert A.rising_factorial_log(2, 3) == pytest.approx(math.log(24))
        assert A.rising_factorial_log(3.3, 0) == 0.0
        big = A.rising_factorial_log(1.5, 3_000_000)
        assert big == pytest.approx(math.lgamma(3_000_001.5) - math.lgamma(1.5), rel=1e-13)
        with pytest.raises(ValueError):
            A.rising_factorial_log(0, 3)

    def test_digamma_values(self):
        assert A.digamma(1) == pytest.approx(-0.5772156649015329, abs=1e-14)
        for x in (0.5, 1.0, 3.7):
            assert A.digamma(x + 1) - A.digamma(x) == pytest.approx(1 / x, abs=1e-12)
        assert A.digamma(11) - A.digamma(1) == pytest.approx(H10, abs=1e-13)
        with pytest.raises(ValueError):
            A.digamma(0)

    @given(st.floats(-3, 6))
    def test_digamma_against_reference(self, e):
        x = 10.0**e
        assert abs(A.digamma(x) - special.digamma(x)) < 1e-10

    def test_delta(self):
        assert A.delta(7.0, 1) == pytest.approx(1 / 7)
        assert A.delta(2, 3) == pytest.approx(13 / 12, abs=1e-15)
        assert A.delta(4.2, 0) == 0.0
        assert A.delta(1, 10) == pytest.approx(H10, abs=1e-14)
        with pytest.raises(ValueError):
            A.delta(-1, 3)

    @pytest.mark.parametrize("x", [0.5, 1, 17.3, 1e3])
    @pytest.mark.parametrize("n", [1, 10, 10**4])
    def test_delta_branches_agree(self, x, n):
        assert abs(A.delta_sum(x, n) - A.delta_digamma(x, n)) < 1e-8

    def test_delta_switches_branch_continuously(self):
        m = A.DIRECT_SUM_MAX
        assert A.delta(3.0, m) == pytest.approx(A.delta(3.0, m + 1) - 1 / (3.0 + m), abs=1e-9)

    @pytest.mark.parametrize("theta", [0.3, 1.0, 7.0, 1e4])
    def test_half_delta_gap(self, theta):
        m = 50
        direct = A.delta_sum((theta + 1) / 2, m) - A.delta_sum(theta / 2, m)
        assert A.half_delta_gap(theta, m) == pytest.approx(direct, rel=1e-9)


class TestExactLaws:
    def test_record_examples(self):
        assert A.p_record_at(5, 3.0, 1) == 1.0
        assert A.p_record_at(5, 1.0, 4) == pytest.approx(0.25)
        assert A.expected_records(1, 4.0) == 1.0
        assert A.expected_records(3, 1.0) == pytest.approx(11 / 6)

    def test_descent_examples(self):
        for theta in GRID:
            assert A.p_descent_at(5, theta, 2) == pytest.approx(1 / (theta + 1))
        assert all(A.p_descent_at(9, 1.0, i) == pytest.approx(0.5) for i in range(2, 10))
        assert A.expected_descents(1, 3.0) == 0.0
        assert A.expected_descents(11, 1.0) == pytest.approx(5.0)

    def test_first_examples(self):
        assert A.p_first_gt(6, 2.0, 0) == 1.0
        assert all(A.p_first_eq(8, 1.0, k) == pytest.approx(1 / 8) for k in range(1, 9))
        assert A.p_first_eq(3, 2.0, 3) == pytest.approx(1 / 6)
        assert A.expected_first(9, 1.0) == pytest.approx(5.0)
        assert A.expected_first(1, 3.0) == 1.0

    def test_inversion_examples(self):
        assert A.p_inv_at(4, 2.0, 1, 0) == 1.0
        assert all(A.p_inv_at(6, 1.0, 5, k) == pytest.approx(0.2) for k in range(5))
        assert A.expected_inversions(9, 1.0) == pytest.approx(18.0)
        assert A.expected_inversions(3, 2.0) == pytest.approx(13 / 12)

    @pytest.mark.parametrize(
        "call",
        [
            lambda: A.p_record_at(3, 1.0, 0),
            lambda: A.p_record_at(3, 1.0, 4),
            lambda: A.p_descent_at(3, 1.0, 1),
            lambda: A.p_first_gt(3, 1.0, 3),
            lambda: A.p_first_eq(3, 1.0, 0),
            lambda: A.p_inv_at(3, 1.0, 2, 2),
            lambda: A.expected_records(3, 0.0),
        ],
    )
    def test_domain_errors(self, call):
        with pytest.raises(ValueError):
            call()

    @pytest.mark.parametrize("theta", [0.01, 0.5, 2.0, 1e3, 1e7])
    @pytest.mark.parametrize("n", [1, 2, 17, 400])
    def test_laws_sum_to_one(self, n, theta):
        assert math.fsum(A.p_first_eq(n, theta, k) for k in range(1, n + 1)) == pytest.approx(1, abs=1e-12)
        for j in (1, n // 2 + 1, n):
            assert math.fsum(A.p_inv_at(n, theta, j, k) for k in range(j)) == pytest.approx(1, abs=1e-14)

    def test_first_law_is_stable_for_large_sizes(self):
        n, theta = 10**6, 3.0
        p = A.p_first_gt(n, theta, n - 1)
        expected = math.exp(math.lgamma(n) + math.lgamma(theta + 1) - math.lgamma(theta + n))
        assert p == pytest.approx(expected, rel=1e-9)

    @given(st.integers(2, 300), st.floats(0.01, 1e4))
    def test_monotonicity(self, n, theta):
        ps = [A.p_record_at(n, theta, i) for i in range(1, n + 1)]
        assert all(a >= b for a, b in zip(ps, ps[1:]))
        assert A.expected_first(n, theta) >= A.expected_first(n, theta * 1.5)

    @pytest.mark.parametrize("n", range(1, 7))
    @pytest.mark.parametrize("theta", oracles.THETAS)
    def test_against_exact_enumeration(self, n, theta):
        t = float(theta)
        rec = oracles.weighted(n, theta, lambda w: len(oracles.records(w)))
        assert A.expected_records(n, t) == pytest.approx(float(rec), abs=1e-12)
        assert A.expected_descents(n, t) == pytest.approx(
            float(oracles.weighted(n, theta, lambda w: len(oracles.descents(w)))), abs=1e-12
        )
        assert A.expected_first(n, t) == pytest.approx(float(oracles.weighted(n, theta, lambda w: w[0])), abs=1e-12)
        assert A.expected_inversions(n, t) == pytest.approx(
            float(oracles.weighted(n, theta, oracles.inversions)), abs=1e-12
        )
        for i in range(1, n + 1):
            exact = oracles.weighted(n, theta, lambda w: i in oracles.records(w))
            assert A.p_record_at(n, t, i) == pytest.approx(float(exact), abs=1e-12)


class TestMispredictionFormulas:
    def test_mu6_examples(self):
        for theta in GRID:
            assert A.expected_mu6(2, theta) == pytest.approx(1 / (theta + 1))
        assert A.expected_mu6(3, 1.0) == pytest.approx(1.0)
        assert A.expected_mu6(3, 2.0) == pytest.approx(5 / 6)
        assert A.expected_mu6(1, 2.0) == 0.0
        assert A.mu4_bound(5, 2.0) == pytest.approx(2 * A.delta(2.0, 5))
        assert A.nu7_bound(5, 2.0) == A.mu4_bound(5, 2.0)

    def test_nu_examples(self):
        for theta in GRID:
            assert A.expected_nu3(2, theta) == 0.0
            assert A.expected_nu8(2, theta) == 0.0
        assert A.expected_nu3(4, 1.0) == pytest.approx(0.5)
        assert A.expected_nu8(4, 1.0) == pytest.approx(0.5)
        for n in (4, 10, 1000):
            assert A.expected_nu3(n, 1.0) == pytest.approx((n - 2) / 4)

    @pytest.mark.parametrize("n", [4, 6])
    @pytest.mark.parametrize("theta", oracles.THETAS)
    def test_nu_against_exact_enumeration(self, n, theta):
        nu3 = oracles.weighted(n, theta, lambda w: oracles.one_bit(oracles.pair_outcomes(w)[0], None))
        nu8 = oracles.weighted(n, theta, lambda w: oracles.one_bit(oracles.pair_outcomes(w)[2], True))
        assert A.expected_nu3(n, float(theta)) == pytest.approx(float(nu3), abs=1e-12)
        assert A.expected_nu8(n, float(theta)) == pytest.approx(float(nu8), abs=1e-12)

    def test_odd_size_is_flagged(self):
        with pytest.warns(OddSizeWarning):
            odd = A.expected_nu3(7, 2.0)
        assert odd == A.expected_nu3(6, 2.0)
        with pytest.warns(OddSizeWarning):
            assert A.expected_nu8(9, 2.0) == A.expected_nu8(8, 2.0)

    @pytest.mark.parametrize("theta", [1e-3, 0.5, 50.0, 1e5])
    def test_nu8_stable_at_large_sizes(self, theta):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            values = [A.expected_nu8(n, theta) for n in (10**4, 10**5, 10**6)]
        assert all(v >= 0 and math.isfinite(v) for v in values)

    def test_per_element_sum(self):
        for lam in (0.01, 0.3, 1.0, 7.0):
            assert A.nu3_per_element(lam) + A.nu8_per_element(lam) == pytest.approx(
                A.nu_per_element(lam), rel=1e-13
            )

    @pytest.mark.parametrize("stat, per", [("nu3", A.nu3_per_element), ("nu8", A.nu8_per_element)])
    def test_linear_regime_convergence(self, stat, per):
        n = 10**6
        exact = A.exact_value(stat, n, 0.5 * n)
        assert exact / (per(0.5) * n) == pytest.approx(1, abs=1e-3)


class TestAsymptotics:
    @pytest.mark.parametrize(
        "stat, spec, n, expected",
        [
            ("rec", ThetaSpec.linear(1), 1000, math.log(2) * 1000),
            ("inv", ThetaSpec.fixed(1), 1000, 1000**2 / 4),
            ("desc", ThetaSpec.power(1.5), 10**4, 10**2 / 2),
            ("first", ThetaSpec.linear(2), 50, 1.5),
        ],
    )
    def test_examples(self, stat, spec, n, expected):
        assert A.asymptotic_eval(AsymptoticRegime(stat, spec), n) == pytest.approx(expected)

    @pytest.mark.parametrize(
        "stat, spec",
        [("nu3", ThetaSpec.fixed(2)), ("nu8", ThetaSpec.power(0.5)), ("mu6", ThetaSpec.power(1.5))],
    )
    def test_unsupported(self, stat, spec):
        with pytest.raises(UnsupportedRegime):
            A.asymptotic_eval(AsymptoticRegime(stat, spec), 100)

    def test_unknown_statistic(self):
        with pytest.raises(UnsupportedRegime):
            AsymptoticRegime("bogus", ThetaSpec.fixed(1))

    def test_mu6_fixed_theta_slowly_converges(self):
        r = AsymptoticRegime("mu6", ThetaSpec.fixed(2))
        ratios = [A.expected_mu6(n, 2) / A.asymptotic_eval(r, n) for n in (10**3, 10**6, 10**9)]
        assert abs(ratios[2] - 1) < abs(ratios[1] - 1) < abs(ratios[0] - 1)


class TestCrossover:
    def test_cost_zero(self):
        assert A.crossover_lambda(0) == pytest.approx((math.sqrt(34) - 4) / 6, rel=1e-10)

    def test_cost_four(self):
        assert A.crossover_lambda(4) == pytest.approx(0.110, abs=2e-3)

    def test_large_cost_approaches_cost_zero(self):
        assert A.crossover_lambda(1e9) == pytest.approx(A.crossover_lambda(0), abs=1e-6)

    def test_no_root(self):
        assert A.crossover_lambda(1.0) is None

    def test_negative_cost(self):
        with pytest.raises(ValueError):
            A.crossover_lambda(-1)

    def test_root_is_a_root(self):
        lam = A.crossover_lambda(4)
        assert 1.5 + 4 * A.nu_per_element(lam) == pytest.approx(2 + 4 * A.mu_per_element(lam), abs=1e-10)

    def test_table(self):
        rows = A.crossover_table()
        assert len(rows) == 200
        assert rows[0][0] == pytest.approx(0.01) and rows[-1][0] == pytest.approx(2.0)
        lam0 = A.crossover_lambda(0)
        for lam, mu, nu in rows:
            assert (nu > mu) == (lam < lam0)


def test_exact_against_fractions_for_rational_theta():
    # closed forms evaluated in exact arithmetic
    n, theta = 6, Fraction(5, 2)
    d = sum(Fraction(1) / (theta + i) for i in range(n))
    inv = n * (n + 1 - 2 * theta) / 4 + theta * (theta - 1) / 2 * d
    assert float(inv) == pytest.approx(float(oracles.weighted(n, theta, oracles.inversions)), abs=1e-14)
    assert A.expected_inversions(n, 2.5) == pytest.approx(float(inv), abs=1e-13)
