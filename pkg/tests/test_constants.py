"""Constants layer: Wallis integrals, log-binomial, CDF/quantile helpers.

scipy and mpmath appear here only as independent test oracles (adaptive
quadrature, arbitrary-precision combinatorics); the package itself never
imports them.
"""

from __future__ import annotations

import math
import threading

import mpmath
import numpy as np
import pytest
import scipy.integrate
import scipy.special
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from klbounds import constants
from klbounds.constants import (
    C0,
    C1,
    D0,
    ConstantsError,
    chi2_cdf,
    log_binomial,
    log_factorial,
    log_wallis_H,
    log_wallis_K,
    log_wallis_K_array,
    normal_cdf,
    normal_ppf,
    regularized_lower_gamma,
    wallis_c,
    wallis_c_array,
    wallis_h,
    wallis_table,
)


def wallis_integral(m: int) -> float:
    """Adaptive quadrature of int_0^1 (1-x)^(m/2) / sqrt(x - x^2) dx.

    The integrand factors as x^(-1/2) (1-x)^((m-1)/2), which QAWS handles
    with an algebraic endpoint weight, leaving a constant smooth part.
    """
    val, err = scipy.integrate.quad(
        lambda x: 1.0, 0.0, 1.0, weight="alg", wvar=(-0.5, (m - 1) / 2.0)
    )
    assert err < 1e-10
    return val


class TestWallis:
    def test_seeds(self):
        assert wallis_c(0) == pytest.approx(math.pi, rel=1e-15)
        assert wallis_c(1) == 2.0

    @pytest.mark.parametrize("m", range(31))
    def test_against_quadrature(self, m):
        assert wallis_c(m) == pytest.approx(wallis_integral(m), rel=1e-9)

    def test_two_step_recursion(self):
        c = wallis_c_array(300)
        for m in range(2, 301):
            assert c[m] == pytest.approx(c[m - 2] * (m - 1) / m, rel=1e-13)

    def test_h_differs_only_at_two(self):
        for m in (0, 1, 3, 4, 7, 20):
            assert wallis_h(m) == wallis_c(m)
        assert wallis_h(2) == wallis_c(1)

    def test_running_products(self):
        # K_m via linear cumulative product of fresh recursion values.
        c = [math.pi, 2.0]
        for m in range(2, 40):
            c.append(c[-2] * (m - 1) / m)
        log_k = 0.0
        assert log_wallis_K(-1) == 0.0
        for m in range(40):
            log_k += math.log(c[m])
            assert log_wallis_K(m) == pytest.approx(log_k, abs=1e-12)

    def test_h_product_is_scaled_k_product(self):
        # H_m and K_m differ in exactly the index-2 factor once m >= 2.
        ratio = math.log(wallis_c(1) / wallis_c(2))
        for m in (2, 3, 10, 150):
            assert log_wallis_H(m) == pytest.approx(log_wallis_K(m) + ratio, abs=1e-12)

    @pytest.mark.parametrize("m", sorted({1, 2, 3, 5, 10, 50, 100, 200}))
    def test_k_envelope(self, m):
        envelope = 0.5 * math.log(D0 / m) + 0.5 * m * math.log(2.0 * math.pi * math.e / m)
        assert log_wallis_K(m) <= envelope + 1e-12

    def test_array_and_table_agree_with_scalars(self):
        arr = log_wallis_K_array(25)
        assert arr[0] == 0.0
        for m in range(-1, 26):
            assert arr[m + 1] == log_wallis_K(m)
        table = wallis_table(25)
        assert np.array_equal(table.c, wallis_c_array(25))
        assert np.array_equal(table.log_K, log_wallis_K_array(25))
        with pytest.raises(ValueError):
            table.c[0] = 0.0

    def test_concurrent_growth_is_consistent(self):
        targets = [500, 700, 900, 1100, 1300]
        threads = [
            threading.Thread(target=constants.wallis_c, args=(t,)) for t in targets
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        c = wallis_c_array(1300)
        for m in (137, 500, 899, 1300):
            assert c[m] == pytest.approx(c[m - 2] * (m - 1) / m, rel=1e-13)

    def test_universal_constants(self):
        assert C0 == pytest.approx(3.1967, abs=1e-4)
        assert C1 == pytest.approx(2.9290, abs=1e-4)
        assert D0 == pytest.approx(math.e**3 / 2.0, rel=1e-15)
        assert C1 == pytest.approx(
            (3.0 * wallis_c(1) / wallis_c(2)) * math.sqrt(D0 / (2.0 * math.pi * math.e)),
            rel=1e-14,
        )

    def test_domain_errors(self):
        with pytest.raises(ConstantsError):
            wallis_c(-1)
        with pytest.raises(ConstantsError):
            wallis_c(2.5)
        with pytest.raises(ConstantsError):
            log_wallis_K(-2)


class TestLogBinomial:
    @pytest.mark.parametrize("a", [0, 1, 2, 7, 40, 81, 123, 300])
    def test_exact_small(self, a):
        for b in range(a + 1):
            assert log_binomial(a, b) == pytest.approx(
                math.log(math.comb(a, b)) if math.comb(a, b) > 1 else 0.0,
                rel=1e-12,
                abs=1e-12,
            )

    @pytest.mark.parametrize(
        "a,b",
        [(10**6, 5 * 10**5), (10**6, 41), (10**6, 42), (10**9, 10**4), (10**9, 5 * 10**8)],
    )
    def test_large_against_mpmath(self, a, b):
        with mpmath.workdps(40):
            ref = float(mpmath.log(mpmath.binomial(a, b)))
        assert log_binomial(a, b) == pytest.approx(ref, rel=1e-13)

    def test_symmetry_and_edges(self):
        assert log_binomial(50, 0) == 0.0
        assert log_binomial(50, 50) == 0.0
        assert log_binomial(10**7, 123) == pytest.approx(
            log_binomial(10**7, 10**7 - 123), rel=1e-14
        )

    def test_errors(self):
        with pytest.raises(ConstantsError):
            log_binomial(5, 6)
        with pytest.raises(ConstantsError):
            log_binomial(5, -1)
        with pytest.raises(ConstantsError):
            log_binomial(-5, 0)

    @given(st.integers(0, 2000), st.data())
    @settings(max_examples=60, deadline=None)
    def test_pascal_rule(self, a, data):
        b = data.draw(st.integers(1, max(a, 1)))
        if b > a or a == 0:
            return
        lhs = log_binomial(a, b)
        rhs = np.logaddexp(log_binomial(a - 1, b - 1), log_binomial(a - 1, b)) if b < a else 0.0
        if b < a:
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_log_factorial(self):
        with mpmath.workdps(40):
            for n in (0, 1, 5, 200, 10**6):
                ref = float(mpmath.log(mpmath.factorial(n))) if n > 1 else 0.0
                assert log_factorial(n) == pytest.approx(ref, rel=1e-13, abs=1e-13)


class TestDistributionFunctions:
    @pytest.mark.parametrize("df", [1, 2, 3, 5, 10, 40])
    def test_chi2_cdf_against_scipy(self, df):
        for x in np.concatenate([[0.0, 1e-8], np.linspace(0.01, 8 * df, 60)]):
            assert chi2_cdf(float(x), df) == pytest.approx(
                scipy.stats.chi2.cdf(x, df), abs=1e-12
            )

    def test_chi2_df2_closed_form(self):
        for x in (0.1, 1.0, 3.7, 12.0):
            assert chi2_cdf(x, 2) == pytest.approx(-math.expm1(-0.5 * x), rel=1e-12)

    def test_regularized_gamma_against_scipy(self):
        for a in (0.3, 0.5, 1.0, 2.5, 7.0, 60.0):
            for x in (0.0, 0.01, a / 2, a, a + 1, 3 * a, 10 * a):
                assert regularized_lower_gamma(a, float(x)) == pytest.approx(
                    scipy.special.gammainc(a, x), abs=1e-12
                )

    def test_normal_cdf(self):
        assert normal_cdf(1.96) == pytest.approx(0.975, abs=2.2e-4)
        for x in np.linspace(-8.0, 8.0, 81):
            assert normal_cdf(float(x)) == pytest.approx(
                scipy.stats.norm.cdf(x), abs=1e-13
            )

    @pytest.mark.parametrize("q", [1e-9, 1e-4, 0.025, 0.3, 0.5, 0.975, 0.995, 1 - 1e-9])
    def test_normal_ppf(self, q):
        assert normal_ppf(q) == pytest.approx(scipy.stats.norm.ppf(q), abs=1e-11)
        assert normal_cdf(normal_ppf(q)) == pytest.approx(q, rel=1e-11, abs=1e-13)

    @given(st.floats(1e-12, 1.0 - 1e-12))
    @settings(max_examples=80, deadline=None)
    def test_ppf_cdf_roundtrip(self, q):
        x = normal_ppf(q)
        assert normal_cdf(x) == pytest.approx(q, rel=1e-9, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ConstantsError):
            chi2_cdf(-0.1, 2)
        with pytest.raises(ConstantsError):
            chi2_cdf(1.0, 0)
        with pytest.raises(ConstantsError):
            normal_ppf(0.0)
        with pytest.raises(ConstantsError):
            regularized_lower_gamma(-1.0, 2.0)
