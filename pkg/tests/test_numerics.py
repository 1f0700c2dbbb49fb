"""Tests for special functions, quadrature and the Meijer G evaluator."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rfso.numerics import (
    BesselRangeError,
    MeijerGSpec,
    QuadratureError,
    QuadratureSettings,
    bessel_k,
    binomial,
    integrate_finite,
    integrate_semi_infinite,
    leading_residue,
    log_gamma,
    meijer_g,
    meijer_g_batch,
    meijer_g_remainder,
)

from . import oracles


class TestBesselK:
    """K_nu(x) against arbitrary-precision values."""

    @pytest.mark.parametrize("nu", [0.0, 0.3, 0.5, 1.0, 2.5, 4.0, 7.8, 9.0])
    @pytest.mark.parametrize("x", [1e-3, 0.1, 1.0, 1.99, 2.01, 5.0, 30.0, 200.0])
    def test_matches_mpmath(self, nu, x):
        assert bessel_k(nu, x) == pytest.approx(oracles.bessel_k(nu, x), rel=1e-12)

    @given(nu=st.floats(0.0, 12.0), x=st.floats(1e-2, 50.0))
    def test_even_in_order(self, nu, x):
        """K_{-nu} = K_nu."""
        assert bessel_k(-nu, x) == pytest.approx(bessel_k(nu, x), rel=1e-12)

    def test_vectorised(self):
        x = np.array([0.5, 1.0, 3.0, 10.0])
        expected = [oracles.bessel_k(2.3, v) for v in x]
        np.testing.assert_allclose(bessel_k(2.3, x), expected, rtol=1e-12)

    def test_rejects_nonpositive_argument(self):
        with pytest.raises(ValueError):
            bessel_k(1.0, 0.0)

    def test_overflow_is_reported(self):
        with pytest.raises(BesselRangeError):
            bessel_k(200.0, 1e-3)


class TestGammaHelpers:
    def test_log_gamma(self):
        assert log_gamma(10.0) == pytest.approx(math.log(362880.0), rel=1e-14)

    def test_binomial(self):
        assert binomial(4, 2) == 6
        assert binomial(4, 5) == 0


class TestQuadrature:
    """Adaptive Gauss-Legendre rules."""

    def test_polynomial_exact(self):
        assert integrate_finite(lambda x: x ** 5, 0.0, 2.0) == pytest.approx(64 / 6, rel=1e-14)

    def test_reversed_limits(self):
        assert integrate_finite(np.sin, math.pi, 0.0) == pytest.approx(-2.0, rel=1e-13)

    def test_scalar_callable(self):
        assert integrate_finite(lambda x: math.exp(x), 0.0, 1.0) == pytest.approx(math.e - 1, rel=1e-13)

    def test_semi_infinite_gaussian(self):
        val = integrate_semi_infinite(lambda x: np.exp(-x * x), 0.0)
        assert val == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-11)

    def test_bessel_weighted_integral(self):
        """int_0^inf sqrt(g) K_1(2 sqrt(g)) dg = Gamma(2) Gamma(1) / 2."""
        val = integrate_semi_infinite(lambda g: np.sqrt(g) * bessel_k(1.0, 2.0 * np.sqrt(g)), 0.0)
        assert val == pytest.approx(0.5, rel=1e-9)

    def test_endpoint_singularity(self):
        assert integrate_finite(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0) == pytest.approx(2.0, rel=1e-8)

    def test_budget_exhaustion_raises(self):
        tight = QuadratureSettings(abs_tol=1e-300, rel_tol=1e-15, max_subdivisions=4)
        with pytest.raises(QuadratureError) as info:
            integrate_finite(lambda x: np.sin(1.0 / np.maximum(x, 1e-9)), 0.0, 1.0, tight)
        assert info.value.estimate is not None

    def test_halving_tolerance_is_consistent(self):
        """A tighter run stays inside the looser run's error target."""
        f = lambda x: np.exp(-x) * np.cos(3 * x)
        loose = QuadratureSettings(abs_tol=1e-6, rel_tol=1e-6)
        tight = QuadratureSettings(abs_tol=5e-7, rel_tol=5e-7)
        a = integrate_semi_infinite(f, 0.0, loose)
        b = integrate_semi_infinite(f, 0.0, tight)
        assert abs(a - b) <= loose.target(a)
        assert b == pytest.approx(0.1, rel=1e-6)

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            QuadratureSettings(abs_tol=-1.0)


class TestMeijerG:
    """Mellin-Barnes evaluation of G^{m,n}_{p,q}."""

    @given(z=st.floats(1e-4, 10.0))
    def test_exponential(self, z):
        """G^{1,0}_{0,1}(z | -; 0) = exp(-z)."""
        assert meijer_g(MeijerGSpec(1, 0, (), (0.0,), z)) == pytest.approx(math.exp(-z), rel=1e-9)

    @pytest.mark.parametrize(
        "m,n,a,b,z",
        [
            (4, 1, (1.0,), (5.0, 5.5, 1.0, 1.5, 0.0), 0.3),
            (4, 1, (1.0,), (5.0, 5.5, 2.5, 3.0, 0.0), 1e-3),
            (4, 1, (0.0,), (5.0, 5.5, 1.5, 2.0), 2.0),
            (4, 2, (0.0, 0.5), (5.0, 5.5, 1.0, 1.5, 0.0), 0.05),
            (2, 1, (0.0,), (0.5, 1.0), 4.0),
            (3, 1, (1.0,), (1.0, 0.5, 2.0, 0.0), 25.0),
        ],
    )
    def test_matches_mpmath(self, m, n, a, b, z):
        got = meijer_g(MeijerGSpec(m, n, a, b, z))
        assert got == pytest.approx(oracles.meijer_g(m, n, a, b, z), rel=1e-9)

    def test_batch_matches_scalar(self):
        z = np.geomspace(1e-5, 50.0, 7)
        a, b = (1.0,), (5.0, 5.5, 1.0, 1.5, 0.0)
        batch = meijer_g_batch(4, 1, a, b, z)
        single = [meijer_g(MeijerGSpec(4, 1, a, b, v)) for v in z]
        np.testing.assert_allclose(batch, single, rtol=1e-9)

    @pytest.mark.parametrize("shift", [-0.1, 0.1])
    def test_contour_shift_invariance(self, shift):
        """Moving the vertical contour without crossing poles leaves G unchanged."""
        spec = MeijerGSpec(4, 1, (1.0,), (5.0, 5.5, 1.0, 1.5, 0.0), 0.2)
        base_sigma = 0.6
        settings = QuadratureSettings(abs_tol=1e-300, rel_tol=1e-10)
        a = meijer_g(spec, settings, sigma=base_sigma)
        b = meijer_g(spec, settings, sigma=base_sigma + shift)
        assert b == pytest.approx(a, rel=2e-10)

    def test_resolution_invariance(self):
        spec = MeijerGSpec(4, 1, (1.0,), (5.0, 5.5, 2.0, 2.5, 0.0), 0.7)
        coarse = meijer_g(spec, QuadratureSettings(abs_tol=1e-300, rel_tol=1e-10))
        fine = meijer_g(spec, QuadratureSettings(abs_tol=1e-300, rel_tol=1e-12))
        assert fine == pytest.approx(coarse, rel=2e-10)

    def test_contour_must_separate_poles(self):
        with pytest.raises(ValueError):
            meijer_g(MeijerGSpec(1, 1, (1.0,), (0.0,), 0.5), sigma=2.0)

    def test_rejects_nonpositive_argument(self):
        with pytest.raises(ValueError):
            meijer_g_batch(1, 0, (), (0.0,), [0.0])

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            MeijerGSpec(3, 0, (), (0.0, 1.0), 1.0)


class TestResidueSplit:
    """G = leading residue + remainder, computed separately."""

    @pytest.mark.parametrize("z", [1e-6, 1e-3, 0.1, 2.0])
    def test_split_reassembles(self, z):
        m, n, a, b = 4, 1, (0.0,), (4.5, 5.0, 0.5, 1.0, 0.0)
        head = leading_residue(MeijerGSpec(m, n, a, b, z))
        rest = float(meijer_g_remainder(m, n, a, b, [z])[0])
        assert head + rest == pytest.approx(oracles.meijer_g(m, n, a, b, z), rel=1e-9)

    def test_remainder_small_argument(self):
        """The remainder is accurate where G itself is dominated by the residue."""
        m, n, a, b = 4, 1, (0.0,), (4.5, 5.0, 0.5, 1.0, 0.0)
        z = 1e-8
        exact = oracles.meijer_g(m, n, a, b, z) - leading_residue(MeijerGSpec(m, n, a, b, z))
        rest = float(meijer_g_remainder(m, n, a, b, [z])[0])
        assert rest == pytest.approx(exact, rel=1e-6)

    def test_double_pole_refused(self):
        with pytest.raises(ValueError):
            leading_residue(MeijerGSpec(2, 0, (), (1.0, 1.0), 0.5))
