"""Tests for the periodic drift basis and its functionals."""

import logging
import math

import numpy as np
import pytest

from fou_periodic.basis import (
    A_of_t,
    BasisFunction,
    PeriodicDrift,
    basis_mean,
    drift_functionals,
    drift_L,
    eval_basis,
    exp_weighted_integral,
    gram_matrix,
    lambda_phi,
    remainder_bound,
    remainder_R,
    tilde_L,
    validate_basis,
)
from fou_periodic.errors import ConfigurationError, DomainError
from fou_periodic.quadrature import simpson

FOURIER = [BasisFunction.parse(s) for s in ("constant", "cos:1", "sin:1", "cos:2", "sin:3")]


class TestBasisFunction:
    """Tests for parsing and evaluating basis functions."""

    def test_parse(self):
        """Test parsing of basis labels."""
        assert BasisFunction.parse("constant") == BasisFunction("constant")
        assert BasisFunction.parse("cos:2") == BasisFunction("cos", 2)
        assert BasisFunction.parse(" sin:1 ").label == "sin:1"

    @pytest.mark.parametrize("text", ["cos", "cos:0", "tan:1", "constant:1", "sin:x"])
    def test_parse_rejects(self, text):
        """Test that malformed labels are refused."""
        with pytest.raises(ConfigurationError):
            BasisFunction.parse(text)

    def test_values(self):
        """Test basis values at known points."""
        assert eval_basis(BasisFunction("constant"), 0.3) == 1.0
        assert eval_basis(BasisFunction("cos", 1), 0.0) == pytest.approx(math.sqrt(2))
        assert eval_basis(BasisFunction("sin", 1), 0.25) == pytest.approx(math.sqrt(2))

    def test_periodic(self):
        """Test that every basis function has period one."""
        t = np.linspace(0, 1, 17)
        for phi in FOURIER:
            np.testing.assert_allclose(eval_basis(phi, t + 3.0), eval_basis(phi, t), atol=1e-12)

    def test_tabulated_wraps(self):
        """Test that a tabulated function interpolates and wraps around."""
        phi = BasisFunction.tabulated([0.0, 1.0, 0.0, -1.0])
        assert eval_basis(phi, 0.25) == pytest.approx(1.0)
        assert eval_basis(phi, 0.875) == pytest.approx(-0.5)
        assert eval_basis(phi, 1.25) == pytest.approx(1.0)

    def test_empty_table(self):
        """Test that an empty table is refused."""
        with pytest.raises(ConfigurationError, match="empty"):
            eval_basis(BasisFunction("tabulated"), 0.5)


class TestExpWeightedIntegral:
    """Tests for closed-form exponentially weighted integrals."""

    @pytest.mark.parametrize("beta", [-0.7, 0.0, 0.5, 2.0])
    def test_closed_form_matches_quadrature(self, beta):
        """Test the closed forms against Simpson quadrature."""
        for phi in FOURIER:
            for t in (0.3, 1.0, 2.7):
                expected = simpson(lambda u: np.exp(beta * u) * eval_basis(phi, u), 0.0, t, 2.0**-12)
                assert exp_weighted_integral(phi, beta, t) == pytest.approx(expected, rel=1e-8, abs=1e-10)

    def test_vectorized(self):
        """Test evaluation on an array of times."""
        t = np.array([0.5, 1.0, 1.5])
        out = exp_weighted_integral(BasisFunction("cos", 1), -0.5, t)
        assert out.shape == (3,)

    def test_mean(self):
        """Test basis means over one period."""
        assert basis_mean(BasisFunction("constant")) == 1.0
        assert basis_mean(BasisFunction("sin", 2)) == 0.0
        assert basis_mean(BasisFunction.tabulated([1.0, 1.0, 1.0, 1.0])) == pytest.approx(1.0)


class TestGram:
    """Tests for the Gram matrix and orthonormality report."""

    def test_fourier_is_orthonormal(self):
        """Test that the Fourier basis is orthonormal."""
        report = validate_basis(FOURIER)
        assert report.orthonormal
        assert report.max_defect <= 1e-8

    def test_gram_symmetric(self):
        """Test that the Gram matrix is symmetric."""
        gram = gram_matrix(FOURIER[:3])
        np.testing.assert_allclose(gram, gram.T)

    def test_tabulated_defect_logged(self, caplog):
        """Test that a non-orthonormal basis is logged."""
        with caplog.at_level(logging.WARNING, logger="fou_periodic.basis"):
            PeriodicDrift((BasisFunction.tabulated([1.0, 2.0, 3.0, 2.0]),), [1.0])
        assert "not orthonormal" in caplog.text


class TestPeriodicDrift:
    """Tests for the periodic drift L."""

    def test_length_mismatch(self):
        """Test that mu and the basis must have equal length."""
        with pytest.raises(ConfigurationError, match="mu has"):
            PeriodicDrift.from_spec(["constant", "cos:1"], [1.0])

    def test_duplicates(self):
        """Test that repeated basis functions are refused."""
        with pytest.raises(ConfigurationError, match="distinct"):
            PeriodicDrift.from_spec(["cos:1", "cos:1"], [1.0, 2.0])

    def test_mu_is_copied(self):
        """Test that mu is copied and read-only."""
        mu = np.array([1.0])
        drift = PeriodicDrift.from_spec(["constant"], mu)
        mu[0] = 5.0
        assert drift.mu[0] == 1.0
        assert not drift.mu.flags.writeable

    def test_drift_L(self, mixed_drift):
        """Test L(t) for a mixed basis."""
        t = 0.2
        expected = 1.0 + 0.5 * math.sqrt(2) * math.cos(2 * math.pi * t) - 0.3 * math.sqrt(2) * math.sin(2 * math.pi * t)
        assert drift_L(mixed_drift, t) == pytest.approx(expected)
        assert mixed_drift(t) == pytest.approx(expected)

    def test_tilde_L_integer_times(self, mixed_drift):
        """Test that only the constant term survives whole periods."""
        # only the constant survives a whole period
        assert tilde_L(mixed_drift, 3.0) == pytest.approx(3.0, abs=1e-12)

    def test_tilde_L_remainder_bounded(self, mixed_drift):
        """Test that the integral of L stays within a fixed distance of its linear trend."""
        t = np.linspace(0.0, 20.0, 2001)
        mean = sum(m * basis_mean(phi) for m, phi in zip(mixed_drift.mu, mixed_drift.basis))
        bound = 1.0 + (0.5 + 0.3) * math.sqrt(2)
        assert np.max(np.abs(tilde_L(mixed_drift, t) - t * mean)) <= bound

    def test_negative_time(self, mixed_drift):
        """Test that negative times are refused."""
        with pytest.raises(DomainError):
            A_of_t(mixed_drift, 0.5, -1.0)
        with pytest.raises(DomainError):
            drift_L(mixed_drift, -0.1)


class TestDriftFunctionals:
    """Tests for A_1, A_inf and lambda_phi."""

    def test_constant_drift(self):
        """Test the functionals of a constant drift."""
        drift = PeriodicDrift.from_spec(["constant"], [2.0])
        fun = drift_functionals(drift, 0.5)
        assert fun.A1 == pytest.approx(2.0 * (1 - math.exp(-0.5)) / 0.5, abs=1e-12)
        assert fun.A_inf == pytest.approx(2.0 / 0.5, abs=1e-10)
        assert fun.lam[0] == pytest.approx(1 / 0.5, abs=1e-10)

    @pytest.mark.parametrize("text", ["cos:1", "sin:1", "cos:3"])
    def test_lambda_against_quadrature(self, text):
        """Test lambda_phi against Simpson quadrature."""
        phi = BasisFunction.parse(text)
        alpha = 0.7
        numeric = simpson(lambda u: np.exp(alpha * u) * eval_basis(phi, u), 0.0, 1.0, 2.0**-12) / math.expm1(alpha)
        assert lambda_phi(phi, alpha) == pytest.approx(numeric, abs=1e-10)

    def test_A_converges_to_A_inf(self, mixed_drift):
        """Test that A_t converges to A_inf."""
        fun = drift_functionals(mixed_drift, 0.5)
        assert A_of_t(mixed_drift, 0.5, 60.0) == pytest.approx(fun.A_inf, abs=1e-10)

    def test_A_at_integer_times(self, mixed_drift):
        """Test the geometric-sum form of A_n at integer times."""
        alpha = 0.5
        a1 = drift_functionals(mixed_drift, alpha).A1
        for n in range(1, 21):
            expected = a1 * math.expm1(-alpha * n) / math.expm1(-alpha)
            assert A_of_t(mixed_drift, alpha, float(n)) == pytest.approx(expected, abs=1e-10)

    def test_alpha_must_be_positive(self, mixed_drift):
        """Test that alpha must be positive."""
        with pytest.raises(DomainError):
            drift_functionals(mixed_drift, 0.0)

    def test_as_dict(self, mixed_drift):
        """Test the dictionary form of the functionals."""
        d = drift_functionals(mixed_drift, 0.5).as_dict()
        assert set(d) == {"alpha", "A1", "A_inf", "lambda"}
        assert len(d["lambda"]) == 3


class TestRemainder:
    """Tests for the remainder R_t = A_t - A_inf."""

    def test_defined_from_one(self, mixed_drift):
        """Test that R_t is refused before t = 1."""
        with pytest.raises(DomainError):
            remainder_R(mixed_drift, 0.5, 0.5)

    def test_integer_times(self, mixed_drift):
        """Test the closed form of R_n at integer times."""
        alpha = 0.5
        a1 = drift_functionals(mixed_drift, alpha).A1
        for n in range(1, 21):
            expected = a1 * math.exp(-alpha * n) / math.expm1(-alpha)
            assert remainder_R(mixed_drift, alpha, float(n)) == pytest.approx(expected, abs=1e-10)

    def test_exponential_bound(self, mixed_drift):
        """Test the exponential bound on R_t."""
        alpha = 0.5
        t = np.linspace(1.0, 12.0, 500)
        bound = remainder_bound(mixed_drift, alpha)
        assert np.all(np.abs(remainder_R(mixed_drift, alpha, t)) <= bound * np.exp(-alpha * t))
