"""Tests for path simulation, Z functionals and path dumps."""

import logging
import math

import numpy as np
import pytest
from scipy import integrate

from fou_periodic import rng
from fou_periodic.asymptotics import z_infinity_variance
from fou_periodic.basis import PeriodicDrift
from fou_periodic.errors import DomainError, OverflowGuardError, ResultParseError
from fou_periodic.fbm import FbmPath, generate_fbm_path
from fou_periodic.process import (
    ProcessPath,
    compute_Z,
    compute_zeta,
    pathwise_limits,
    read_path_csv,
    refine_pair,
    sample_Z_infinity,
    simulate_euler,
    simulate_exact,
    simulate_from_seed,
    truncate,
    write_path_csv,
    z_tail_sd_bound,
)


class TestSimulateExact:
    """Tests for the exact path construction."""

    def test_noise_free_constant_drift(self, constant_drift):
        """Test the noise-free path against the closed-form solution."""
        alpha = 0.5
        path = simulate_exact(constant_drift, alpha, FbmPath.zero(0.7, 4 * 64, 2.0**-6))
        expected = np.expm1(alpha * path.times) / alpha
        np.testing.assert_allclose(path.X, expected, rtol=1e-12)
        assert not np.any(path.Z)

    def test_starts_at_zero(self, noisy_path):
        """Test that paths start at zero."""
        assert noisy_path.X[0] == 0.0
        assert noisy_path.n == 6
        assert noisy_path.method == "exact"

    def test_zeta(self, noisy_path):
        """Test zeta_t against its definition at the horizon."""
        zeta = compute_zeta(noisy_path)
        assert zeta[0] == 0.0
        expected = math.exp(-0.5 * 6) * noisy_path.B[-1] + 0.5 * noisy_path.Z[-1]
        assert zeta[-1] == pytest.approx(expected)

    def test_alpha_must_be_positive(self, mixed_drift):
        """Test that alpha must be positive."""
        with pytest.raises(DomainError):
            simulate_exact(mixed_drift, -0.1, FbmPath.zero(0.7, 8, 0.125))

    def test_overflow_guard(self, constant_drift):
        """Test that both simulators refuse alpha n above the guard."""
        with pytest.raises(OverflowGuardError):
            simulate_exact(constant_drift, 1.0, FbmPath.zero(0.7, 41, 1.0))
        with pytest.raises(OverflowGuardError):
            simulate_euler(constant_drift, 1.0, FbmPath.zero(0.7, 41, 1.0))

    def test_read_only(self, noisy_path):
        """Test that path arrays are read-only."""
        with pytest.raises(ValueError):
            noisy_path.X[3] = 0.0

    def test_grid_mismatch(self, mixed_drift):
        """Test that X and B must share one grid."""
        bh = FbmPath.zero(0.7, 4, 0.25)
        with pytest.raises(DomainError, match="one grid"):
            ProcessPath(np.zeros(4), bh, mixed_drift, 0.5, np.zeros(5))

    def test_non_integer_horizon(self, mixed_drift):
        """Test that n is refused for a non-integer horizon."""
        path = simulate_exact(mixed_drift, 0.5, FbmPath.zero(0.7, 6, 0.25))
        with pytest.raises(DomainError, match="not an integer"):
            _ = path.n


class TestSimulateEuler:
    """Tests for the Euler scheme."""

    def test_converges_to_exact_without_noise(self, mixed_drift):
        """Test that the Euler scheme converges with order at least 0.9 on a noise-free path."""
        gaps = []
        for dt in (2.0**-8, 2.0**-9):
            bh = FbmPath.zero(0.7, round(4 / dt), dt)
            exact = simulate_exact(mixed_drift, 0.5, bh)
            euler = simulate_euler(mixed_drift, 0.5, bh)
            gaps.append(abs(euler.X[-1] - exact.X[-1]))
        assert math.log2(gaps[0] / gaps[1]) >= 0.9

    def test_first_step(self, mixed_drift):
        """Test the first Euler step."""
        bh = generate_fbm_path(0.7, 16, 0.0625, seed=3)
        euler = simulate_euler(mixed_drift, 0.5, bh)
        assert euler.X[1] == pytest.approx(mixed_drift(0.0) * 0.0625 + bh.values[1])
        assert euler.method == "euler"


class TestComputeZ:
    """Tests for the discounted integral Z_t."""

    def test_trapezoid_converges(self):
        """Test that the trapezoid error shrinks with the grid step."""
        alpha, horizon = 0.5, 2.0
        coarse_err, mid_err = [], []
        for i in range(200):
            fine = generate_fbm_path(0.5, round(horizon * 4096), 2.0**-12, seed=77, key=(i,))
            reference = compute_Z(fine, alpha)[-1]
            coarse_err.append(compute_Z(fine.restrict(64), alpha)[-1] - reference)
            mid_err.append(compute_Z(fine.restrict(16), alpha)[-1] - reference)
        rms_coarse = math.sqrt(np.mean(np.square(coarse_err)))
        rms_mid = math.sqrt(np.mean(np.square(mid_err)))
        assert rms_coarse / rms_mid >= 3.0

    def test_refine_pair_shares_realization(self):
        """Test that a refined pair shares one noise realization."""
        coarse, fine = refine_pair(0.7, 32, 0.125, seed=4, key=(rng.PATH, 1))
        assert coarse.m == 32
        assert fine.dt == 0.0625
        np.testing.assert_array_equal(coarse.values, fine.values[::2])


class TestZInfinity:
    """Tests for truncated Z_inf draws."""

    def test_moments(self):
        """Test the mean and variance of Z_inf draws."""
        draws = np.array(
            [sample_Z_infinity(0.5, 1.0, dt=2.0**-8, seed=99, key=(rng.ZINF, i)).value for i in range(2000)]
        )
        variance = z_infinity_variance(0.5, 1.0)
        assert variance == pytest.approx(0.5)
        assert abs(draws.mean()) < 3 * math.sqrt(variance / draws.size)
        assert draws.var(ddof=1) == pytest.approx(variance, abs=3 * variance * math.sqrt(2 / (draws.size - 1)))

    def test_default_truncation(self):
        """Test the default truncation horizon and its tail bound."""
        sample = sample_Z_infinity(0.7, 0.5, seed=1)
        assert sample.horizon == pytest.approx(24.0)
        assert sample.tail_sd == pytest.approx(z_tail_sd_bound(0.7, 0.5, 24.0))

    def test_refuses_short_truncation(self):
        """Test that a horizon below 5 / alpha is refused."""
        with pytest.raises(DomainError, match="tail"):
            sample_Z_infinity(0.7, 1.0, horizon=4.0, seed=1)

    def test_logs_below_design_default(self, caplog):
        """Test that a horizon below 10 / alpha is logged."""
        with caplog.at_level(logging.INFO, logger="fou_periodic.process"):
            sample_Z_infinity(0.7, 1.0, horizon=8.0, seed=1)
        assert "design default" in caplog.text

    def test_warns_on_coarse_grid(self, caplog):
        """Test that a grid step coarser than 2^-8 is reported as a warning."""
        with caplog.at_level(logging.WARNING, logger="fou_periodic.process"):
            sample_Z_infinity(0.7, 1.0, dt=2.0**-6, seed=1)
        assert "coarser" in caplog.text

    def test_default_grid_is_quiet(self, caplog):
        """Test that the default grid step logs no coarse-grid warning."""
        with caplog.at_level(logging.WARNING, logger="fou_periodic.process"):
            sample_Z_infinity(0.7, 1.0, seed=1)
        assert "coarser" not in caplog.text

    def test_tail_bound(self):
        """Test the tail bound against quadrature."""
        H, alpha, horizon = 0.7, 0.5, 24.0
        numeric, _ = integrate.quad(lambda s: math.exp(-alpha * s) * s**H, horizon, np.inf)
        assert z_tail_sd_bound(H, alpha, horizon) == pytest.approx(numeric, rel=1e-8)
        assert z_tail_sd_bound(H, alpha, 2 * horizon) < z_tail_sd_bound(H, alpha, horizon)

    def test_tail_beyond_truncation_is_small(self):
        """Test that Z moves little past the truncation horizon."""
        alpha = 0.5
        bh = generate_fbm_path(0.7, 48 * 64, 2.0**-6, seed=8)
        z = compute_Z(bh, alpha)
        assert abs(z[-1] - z[24 * 64]) < 6 * z_tail_sd_bound(0.7, alpha, 24.0)


class TestPathwiseLimits:
    """Tests for the pathwise limits of the normalized functionals."""

    @pytest.mark.parametrize("H", [0.5, 0.7])
    def test_functionals_share_limit(self, H):
        """Test that the normalized functionals share one limit."""
        drift = PeriodicDrift.from_spec(["constant"], [2.0])
        alpha = 0.5
        path = simulate_exact(drift, alpha, generate_fbm_path(H, 20 * 256, 2.0**-8, seed=21))
        limits = pathwise_limits(path)
        xi = limits["x"][-1]
        assert list(limits["n"]) == list(range(1, 21))
        assert limits["int_x"][-1] == pytest.approx(xi / alpha, rel=0.05)
        assert limits["int_x2"][-1] == pytest.approx(xi**2 / (2 * alpha), rel=0.05)

    def test_sequence_stabilizes(self):
        """Test that the normalized sequence settles down."""
        drift = PeriodicDrift.from_spec(["constant"], [2.0])
        path = simulate_exact(drift, 0.5, generate_fbm_path(0.7, 20 * 64, 2.0**-6, seed=5))
        steps = np.abs(np.diff(pathwise_limits(path)["x"]))
        assert steps[-4:].mean() < steps[5:9].mean()


class TestTruncate:
    """Tests for path prefixes."""

    def test_prefix(self, noisy_path):
        """Test that a prefix keeps the leading samples."""
        short = truncate(noisy_path, 3)
        assert short.n == 3
        np.testing.assert_array_equal(short.X, noisy_path.X[: 3 * 256 + 1])
        np.testing.assert_array_equal(short.Z, noisy_path.Z[: 3 * 256 + 1])

    @pytest.mark.parametrize("n", [0, 7])
    def test_out_of_range(self, noisy_path, n):
        """Test that out-of-range horizons are refused."""
        with pytest.raises(DomainError):
            truncate(noisy_path, n)


class TestSimulateFromSeed:
    """Tests for seeded simulation."""

    def test_uses_path_stream(self, mixed_drift):
        """Test that seeded paths use the PATH stream of the replication."""
        path = simulate_from_seed(mixed_drift, 0.5, 0.7, 2, 2.0**-6, seed=10, index=3)
        bh = generate_fbm_path(0.7, 128, 2.0**-6, seed=10, key=(rng.PATH, 3))
        np.testing.assert_array_equal(path.B, bh.values)

    def test_euler(self, mixed_drift):
        """Test seeded simulation with the Euler scheme."""
        path = simulate_from_seed(mixed_drift, 0.5, 0.7, 2, 2.0**-6, seed=10, method="euler")
        assert path.method == "euler"


class TestPathCsv:
    """Tests for path CSV dumps."""

    def test_dump_and_reload(self, tmp_path, noisy_path, mixed_drift):
        """Test that a dumped path reloads unchanged."""
        target = write_path_csv(noisy_path, tmp_path / "path.csv")
        assert target.read_text().splitlines()[0] == "t,X,BH,Z"
        loaded = read_path_csv(target, mixed_drift, 0.5, 0.7)
        np.testing.assert_array_equal(loaded.X, noisy_path.X)
        np.testing.assert_array_equal(loaded.B, noisy_path.B)
        assert loaded.n == 6
        assert loaded.bh.method == "file"

    def test_bad_header(self, tmp_path, mixed_drift):
        """Test that a wrong header is reported on line 1."""
        source = tmp_path / "path.csv"
        source.write_text("t,X\n0,0\n")
        with pytest.raises(ResultParseError) as info:
            read_path_csv(source, mixed_drift, 0.5, 0.7)
        assert info.value.line == 1

    def test_bad_value_reports_line(self, tmp_path, mixed_drift):
        """Test that a bad value is reported with its line."""
        source = tmp_path / "path.csv"
        source.write_text("t,X,BH,Z\n0,0,0,0\n0.5,oops,0,0\n")
        with pytest.raises(ResultParseError) as info:
            read_path_csv(source, mixed_drift, 0.5, 0.7)
        assert info.value.line == 3

    def test_short_row(self, tmp_path, mixed_drift):
        """Test that a short row is refused."""
        source = tmp_path / "path.csv"
        source.write_text("t,X,BH,Z\n0,0,0,0\n0.5,1,2\n")
        with pytest.raises(ResultParseError, match="4 columns"):
            read_path_csv(source, mixed_drift, 0.5, 0.7)
