"""Tests for truncation and the step-size gates - Contract TEMSP-TRUNC-001."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from src.exceptions import ConfigurationError, UsageError
from src.models.certificates import DissipativityCert
from src.models.sdde_model import cubic_delay_model, frozen_model
from src.numerics.truncation import (
    BELOW_ONE,
    TruncationRule,
    admissible_dt,
    build_rule,
    compute_K,
    identity_threshold_dt,
    model_admissibility,
    power_law_rule,
    truncate,
    truncation_radius,
)


class TestTruncationRule:
    """Test rule construction and K."""

    def setup_method(self):
        """Set up test fixtures."""
        self.model = cubic_delay_model()
        self.rule = build_rule(self.model, 16.0, 4.0, 0.01)

    def test_K_for_cubic_model(self):
        """Test K = max(1, Phi(1), |f(0,0)|, |g(0,0)|^2) = 16."""
        assert self.rule.K == pytest.approx(16.0)
        assert compute_K(self.model, lambda r: 2.0 * r) == pytest.approx(2.0)

    def test_K_has_floor_one(self):
        """Test that K never drops below 1."""
        assert compute_K(frozen_model(), lambda r: 0.5 * r) == 1.0

    def test_rejects_bad_nu(self):
        """Test nu outside (0, 1/3]."""
        with pytest.raises(ConfigurationError):
            power_law_rule(1.0, 2.0, K=4.0, nu=0.5)
        with pytest.raises(ConfigurationError):
            power_law_rule(1.0, 2.0, K=4.0, nu=0.0)

    def test_rejects_small_K(self):
        """Test K below Phi(1)."""
        with pytest.raises(ConfigurationError):
            power_law_rule(16.0, 4.0, K=2.0)

    def test_rejects_nonpositive_power_law(self):
        """Test that Phi needs positive coefficient and exponent."""
        with pytest.raises(ConfigurationError):
            power_law_rule(0.0, 4.0, K=16.0)

    def test_rejects_bad_inverse(self):
        """Test that a wrong Phi^-1 fails the round trip."""
        with pytest.raises(ConfigurationError, match="phi_inv"):
            TruncationRule(phi=lambda r: r**2, phi_inv=lambda v: v, nu=0.1, K=1.0)


class TestRadius:
    """Test the truncation radius."""

    def setup_method(self):
        """Set up test fixtures."""
        self.rule = power_law_rule(16.0, 4.0, K=16.0, nu=0.01)

    @pytest.mark.parametrize("dt", [1e-3, 1e-4, 1e-5])
    def test_radius_is_dt_power(self, dt):
        """Test Phi^-1(16 dt^-1/100) = dt^-1/400 for Phi(R) = 16 R^4."""
        assert truncation_radius(self.rule, dt) == pytest.approx(dt ** (-1.0 / 400.0), abs=1e-12)

    def test_quadratic_example(self):
        """Test Phi(R) = R^2, K = 4, nu = 1/4, dt = 1/16 gives sqrt(8)."""
        rule = power_law_rule(1.0, 2.0, K=4.0, nu=0.25)
        assert truncation_radius(rule, 1.0 / 16.0) == pytest.approx(np.sqrt(8.0), rel=1e-12)

    def test_radius_decreases_in_dt(self):
        """Test that a finer grid truncates at a larger radius."""
        assert truncation_radius(self.rule, 1e-4) > truncation_radius(self.rule, 1e-3)

    @pytest.mark.parametrize("dt", [0.0, 1.0, -0.1])
    def test_rejects_dt_outside_unit_interval(self, dt):
        """Test that dt must lie in (0, 1)."""
        with pytest.raises(UsageError):
            truncation_radius(self.rule, dt)


class TestTruncate:
    """Test the radial projection."""

    def test_projects_outside_points(self):
        """Test truncate((3, 4), 1) = (0.6, 0.8)."""
        assert_allclose(truncate(np.array([3.0, 4.0]), 1.0), [0.6, 0.8])

    def test_keeps_inside_points(self):
        """Test that points in the ball are returned unchanged."""
        x = np.array([0.3, -0.4])
        assert_allclose(truncate(x, 1.0), x, rtol=0, atol=0)

    def test_zero_maps_to_zero(self):
        """Test the origin."""
        assert_allclose(truncate(np.zeros(3), 0.5), np.zeros(3))

    def test_idempotent_on_stacks(self):
        """Test Gamma(Gamma(x)) = Gamma(x) and |Gamma(x)| <= radius."""
        x = np.random.default_rng(7).normal(scale=50.0, size=(1000, 2))
        once = truncate(x, 1.0123)
        assert np.all(np.linalg.norm(once, axis=-1) <= 1.0123)
        assert np.array_equal(truncate(once, 1.0123), once)

    def test_output_is_collinear_with_input(self):
        """Test Gamma(x) = c x with c in [0, 1] for every row."""
        x = np.random.default_rng(13).normal(scale=3.0, size=(500, 4))
        projected = truncate(x, 2.5)
        scale = np.linalg.norm(projected, axis=-1) / np.linalg.norm(x, axis=-1)
        assert np.all((scale >= 0.0) & (scale <= 1.0))
        assert_allclose(projected, scale[:, None] * x, rtol=1e-12, atol=1e-12)
        cross = x[:, 0] * projected[:, 1] - x[:, 1] * projected[:, 0]
        assert_allclose(cross, 0.0, atol=1e-12)

    def test_input_not_mutated(self):
        """Test that truncate returns a new array and leaves x untouched."""
        x = np.array([[3.0, 4.0], [0.1, 0.2]])
        before = x.copy()
        result = truncate(x, 1.0)
        assert_array_equal(x, before)
        assert result is not x
        result[1, 0] = 99.0
        assert x[1, 0] == 0.1

    def test_rejects_nonpositive_radius(self):
        """Test the radius precondition."""
        with pytest.raises(UsageError):
            truncate(np.ones(2), 0.0)


class TestAdmissibility:
    """Test the step-size gates on the cubic example."""

    def setup_method(self):
        """Set up test fixtures."""
        self.model = cubic_delay_model()
        self.rule = build_rule(self.model, 16.0, 4.0, 0.01)

    def test_margins_at_reference_step(self):
        """Test both gate left-hand sides at dt = 1e-3."""
        report = model_admissibility(self.model, self.rule, 1e-3)
        assert report.ok
        assert report.margin_b == pytest.approx(0.8243, abs=5e-4)
        assert report.margin_a == pytest.approx(1.2364, abs=5e-4)
        assert report.slack_a == pytest.approx(report.margin_a - 1.0)
        assert report.slack_b == pytest.approx(report.margin_b)

    def test_largest_admissible_step(self):
        """Test dt_max from the dissipativity gate."""
        report = model_admissibility(self.model, self.rule, 1e-3)
        assert report.dt_max == pytest.approx(0.001137, rel=1e-3)

    def test_gate_fails_above_dt_max(self):
        """Test that dt = 2e-3 fails."""
        report = model_admissibility(self.model, self.rule, 2e-3)
        assert not report.ok
        assert report.slack_a < 0

    def test_dt_max_with_small_K(self):
        """Test dt_max = ((a2 - a3) / 6K^2)^(1/(1-2nu)) for K = 1."""
        report = admissible_dt(
            self.model.dissipativity, self.model.contraction, K=1.0, nu=0.01, dt=0.5
        )
        assert report.dt_max == pytest.approx((2.0 / 6.0) ** (1.0 / 0.98))
        assert report.dt_max < BELOW_ONE

    def test_margins_antitone_and_ok_monotone_in_dt(self):
        """Test that margins fall with dt and the gate never reopens once it fails."""
        steps = [1e-6, 1e-5, 1e-4, 5e-4, 1e-3, 1.1e-3, 1.2e-3, 2e-3, 1e-2, 0.1, 0.5]
        reports = [model_admissibility(self.model, self.rule, dt) for dt in steps]
        for earlier, later in zip(reports, reports[1:]):
            assert later.margin_a < earlier.margin_a
            assert later.margin_b < earlier.margin_b
            assert later.ok <= earlier.ok
        assert reports[0].ok and not reports[-1].ok
        assert all(report.ok == (report.dt <= report.dt_max) for report in reports)

    def test_margin_antitone_in_a2(self):
        """Test that a larger a2 gives a larger gate margin at every dt."""
        model = self.model
        for dt in (1e-4, 1e-3, 2e-3):
            low = admissible_dt(model.dissipativity, model.contraction, self.rule.K, 0.01, dt)
            stronger = DissipativityCert(alpha=4.0, a1=0.5, a2=4.0, a3=1.0)
            high = admissible_dt(stronger, model.contraction, self.rule.K, 0.01, dt)
            assert high.margin_a == pytest.approx(low.margin_a + 1.0)
            assert high.dt_max > low.dt_max

    def test_uncertified_model(self):
        """Test that a model without certificates has no gate."""
        with pytest.raises(ConfigurationError):
            model_admissibility(frozen_model(), self.rule, 1e-3)

    def test_report_dict(self):
        """Test the manifest form of the report."""
        data = model_admissibility(self.model, self.rule, 1e-3).to_dict()
        assert set(data) == {"dt", "ok", "margin_a", "margin_b", "slack_a", "slack_b", "dt_max"}


class TestIdentityThreshold:
    """Test the step size below which Gamma fixes a ball."""

    def test_threshold_value(self):
        """Test M = 4 for Phi(R) = R^2, K = 4, nu = 1/4 gives dt = 1/256."""
        rule = power_law_rule(1.0, 2.0, K=4.0, nu=0.25)
        dt = identity_threshold_dt(rule, 4.0)
        assert dt == pytest.approx(1.0 / 256.0)
        assert truncation_radius(rule, dt) == pytest.approx(4.0)

    def test_small_ball_admits_every_step(self):
        """Test Phi(M) <= K."""
        rule = power_law_rule(1.0, 2.0, K=4.0, nu=0.25)
        assert identity_threshold_dt(rule, 1.5) == BELOW_ONE

    def test_rejects_nonpositive_M(self):
        """Test the M precondition."""
        with pytest.raises(UsageError):
            identity_threshold_dt(power_law_rule(1.0, 2.0, K=4.0), 0.0)
