"""Tests for sampling-based model checks - Contract TEMSP-MODEL-001."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.exceptions import ConfigurationError, UsageError
from src.models.certificates import ContractionCert, DissipativityCert
from src.models.sdde_model import SddeModel, cubic_delay_model, example_lyapunov
from src.numerics.model_checks import (
    DEFAULT_POINTS,
    BoxSampler,
    FixedSampler,
    check_contraction,
    check_dissipativity,
    check_growth_function,
    evaluate_diffusion,
    evaluate_drift,
    trace_norm_sq,
)


def cubic_drift_model() -> SddeModel:
    """One-dimensional model with f(x, y) = x^3 and no noise."""
    return SddeModel(
        name="cubic-drift",
        d=1,
        m=1,
        tau=1.0,
        drift=lambda x, y: x**3,
        diffusion=lambda x, y: np.zeros(np.broadcast_shapes(x.shape, y.shape) + (1,)),
    )


class TestEvaluation:
    """Test coefficient evaluation helpers."""

    def setup_method(self):
        """Set up test fixtures."""
        self.model = cubic_delay_model()

    def test_drift_dimension_check(self):
        """Test that a wrong trailing dimension is a usage error."""
        with pytest.raises(UsageError):
            evaluate_drift(self.model, np.zeros(3), np.zeros(2))
        with pytest.raises(UsageError):
            evaluate_diffusion(self.model, np.zeros(2), np.zeros(1))

    def test_trace_norm(self):
        """Test the squared Frobenius norm over the last two axes."""
        assert trace_norm_sq(np.diag([9.0, 4.0])) == pytest.approx(97.0)

    def test_box_sampler_is_seeded(self):
        """Test that equal seeds give equal points inside the box."""
        first = BoxSampler(seed=3).draw(100, 4)
        assert_allclose(first, BoxSampler(seed=3).draw(100, 4))
        assert first.min() >= -5.0 and first.max() <= 5.0

    def test_fixed_sampler_cycles(self):
        """Test that fixed points repeat when more are requested."""
        points = FixedSampler(np.array([[1.0, 2.0], [3.0, 4.0]])).draw(3, 2)
        assert_allclose(points, [[1.0, 2.0], [3.0, 4.0], [1.0, 2.0]])


class TestDissipativity:
    """Test falsification of the dissipativity certificate."""

    def setup_method(self):
        """Set up test fixtures."""
        self.model = cubic_delay_model()

    def test_builtin_certificate_holds(self):
        """Test that the builtin constants survive sampling."""
        report = check_dissipativity(self.model, self.model.dissipativity)
        assert report.consistent
        assert report.n_points == DEFAULT_POINTS == 100_000
        assert report.worst_margin >= 0.0

    def test_false_certificate_is_caught(self):
        """Test that a1 = 0 fails near x = (1/4, 0)."""
        cert = DissipativityCert(alpha=4.0, a1=0.0, a2=3.0, a3=1.0)
        sampler = FixedSampler(np.array([[0.25, 0.0, 0.0, 0.0]]))
        report = check_dissipativity(self.model, cert, sampler=sampler, n_points=1)
        assert not report.consistent
        assert report.worst_margin < 0
        assert_allclose(report.violations[0], [0.25, 0.0, 0.0, 0.0])

    def test_margin_antitone_in_a2(self):
        """Test that raising a2 never raises the worst margin on the same points."""
        margins = []
        for a2 in (1.5, 3.0, 4.5, 9.0):
            cert = DissipativityCert(alpha=4.0, a1=0.5, a2=a2, a3=1.0)
            report = check_dissipativity(self.model, cert, sampler=BoxSampler(seed=11))
            assert report.n_points == 100_000
            margins.append(report.worst_margin)
        assert all(later <= earlier for earlier, later in zip(margins, margins[1:]))
        assert margins[-1] < margins[0]

    def test_rejects_empty_sample(self):
        """Test the n_points precondition."""
        with pytest.raises(UsageError):
            check_dissipativity(self.model, self.model.dissipativity, n_points=0)


class TestContraction:
    """Test falsification of the contraction certificate."""

    def setup_method(self):
        """Set up test fixtures."""
        self.model = cubic_delay_model()

    def test_builtin_certificate_holds(self):
        """Test that the builtin constants survive sampling."""
        report = check_contraction(self.model, self.model.contraction)
        assert report.consistent
        assert report.n_points == DEFAULT_POINTS

    def test_false_certificate_is_caught(self):
        """Test that b1 = 5 fails for a pair straddling the origin."""
        cert = ContractionCert(b1=5.0, b2=0.0, b3=3.0, b4=1.0, V=example_lyapunov)
        point = np.array([[0.1, 0.0, 0.0, 0.0, -0.1, 0.0, 0.0, 0.0]])
        report = check_contraction(self.model, cert, sampler=FixedSampler(point), n_points=1)
        assert report.n_violations == 1

    def test_nonvanishing_pair_function(self):
        """Test that V(x, x) != 0 is a configuration error."""
        cert = ContractionCert(
            b1=2.0, b2=0.0, b3=1.0, b4=0.0, V=lambda u, v: np.ones(u.shape[:-1])
        )
        with pytest.raises(ConfigurationError):
            check_contraction(self.model, cert, n_points=10)


class TestGrowthFunction:
    """Test falsification of a proposed growth function."""

    def test_builtin_growth_function_holds(self):
        """Test Phi(R) = 16 R^4 at R = 2 for the cubic example."""
        report = check_growth_function(
            cubic_delay_model(), lambda r: 16.0 * r**4, radius=2.0
        )
        assert report.consistent

    def test_undersized_growth_function(self):
        """Test that Phi(R) = R cannot dominate a cubic drift at R = 10."""
        report = check_growth_function(
            cubic_drift_model(), lambda r: r, radius=10.0, n_points=5_000
        )
        assert not report.consistent

    def test_radius_below_one(self):
        """Test that Phi is only defined on [1, inf)."""
        with pytest.raises(UsageError):
            check_growth_function(cubic_delay_model(), lambda r: r, radius=0.5)
