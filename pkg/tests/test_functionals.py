"""Tests for test functionals on segment space - Contract TEMSP-MEASURE-001."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.exceptions import ConfigurationError, UsageError
from src.models.functional import (
    clip_norm,
    coordinate_eval,
    cos_norm,
    custom,
    half_clip_norm,
    parse_functional,
)
from src.models.segment import path_sup_norm
from src.numerics.statistics import spot_check


class TestBuiltinFunctionals:
    """Test values and declared bounds."""

    def setup_method(self):
        """Set up test fixtures."""
        self.nodes = np.array([[[0.0, 0.0], [3.0, 4.0], [0.0, 0.0]]])
        self.dt = 0.5

    def test_cos_norm(self):
        """Test cos(||X||) on the zero segment and a norm-5 segment."""
        psi = cos_norm()
        assert psi.evaluate(np.zeros((3, 2)), self.dt) == pytest.approx(1.0)
        assert_allclose(psi.evaluate(self.nodes, self.dt), [np.cos(5.0)])

    def test_clip_norm(self):
        """Test 2 ^ ||X|| and its reference form."""
        assert_allclose(clip_norm(2.0).evaluate(self.nodes, self.dt), [2.0])
        reference = self.nodes[0]
        assert_allclose(clip_norm(1.0, reference=reference).evaluate(self.nodes, self.dt), [0.0])

    def test_reference_shape_checked(self):
        """Test a reference with the wrong shape."""
        psi = clip_norm(1.0, reference=np.zeros((4, 2)))
        with pytest.raises(UsageError):
            psi.evaluate(self.nodes, self.dt)

    def test_half_clip_norm(self):
        """Test (1/2)(2 ^ ||X||)."""
        psi = half_clip_norm()
        assert psi.name == "half-clip-norm-2"
        assert_allclose(psi.evaluate(self.nodes, self.dt), [1.0])
        assert psi.in_xi

    def test_coordinate_eval(self):
        """Test X(theta)_c clipped to [-1, 1]."""
        assert_allclose(coordinate_eval(-0.5, 1).evaluate(self.nodes, self.dt), [1.0])
        assert_allclose(coordinate_eval(-0.75, 0).evaluate(self.nodes, self.dt), [1.0])
        assert_allclose(coordinate_eval(0.0, 0).evaluate(self.nodes, self.dt), [0.0])

    def test_precomputed_sup_norm(self):
        """Test that a supplied norm is used as is."""
        assert_allclose(cos_norm().evaluate(self.nodes, self.dt, sup_norm=np.zeros(1)), [1.0])

    def test_class_membership(self):
        """Test in_xi against the declared bounds."""
        assert cos_norm().in_xi
        assert clip_norm(1.0).in_xi
        assert not clip_norm(2.0).in_xi
        assert coordinate_eval(0.0, 0).in_xi

    def test_invalid_level(self):
        """Test that clip levels must be positive."""
        with pytest.raises(ConfigurationError):
            clip_norm(0.0)


class TestParseFunctional:
    """Test lookup by name."""

    def test_registry_names(self):
        """Test the registered reporting functionals."""
        assert parse_functional("cos-norm").name == "cos-norm"
        assert parse_functional("clip-norm-2").level == 2.0

    def test_any_clip_level(self):
        """Test clip-norm-<c> for unregistered levels."""
        assert parse_functional("clip-norm-3.5").level == 3.5

    @pytest.mark.parametrize("name", ["sin-norm", "clip-norm-x", "clip-norm--1"])
    def test_unknown_names(self, name):
        """Test that unknown names list the known ones."""
        with pytest.raises(ConfigurationError, match="cos-norm"):
            parse_functional(name)


class TestSpotCheck:
    """Test random probing of declared bounds."""

    def test_cos_norm_passes(self):
        """Test cos-norm on 10^4 pairs."""
        report = spot_check(cos_norm(), n_pairs=10_000)
        assert report.ok
        assert report.max_lipschitz_ratio <= 1.0 + 1e-12
        assert report.max_abs_value <= 1.0

    def test_clip_norm_holds_declared_bounds(self):
        """Test that clip-norm-2 holds its own declared bounds."""
        report = spot_check(clip_norm(2.0), n_pairs=2_000)
        assert report.ok
        assert report.max_abs_value > 1.0

    def test_understated_slope_is_caught(self):
        """Test a custom functional declared 1-Lipschitz with slope up to 2."""
        psi = custom(
            "steep", lambda nodes, dt: 0.5 * np.sin(4.0 * path_sup_norm(nodes)), 1.0, 1.0
        )
        report = spot_check(psi, n_pairs=2_000)
        assert not report.lipschitz_ok
        assert report.sup_ok

    def test_reference_shape_is_used(self):
        """Test that sampled segments match the reference shape."""
        psi = clip_norm(1.0, reference=np.zeros((9, 3)))
        assert spot_check(psi, n_pairs=500).ok

    def test_rejects_empty_sample(self):
        """Test the n_pairs precondition."""
        with pytest.raises(UsageError):
            spot_check(cos_norm(), n_pairs=0)
