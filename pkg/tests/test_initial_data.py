"""Tests for initial segments - Contract TEMSP-MODEL-001."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.enums import InitialDataKind
from src.exceptions import ConfigurationError, UsageError
from src.models.grid import Grid
from src.models.initial_data import InitialData, parse_initial, reference_initial_data


class TestInitialData:
    """Test evaluation on the grid nodes."""

    def setup_method(self):
        """Set up test fixtures."""
        self.grid = Grid(tau=1.0, N=4)

    def test_constant(self):
        """Test that every node holds the constant."""
        nodes = InitialData.constant((-3.0, 4.0)).evaluate(self.grid)
        assert nodes.shape == (5, 2)
        assert_allclose(nodes, np.tile([-3.0, 4.0], (5, 1)))

    def test_affine(self):
        """Test xi(theta) = (2 theta, theta + 1)."""
        nodes = InitialData.affine((2.0, 1.0), (0.0, 1.0)).evaluate(self.grid)
        assert_allclose(nodes[0], [-2.0, 0.0])
        assert_allclose(nodes[-1], [0.0, 1.0])

    def test_grid_samples_shape_checked(self):
        """Test that grid samples must match N + 1."""
        initial = InitialData.grid_samples(np.zeros((3, 2)))
        with pytest.raises(UsageError):
            initial.evaluate(self.grid)

    def test_brownian_needs_path(self):
        """Test that the Brownian kind needs a drawn path."""
        initial = InitialData.brownian(2)
        assert initial.is_random
        with pytest.raises(UsageError):
            initial.evaluate(self.grid)
        path = np.ones((5, 2))
        assert_allclose(initial.evaluate(self.grid, path), path)

    def test_payload_validation(self):
        """Test an affine datum with a short slope."""
        with pytest.raises(ConfigurationError):
            InitialData(InitialDataKind.AFFINE, d=2, value=(0.0, 1.0), slope=(1.0,))

    def test_reference_initials(self):
        """Test the three segments of the two-dimensional example."""
        xi1, xi2, xi3 = reference_initial_data()
        assert xi1.kind == InitialDataKind.BROWNIAN
        assert xi2.kind == InitialDataKind.AFFINE
        assert xi3.value == (-3.0, 4.0)


class TestParseInitial:
    """Test the spec-string parser."""

    def test_presets(self):
        """Test the preset names."""
        assert parse_initial("xi3", 2).name == "xi3"
        assert parse_initial("zero", 3).value == (0.0, 0.0, 0.0)

    def test_constant_and_affine(self):
        """Test the explicit forms."""
        assert parse_initial("constant:1 2", 2).value == (1.0, 2.0)
        affine = parse_initial("affine:2 1/0 1", 2)
        assert affine.slope == (2.0, 1.0) and affine.value == (0.0, 1.0)

    @pytest.mark.parametrize("spec", ["constant:1", "wave:1 2", "constant:a b"])
    def test_rejects_bad_specs(self, spec):
        """Test wrong dimension, unknown kind and unparsable numbers."""
        with pytest.raises(ConfigurationError):
            parse_initial(spec, 2)

    def test_describe_round_trip(self):
        """Test that describe() is readable by parse_initial."""
        affine = InitialData.affine((2.0, 1.0), (0.0, 1.0))
        assert parse_initial(affine.describe(), 2).slope == affine.slope
