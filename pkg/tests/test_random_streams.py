"""Tests for the seeded noise substreams - Contract TEMSP-RNG-001."""

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from src.enums import StreamLabel
from src.exceptions import UsageError
from src.models.grid import Grid
from src.numerics.random_streams import (
    NoiseStream,
    SeedSpec,
    brownian_increments,
    brownian_initial_path,
)


class TestSeedSpec:
    """Test substream addressing."""

    def test_same_address_same_stream(self):
        """Test reproducibility from the address alone."""
        first = brownian_increments(SeedSpec(42, 3), m=2, dt=0.01, count=20)
        assert_array_equal(first, brownian_increments(SeedSpec(42, 3), m=2, dt=0.01, count=20))

    def test_labels_are_independent(self):
        """Test that two labels of one trajectory differ."""
        seed = SeedSpec(42, 3)
        noise = brownian_increments(seed, 2, 0.01, 20)
        initial = brownian_increments(seed.with_label(StreamLabel.INITIAL_DATA), 2, 0.01, 20)
        assert not np.allclose(noise, initial)

    def test_trajectories_are_independent(self):
        """Test that neighbouring trajectory indices differ."""
        a = brownian_increments(SeedSpec(0, 0), 1, 0.01, 100)
        b = brownian_increments(SeedSpec(0, 1), 1, 0.01, 100)
        assert abs(np.corrcoef(a[:, 0], b[:, 0])[0, 1]) < 0.5

    def test_large_master_seed(self):
        """Test that seeds beyond 64 bits are masked."""
        assert_array_equal(
            brownian_increments(SeedSpec(2**64 + 5), 1, 0.1, 4),
            brownian_increments(SeedSpec(5), 1, 0.1, 4),
        )

    def test_negative_index(self):
        """Test the index precondition."""
        with pytest.raises(UsageError):
            SeedSpec(0, -1)


class TestNoiseStream:
    """Test sequential drawing."""

    def test_chunked_draws_match_single_draw(self):
        """Test that block boundaries do not change the sequence."""
        stream = NoiseStream(SeedSpec(9, 1), m=2, dt=0.01)
        chunks = np.concatenate([stream.draw(7), stream.draw(0), stream.draw(13)])
        assert_array_equal(chunks, brownian_increments(SeedSpec(9, 1), 2, 0.01, 20))

    def test_increment_moments(self):
        """Test mean and variance of 10^6 increments at dt = 0.01."""
        sample = brownian_increments(SeedSpec(2024), m=1, dt=0.01, count=1_000_000)[:, 0]
        assert abs(sample.mean()) <= 4e-4
        assert sample.var() == pytest.approx(0.01, rel=0.01)

    def test_rejects_bad_arguments(self):
        """Test dt and count preconditions."""
        with pytest.raises(UsageError):
            NoiseStream(SeedSpec(0), 1, 0.0)
        with pytest.raises(UsageError):
            NoiseStream(SeedSpec(0), 1, 0.1).draw(-1)


class TestBrownianInitialPath:
    """Test the reversed Brownian initial segment."""

    def test_path_ends_at_zero(self):
        """Test xi(0) = B(0) = 0 and the node count."""
        grid = Grid(tau=1.0, N=100)
        path = brownian_initial_path(SeedSpec(1, 4), 2, grid)
        assert path.shape == (101, 2)
        assert_array_equal(path[-1], np.zeros(2))
        assert not np.allclose(path[0], 0.0)

    def test_path_uses_initial_data_stream(self):
        """Test that the path does not consume scheme noise."""
        grid = Grid(tau=1.0, N=10)
        path = brownian_initial_path(SeedSpec(1, 4), 1, grid)
        increments = brownian_increments(SeedSpec(1, 4, StreamLabel.INITIAL_DATA), 1, 0.1, 10)
        assert_array_equal(path[::-1][1:], np.cumsum(increments, axis=0))
