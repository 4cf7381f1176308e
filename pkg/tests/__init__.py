"""Test suite for TEMSP."""
