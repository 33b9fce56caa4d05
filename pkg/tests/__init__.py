"""Tests for fou-periodic."""
