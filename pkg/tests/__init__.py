"""Tests for the manifold flattening simulator."""
