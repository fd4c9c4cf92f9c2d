"""Coordinate Poisson structures and Lie algebra data."""
