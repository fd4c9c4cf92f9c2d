"""Truncated power series with second-order jet coefficients."""
