"""Test suite for the symplectic groupoid lab."""
