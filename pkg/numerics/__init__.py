"""Shared numerical helpers: errors, Newton solves and finite differences."""
