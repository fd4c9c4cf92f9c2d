"""Groupoid cochain calculus in the J-chart."""
