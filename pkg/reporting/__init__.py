"""Run configuration, check reports and the verification suites."""
