"""Unit tests for check reports, the sample runner and the suites."""
import json

import numpy as np
import pytest

from numerics.errors import OutsideLocalDomainError, UnknownSuiteError
from poisson.config import resolve_structure
from reporting.models import CheckReport, RunConfig, SampleRecord
from reporting.suites import (
    BROKEN_MIN,
    density_reports,
    duflo_reports,
    killing_form,
    run_samples,
    run_suite,
    solver_reports,
    split_reports,
    star_reports,
    vanest_classifier_report,
)


@pytest.fixture
def small_config():
    """Run configuration with few samples."""
    return RunConfig(samples=4, seed=3)


def make_report(residuals, tolerance=1e-6, expect_failure=False):
    """Build a report whose records have the given residuals."""
    report = CheckReport("sample_check", "so3", "sample identity", tolerance, expect_failure=expect_failure)
    for i, residual in enumerate(residuals):
        passed = residual > tolerance if expect_failure else residual <= tolerance
        report.records.append(SampleRecord(i, {"i": i}, residual, passed))
    return report


class TestSampleRecord:
    """Test cases for SampleRecord serialization."""

    def test_to_dict_minimal(self):
        """Test that empty details and error are omitted."""
        record = SampleRecord(3, {"p": [0.1]}, 1e-12, True)

        assert record.to_dict() == {
            "sample": 3, "inputs": {"p": [0.1]}, "residual": 1e-12, "pass": True,
        }

    def test_to_dict_with_details_and_error(self):
        """Test that details and error are kept when set."""
        record = SampleRecord(0, {}, float("inf"), False, {"order": 4}, "outside local domain")

        data = record.to_dict()

        assert data["details"] == {"order": 4}
        assert data["error"] == "outside local domain"


class TestCheckReport:
    """Test cases for report verdicts and json-lines output."""

    def test_passes_when_all_records_pass(self):
        """Test an ordinary passing report."""
        report = make_report([1e-9, 1e-8])

        assert report.passed
        assert report.max_residual == pytest.approx(1e-8)

    def test_fails_on_one_bad_record(self):
        """Test that one residual above tolerance fails the report."""
        assert not make_report([1e-9, 1e-3]).passed

    def test_empty_report(self):
        """Test the verdict of a report without records."""
        assert make_report([]).passed
        assert make_report([], expect_failure=True).passed is False

    def test_negative_control_needs_a_large_residual(self):
        """Test that a negative control passes only when every sample shows the defect."""
        assert make_report([2e-3, 5e-2], tolerance=1e-3, expect_failure=True).passed
        assert not make_report([1e-9, 1e-5], tolerance=1e-3, expect_failure=True).passed

    def test_one_undetected_sample_fails_a_negative_control(self):
        """Test that a single large residual does not carry a control."""
        assert not make_report([1e-9, 5e-2], tolerance=1e-3, expect_failure=True).passed

    def test_negative_control_fails_on_errors(self):
        """Test that an errored sample fails a negative control."""
        report = make_report([5e-2], tolerance=1e-3, expect_failure=True)
        report.records.append(SampleRecord(1, {}, float("inf"), False, error="boom"))

        assert not report.passed

    def test_summary_counts(self):
        """Test the summary line fields."""
        summary = make_report([1e-9, 1e-3]).summary()

        assert summary["type"] == "summary"
        assert summary["samples"] == 2
        assert summary["failed"] == 1
        assert summary["pass"] is False

    def test_jsonl_lines_are_sorted_objects(self):
        """Test one record line per sample plus the summary."""
        lines = make_report([1e-9, 1e-8]).jsonl_lines()
        rows = [json.loads(line) for line in lines]

        assert len(rows) == 3
        assert [r["type"] for r in rows] == ["record", "record", "summary"]
        assert rows[0]["check"] == "sample_check"
        assert list(rows[0].keys()) == sorted(rows[0].keys())

    def test_from_dicts_rebuilds_reports(self):
        """Test re-reading json-lines rows."""
        original = [make_report([1e-9, 1e-3]),
                    make_report([5e-2], tolerance=1e-3, expect_failure=True)]
        original[1].check = "sample_control"
        rows = [json.loads(line) for report in original for line in report.jsonl_lines()]

        reports = CheckReport.from_dicts(rows)

        assert [r.check for r in reports] == ["sample_check", "sample_control"]
        assert [r.passed for r in reports] == [False, True]
        assert reports[0].tolerance == pytest.approx(1e-6)
        assert reports[1].expect_failure
        assert [r.index for r in reports[0].records] == [0, 1]


class TestRunSamples:
    """Test cases for the threaded sample runner."""

    def test_errors_become_failed_records(self):
        """Test that domain errors are recorded instead of raised."""
        def evaluate(sample):
            if sample["v"] < 0:
                raise OutsideLocalDomainError()
            return 0.0, {}

        report = run_samples(CheckReport("c", "s", "i", 1e-6), [{"v": 1}, {"v": -1}], evaluate)

        assert report.records[0].passed
        assert report.records[1].residual == float("inf")
        assert report.records[1].error == "outside local domain"
        assert not report.passed

    def test_payload_keys_are_not_recorded(self):
        """Test that underscore keys stay out of the inputs."""
        report = run_samples(CheckReport("c", "s", "i", 1.0),
                             [{"n": 2, "_matrix": object()}], lambda s: (0.0, {}))

        assert report.records[0].inputs == {"n": 2}

    def test_threads_keep_sample_order(self):
        """Test that records are ordered by index with several workers."""
        samples = [{"v": float(i)} for i in range(16)]

        report = run_samples(CheckReport("c", "s", "i", 100.0), samples,
                             lambda s: (s["v"], {}), threads=4)

        assert [r.index for r in report.records] == list(range(16))
        assert [r.residual for r in report.records] == [float(i) for i in range(16)]

    def test_expect_failure_record_verdicts(self):
        """Test that negative-control records pass above tolerance."""
        report = run_samples(CheckReport("c", "s", "i", 1e-3, expect_failure=True),
                             [{"v": 1e-2}, {"v": 1e-5}], lambda s: (s["v"], {}))

        assert [r.passed for r in report.records] == [True, False]
        assert not report.passed


class TestSuites:
    """Test cases for the named suites."""

    def test_unknown_suite(self, small_config):
        """Test that an unknown suite name raises UnknownSuiteError."""
        with pytest.raises(UnknownSuiteError, match="bogus"):
            run_suite("bogus", small_config)

    def test_density_reports_pass(self, small_config):
        """Test that the alpha-density checks pass."""
        reports = density_reports(small_config)

        assert [r.check for r in reports] == [
            "density_scaling", "liouville_normalization",
            "quotient_complement", "composition_associativity",
        ]
        assert all(r.passed for r in reports)

    def test_vanest_classifier(self, small_config):
        """Test that the symmetry classifier separates its two cochains."""
        report = vanest_classifier_report(small_config)

        assert report.passed
        assert len(report.records) == 2

    def test_split_reports_on_so3(self, small_config):
        """Test split and direct associativity plus the broken control."""
        reports = split_reports(resolve_structure(lie_spec="so3"), small_config)

        assert [r.check for r in reports] == ["split_assoc", "direct_assoc", "split_assoc_broken"]
        assert all(r.passed for r in reports)
        assert reports[2].expect_failure

    def test_sga_suite_for_one_structure(self, small_config):
        """Test the sga suite restricted to the constant structure."""
        small_config.pi_spec = "constant"

        reports = run_suite("sga", small_config)

        assert {r.check for r in reports} >= {"sga", "multiply_associativity", "amplitude"}
        assert all(r.structure == "constant" for r in reports)
        assert all(r.passed for r in reports)

    def test_split_suite_skips_non_lie_structure(self, small_config):
        """Test that Lie-only suites are empty for a quadratic structure."""
        small_config.pi_spec = "quadratic"

        assert run_suite("split", small_config) == []

    def test_split_control_samples_differ(self, small_config):
        """Test that every broken-factor sample is caught with its own residual."""
        control = split_reports(resolve_structure(lie_spec="h3"), small_config)[2]

        residuals = [r.residual for r in control.records]
        assert all(r > BROKEN_MIN for r in residuals)
        assert len(set(residuals)) == len(residuals)

    @pytest.mark.parametrize("name", ["so3", "sl2", "aff1"])
    def test_gutt_control_on_each_algebra(self, small_config, name):
        """Test that F_G misses gamma_S on every sample, with varied residuals."""
        reports = duflo_reports(resolve_structure(lie_spec=name), small_config)

        assert [r.check for r in reports] == ["duflo", "duflo_gutt_control"]
        assert all(r.passed for r in reports)
        residuals = [r.residual for r in reports[1].records]
        assert min(residuals) > BROKEN_MIN
        assert max(residuals) - min(residuals) > 1e-6

    def test_no_gutt_control_for_a_nilpotent_algebra(self, small_config):
        """Test that h3, whose Killing form vanishes, gets only the duflo check."""
        reports = duflo_reports(resolve_structure(lie_spec="h3"), small_config)

        assert [r.check for r in reports] == ["duflo"]

    def test_killing_form(self):
        """Test the Killing forms of so3 and sl2."""
        so3 = resolve_structure(lie_spec="so3").lie
        sl2 = resolve_structure(lie_spec="sl2").lie

        assert killing_form(so3) == pytest.approx(-2.0 * np.eye(3))
        assert killing_form(sl2) == pytest.approx(np.array([[8.0, 0, 0], [0, 0, 4.0], [0, 4.0, 0]]))

    def test_star_reports_on_sl2(self, small_config):
        """Test that sl2 star samples stay inside the matrix-function guard."""
        reports = star_reports(resolve_structure(lie_spec="sl2"), small_config)

        assert all(r.passed for r in reports)
        assert all(r.error is None for report in reports for r in report.records)

    def test_heisenberg_primitive_is_zero(self, small_config):
        """Test the graded solve on the sampled ln gamma_S of h3."""
        reports = {r.check: r for r in solver_reports(small_config)}

        assert reports["coboundary_heisenberg"].passed
        assert reports["coboundary_graded"].passed
