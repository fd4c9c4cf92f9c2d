"""Integration tests for the sgalab command line."""
import io
import json
import logging
import os
from unittest.mock import patch

import numpy as np
import pytest

from numerics.errors import ConfigError
from sgalab import (
    EXIT_ERROR,
    EXIT_FAIL,
    EXIT_PASS,
    JsonFormatter,
    main,
    parse_vector,
    setup_logging,
)

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")


@pytest.fixture
def mock_env():
    """Set up environment variables for testing."""
    env_vars = {
        'SGALAB_LOG_LEVEL': 'INFO',
        'SGALAB_THREADS': '2'
    }
    with patch.dict(os.environ, env_vars):
        yield env_vars


def without_wall_time(text):
    """Parse json-lines output and drop the timing field."""
    rows = [json.loads(line) for line in text.splitlines() if line.strip()]
    for row in rows:
        row.pop("wall_time", None)
    return rows


class TestParseVector:
    """Test cases for vector flags."""

    def test_parses_numbers(self):
        """Test a comma-separated vector."""
        assert parse_vector("0.1,-2,3e-1", "--x") == pytest.approx(np.array([0.1, -2.0, 0.3]))

    def test_rejects_text(self):
        """Test that non-numbers raise ConfigError naming the flag."""
        with pytest.raises(ConfigError, match="--p1"):
            parse_vector("0.1,a", "--p1")


class TestMain:
    """Test cases for verbs and exit codes."""

    def test_gamma_at_origin(self, mock_env, capsys):
        """Test that gamma_S(0, 0, x) is 1 and the F_K ratio is reported."""
        code = main(["gamma", "--lie", "so3", "--p1", "0,0,0", "--p2", "0,0,0",
                     "--x", "0.3,0.1,-0.2", "--format", "jsonl"])

        record = json.loads(capsys.readouterr().out)
        assert code == EXIT_PASS
        assert record["structure"] == "so3"
        assert record["gamma_S"] == pytest.approx(1.0)
        assert record["F_K_ratio"] == pytest.approx(1.0)

    def test_gamma_needs_structure(self, mock_env, capsys):
        """Test that a missing structure is a configuration error."""
        code = main(["gamma", "--p1", "0", "--p2", "0", "--x", "0"])

        assert code == EXIT_ERROR
        assert "needs --pi or --lie" in capsys.readouterr().err

    def test_bad_vector_is_exit_2(self, mock_env, capsys):
        """Test that a malformed vector flag exits with 2."""
        code = main(["gamma", "--lie", "so3", "--p1", "x", "--p2", "0,0,0", "--x", "0,0,0"])

        assert code == EXIT_ERROR
        assert "--p1" in capsys.readouterr().err

    def test_unknown_suite_is_exit_2(self, mock_env, capsys):
        """Test that an unknown suite name exits with 2."""
        assert main(["suite", "bogus"]) == EXIT_ERROR
        assert "unknown suite" in capsys.readouterr().err

    def test_order_beyond_the_bch_limit_is_exit_2(self, mock_env, capsys):
        """Test that --order above the supported maximum is a configuration error."""
        code = main(["gamma", "--lie", "so3", "--order", "12", "--p1", "0.1,0,0",
                     "--p2", "0,0.1,0", "--x", "0.3,0.2,-0.1"])

        assert code == EXIT_ERROR
        assert "--order must be within 1..10" in capsys.readouterr().err

    def test_vector_of_wrong_length_is_exit_2(self, mock_env, capsys):
        """Test that a covector with the wrong number of components is rejected."""
        code = main(["gamma", "--lie", "so3", "--p1", "0.1,0", "--p2", "0,0.1,0",
                     "--x", "0.3,0.2,-0.1"])

        assert code == EXIT_ERROR
        assert "--p1 has 2 components" in capsys.readouterr().err

    def test_nonpositive_samples_is_exit_2(self, mock_env, capsys):
        """Test that --samples 0 is rejected before any check runs."""
        assert main(["check-sga", "--pi", "constant", "--samples", "0"]) == EXIT_ERROR
        assert "--samples" in capsys.readouterr().err

    def test_bad_thread_count_is_exit_2(self, capsys):
        """Test that a non-integer SGALAB_THREADS is a configuration error."""
        with patch.dict(os.environ, {'SGALAB_THREADS': 'many'}):
            code = main(["suite", "densities"])

        assert code == EXIT_ERROR
        assert "SGALAB_THREADS" in capsys.readouterr().err

    def test_duflo_needs_lie(self, mock_env, capsys):
        """Test that duflo on a non-linear structure is rejected."""
        assert main(["duflo", "--pi", "quadratic"]) == EXIT_ERROR

    def test_check_sga_passes(self, mock_env, capsys):
        """Test check-sga on the constant structure."""
        code = main(["check-sga", "--pi", "constant", "--samples", "3"])

        out = capsys.readouterr().out
        assert code == EXIT_PASS
        assert "checks passed" in out
        assert "FAIL" not in out

    def test_broken_config_fails(self, mock_env, capsys):
        """Test that a perturbed generating function fails check-sga."""
        path = os.path.join(CONFIG_DIR, "broken.json")

        code = main(["check-sga", "--lie", f"file:{path}", "--samples", "5",
                     "--format", "jsonl"])

        rows = without_wall_time(capsys.readouterr().out)
        sga = [r for r in rows if r["type"] == "summary" and r["check"] == "sga"]
        assert code == EXIT_FAIL
        assert sga[0]["pass"] is False
        assert sga[0]["max_residual"] > sga[0]["tolerance"]

    def test_expand_s(self, mock_env, capsys):
        """Test the coefficient listing of the constant structure."""
        code = main(["expand-s", "--pi", "constant", "--order", "3", "--format", "jsonl"])

        rows = without_wall_time(capsys.readouterr().out)
        assert code == EXIT_PASS
        assert rows

    def test_jsonl_is_deterministic(self, mock_env, capsys):
        """Test that two runs with one seed agree apart from timing."""
        args = ["suite", "densities", "--seed", "5", "--format", "jsonl"]

        assert main(args) == EXIT_PASS
        first = without_wall_time(capsys.readouterr().out)
        assert main(args) == EXIT_PASS
        second = without_wall_time(capsys.readouterr().out)

        assert first == second
        assert sum(1 for r in first if r["type"] == "summary") == 4

    def test_out_and_report(self, mock_env, tmp_path, capsys):
        """Test writing a report to a file and re-reading it."""
        path = tmp_path / "run.jsonl"

        code = main(["split-assoc", "--lie", "h3", "--samples", "3",
                     "--format", "jsonl", "--out", str(path)])
        assert code == EXIT_PASS
        assert capsys.readouterr().out == ""

        assert main(["report", str(path)]) == EXIT_PASS
        table = capsys.readouterr().out
        assert "split_assoc_broken" in table
        assert "3/3 checks passed" in table

    def test_report_on_invalid_file(self, mock_env, tmp_path, capsys):
        """Test that a corrupt report exits with 2 and a position."""
        path = tmp_path / "bad.jsonl"
        path.write_text('{"check": "sga"}\n{oops\n')

        assert main(["report", str(path)]) == EXIT_ERROR
        assert "line 2" in capsys.readouterr().err

    def test_report_on_failing_rows(self, mock_env, tmp_path, capsys):
        """Test that a report with a failing summary exits with 1."""
        rows = [
            {"type": "record", "check": "sga", "structure": "x", "identity": "i",
             "sample": 0, "inputs": {}, "residual": 1.0, "pass": False},
            {"type": "summary", "check": "sga", "structure": "x", "identity": "i",
             "tolerance": 1e-8, "order": 4, "expect_failure": False},
        ]
        path = tmp_path / "fail.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")

        assert main(["report", str(path)]) == EXIT_FAIL
        assert "0/1 checks passed" in capsys.readouterr().out


class TestJsonLogging:
    """Test cases for the JSON-lines log handler."""

    def test_extra_fields_are_kept(self):
        """Test that fields passed through extra appear in the JSON object."""
        record = logging.makeLogRecord({
            'name': 'reporting.suites', 'levelname': 'WARNING', 'msg': 'sga sample %d failed',
            'args': (3,), 'check': 'sga', 'error_type': 'OutsideLocalDomainError',
        })

        entry = json.loads(JsonFormatter().format(record))

        assert entry['message'] == 'sga sample 3 failed'
        assert entry['level'] == 'WARNING'
        assert entry['check'] == 'sga'
        assert entry['error_type'] == 'OutsideLocalDomainError'
        assert 'args' not in entry

    def test_setup_logging_writes_json_lines(self):
        """Test that records reach the given stream as one JSON object per line."""
        stream = io.StringIO()
        setup_logging('INFO', stream)

        logging.getLogger('sgalab.test').info("ready", extra={'verb': 'suite'})

        entry = json.loads(stream.getvalue().splitlines()[-1])
        assert entry['logger'] == 'sgalab.test'
        assert entry['verb'] == 'suite'

    def test_unknown_level_falls_back_to_warning(self):
        """Test that an unknown level name leaves WARNING in place."""
        setup_logging('LOUD', io.StringIO())

        assert logging.getLogger().level == logging.WARNING
