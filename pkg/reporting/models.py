"""Data models for run configuration and check reports."""
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class RunConfig:
    """Settings of one CLI run, built from the command-line flags."""
    pi_spec: Optional[str] = None
    lie_spec: Optional[str] = None
    order: Optional[int] = None
    p_max: float = 0.25
    a_max: float = 0.5
    samples: int = 50
    seed: int = 1
    tol: Optional[float] = None
    output_format: str = "table"
    out: Optional[str] = None
    threads: int = 1

    @property
    def has_structure(self) -> bool:
        return self.pi_spec is not None or self.lie_spec is not None


@dataclass
class SampleRecord:
    """One evaluated sample of a check."""
    index: int
    inputs: Dict[str, Any]
    residual: float
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        record = {
            "sample": self.index,
            "inputs": self.inputs,
            "residual": self.residual,
            "pass": self.passed,
        }
        if self.details:
            record["details"] = self.details
        if self.error is not None:
            record["error"] = self.error
        return record


@dataclass
class CheckReport:
    """
    Records of one check on one structure.

    identity names the relation being verified; tolerance is the bound a
    record's residual was compared against.
    """
    check: str
    structure: str
    identity: str
    tolerance: float
    order: Optional[int] = None
    records: List[SampleRecord] = field(default_factory=list)
    wall_time: float = 0.0
    expect_failure: bool = False

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.records), default=0.0)

    @property
    def passed(self) -> bool:
        if self.expect_failure and not self.records:
            return False
        # a negative-control record passes only when it shows the planted defect
        return all(r.passed for r in self.records)

    def summary(self) -> Dict[str, Any]:
        return {
            "type": "summary",
            "check": self.check,
            "structure": self.structure,
            "identity": self.identity,
            "tolerance": self.tolerance,
            "order": self.order,
            "expect_failure": self.expect_failure,
            "samples": len(self.records),
            "failed": sum(1 for r in self.records if not r.passed),
            "max_residual": self.max_residual,
            "pass": self.passed,
            "wall_time": round(self.wall_time, 4),
        }

    def jsonl_lines(self) -> List[str]:
        """One json object per record, then the summary."""
        head = {"check": self.check, "structure": self.structure, "identity": self.identity}
        lines = [
            json.dumps({"type": "record", **head, **r.to_dict()}, sort_keys=True)
            for r in self.records
        ]
        lines.append(json.dumps(self.summary(), sort_keys=True))
        return lines

    @classmethod
    def from_dicts(cls, rows: List[Dict[str, Any]]) -> List['CheckReport']:
        """Rebuild reports from parsed json-lines rows, in file order."""
        reports: Dict[tuple, CheckReport] = {}
        for row in rows:
            key = (row["check"], row["structure"], row["identity"])
            if key not in reports:
                reports[key] = cls(row["check"], row["structure"], row["identity"], 0.0)
            report = reports[key]
            if row.get("type") == "summary":
                report.tolerance = row["tolerance"]
                report.order = row.get("order")
                report.wall_time = row.get("wall_time", 0.0)
                report.expect_failure = row.get("expect_failure", False)
            else:
                report.records.append(SampleRecord(
                    index=row["sample"],
                    inputs=row.get("inputs", {}),
                    residual=row["residual"],
                    passed=row["pass"],
                    details=row.get("details", {}),
                    error=row.get("error"),
                ))
        return list(reports.values())
