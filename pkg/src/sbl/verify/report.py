"""Verification records, the report container and its text/JSON emitters."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

PASS, FAIL, MISMATCH = "pass", "fail", "mismatch"


@dataclass(frozen=True)
class IdentityRecord:
    id: str
    anchor: str
    suite: str
    samples: int
    residual: float
    tol: float
    status: str
    detail: dict = field(default_factory=dict)


def judge(residual: float, tol: float, finding: bool = False) -> str:
    """``finding`` marks a printed identity already known to disagree with computation."""
    if math.isfinite(residual) and residual <= tol:
        return PASS
    return MISMATCH if finding else FAIL


def _clean(v):
    if isinstance(v, float):
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "tolist"):
        return _clean(v.tolist())
    return v


@dataclass
class VerificationReport:
    config: dict
    records: list = field(default_factory=list)

    def add(self, rec: IdentityRecord) -> None:
        if any(r.id == rec.id for r in self.records):
            raise ValueError(f"duplicate identity id {rec.id}")
        self.records.append(rec)

    def sorted_records(self) -> list:
        return sorted(self.records, key=lambda r: r.id)

    @property
    def summary(self) -> dict:
        st = [r.status for r in self.records]
        return {
            "total": len(st),
            "passed": st.count(PASS),
            "failures": st.count(FAIL),
            "mismatches": st.count(MISMATCH),
        }

    @property
    def exit_code(self) -> int:
        return 0 if self.summary["failures"] == 0 else 1

    def record(self, rid: str) -> IdentityRecord:
        for r in self.records:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def to_dict(self) -> dict:
        return _clean(
            {"config": self.config, "records": [asdict(r) for r in self.sorted_records()], "summary": self.summary}
        )

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        recs = [IdentityRecord(**r) for r in data["records"]]
        return cls(config=data["config"], records=recs)


def to_json(report: VerificationReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def from_json(text: str) -> VerificationReport:
    return VerificationReport.from_dict(json.loads(text))


def to_text(report: VerificationReport) -> str:
    recs = report.sorted_records()
    w = max([len(r.id) for r in recs] + [8])
    lines = [f"{'identity':<{w}}  {'status':<8}  {'residual':>10}  {'tol':>8}  anchor"]
    for r in recs:
        lines.append(f"{r.id:<{w}}  {r.status:<8}  {r.residual:10.3e}  {r.tol:8.1e}  {r.anchor}")
    s = report.summary
    lines.append(
        f"{s['total']} identities: {s['passed']} passed, {s['failures']} failed, {s['mismatches']} mismatch (reported findings)"
    )
    return "\n".join(lines) + "\n"


def emit_report(report: VerificationReport, fmt: str = "text", out: str | None = None) -> str:
    if fmt == "json":
        text = to_json(report)
    elif fmt == "text":
        text = to_text(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
