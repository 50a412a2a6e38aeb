"""Audit report rows and deterministic CSV output."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

# audits of proved statements: a "violated" verdict there means a bug
PROVED_AUDITS = {"scaling", "certificate", "kz-direction", "cramer", "polarization", "slice-identity"}


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return format(x, ".12g")
    if isinstance(x, (dict, list, tuple)):
        return json.dumps(x, sort_keys=True, default=str)
    return str(x)


@dataclass
class AuditReport:
    audit: str
    instance_id: str
    lhs: object
    rhs: object
    verdict: str
    constants: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)

    @property
    def violated(self) -> bool:
        return self.verdict == "violated"

    @property
    def proved_failure(self) -> bool:
        return self.violated and self.audit in PROVED_AUDITS

    def row(self) -> dict:
        return {"instance_id": self.instance_id, "audit": self.audit, "lhs": fmt(self.lhs),
                "rhs": fmt(self.rhs), "verdict": self.verdict, "constants": fmt(self.constants),
                "witness": fmt(self.witness)}


def write_csv(rows, out=None) -> str:
    """Rows are dicts or AuditReports; columns in first-seen order."""
    rows = [r.row() if isinstance(r, AuditReport) else {k: fmt(v) for k, v in r.items()} for r in rows]
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", newline="") as fh:
                fh.write(text)
    return text
