"""Verdict records and CSV/JSON emission."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

RESIDUAL_COLUMNS = ["variant", "N", "residual", "order"]
COMPONENT_COLUMNS = ["variant", "component", "N", "residual", "order"]
KERNEL_COLUMNS = ["i", "j", "x_i", "x_j", "block_row", "block_col", "re", "im"]
POSITIVITY_COLUMNS = ["parameter", "value", "min_eig", "pass"]


@dataclass
class Check:
    name: str
    value: float | None
    threshold: str
    passed: bool
    status: str = ""  # "pass", "fail" or "skip"
    note: str = ""

    def __post_init__(self):
        if not self.status:
            self.status = "pass" if self.passed else "fail"


@dataclass
class SuiteVerdict:
    command: str
    checks: list = field(default_factory=list)
    columns: list = field(default_factory=list)
    table: list = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def status(self) -> str:
        if not self.overall:
            return "fail"
        if self.checks and all(c.status == "skip" for c in self.checks):
            return "skip"
        return "pass"

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def to_dict(self, config: dict | None = None) -> dict:
        return {
            "command": self.command,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "status": self.status,
            "overall": self.overall,
            "checks": [asdict(c) for c in self.checks],
            "columns": self.columns,
            "table": self.table,
            "config": config or {},
        }


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def to_json(verdict: SuiteVerdict, config: dict | None = None) -> str:
    def default(o):
        if isinstance(o, (np.floating, np.integer, np.bool_)):
            return o.item()
        raise TypeError(type(o))

    return json.dumps(verdict.to_dict(config), indent=2, default=default) + "\n"


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if row.get(c) is None else _plain(row.get(c)) for c in columns])
    return buf.getvalue()


def kernel_rows(fac) -> list[dict]:
    """Rows of the factor-kernel table; one per strictly-lower node pair and block entry."""
    x = fac.grid.nodes
    n, m = fac.grid.n, fac.block
    rows = []
    for i in range(n):
        for j in range(i):
            blk = fac.kernel_samples[i, j]
            for a in range(m):
                for b in range(m):
                    rows.append({"i": i, "j": j, "x_i": float(x[i]), "x_j": float(x[j]),
                                 "block_row": a, "block_col": b,
                                 "re": float(blk[a, b].real), "im": float(blk[a, b].imag)})
    return rows
