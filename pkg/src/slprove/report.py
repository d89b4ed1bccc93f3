"""Per-query run reports and their text/JSON renderings."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from .engine import ProofTree, render_tree

VALID, UNKNOWN, TIMEOUT = "Valid", "Unknown", "Timeout"

# oracle statuses
NO_COUNTER_MODEL = "no counter-model"
VIOLATION = "SOUNDNESS VIOLATION"
REFUTED = "refuted within bounds"
NOT_REFUTED = "not refuted"


@dataclass
class OracleCheck:
    bounds: str
    status: str
    counter_model: dict | None = None
    counter_model_text: str | None = None


@dataclass
class RunReport:
    file: str
    name: str
    verdict: str
    wall_ms: int
    mode: str
    entailment: str
    rule_counts: dict = field(default_factory=dict)
    attempts: dict = field(default_factory=dict)
    nodes_explored: int = 0
    hypotheses_recorded: int = 0
    hypotheses_applied: int = 0
    oracle: OracleCheck | None = None
    tree: dict | None = None
    tree_text: str | None = None

    @property
    def violation(self) -> bool:
        return self.oracle is not None and self.oracle.status == VIOLATION

    def to_json(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in REPORT_KEYS}

    @classmethod
    def from_json(cls, d: dict) -> "RunReport":
        d = dict(d)
        if d.get("oracle") is not None:
            d["oracle"] = OracleCheck(**d["oracle"])
        return cls(**d)


REPORT_KEYS = tuple(f.name for f in fields(RunReport))


def tree_counts(t: ProofTree | None) -> dict:
    return t.rule_counts() if t is not None else {}


def tree_payload(t: ProofTree) -> tuple[dict, str]:
    return json.loads(render_tree(t, "json")), render_tree(t, "text")


def emit_report(reports: list[RunReport], fmt: str = "text", trace: bool = False) -> str:
    if fmt == "json":
        out = []
        for r in reports:
            d = r.to_json()
            if not trace:
                d["tree"] = d["tree_text"] = None
            out.append(d)
        return json.dumps(out, indent=2)
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    return _table(reports, trace)


def parse_report(text: str) -> list[RunReport]:
    return [RunReport.from_json(d) for d in json.loads(text)]


def _table(reports: list[RunReport], trace: bool) -> str:
    if not reports:
        return ""
    rows = [("name", "verdict", "ms", "rules", "hypo", "oracle")]
    for r in reports:
        rows.append((
            r.name, r.verdict, str(r.wall_ms), str(sum(r.rule_counts.values())),
            str(r.hypotheses_applied), r.oracle.status if r.oracle else "-",
        ))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
    for r in reports:
        if r.oracle and r.oracle.counter_model_text:
            lines.append(f"{r.name}: {r.oracle.status} ({r.oracle.bounds}): {r.oracle.counter_model_text}")
    if trace:
        for r in reports:
            if r.tree_text:
                lines.append("")
                lines.append(f"== {r.name} ==")
                lines.append(r.tree_text)
    return "\n".join(lines)


def summary(reports: list[RunReport]) -> str:
    """Pass counts per input file."""
    per: dict = {}
    for r in reports:
        n, m = per.get(r.file, (0, 0))
        per[r.file] = (n + (r.verdict == VALID), m + 1)
    width = max((len(f) for f in per), default=0)
    lines = [f"{f.ljust(width)}  proved {n} / total {m}" for f, (n, m) in per.items()]
    if len(per) > 1:
        n = sum(v[0] for v in per.values())
        m = sum(v[1] for v in per.values())
        lines.append(f"{'all'.ljust(width)}  proved {n} / total {m}")
    return "\n".join(lines)
