"""Rendering helpers: CSV/JSON result files and markdown summaries."""

from __future__ import annotations

import io
import json
from importlib.metadata import PackageNotFoundError, version
from typing import Any, Iterable, Optional

import pandas as pd
from pydantic import BaseModel

from .models import AssumptionReport, RobustnessVerdict, WeightPropertyReport

TOOL_NAME = "semivalue-lab"
SCHEMA_VERSION = 1


def tool_version() -> str:
    try:
        return version(TOOL_NAME)
    except PackageNotFoundError:
        return "0.0.0+unknown"


def build_metadata(command: str, seed: Optional[int], config: BaseModel) -> dict[str, Any]:
    """Metadata block carried by every output: tool, versions, seed and config echo."""
    return {
        "tool": TOOL_NAME,
        "version": tool_version(),
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": seed,
        "config": config.model_dump(mode="json", by_alias=True),
    }


def render_response(response_format: str, markdown: str, data: Any) -> str:
    """Return markdown or JSON output depending on the requested format."""
    if response_format == "json":
        return json.dumps(data, indent=2, ensure_ascii=False)
    return markdown


def render_table(rows: list[dict[str, Any]], fmt: str, metadata: dict[str, Any]) -> str:
    """Rows as CSV (metadata in leading ``# key: value`` lines) or as a JSON document."""
    if fmt == "json":
        return render_document({"rows": rows}, metadata)
    header = "".join(
        f"# {key}: {json.dumps(value, sort_keys=True) if isinstance(value, dict) else value}\n"
        for key, value in metadata.items()
    )
    buffer = io.StringIO()
    pd.DataFrame(rows).to_csv(buffer, index=False, lineterminator="\n")
    return header + buffer.getvalue()


def render_document(payload: dict[str, Any], metadata: dict[str, Any]) -> str:
    return json.dumps({"metadata": metadata, **payload}, indent=2, ensure_ascii=False) + "\n"


def read_table(text: str) -> pd.DataFrame:
    """Parse a CSV written by ``render_table``, skipping its metadata lines."""
    return pd.read_csv(io.StringIO(text), comment="#")


# ── Markdown summaries ──────────────────────────────────────────────────────


def _coalition(members: list[int]) -> str:
    return "{" + ", ".join(str(m) for m in members) + "}"


def format_assumption_report(report: AssumptionReport) -> str:
    status = "✅ holds" if report.holds else "❌ violated"
    lines = [f"## {report.assumption}: {status}"]
    w = report.witness
    if w is not None:
        sets = " vs ".join(_coalition(c) for c in w.coalitions)
        lines.append("")
        lines.append(f"- **Player:** {w.player}")
        lines.append(f"- **Coalitions:** {sets}")
        lines.append(f"- **Violated:** `{w.inequality}` with lhs={w.lhs:.6g}, rhs={w.rhs:.6g}")
        lines.append(f"- **Slack:** {w.slack:.6g}")
    return "\n".join(lines)


def format_assumption_reports(reports: Iterable[AssumptionReport], title: str) -> str:
    sections = [f"# {title}\n"]
    sections.extend(format_assumption_report(r) for r in reports)
    return "\n\n".join(sections)


def format_robustness_summary(
    verdicts: list[RobustnessVerdict],
    weight_report: Optional[WeightPropertyReport] = None,
    max_violations: int = 5,
) -> str:
    lines = ["# Replication robustness\n"]
    for v in verdicts:
        status = "robust" if v.robust else f"{len(v.failing)} violation(s)"
        lines.append(f"- **{v.scheme}** [{v.mode.value}] n={v.n}, k<={v.k_max}: {status}")
        for f in v.failing[:max_violations]:
            lines.append(f"  - k={f.k}, p={f.p}: {f.lhs:.6g} < {f.rhs:.6g}")
        if len(v.failing) > max_violations:
            lines.append(f"  - *... {len(v.failing) - max_violations} more*")
    if weight_report is not None:
        lines.append("\n## Shapley replicated weights\n")
        lines.append(f"- **Sum to one:** {weight_report.sums_to_one}")
        lines.append(f"- **Prefix sums grow with k:** {weight_report.prefix_monotone}")
        lines.append(f"- **Diminishing increments:** {weight_report.increments_diminishing}")
        lines.append(f"- **Max violation:** {weight_report.max_abs_violation:.3g}")
    return "\n".join(lines)
