"""Rich table rendering of an experiment report."""
from __future__ import annotations

import math
from typing import Sequence

from rich.table import Table
from rich.text import Text

from wavelab.experiments.report import Criterion, Report
from wavelab.widgets.tolerance_bar import tolerance_bar


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    if not math.isfinite(x):
        return str(x)
    if x == 0 or 1e-3 <= abs(x) < 1e4:
        return f"{x:.4g}"
    return f"{x:.3e}"


def _bound_text(crit: Criterion) -> str:
    if crit.relation == "==":
        return f"{_fmt(crit.bound)} ± {_fmt(crit.tol)}"
    return f"{crit.relation} {_fmt(crit.bound)}"


def _styled_verdict(report: Report) -> Text:
    failed = sum(not c.passed for c in report.criteria)
    if failed == 0:
        return Text(f"{report.command}: all {len(report.criteria)} criteria pass", style="bold green")
    return Text(f"{report.command}: {failed} of {len(report.criteria)} criteria fail", style="bold red")


# ---------------------------------------------------------------------------
# ReportTable
# ---------------------------------------------------------------------------

def report_table(report: Report, only_failed: bool = False, bar_width: int = 12) -> Table:
    """Table with columns Criterion | Value | Bound | Headroom.

    ``only_failed`` keeps the failing rows only, for long sweeps.
    """
    table = Table(title=_styled_verdict(report), header_style="bold", expand=False)
    table.add_column("Criterion", style="cyan", no_wrap=True)
    table.add_column("Value", justify="right")
    table.add_column("Bound", justify="right")
    table.add_column("Headroom", no_wrap=True)
    rows: Sequence[Criterion] = report.criteria
    if only_failed:
        rows = [c for c in rows if not c.passed]
    for crit in rows:
        name = Text(crit.name)
        if crit.note:
            name.append(f"  {crit.note}", style="dim")
        table.add_row(name, _fmt(crit.value), _bound_text(crit), tolerance_bar(crit, bar_width))
    return table
