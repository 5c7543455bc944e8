"""Headroom bar for one report criterion, colour coded by margin."""
from __future__ import annotations

import math

from rich.text import Text

from wavelab.experiments.report import Criterion


# Partial cells in eighths: index i draws (i + 1)/8 of a cell.
_EIGHTHS: str = "▏▎▍▌▋▊▉"

# Decades of headroom that fill the whole bar for tolerance-type bounds.
_DECADES_FULL: float = 6.0


def headroom(crit: Criterion) -> float:
    """Signed distance from the bound, on the inside when positive.

    Positive ``<=`` bounds on positive values are measured in decades
    (log10(bound/value)); everything else (slopes, ``>=`` and ``==`` rows) in
    the criterion's own units.
    """
    if not math.isfinite(crit.value):
        return -math.inf
    if crit.relation == "<=":
        if not math.isfinite(crit.bound):
            return math.inf
        if crit.bound > 0 and crit.value > 0:
            return math.log10(crit.bound / crit.value)
        if crit.bound > 0 and crit.value == 0:
            return _DECADES_FULL
        return crit.bound - crit.value
    if crit.relation == ">=":
        return crit.value - crit.bound
    return crit.tol - abs(crit.value - crit.bound)


def _headroom_scale(crit: Criterion) -> float:
    if crit.relation == "<=" and crit.bound > 0 and crit.value >= 0:
        return _DECADES_FULL
    if crit.relation == "==":
        return max(crit.tol, 1e-300)
    return 1.0


def _margin_color(crit: Criterion) -> str:
    """green: comfortably inside; yellow: inside but close; red: outside."""
    if not crit.passed:
        return "red"
    if headroom(crit) >= 0.25 * _headroom_scale(crit):
        return "green"
    return "yellow"


def headroom_ratio(crit: Criterion) -> float:
    """Share of the full scale still inside the bound, in [0, 1]; 0 when failed."""
    if not crit.passed:
        return 0.0
    room = headroom(crit)
    if math.isinf(room):
        return 1.0
    return max(0.0, min(1.0, room / _headroom_scale(crit)))


def _build_bar(crit: Criterion, width: int) -> Text:
    """*width* cells filled in proportion to :func:`headroom_ratio`, to the eighth."""
    full, part = divmod(round(headroom_ratio(crit) * width * 8), 8)
    cells = "█" * full + (_EIGHTHS[part - 1] if part else "")
    return Text(cells.ljust(width), style=f"bold {_margin_color(crit)}")


def tolerance_bar(crit: Criterion, width: int = 12) -> Text:
    """Bar plus a PASS/FAIL label."""
    bar = _build_bar(crit, max(1, width))
    label = " PASS" if crit.passed else " FAIL"
    bar.append(label, style=f"bold {_margin_color(crit)}")
    return bar
