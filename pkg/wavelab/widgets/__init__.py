"""Rich renderables for console reports."""

from wavelab.widgets.report_table import report_table
from wavelab.widgets.tolerance_bar import headroom, headroom_ratio, tolerance_bar

__all__ = ["headroom", "headroom_ratio", "report_table", "tolerance_bar"]
