from __future__ import annotations

from typing import Dict, List, Sequence

from textual.widgets import DataTable

from .harness import CURVE_COLUMNS, GRID_COLUMNS

# Column widths per result kind
_WIDTHS = {"n": 6, "tau": 12, "alpha": 8, "algorithm": 14, "iteration": 9, "trials": 7}


class ResultTable(DataTable):
    """Rows of an emitted grid or convergence file; success rates colored like pass/fail."""

    def __init__(self, kind: str = "grid"):
        super().__init__()
        self.kind = kind
        self.columns_order = GRID_COLUMNS if kind == "grid" else CURVE_COLUMNS
        self.row_data: Dict[object, Dict[str, str]] = {}
        for name in self.columns_order:
            self.add_column(name, width=_WIDTHS.get(name, 16), key=name)

    def show_rows(self, rows: Sequence[Dict[str, str]]) -> List[object]:
        self.clear()
        self.row_data.clear()
        keys = []
        for row in rows:
            cells = [self._cell(name, row.get(name, "")) for name in self.columns_order]
            key = self.add_row(*cells)
            self.row_data[key] = dict(row)
            keys.append(key)
        return keys

    def _cell(self, name: str, raw: str) -> str:
        text = _short(raw)
        if name != "success_rate":
            return text
        try:
            rate = float(raw)
        except ValueError:
            return text
        color = "green" if rate >= 0.9 else "yellow" if rate > 0.1 else "red"
        return f"[{color}]{text}[/{color}]"


def _short(raw: str) -> str:
    try:
        return format(float(raw), ".6g") if any(c in raw for c in ".eE") else raw
    except ValueError:
        return raw
