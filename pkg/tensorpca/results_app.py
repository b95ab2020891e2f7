from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional

from textual.app import App, ComposeResult
from textual.containers import Horizontal, Vertical
from textual.reactive import reactive
from textual.widgets import DataTable, Footer, Header, Select, Static

from .harness import load_results
from .plugins_loader import available_plugins, build_algorithm_options
from .results_table import ResultTable

logger = logging.getLogger(__name__)

ALL_ALGORITHMS = "*"


class ResultsApp(App):
    """Browse a grid or convergence result file emitted by `tpca grid` / `tpca converge`."""

    CSS = """
    Screen {layout: vertical;}
    #controls {border: round yellow; padding: 0 1; height: auto;}
    #topinfo {height: 9; min-height: 3;}
    #status {padding: 1; height: 3;}
    #details {border: round yellow; padding: 1; width: 1fr; height: 1fr; overflow: auto;}
    #table {border: round green; padding: 1; height: 1fr;}
    """
    BINDINGS = [("q", "quit", "Quit")]
    status_text: reactive[str] = reactive("")

    def __init__(self, path: Path, kind: Optional[str] = None, rows: Optional[List[Dict[str, str]]] = None):
        super().__init__()
        self.path = Path(path)
        if rows is None:
            kind, rows = load_results(self.path)
        self.kind = kind or "grid"
        self.rows = rows
        self.algorithm_filter = ALL_ALGORITHMS
        logger.info("[startup] Viewing %d %s rows from %s", len(rows), self.kind, self.path)

    def algorithm_options(self) -> List[tuple]:
        present = sorted({r.get("algorithm", "") for r in self.rows})
        known = available_plugins()
        options = [("all algorithms", ALL_ALGORITHMS)]
        options += build_algorithm_options({tag: known[tag] for tag in present if tag in known})
        options += [(tag, tag) for tag in present if tag not in known]
        return options

    def compose(self) -> ComposeResult:
        yield Header()
        self.algo_select = Select(options=self.algorithm_options(), allow_blank=False, value=ALL_ALGORITHMS,
                                  id="algo_select")
        yield Horizontal(self.algo_select, id="controls")
        self.status_widget = Static("", id="status")
        self.detail_widget = Static("Highlight a row for details", id="details")
        yield Horizontal(Vertical(self.status_widget, id="right"), self.detail_widget, id="topinfo")
        self.table = ResultTable(self.kind)
        self.table.id = "table"
        self.table.cursor_type = "row"
        yield self.table
        yield Footer()

    def on_mount(self) -> None:
        self.title = f"tensorpca - {self.path.name}"
        self.refresh_rows()

    def visible_rows(self) -> List[Dict[str, str]]:
        if self.algorithm_filter == ALL_ALGORITHMS:
            return list(self.rows)
        return [r for r in self.rows if r.get("algorithm") == self.algorithm_filter]

    def refresh_rows(self) -> None:
        shown = self.visible_rows()
        self.table.show_rows(shown)
        self.status_text = f"{len(shown)} of {len(self.rows)} {self.kind} rows ({self.algorithm_filter})"

    def watch_status_text(self, value: str) -> None:
        if hasattr(self, "status_widget"):
            self.status_widget.update(f"[yellow]{value}[/yellow]")

    def on_select_changed(self, event: Select.Changed) -> None:
        if not isinstance(event.value, str):
            return
        self.algorithm_filter = event.value
        self.refresh_rows()

    def on_data_table_row_highlighted(self, event: DataTable.RowHighlighted) -> None:
        row = self.table.row_data.get(event.row_key)
        if row is None:
            return
        self.detail_widget.update("\n".join(f"{k}: {v}" for k, v in row.items()))


def run_viewer(path: Path) -> None:
    ResultsApp(path).run()
