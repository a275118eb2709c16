"""Terminal UI Manager for rich console output of runs, verdicts and sweeps."""

from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Optional

import pandas as pd
from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table


class TerminalUIManager:
    """Manages terminal UI output using the rich library."""

    def __init__(self, theme: str = "default", console: Optional[Console] = None):
        """Initialize the terminal UI manager."""
        self.console = console or Console()
        self.theme = theme
        self.themes = {
            "default": {
                "header": "bold #FF6B6B on #2D3748",
                "run": "bold #48BB78 on #2D3748",
                "replica": "bold #63B3ED",
                "sweep": "bold #F6AD55",
                "success": "bold #48BB78",
                "error": "bold #FC8181",
                "warning": "bold #F6AD55",
                "info": "bold #63B3ED",
                "failed": "bold white on #C53030",
            },
            "ocean": {
                "header": "bold #00CED1 on #001F3F",
                "run": "bold #7FFFD4 on #001F3F",
                "replica": "bold #00FFFF",
                "sweep": "bold #20B2AA",
                "success": "bold #00FA9A",
                "error": "bold #FF4500",
                "warning": "bold #FFD700",
                "info": "bold #87CEEB",
                "failed": "bold white on #B22222",
            },
            "sunset": {
                "header": "bold #FF6347 on #2F2F2F",
                "run": "bold #FFA500 on #2F2F2F",
                "replica": "bold #FFD700",
                "sweep": "bold #FF69B4",
                "success": "bold #32CD32",
                "error": "bold #DC143C",
                "warning": "bold #FF8C00",
                "info": "bold #1E90FF",
                "failed": "bold white on #DC143C",
            },
        }
        self.current_theme = self.themes.get(theme, self.themes["default"])

    def _get_color(self, element: str) -> str:
        """Get color for an element based on current theme."""
        return self.current_theme.get(element, "white")

    def _print(self, text: str, fallback: str, **kwargs: Any) -> None:
        try:
            self.console.print(text, **kwargs)
        except UnicodeEncodeError:
            # Fallback to plain text if emoji encoding fails
            self.console.print(fallback, **kwargs)

    def print_header(self, title: str, style: Optional[str] = None, emoji: str = "🧪") -> None:
        """Print a header panel with emoji."""
        if style is None:
            style = self._get_color("header")
        try:
            self.console.print(Panel(f"{emoji} {title} {emoji}", style=style, expand=True))
        except UnicodeEncodeError:
            self.console.print(Panel(f" {title} ", style=style, expand=True))

    def print_run_info(self, name: str, properties: Dict[str, Any], emoji: str = "🔄") -> None:
        """Print a property table for a run or sweep."""
        table = Table(
            title=f"{emoji} {name} {emoji}",
            show_header=True,
            header_style=f"bold {self._get_color('run')}",
            border_style=self._get_color("run"),
            expand=True,
        )
        table.add_column("Property", style="dim", width=18)
        table.add_column("Value")
        for key, value in properties.items():
            table.add_row(str(key), str(value))
        self.console.print(table)

    @contextmanager
    def replica_progress(self, total: int, description: str = "Simulating replicas") -> Iterator[Any]:
        """Progress bar; yields a callback to invoke once per finished replica."""
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            console=self.console,
            transient=True,
        ) as progress:
            task = progress.add_task(f"[{self._get_color('replica')}]{description}", total=total)
            yield lambda *_: progress.advance(task)

    def print_verdicts(self, verdicts: List[Any], title: str = "Verdicts", emoji: str = "📋") -> None:
        """Print a verdict table; FAILED rows are highlighted."""
        table = Table(
            title=f"{emoji} {title} {emoji}",
            show_header=True,
            header_style=f"bold {self._get_color('info')}",
            border_style=self._get_color("info"),
            expand=True,
        )
        for column in ("Test", "Time", "Statistic", "SE", "Threshold", "Verdict"):
            table.add_column(column, justify="left" if column == "Test" else "right")
        for v in verdicts:
            time = "" if v.time is None else f"{v.time:.4g}"
            style = self._get_color("failed") if not v.passed else None
            table.add_row(
                v.test_id,
                time,
                f"{v.statistic:.6g}",
                f"{v.standard_error:.3g}",
                f"{v.threshold:.3g}",
                v.label,
                style=style,
            )
        self.console.print(table)

    def print_frame(self, frame: pd.DataFrame, title: str, emoji: str = "📈", max_rows: int = 40) -> None:
        """Print a data frame, such as a sweep table, as a rich table."""
        table = Table(
            title=f"{emoji} {title} {emoji}",
            show_header=True,
            header_style=f"bold {self._get_color('sweep')}",
            border_style=self._get_color("sweep"),
            expand=True,
        )
        for column in frame.columns:
            table.add_column(str(column), justify="right")
        for row in frame.head(max_rows).itertuples(index=False):
            table.add_row(*(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))
        self.console.print(table)

    def print_final_output(self, output: str, passed: bool = True) -> None:
        """Print the closing panel: green when everything passed, red otherwise."""
        color = self._get_color("success" if passed else "error")
        emoji = "✅" if passed else "❌"
        self.console.print(Panel(f"{emoji} [{color}]{output}[/{color}]", style=color, expand=True))

    def print_error(self, error: str, emoji: str = "❌ ") -> None:
        """Print an error message with emoji."""
        color = self._get_color("error")
        self._print(f"{emoji} [{color}]Error:[/{color}] {error}", f"[{color}]Error:[/{color}] {error}")

    def print_warning(self, warning: str, emoji: str = "⚠️ ") -> None:
        """Print a warning message with emoji."""
        color = self._get_color("warning")
        self._print(f"{emoji} [{color}]Warning:[/{color}] {warning}", f"[{color}]Warning:[/{color}] {warning}")

    def print_info(self, info: str, emoji: str = "ℹ️ ") -> None:
        """Print an info message with emoji."""
        color = self._get_color("info")
        self._print(f"{emoji} [{color}]Info:[/{color}] {info}", f"[{color}]Info:[/{color}] {info}")
