from typing import Any, Optional, Sequence

from rich.console import Console
from rich.panel import Panel
from rich.table import Table


class Formatter:
    """Rich-backed console rendering for reports and check results."""

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()

    def print_panel(
        self,
        content: str,
        title: str = "",
        style: str = "bold blue",
    ) -> None:
        self.console.print(
            Panel(content, title=title, border_style=style)
        )

    def print_table(
        self,
        title: str,
        columns: Sequence[str],
        rows: Sequence[Sequence[Any]],
        style: str = "bold cyan",
    ) -> None:
        table = Table(title=title, header_style=style)
        for column in columns:
            table.add_column(str(column))
        for row in rows:
            table.add_row(*(_cell(value) for value in row))
        self.console.print(table)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


formatter = Formatter()
