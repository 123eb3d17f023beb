"""
Utility functions for the blurreg CLI.
"""
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

from rich.console import Console
from rich.table import Table

from ..core.rationals import format_rational

console = Console()
err_console = Console(stderr=True)


def print_error(message: str) -> None:
    """Print an error message to stderr."""
    err_console.print(f"[red]Error:[/] {message}")


def print_success(message: str) -> None:
    console.print(f"[green]✓[/] {message}")


def print_warning(message: str) -> None:
    console.print(f"[yellow]![/] {message}")


def print_info(message: str) -> None:
    console.print(f"[blue]i[/] {message}")


def _default(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def to_json(data: Any) -> str:
    """Deterministic JSON: sorted keys, rationals as "num/den"."""
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False, default=_default)


def print_json(data: Any, title: Optional[str] = None) -> None:
    if title:
        console.print(f"[bold]{title}:[/]")
    console.print_json(to_json(data))


def format_cell(value: Any) -> str:
    """Table text for exact and float quantities.

    Fractions print as "num/den", floats with six significant digits
    (``inf`` for unbounded), booleans as pass/FAIL and ``None`` as a dash.
    """
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "[green]pass[/]" if value else "[red]FAIL[/]"
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, float):
        return "inf" if math.isinf(value) else f"{value:.6g}"
    return str(value)


def create_table(
    title: str,
    columns: List[Dict[str, Any]],
    data: Sequence[Sequence[Any]],
    show_header: bool = True,
    border_style: str = "blue",
) -> Table:
    """Create and print a rich table.

    Args:
        title: Table title
        columns: Column definitions with 'header' and optional 'style', 'justify' keys
        data: Data rows, rendered cell by cell with ``format_cell``
        show_header: Whether to show the header row
        border_style: Style for the table border

    Returns:
        Table: The table that was printed
    """
    table = Table(
        title=title,
        show_header=show_header,
        header_style=f"bold {border_style}",
        border_style=border_style,
    )
    for col in columns:
        table.add_column(
            col["header"],
            style=col.get("style", ""),
            justify=col.get("justify", "left"),
        )
    for row in data:
        table.add_row(*[format_cell(c) for c in row])
    console.print(table)
    return table


def print_checks(checks: Mapping[str, bool], title: str = "Checks") -> Table:
    """Table of named reproduction checks, sorted by name."""
    return create_table(
        title,
        [{"header": "check", "style": "cyan"}, {"header": "result"}],
        [(name, ok) for name, ok in sorted(checks.items())],
    )


def ensure_directory(path: Union[str, Path]) -> Path:
    """Create ``path`` if needed and return it resolved."""
    path = Path(path).expanduser().resolve()
    path.mkdir(parents=True, exist_ok=True)
    return path
