"""Rich-based output for the torheight CLI: JSON on stdout, everything else on stderr."""

from __future__ import annotations

import json
import logging
from typing import Any, Dict

from rich.console import Console
from rich.json import JSON
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

console = Console(soft_wrap=True)
err_console = Console(stderr=True)


def print_json(payload: Dict[str, Any]) -> None:
    """Print a JSON payload; stdout carries nothing else."""
    console.print(JSON(json.dumps(payload, indent=2)), soft_wrap=True)


def configure_logging(level: str = "WARNING") -> None:
    root = logging.getLogger("tor_height")
    root.handlers.clear()
    handler = RichHandler(console=err_console, show_path=False, rich_tracebacks=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(level.upper())
    root.propagate = False


def print_suite_table(result: Dict[str, Any]) -> None:
    """Summary of a verification suite on stderr."""
    failures = result.get("failures", 0)
    undecided = result.get("undecided", 0)
    checked = result.get("checked", 0)

    if failures == 0 and undecided == 0:
        err_console.print(Panel(
            f"[green]✓ {checked} checks passed[/green]",
            title=f"Suite {result.get('suite', '?')}",
        ))
        return

    table = Table(title=f"Suite {result.get('suite', '?')}", show_header=True, header_style="bold cyan")
    table.add_column("Status", style="bold")
    table.add_column("Details")
    for detail in result.get("details", []):
        status = detail.get("status", "?")
        style = "[red]FAIL[/red]" if status == "fail" else "[yellow]UNDECIDED[/yellow]"
        rest = ", ".join(f"{k}={v}" for k, v in detail.items() if k != "status")
        table.add_row(style, rest)

    err_console.print(table)
    err_console.print(
        f"Checked: {checked} | [red]Failures: {failures}[/red] | "
        f"[yellow]Undecided: {undecided}[/yellow]"
    )


def print_error(payload: Dict[str, Any]) -> None:
    err_console.print(Panel(
        f"[red]{payload.get('message', 'error')}[/red]",
        title=payload.get("error", "Error"),
        border_style="red",
    ))
