import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import pandas as pd
import typer

from src.errors import EXIT_NO_RESULT, LanetError, exit_code_for
from src.utils.lanet_graph import LANetGraph
from src.utils.report_formatter import render_table

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("table", "csv")


def graph_option(help_text: str = "LANet グラフファイル (records 形式)"):
    return typer.Option(
        ..., "--graph", "-g", envvar="LANET_GRAPH",
        exists=True, dir_okay=False, readable=True, help=help_text,
    )


def format_option():
    return typer.Option("table", "--format", "-f", help="出力形式: table | csv")


@contextmanager
def command_errors(command: str):
    """Map engine failures onto the exit-status contract with a one-line diagnostic on stderr."""
    try:
        yield
    except typer.Exit:
        raise
    except (LanetError, ValueError) as e:
        logger.debug(f"{command} failed", exc_info=True)
        typer.echo(f"{command}: {e}", err=True)
        raise typer.Exit(code=exit_code_for(e))


def load_graph(path: Path) -> LANetGraph:
    return LANetGraph.read_records(str(path))


def emit_frame(frame: pd.DataFrame, fmt: str, output: Optional[Path] = None):
    """Table or CSV on stdout, or CSV into `output`; an empty frame ends the command with the no-result status."""
    if fmt not in OUTPUT_FORMATS:
        raise ValueError(f"unknown format '{fmt}' (expected one of {', '.join(OUTPUT_FORMATS)})")
    if output is not None:
        frame.to_csv(output, index=False)
        logger.info(f"Wrote {output} ({len(frame)} rows)")
    elif fmt == "csv":
        frame.to_csv(sys.stdout, index=False)
    else:
        typer.echo(render_table(frame))
    if frame.empty:
        raise typer.Exit(code=EXIT_NO_RESULT)
