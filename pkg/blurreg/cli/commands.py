"""
CLI commands for blurreg.
"""
from enum import Enum
from functools import wraps
from pathlib import Path
from typing import Callable, Collection, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel

from .. import __version__
from ..config import get_settings
from ..config.scenario import ScenarioConfig, load_scenario, worked_example_config
from ..core.errors import BlurRegError, ReproductionMismatch
from ..core.experiment import (
    RunReport,
    reproduce_worked_example,
    run_scenario,
    write_report_csv,
    write_report_json,
)
from ..core.rationals import format_rational, to_fraction
from ..logging import configure_logging
from .utils import (
    create_table,
    ensure_directory,
    print_error,
    print_checks,
    print_info,
    print_json,
    print_success,
    print_warning,
)

app = typer.Typer(
    name="blurreg",
    help="Registration and segmentation of blurred, quantized 1-D signals",
    add_completion=False,
    no_args_is_help=True,
)

console = Console()


class OutputFormat(str, Enum):
    json = "json"
    csv = "csv"


ConfigOption = typer.Option(None, "--config", "-c", help="Scenario file (.json or .yaml); defaults to the built-in example")
XOption = typer.Option(None, "--x", help="Noise magnitude override, e.g. 3/256")
OutOption = typer.Option(None, "--out", "-o", help="Directory for report files")
FormatOption = typer.Option(OutputFormat.json, "--format", "-f", help="Report format")
VerboseOption = typer.Option(False, "--verbose", help="Log at DEBUG level")


def print_header():
    """Print the blurreg CLI header."""
    console.print(
        Panel.fit(f"[bold blue]blurreg[/] [dim]v{__version__}[/]", border_style="blue"),
        "",
    )


def handle_errors(func: Callable) -> Callable:
    """Map library errors onto exit codes (2 validation, 3 regime, 4 mismatch)."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except typer.Exit:
            raise
        except ReproductionMismatch as e:
            for failure in e.failures:
                print_error(failure)
            raise typer.Exit(code=e.exit_code)
        except BlurRegError as e:
            print_error(str(e))
            raise typer.Exit(code=e.exit_code)
        except (ValidationError, ValueError, FileNotFoundError) as e:
            print_error(str(e))
            raise typer.Exit(code=2)

    return wrapper


def _setup(verbose: bool) -> None:
    configure_logging("DEBUG" if verbose else None)


def _load(
    config_path: Optional[Path],
    x: Optional[str] = None,
    v: Optional[str] = None,
    v_scan: bool = False,
) -> ScenarioConfig:
    config = load_scenario(config_path) if config_path is not None else worked_example_config()
    data = config.model_dump()
    if x is not None:
        data["noise"]["x"] = x
    if v is not None:
        data["v"] = v
        data["v_scan"] = False
    if v_scan:
        data["v"] = None
        data["v_scan"] = True
    return ScenarioConfig.model_validate(data)


def _emit(report: RunReport, fmt: OutputFormat, out: Optional[Path], config: Optional[ScenarioConfig] = None) -> None:
    out = out or (config.output_dir if config is not None else None)
    if fmt is OutputFormat.json:
        if out is None:
            print_json(report.to_dict())
            return
        path = write_report_json(report, ensure_directory(out) / "report.json")
        print_success(f"Report written to {path}")
        return
    directory = ensure_directory(out or get_settings().OUT_DIR)
    for path in write_report_csv(report, directory):
        print_success(f"Wrote {path}")


def _sequence_rows(report: RunReport):
    n = max(len(g) for g in report.gammas)
    for i in range(n):
        row = [i]
        for group in (report.gammas, report.ys, report.ds):
            row += [format_rational(seq[i]) if i < len(seq) else "" for seq in group]
        yield row


def _run(
    stages: Collection[str],
    config_path: Optional[Path],
    x: Optional[str],
    out: Optional[Path],
    fmt: OutputFormat,
    v: Optional[str] = None,
    v_scan: bool = False,
) -> RunReport:
    config = _load(config_path, x, v, v_scan)
    report = run_scenario(config, stages=stages)
    _emit(report, fmt, out, config)
    return report


@app.command()
def version():
    """Show the blurreg version."""
    print_header()
    console.print(f"Version: [bold]{__version__}[/]")


@app.command()
@handle_errors
def simulate(
    config_path: Optional[Path] = ConfigOption,
    x: Optional[str] = XOption,
    out: Optional[Path] = OutOption,
    fmt: OutputFormat = FormatOption,
    verbose: bool = VerboseOption,
):
    """Sample both grids, add noise and show γ, y and d."""
    _setup(verbose)
    report = _run((), config_path, x, out, fmt)
    if out is None and fmt is OutputFormat.json:
        return
    headers = ["i", "γ1", "γ2", "y1", "y2", "d1", "d2"]
    create_table(
        f"Sequences: {report.name}",
        [{"header": h, "justify": "right"} for h in headers],
        list(_sequence_rows(report)),
    )


@app.command()
@handle_errors
def matrices(
    config_path: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    fmt: OutputFormat = FormatOption,
    verbose: bool = VerboseOption,
):
    """Build the measurement and difference matrices of both sequences."""
    _setup(verbose)
    report = _run(("matrices",), config_path, None, out, fmt)
    for name, summary in report.matrices.items():
        print_info(f"{name}: regime {summary['regime']}, ι = {summary['iota']}")
        if summary["sparsity_violations"]:
            for violation in summary["sparsity_violations"]:
                print_warning(f"{name}: {violation}")


@app.command()
@handle_errors
def baseline(
    config_path: Optional[Path] = ConfigOption,
    x: Optional[str] = XOption,
    out: Optional[Path] = OutOption,
    fmt: OutputFormat = FormatOption,
    verbose: bool = VerboseOption,
):
    """Cross-correlate the noisy sequences and report the best lag."""
    _setup(verbose)
    report = _run(("baseline",), config_path, x, out, fmt)
    if len(report.baseline_ties) > 1:
        print_warning(f"tied lags {list(report.baseline_ties)}")
    print_info(f"baseline lag estimate: {report.baseline_argmax}")


@app.command()
@handle_errors
def align(
    config_path: Optional[Path] = ConfigOption,
    v: Optional[str] = typer.Option(None, "--v", help="DP threshold, e.g. 1/512"),
    v_scan: bool = typer.Option(False, "--v-scan", help="Scan v over multiples of 1/512"),
    x: Optional[str] = XOption,
    out: Optional[Path] = OutOption,
    fmt: OutputFormat = FormatOption,
    verbose: bool = VerboseOption,
):
    """Register and segment the two sequences by the longest-path DP."""
    _setup(verbose)
    if v is not None and v_scan:
        print_error("--v and --v-scan are mutually exclusive")
        raise typer.Exit(code=2)
    if v is not None and not to_fraction(v) > 0:
        print_error(f"v must be positive, got {v}")
        raise typer.Exit(code=2)
    report = _run(("align",), config_path, x, out, fmt, v, v_scan)
    if report.alignment is None:
        print_warning("no path found")
    else:
        pairs = ", ".join(f"({i1},{i2})" for i1, i2 in report.alignment.index_pairs())
        print_info(f"weight {report.alignment.total_weight} at v = {format_rational(report.alignment.v)}: {pairs}")
    if report.failures:
        raise ReproductionMismatch(report.failures)


@app.command()
@handle_errors
def infer(
    config_path: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    fmt: OutputFormat = FormatOption,
    verbose: bool = VerboseOption,
):
    """Bound sample times, discontinuities and σ from the noiseless sequences."""
    _setup(verbose)
    report = _run(("infer",), config_path, None, out, fmt)
    ratio = report.bounds["T_over_sigma_max"]
    if ratio:
        print_info(f"σ < T/{ratio:.4f}")
    else:
        print_info("σ is not bounded by these observations")


@app.command("reproduce")
@handle_errors
def reproduce(
    out: Optional[Path] = OutOption,
    fmt: OutputFormat = FormatOption,
    verbose: bool = VerboseOption,
):
    """Run the built-in example and check every reference value."""
    _setup(verbose)
    print_header()
    with console.status("Reproducing...", spinner="dots"):
        report = reproduce_worked_example()
    if out is not None or fmt is OutputFormat.csv:
        _emit(report, fmt, out)
    print_checks(report.checks)
    print_success(f"all {len(report.checks)} checks passed")
