"""Operator command line: simulate, analyze, serve, report.

stdout carries only the requested document; diagnostics go to stderr.
Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .core import PayoffConfig
from .equilibrium import analyze as analyze_game
from .equilibrium import build_stag_game, game_from_json
from .errors import DomainError
from .ledger import EventLogStore, export_report
from .simulate import Mechanism, SimulationConfig, compare_mechanisms, reports_to_csv, run_simulation


def domain_errors_to_exit_1(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DomainError as exc:
            click.echo(f"{exc.code}: {exc}", err=True)
            sys.exit(1)
        except OSError as exc:
            click.echo(f"IO_ERROR: {exc}", err=True)
            sys.exit(1)

    return wrapper


def write_document(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@click.group()
def main():
    """Estimation-game toolkit: sessions, analysis, and simulation."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Simulation config JSON.")
@click.option("--out", type=click.Path(), help="Write the document here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.option(
    "--mechanisms",
    help="Comma-separated mechanisms to compare with common random numbers "
    "(overrides the config's single mechanism).",
)
@click.option("--trace", "trace_path", type=click.Path(), help="Per-story JSONL trace output.")
@domain_errors_to_exit_1
def simulate(config_path, out, fmt, mechanisms, trace_path):
    """Run the agent simulator over a config file."""
    try:
        doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        click.echo(f"IO_ERROR: config file not found: {config_path}", err=True)
        sys.exit(1)
    except json.JSONDecodeError as exc:
        click.echo(f"INVALID_CONFIG: {exc}", err=True)
        sys.exit(1)
    config = SimulationConfig.from_json(doc)

    mechanism_list = None
    if mechanisms:
        mechanism_list = [Mechanism(name.strip()) for name in mechanisms.split(",") if name.strip()]
    elif isinstance(doc.get("mechanisms"), list):
        mechanism_list = [Mechanism(name) for name in doc["mechanisms"]]

    if mechanism_list:
        reports = compare_mechanisms(config, mechanism_list)
    elif trace_path:
        with open(trace_path, "w", encoding="utf-8") as trace:
            reports = [run_simulation(config, trace=trace)]
    else:
        reports = [run_simulation(config)]

    if fmt == "csv":
        text = reports_to_csv(reports)
    elif len(reports) == 1:
        text = reports[0].to_json_text()
    else:
        text = json.dumps([r.to_json() for r in reports], indent=2, sort_keys=True) + "\n"
    write_document(text, out)


@main.command()
@click.option("--game", "game_path", type=click.Path(), help="Normal-form game JSON file.")
@click.option("--stag-n", type=int, help="Analyze the built-in team game for N players.")
@click.option("--out", type=click.Path(), help="Write the report here instead of stdout.")
@domain_errors_to_exit_1
def analyze(game_path, stag_n, out):
    """Print an equilibrium report for a game."""
    if (game_path is None) == (stag_n is None):
        raise click.UsageError("provide exactly one of --game or --stag-n")
    if stag_n is not None:
        game = build_stag_game(stag_n, PayoffConfig())
    else:
        try:
            doc = json.loads(Path(game_path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            click.echo(f"IO_ERROR: game file not found: {game_path}", err=True)
            sys.exit(1)
        except json.JSONDecodeError as exc:
            click.echo(f"MALFORMED_GAME: {exc}", err=True)
            sys.exit(1)
        game = game_from_json(doc)
    report = analyze_game(game).to_json(game)
    report["strategy_counts"] = list(game.strategy_counts)
    write_document(json.dumps(report, indent=2, sort_keys=True) + "\n", out)


@main.command()
@click.option("--listen", default="127.0.0.1:8000", show_default=True, help="host:port to bind.")
@click.option(
    "--data",
    "data_dir",
    default="data",
    show_default=True,
    type=click.Path(),
    help="Directory for session event logs.",
)
@domain_errors_to_exit_1
def serve(listen, data_dir):
    """Run the HTTP session service."""
    import uvicorn

    from .service import create_app

    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise click.UsageError(f"--listen must look like host:port, got {listen!r}")
    app = create_app(data_dir)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")


@main.command()
@click.option("--session", "session_id", required=True, help="Session id to report on.")
@click.option(
    "--data",
    "data_dir",
    default="data",
    show_default=True,
    type=click.Path(),
    help="Directory holding session event logs.",
)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.option("--out", type=click.Path(), help="Write the report here instead of stdout.")
@click.option(
    "--figures",
    "figures_dir",
    type=click.Path(),
    help="Also render velocity and leaderboard charts into this directory.",
)
@domain_errors_to_exit_1
def report(session_id, data_dir, fmt, out, figures_dir):
    """Export a session's leaderboard, velocity, and score breakdowns."""
    store = EventLogStore(data_dir)
    session = store.load(session_id)
    text = export_report(session, fmt)
    if out and Path(out).is_dir():
        out = str(Path(out) / f"report.{session_id}.{fmt}")
    write_document(text, out)
    if figures_dir:
        from .figures import save_report_figures

        for path in save_report_figures(session, figures_dir):
            click.echo(f"wrote {path}", err=True)


if __name__ == "__main__":
    main()
