"""
Entangle CLI
Run, batch, check and experiment commands over scenario files
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional

import click

from services.engine.checks import run_checks
from services.engine.martingale import martingale_report
from services.engine.protocol import build_world, initial_entered, run_market
from services.engine.transcript import parse_transcript
from services.harness.middleware.error_handler import EXIT_CHECK_FAILED, EXIT_OK, handle_errors
from services.harness.middleware.logging import configure_logging
from services.harness.schemas.scenario import ScenarioConfig
from services.harness.services.batch import run_batch
from services.harness.services.emit import emit, emit_lines, emit_table
from services.harness.services.experiments import (
    CALIBRATION_COLUMNS,
    calibration_report,
    manipulation_experiment,
    profit_experiment,
)
from services.harness.services.scenarios import bundled_scenario, load_scenario
from services.revision.comparison import market_vs_revision
from services.revision.consensus import RevisionScenario
from services.world.space import format_prob

scenario_option = click.option(
    "--scenario", "scenario_path", type=click.Path(dir_okay=False),
    default=lambda: str(bundled_scenario("exm")), show_default="bundled exm",
    help="Scenario file (TOML).",
)
seed_option = click.option("--seed", type=int, default=None, help="Run seed (batch: base seed).")
runs_option = click.option("--runs", type=click.IntRange(min=0), default=100, show_default=True)
parallelism_option = click.option("--parallelism", type=click.IntRange(min=1), default=None)
format_option = click.option("--format", "fmt", type=click.Choice(["table", "records"]), default="table",
                             show_default=True)
out_option = click.option("--out", type=click.Path(dir_okay=False), default=None,
                          help="Write output here instead of stdout.")


def _override_options(func):
    func = click.option("--mode", type=click.Choice(["instant", "ticked"]), default=None)(func)
    func = click.option("--epsilon", type=click.FloatRange(min=0), default=None)(func)
    func = click.option("--rational/--float", "rational", default=None)(func)
    return func


def _load(path: str, mode: Optional[str] = None, epsilon: Optional[float] = None,
          rational: Optional[bool] = None) -> ScenarioConfig:
    config = load_scenario(path)
    overrides: Dict[str, Dict[str, Any]] = {}
    if mode is not None:
        overrides["market"] = {"mode": mode}
    numerics = {k: v for k, v in (("epsilon", epsilon), ("rational", rational)) if v is not None}
    if numerics:
        overrides["numerics"] = numerics
    return config.with_overrides(**overrides) if overrides else config


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _transcript_seed(text: str, default: int) -> int:
    # a malformed terminal record is reported by parse_transcript
    lines = text.strip().splitlines()
    try:
        seed = json.loads(lines[-1]).get("seed", default)
    except (IndexError, ValueError, AttributeError):
        return default
    return seed if isinstance(seed, int) else default


def _seed(seed: Optional[int], config: ScenarioConfig) -> int:
    return config.run.seed if seed is None else seed


def _status(passed: bool) -> int:
    return EXIT_OK if passed else EXIT_CHECK_FAILED


@click.group()
@click.option("--log-level", default=None, help="structlog level (default from settings).")
@click.option("--log-format", type=click.Choice(["json", "console"]), default=None)
def cli(log_level: Optional[str], log_format: Optional[str]):
    """Self-resolving prediction market simulator and verifier."""
    configure_logging(log_level, log_format)


@cli.command()
@scenario_option
@seed_option
@_override_options
@format_option
@out_option
@handle_errors
def run(scenario_path, seed, mode, epsilon, rational, fmt, out):
    """Run one market and print its transcript."""
    config = _load(scenario_path, mode, epsilon, rational)
    transcript = run_market(config, seed)
    report = run_checks(transcript, config, epsilon)
    if fmt == "records":
        _write(transcript.to_jsonl(), out)
    else:
        rows = [
            {"k": r.k, "entered": r.entrant, "xi": format_prob(r.xi),
             "omega": " ".join(transcript.space.labels(r.omega))}
            for r in transcript.rounds
        ]
        _write(emit_table(rows, ["k", "entered", "xi", "omega"]), out)
    click.echo(json.dumps(report.to_dict(), default=str), err=True)
    return _status(report.passed or not config.fully_compliant)


@cli.command()
@scenario_option
@runs_option
@seed_option
@parallelism_option
@_override_options
@format_option
@out_option
@handle_errors
def batch(scenario_path, runs, seed, parallelism, mode, epsilon, rational, fmt, out):
    """Run many seeded markets and emit per-run records."""
    config = _load(scenario_path, mode, epsilon, rational)
    report = run_batch(config, runs, _seed(seed, config), parallelism)
    _write(emit(report, fmt), out)
    click.echo(json.dumps(report.summary(), default=str), err=True)
    return _status(report.all_checks_passed)


@cli.command()
@scenario_option
@click.option("--transcript", "transcript_path", type=click.Path(exists=True, dir_okay=False), required=True)
@_override_options
@handle_errors
def check(scenario_path, transcript_path, mode, epsilon, rational):
    """Re-run the checkers and the audit on a stored transcript."""
    config = _load(scenario_path, mode, epsilon, rational)
    text = Path(transcript_path).read_text(encoding="utf-8")
    space = build_world(config, _transcript_seed(text, config.run.seed))
    transcript = parse_transcript(text, space, initial_entered(config, space), config.name, config.fingerprint())
    report = run_checks(transcript, config, epsilon)
    click.echo(json.dumps(report.to_dict(), default=str))
    return _status(report.passed or not config.fully_compliant)


@cli.command()
@click.option("--p-h", default="1/3", show_default=True)
@click.option("--p-a", default="1/3", show_default=True)
@click.option("--p-b", default="1/3", show_default=True)
@format_option
@out_option
@handle_errors
def revise(p_h, p_a, p_b, fmt, out):
    """Compare the market's pooled price with iterated-revision consensus."""
    scn = RevisionScenario.parse(p_h, p_a, p_b)
    comparison = market_vs_revision(scn)
    rows = [{"source": "market", "value": format_prob(comparison.market_price)},
            {"source": "pooled_posterior", "value": format_prob(comparison.pooled_posterior)}]
    rows += [
        {"source": model.value.lower(), "value": format_prob(value) if value is not None else None}
        for model, value in comparison.consensus.items()
    ]
    _write(emit_table(rows, ["source", "value"]) if fmt == "table" else emit_lines(rows), out)
    return _status(comparison.agrees)


@cli.command()
@scenario_option
@runs_option
@seed_option
@parallelism_option
@_override_options
@format_option
@out_option
@handle_errors
def calibrate(scenario_path, runs, seed, parallelism, mode, epsilon, rational, fmt, out):
    """Bucket final prices and test each bucket against a binomial interval."""
    config = _load(scenario_path, mode, epsilon, rational)
    report = calibration_report(run_batch(config, runs, _seed(seed, config), parallelism, checks=False).records)
    rows = report.rows()
    _write(emit_table(rows, CALIBRATION_COLUMNS) if fmt == "table" else emit_lines(rows), out)
    return _status(report.passed)


@cli.command()
@click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False),
              default=lambda: str(bundled_scenario("exm_single")), show_default="bundled exm_single")
@runs_option
@seed_option
@_override_options
@format_option
@out_option
@handle_errors
def profit(scenario_path, runs, seed, mode, epsilon, rational, fmt, out):
    """Paired-seed profit of a compliant versus a silent informed expert."""
    config = _load(scenario_path, mode, epsilon, rational)
    report = profit_experiment(config, runs, _seed(seed, config))
    rows = [report.compliant.to_dict(), report.silent.to_dict()]
    columns = ["policy", "mean", "std_error", "n"]
    _write(emit_table(rows, columns) if fmt == "table" else emit_lines(rows), out)
    return _status(report.passed)


@cli.command()
@click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False),
              default=lambda: str(bundled_scenario("exm_prior")), show_default="bundled exm_prior")
@runs_option
@seed_option
@_override_options
@format_option
@out_option
@handle_errors
def martingale(scenario_path, runs, seed, mode, epsilon, rational, fmt, out):
    """Mean price increments per round across runs."""
    config = _load(scenario_path, mode, epsilon, rational)
    report = martingale_report(config, runs, _seed(seed, config))
    rows = report.to_dict()["increments"]
    _write(emit_table(rows, ["k", "mean", "std_error", "n", "within_3se"]) if fmt == "table"
           else emit_lines(rows), out)
    click.echo(json.dumps({k: v for k, v in report.to_dict().items() if k != "increments"}), err=True)
    return _status(report.passed and report.flag is None)


@cli.command()
@click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False),
              default=lambda: str(bundled_scenario("manipulation")), show_default="bundled manipulation")
@click.option("--budgets", default="10,100,1000,100000", show_default=True,
              help="Comma-separated manipulator budgets.")
@seed_option
@format_option
@out_option
@handle_errors
def manipulate(scenario_path, budgets, seed, fmt, out):
    """Try to hold a distorted price against the crowd for one inactivity window."""
    amounts = [float(b) for b in budgets.split(",") if b.strip()]
    config = _load(scenario_path)
    report = manipulation_experiment(config, amounts, _seed(seed, config))
    rows = [o.to_dict() for o in report.outcomes]
    columns = ["budget", "ticks_held", "window", "held", "spent", "position", "expected_loss"]
    _write(emit_table(rows, columns) if fmt == "table" else emit_lines(rows), out)
    return EXIT_OK


if __name__ == "__main__":
    cli()
