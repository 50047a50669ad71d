"""
Tests for scenario loading, batch runs, experiments, report emission and the CLI
"""

import json

import pytest
from click.testing import CliRunner

from services.engine.checks import run_checks
from services.engine.protocol import run_market
from services.errors import BadExperimentShape, CrowdBudgetExhausted, ParseError, ValidationError
from services.harness.main import cli
from services.harness.middleware.error_handler import EXIT_CHECK_FAILED, EXIT_INVALID_INPUT, EXIT_OK
from services.harness.schemas.reports import RunRecord
from services.harness.services import batch
from services.harness.services.batch import run_batch, summarize
from services.harness.services.emit import RUN_COLUMNS, emit, parse_records
from services.harness.services.experiments import (
    LOW_COUNT,
    OK,
    OUTSIDE,
    calibration_report,
    manipulation_experiment,
    profit_experiment,
)
from services.harness.services.scenarios import bundled_scenario, load_scenario, parse_scenario
from tests.conftest import GOLDEN_DIR

EXM_TOML = bundled_scenario("exm").read_text(encoding="utf-8")


def test_bundled_scenario_loads(exm):
    assert exm.name == "exm"
    assert exm.hypothesis == ["h"]
    assert [e.id for e in exm.experts] == ["m", "l"]
    assert len(exm.fingerprint()) == 64
    assert exm.fingerprint() == load_scenario(bundled_scenario("exm")).fingerprint()


@pytest.mark.parametrize("old,new,fragment", [
    ('weights = ["1/3", "1/3", "1/3"]', 'weights = ["0.3", "0.3", "0.3"]', "normalization"),
    ('atoms = ["h", "a", "b"]', 'atoms = ["h", "a", "a"]', "unique_atoms"),
    ('mode = "instant"', 'mode = "instant"\ncolour = "red"', "market.colour"),
    ('id = "l"', 'id = "m"', "unique_experts"),
    ('id = "l"', 'id = "crowd"', "reserved"),
    ('entry_order = "fifo"', 'entry_order = "fifo"\nreward_pool = "100.005"', "reward_pool"),
])
def test_invalid_scenarios_name_the_problem(old, new, fragment):
    with pytest.raises(ValidationError) as info:
        parse_scenario(EXM_TOML.replace(old, new, 1), "broken")
    assert fragment in info.value.message


def test_scenario_syntax_errors_carry_the_line():
    with pytest.raises(ParseError) as info:
        parse_scenario('name = "x"\nthis is not toml\n', "broken")
    assert "line" in info.value.message


def test_missing_scenario_file(tmp_path):
    with pytest.raises(ParseError):
        load_scenario(tmp_path / "nowhere.scenario")


def test_batch_of_one_equals_a_single_run(exm_prior):
    report = run_batch(exm_prior, 1, base_seed=4)
    transcript = run_market(exm_prior, 4)
    expected = summarize(transcript, run_checks(transcript, exm_prior), True)
    assert report.records == [expected]


def test_batch_does_not_depend_on_parallelism(exm_prior):
    serial = run_batch(exm_prior, 6, base_seed=10, parallelism=1)
    parallel = run_batch(exm_prior, 6, base_seed=10, parallelism=2)
    assert serial.model_dump() == parallel.model_dump()
    assert [r.seed for r in serial.records] == list(range(10, 16))


def test_batch_records_run_errors(exm, monkeypatch):
    real = batch.run_market

    def flaky(scenario, seed=None):
        if seed == 1:
            raise CrowdBudgetExhausted("crowd has no budget left")
        return real(scenario, seed)

    monkeypatch.setattr(batch, "run_market", flaky)
    report = run_batch(exm, 3, parallelism=1)
    assert [r.error["code"] if r.error else None for r in report.records] == [
        None, "crowd_budget_exhausted", None
    ]
    assert report.summary()["errors"] == 1
    assert report.all_checks_passed


def test_batch_rejects_negative_runs(exm):
    with pytest.raises(ValidationError):
        run_batch(exm, -1)


def test_merge_is_associative(exm_prior):
    a = run_batch(exm_prior, 2, base_seed=0)
    b = run_batch(exm_prior, 2, base_seed=2)
    c = run_batch(exm_prior, 2, base_seed=1)
    left, right = a.merge(b).merge(c), a.merge(b.merge(c))
    assert left.model_dump() == right.model_dump()
    assert [r.seed for r in left.records] == [0, 1, 2, 3]


def test_merge_refuses_other_scenarios(exm, exm_prior):
    with pytest.raises(ValidationError):
        run_batch(exm, 1).merge(run_batch(exm_prior, 1))


def _records(price, thetas):
    return [RunRecord(seed=i, final_price=price, theta=t) for i, t in enumerate(thetas)]


def test_calibration_buckets():
    runs = _records("1/2", [i % 2 for i in range(2000)])
    runs += _records("0.9", [0] * 100)
    runs += _records("0.12", [1] * 10)
    report = calibration_report(runs)
    flags = {round(row["lower"], 2): row["flag"] for row in report.rows()}

    assert flags == {0.1: LOW_COUNT, 0.5: OK, 0.9: OUTSIDE}
    assert not report.passed

    middle = next(row for row in report.rows() if row["lower"] == pytest.approx(0.5))
    assert middle["count"] == 2000
    assert middle["frequency"] == 0.5
    assert middle["interval_low"] == pytest.approx(0.5 - 3 * 0.5 / 2000 ** 0.5)


def test_calibration_ignores_low_counts_and_errors():
    runs = _records("0.9", [0] * 10) + [RunRecord(seed=99, error={"code": "x"})]
    report = calibration_report(runs)
    assert report.passed
    assert calibration_report([]).rows() == []


def test_prior_sampled_runs_are_calibrated():
    single = load_scenario(bundled_scenario("exm_single"))
    records = run_batch(single, 400, checks=False).records
    report = calibration_report(records)
    assert report.passed, report.rows()
    half = next(row for row in report.rows() if row["lower"] == pytest.approx(0.5))
    assert half["count"] >= 200
    assert 0 < half["frequency"] < 1

    # a resolution that ignores the final price shows up as miscalibration
    rigged = [r.model_copy(update={"theta": 1}) for r in records]
    assert not calibration_report(rigged).passed


@pytest.mark.slow
def test_calibration_full():
    single = load_scenario(bundled_scenario("exm_single"))
    report = calibration_report(run_batch(single, 100_000, checks=False).records)
    assert report.passed, report.rows()


def test_profit_experiment_shape(exm):
    with pytest.raises(BadExperimentShape):
        profit_experiment(exm, 10)
    single = load_scenario(bundled_scenario("exm_single"))
    with pytest.raises(BadExperimentShape):
        profit_experiment(single, 1)


def test_disclosure_pays_and_silence_breaks_even():
    report = profit_experiment(load_scenario(bundled_scenario("exm_single")), 600)
    assert report.compliant_profitable, report.compliant
    assert report.silent_break_even, report.silent


@pytest.mark.slow
def test_disclosure_incentive_full():
    report = profit_experiment(load_scenario(bundled_scenario("exm_single")), 10_000)
    assert report.passed


def test_uninformed_expert_never_trades():
    single = load_scenario(bundled_scenario("exm_single"))
    blank = single.with_overrides(experts=[{"id": "m", "info": ["h", "a", "b"]}])
    report = profit_experiment(blank, 5)
    assert report.compliant.mean == report.silent.mean == 0.0


def test_manipulation_needs_a_budget_per_tick():
    scenario = load_scenario(bundled_scenario("manipulation"))
    report = manipulation_experiment(scenario, [10, 100, 1000, 100_000])
    assert report.distorted == pytest.approx(1 / 3 + 0.3)
    assert [o.ticks_held for o in report.outcomes] == [0, 1, 5, 5]
    assert [o.held for o in report.outcomes] == [False, False, True, True]
    spent = [o.spent for o in report.outcomes]
    assert spent == sorted(spent)
    assert all(o.expected_loss > 0 for o in report.outcomes)


def test_empty_batch_emits_a_header(exm):
    report = run_batch(exm, 0)
    assert emit(report, "table") == "\t".join(RUN_COLUMNS) + "\n"
    assert report.summary()["n_runs"] == 0


def test_reemitting_records_is_idempotent(exm_prior):
    text = emit(run_batch(exm_prior, 3), "records")
    assert emit(parse_records(text), "records") == text


def test_parse_records_rejects_garbage():
    with pytest.raises(ParseError):
        parse_records("")
    with pytest.raises(ParseError):
        parse_records('{"scenario": "x"}\nnot json\n')


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


def test_cli_run_prints_the_golden_transcript(runner):
    result = runner.invoke(cli, ["run", "--format", "records"])
    assert result.exit_code == EXIT_OK, result.stderr
    assert result.stdout == (GOLDEN_DIR / "exm.transcript.jsonl").read_text(encoding="utf-8")


def test_cli_run_table_and_out(runner, tmp_path):
    out = tmp_path / "run.tsv"
    result = runner.invoke(cli, ["run", "--out", str(out)])
    assert result.exit_code == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "k\tentered\txi\tomega"
    assert lines[-1] == "3\tl\t1\th"


def test_cli_check_reproduces_the_report(runner):
    result = runner.invoke(cli, ["check", "--transcript", str(GOLDEN_DIR / "exm.transcript.jsonl")])
    assert result.exit_code == EXIT_OK
    assert json.loads(result.stdout)["entangled"] is True


def test_cli_check_fails_on_a_tampered_transcript(runner, tmp_path):
    golden = (GOLDEN_DIR / "exm.transcript.jsonl").read_text(encoding="utf-8")
    tampered = tmp_path / "tampered.jsonl"
    tampered.write_text(golden.replace('"xi":"1/2"', '"xi":"2/5"'), encoding="utf-8")
    result = runner.invoke(cli, ["check", "--transcript", str(tampered)])
    assert result.exit_code == EXIT_CHECK_FAILED
    assert json.loads(result.stdout)["clauses"]["ent2"]["first_failure"] == 2


def test_cli_revise(runner):
    result = runner.invoke(cli, ["revise"])
    assert result.exit_code == EXIT_OK
    assert "disjoint\t1" in result.stdout
    assert "nested\t1/2" in result.stdout
    assert "uniform_overlap\t0.69314718056" in result.stdout


def test_cli_invalid_input_exit_code(runner, tmp_path):
    result = runner.invoke(cli, ["revise", "--p-h", "1/2", "--p-a", "1/3", "--p-b", "1/3"])
    assert result.exit_code == EXIT_INVALID_INPUT
    assert json.loads(result.stderr.strip().splitlines()[-1])["error"]["code"] == "validation_error"

    result = runner.invoke(cli, ["run", "--scenario", str(tmp_path / "missing.scenario")])
    assert result.exit_code == EXIT_INVALID_INPUT

    garbage = tmp_path / "garbage.jsonl"
    garbage.write_text("not a transcript\n", encoding="utf-8")
    result = runner.invoke(cli, ["check", "--transcript", str(garbage)])
    assert result.exit_code == EXIT_INVALID_INPUT


def test_cli_batch_uses_the_scenario_seed(runner, tmp_path):
    text = bundled_scenario("exm_prior").read_text(encoding="utf-8")
    path = tmp_path / "seeded.scenario"
    path.write_text(text.replace('entry_order = "random"', 'entry_order = "random"\nseed = 7'), encoding="utf-8")

    result = runner.invoke(cli, ["batch", "--scenario", str(path), "--runs", "2", "--format", "records"])
    assert result.exit_code == EXIT_OK, result.stderr
    assert [r.seed for r in parse_records(result.stdout).records] == [7, 8]

    result = runner.invoke(cli, ["batch", "--scenario", str(path), "--runs", "2", "--seed", "0",
                                 "--format", "records"])
    assert [r.seed for r in parse_records(result.stdout).records] == [0, 1]


def test_cli_experiments_accept_numeric_overrides(runner):
    result = runner.invoke(cli, ["calibrate", "--runs", "3", "--mode", "ticked", "--float"])
    assert result.exit_code == EXIT_OK, result.stderr
    # two runs are too few for a verdict; the options only have to be accepted
    result = runner.invoke(cli, ["martingale", "--runs", "2", "--epsilon", "1e-9", "--rational"])
    assert result.exit_code in (EXIT_OK, EXIT_CHECK_FAILED), result.stderr


def test_cli_manipulate_with_default_budgets(runner):
    result = runner.invoke(cli, ["manipulate"])
    assert result.exit_code == EXIT_OK, result.stderr
    lines = result.stdout.splitlines()
    assert lines[0].split("\t")[:2] == ["budget", "ticks_held"]
    assert len(lines) == 5


def test_cli_batch_with_no_runs(runner):
    result = runner.invoke(cli, ["batch", "--runs", "0"])
    assert result.exit_code == EXIT_OK
    assert result.stdout == "\t".join(RUN_COLUMNS) + "\n"
