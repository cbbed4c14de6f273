import json
import shutil

import numpy as np
import pytest
from click.testing import CliRunner

from exitsim import cli

FIXTURES = "fixtures"


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Copy of the shipped fixtures with ingest already run (fits + dataset)."""
    path = tmp_path_factory.mktemp("cli") / "data"
    shutil.copytree(FIXTURES, path)
    result = CliRunner().invoke(cli.main, ["--data-dir", str(path), "ingest"])
    assert result.exit_code == 0, result.output
    return path


def run(*args, **kwargs):
    return CliRunner().invoke(cli.main, list(args), **kwargs)


# ----------------------------------------------------------------- happy path

def test_ingest_summary(workdir):
    result = run("--data-dir", str(workdir), "--output", "-", "ingest")
    assert result.exit_code == 0
    doc = json.loads(result.stdout)
    assert doc["rows"] == doc["train_rows"] + doc["test_rows"]
    assert set(doc["countries"]) == {"IT", "LU"}
    assert (workdir / "dataset.jsonl").exists()
    assert (workdir / "fits" / "LU.json").exists()


def test_fit_rt_recovers_fixture_dynamics(workdir):
    result = run("--data-dir", str(workdir), "--output", "-", "fit-rt", "--country", "LU")
    assert result.exit_code == 0
    doc = json.loads(result.stdout)
    assert doc["loss"] <= 1e-8
    assert doc["params"]["r0"] > 1.0


def test_strategy_progressive_shape(workdir):
    result = run("--data-dir", str(workdir), "--output", "-",
                 "strategy", "--kind", "progressive", "--country", "LU")
    assert result.exit_code == 0
    levels = np.asarray(json.loads(result.stdout)["levels"])
    assert levels.shape == (6, 11)
    assert levels.min() >= 0.0 and levels.max() <= 100.0
    # each category steps down period over period until fully open
    assert np.all(np.diff(levels, axis=1) <= 1e-9)


def test_simulate_canned_schedule_with_stub(workdir):
    result = run("--data-dir", str(workdir), "--output", "-",
                 "simulate", "--country", "LU", "--kind", "status_quo", "--stub")
    assert result.exit_code == 0
    doc = json.loads(result.stdout)
    assert doc["feasible"] is True
    assert len(doc["rt_series"]) == 153


def test_optimize_small_budget(workdir):
    result = run("--data-dir", str(workdir), "--output", "-",
                 "optimize", "--country", "LU", "--stub",
                 "--population-size", "8", "--generations", "2")
    assert result.exit_code == 0
    doc = json.loads(result.stdout)
    assert doc["country"] == "LU"
    assert doc["feasible_found"] is True
    assert all(len(s["genome"]) == 66 for s in doc["solutions"])


def test_explain_deterministic_per_seed(workdir):
    args = ("--output", "-", "explain", "--country", "LU",
            "--date", "2020-05-15", "--stub", "--n-permutations", "200")
    a = run("--data-dir", str(workdir), "--seed", "5", *args)
    b = run("--data-dir", str(workdir), "--seed", "5", *args)
    c = run("--data-dir", str(workdir), "--seed", "6", *args)
    assert a.exit_code == 0
    doc = json.loads(a.stdout)
    assert len(doc["phi"]) == 32
    assert a.stdout == b.stdout
    assert c.stdout != a.stdout


# ---------------------------------------------------------------- exit codes

def test_missing_required_option_is_usage_error(workdir):
    result = run("--data-dir", str(workdir), "simulate", "--kind", "hard", "--stub")
    assert result.exit_code == 2
    assert "--country" in result.stderr


def test_conflicting_schedule_flags_are_usage_error(workdir):
    result = run("--data-dir", str(workdir), "simulate", "--country", "LU", "--stub")
    assert result.exit_code == 2
    report = json.loads(result.stderr.strip().splitlines()[-1])
    assert report["error"] == "InvalidParameterError"


def test_missing_data_reports_json_on_stderr(tmp_path):
    result = run("--data-dir", str(tmp_path), "fit-rt", "--country", "LU")
    assert result.exit_code == 3
    report = json.loads(result.stderr.strip().splitlines()[-1])
    assert report["exit_code"] == 3
    assert "not found" in report["message"]


def test_unknown_country_is_data_error(workdir):
    result = run("--data-dir", str(workdir), "fit-rt", "--country", "ZZ")
    assert result.exit_code == 3


# ------------------------------------------------------------- serialization

def test_csv_output_round_trips_to_json(workdir, tmp_path):
    common = ("--data-dir", str(workdir), "strategy", "--kind", "cyclic", "--country", "LU")
    as_json = run("--output", str(tmp_path / "s.json"), *common)
    as_csv = run("--output", str(tmp_path / "s.csv"), "--format", "csv", *common)
    assert as_json.exit_code == 0 and as_csv.exit_code == 0
    doc = json.loads((tmp_path / "s.json").read_text())
    csv_text = (tmp_path / "s.csv").read_text()
    assert csv_text.startswith("key,value\n")
    recovered = cli.doc_from_csv(csv_text)
    assert set(recovered) == set(doc)
    assert np.allclose(recovered["levels"], doc["levels"], atol=1e-12)
    assert recovered["country"] == doc["country"]


def test_flatten_unflatten_inverse():
    doc = {"a": {"b": [1.5, 2.0]}, "c": "x", "flag": True, "none": None}
    assert cli.doc_from_csv(cli.doc_to_csv(doc)) == doc


def test_default_artifact_lands_in_data_dir(workdir):
    result = run("--data-dir", str(workdir),
                 "strategy", "--kind", "hard", "--country", "LU")
    assert result.exit_code == 0
    assert (workdir / "schedule_hard_LU.json").exists()


# ------------------------------------------------------------- configuration

def test_toml_config_supplies_defaults(workdir, tmp_path):
    config = tmp_path / "exitsim.toml"
    config.write_text(
        f'data-dir = "{workdir}"\noutput = "-"\n\n[simulate]\nkind = "status_quo"\nstub = true\n'
    )
    result = run("--config", str(config), "simulate", "--country", "LU")
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["feasible"] is True


def test_flags_beat_config_file(workdir, tmp_path):
    config = tmp_path / "exitsim.toml"
    config.write_text('data-dir = "/nonexistent"\n')
    result = run("--config", str(config), "--data-dir", str(workdir), "--output", "-",
                 "strategy", "--kind", "hard", "--country", "LU")
    assert result.exit_code == 0


def test_environment_prefix_sets_data_dir(workdir):
    result = CliRunner().invoke(
        cli.main,
        ["--output", "-", "strategy", "--kind", "hard", "--country", "LU"],
        env={"EXITSIM_DATA_DIR": str(workdir)},
        auto_envvar_prefix="EXITSIM",
    )
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["country"] == "LU"
