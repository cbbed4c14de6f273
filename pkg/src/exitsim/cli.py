"""Command-line entry point.

One binary with subcommands covering the whole pipeline:

    ingest    raw CSVs -> labeled feature dataset (fits R_t curves as needed)
    fit-rt    cumulative case/death series -> Hill decay fit
    train     labeled dataset -> neural surrogate
    evaluate  surrogate + dataset -> R^2 / RMSE report
    strategy  canned exit schedule for a country
    simulate  schedule + surrogate -> epidemic outcome
    optimize  NSGA-II Pareto front of schedules
    explain   Shapley attribution of one day's R_t prediction
    serve     HTTP service

Artifacts default into --data-dir so the commands compose:
`ingest` then `fit-rt` then `train` then `simulate` then `optimize`
runs green on the shipped fixtures. Flags may be mirrored in a TOML
--config file or EXITSIM_* environment variables.

Exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure.
Failures also emit a machine-readable JSON object on standard error.
"""

from __future__ import annotations

import functools
import json
import pathlib
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import click

from . import epi, ingest, network, nsga, pipeline, rt, shapley, strategy
from .errors import DataError, ExitsimError, InvalidParameterError, NumericalError

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


# --------------------------------------------------------------------------
# output plumbing

def _flatten(doc, prefix="", out=None):
    """JSON document -> {dotted.path: leaf} with list indices as segments."""
    if out is None:
        out = {}
    if isinstance(doc, dict):
        for key in doc:
            _flatten(doc[key], f"{prefix}{key}.", out)
    elif isinstance(doc, list):
        for i, item in enumerate(doc):
            _flatten(item, f"{prefix}{i}.", out)
    else:
        out[prefix[:-1]] = doc
    return out


def _unflatten(pairs):
    """Inverse of _flatten; rebuilds nested dicts/lists from dotted paths."""
    root = {}
    for path, value in pairs:
        parts = path.split(".")
        node = root
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    def rebuild(node):
        if not isinstance(node, dict):
            return node
        keys = list(node)
        if keys and all(k.isdigit() for k in keys):
            return [rebuild(node[k]) for k in sorted(keys, key=int)]
        return {k: rebuild(v) for k, v in node.items()}

    return rebuild(root)


def _csv_cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def doc_to_csv(doc: dict) -> str:
    """Key/value CSV carrying exactly the JSON document's information."""
    lines = ["key,value"]
    for path, value in _flatten(doc).items():
        lines.append(f"{path},{_csv_cell(value)}")
    return "\n".join(lines) + "\n"


def doc_from_csv(text: str) -> dict:
    pairs = []
    for line in text.splitlines()[1:]:
        if not line.strip():
            continue
        path, _, cell = line.partition(",")
        if cell == "":
            value = None
        elif cell in ("true", "false"):
            value = cell == "true"
        else:
            try:
                value = int(cell)
            except ValueError:
                try:
                    value = float(cell)
                except ValueError:
                    value = cell
        pairs.append((path, value))
    return _unflatten(pairs)


def emit(ctx, doc: dict, default_name: str | None = None):
    """Write the artifact as JSON or key/value CSV to --output, a default
    file under --data-dir, or standard output."""
    fmt = ctx.obj["format"]
    text = doc_to_csv(doc) if fmt == "csv" else json.dumps(doc, indent=2) + "\n"
    target = ctx.obj["output"]
    if target is None and default_name is not None:
        suffix = ".csv" if fmt == "csv" else ".json"
        target = str(ctx.obj["data_dir"] / (default_name + suffix))
    if target is None or target == "-":
        click.echo(text, nl=False)
    else:
        path = pathlib.Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        click.echo(f"wrote {path}", err=True)


def handles_errors(fn):
    """Map domain errors to exit codes with a JSON report on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except InvalidParameterError as exc:
            _fail(exc, EXIT_USAGE)
        except DataError as exc:
            _fail(exc, EXIT_DATA)
        except (NumericalError, ExitsimError) as exc:
            _fail(exc, EXIT_NUMERICAL)
        except OSError as exc:
            _fail(exc, EXIT_DATA)

    return wrapper


def _fail(exc, code):
    report = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    click.echo(json.dumps(report), err=True)
    sys.exit(code)


# --------------------------------------------------------------------------
# shared loading helpers

def _data_path(ctx, flag_value, name):
    if flag_value is not None:
        return pathlib.Path(flag_value)
    return ctx.obj["data_dir"] / name


def _read(path: pathlib.Path, what: str) -> str:
    if not path.exists():
        raise DataError(f"{what} not found: {path}")
    return path.read_text()


def _load_mobility(ctx, path=None):
    return ingest.parse_mobility_csv(_read(_data_path(ctx, path, "mobility.csv"), "mobility CSV"))


def _load_demographics(ctx, path=None):
    return ingest.parse_demographics_csv(
        _read(_data_path(ctx, path, "demographics.csv"), "demographics CSV")
    )


def _load_cases(ctx, path=None):
    return ingest.parse_cases_csv(_read(_data_path(ctx, path, "cases.csv"), "cases CSV"))


def _population(demographics, country):
    for d in demographics:
        if d.country == country:
            return d.population
    raise DataError(f"no demographics for country {country!r}")


def _fit_path(ctx, country):
    return ctx.obj["data_dir"] / "fits" / f"{country}.json"


def _load_fit(ctx, country) -> rt.FitResult:
    path = _fit_path(ctx, country)
    if not path.exists():
        raise DataError(f"no R_t fit for {country!r}: {path} (run fit-rt first)")
    return rt.FitResult.from_json(path.read_text())


def _load_dataset(ctx, dataset=None, sidecar=None) -> ingest.Dataset:
    rows_path = _data_path(ctx, dataset, "dataset.jsonl")
    sidecar_path = _data_path(ctx, sidecar, "dataset.sidecar.json")
    rows_text = _read(rows_path, "dataset")
    sidecar_text = sidecar_path.read_text() if sidecar_path.exists() else None
    return ingest.dataset_from_jsonl(rows_text, sidecar_text)


def _write_dataset(ctx, dataset: ingest.Dataset):
    rows_text, sidecar_text = ingest.dataset_to_jsonl(dataset)
    rows_path = ctx.obj["data_dir"] / "dataset.jsonl"
    rows_path.write_text(rows_text)
    (ctx.obj["data_dir"] / "dataset.sidecar.json").write_text(sidecar_text)
    return rows_path


def _load_predictor(ctx, model=None, stub=False):
    if stub:
        from . import synth

        return synth.MonotoneStubPredictor()
    path = _data_path(ctx, model, "model.json")
    if not path.exists():
        raise DataError(f"no trained model: {path} (run train, or pass --stub)")
    return network.TrainedPredictor.from_json(path.read_text())


def _build_context(ctx, country, icu, mobility=None, demographics=None, cases=None,
                   need_fit=True):
    demo = _load_demographics(ctx, demographics)
    records = _load_mobility(ctx, mobility)
    fit = observed = None
    if need_fit:
        fit = _load_fit(ctx, country)
        per_country = _load_cases(ctx, cases)
        observed = ingest.observed_series(per_country, country, _population(demo, country))
    return pipeline.build_context(
        country, records, demo, fit_result=fit, observed=observed, icu_capacity=icu
    )


def _observed_for(ctx, country, cases=None, demographics=None):
    demographics = _load_demographics(ctx, demographics)
    per_country = _load_cases(ctx, cases)
    return ingest.observed_series(per_country, country, _population(demographics, country))


# --------------------------------------------------------------------------
# command group

@click.group()
@click.option("--data-dir", default="fixtures", show_default=True,
              help="Directory holding input CSVs and produced artifacts.")
@click.option("--seed", default=0, show_default=True, help="Random seed.")
@click.option("--output", default=None,
              help='Artifact destination; "-" for standard output.')
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True, help="Artifact serialization format.")
@click.option("--config", default=None, type=click.Path(exists=True),
              help="TOML file mirroring these flags (sections per subcommand).")
@click.pass_context
def main(ctx, data_dir, seed, output, fmt, config):
    """Epidemic exit-strategy engine: fit, train, simulate, optimize."""
    if config is not None:
        with open(config, "rb") as fh:
            loaded = tomllib.load(fh)
        defaults = {k: v for k, v in loaded.items() if not isinstance(v, dict)}
        defaults.update({k: v for k, v in loaded.items() if isinstance(v, dict)})
        ctx.default_map = defaults
        params = ctx.params.copy()
        for key in ("data_dir", "seed", "output"):
            src = ctx.get_parameter_source(key)
            if src == click.core.ParameterSource.DEFAULT and key.replace("_", "-") in loaded:
                params[key] = loaded[key.replace("_", "-")]
            elif src == click.core.ParameterSource.DEFAULT and key in loaded:
                params[key] = loaded[key]
        data_dir, seed, output = params["data_dir"], params["seed"], params["output"]
        if ctx.get_parameter_source("fmt") == click.core.ParameterSource.DEFAULT:
            fmt = loaded.get("format", fmt)
    ctx.obj = {
        "data_dir": pathlib.Path(data_dir),
        "seed": int(seed),
        "output": output,
        "format": fmt,
    }


@main.command("ingest")
@click.option("--mobility", default=None, help="Mobility CSV (default <data-dir>/mobility.csv).")
@click.option("--demographics", default=None, help="Demographics CSV.")
@click.option("--cases", default=None, help="Cumulative cases/deaths CSV.")
@click.option("--split", "split_scheme", type=click.Choice(["random", "region", "temporal"]),
              default="random", show_default=True)
@click.option("--test-fraction", default=0.2, show_default=True)
@click.pass_context
@handles_errors
def ingest_cmd(ctx, mobility, demographics, cases, split_scheme, test_fraction):
    """Build the labeled feature dataset from the raw CSVs.

    Countries without a stored R_t fit are fitted on the fly and the fit
    is cached under <data-dir>/fits/.
    """
    records = _load_mobility(ctx, mobility)
    demo = _load_demographics(ctx, demographics)
    per_country_cases = _load_cases(ctx, cases)

    histories = {}
    for country in sorted({r.country for r in records}):
        fit_file = _fit_path(ctx, country)
        if fit_file.exists():
            fit = rt.FitResult.from_json(fit_file.read_text())
        else:
            observed = ingest.observed_series(
                per_country_cases, country, _population(demo, country)
            )
            fit = rt.fit_hill(
                observed, epi.EpiParams(), rt.initial_state_from_observed(observed),
                seed=ctx.obj["seed"],
            )
            fit_file.parent.mkdir(parents=True, exist_ok=True)
            fit_file.write_text(fit.to_json())
            click.echo(f"fitted R_t for {country} (loss {fit.loss:.3e})", err=True)
        histories[country] = fit.rt_history

    dataset = ingest.assemble_dataset(records, demo, histories)
    dataset = ingest.split(dataset, split_scheme, seed=ctx.obj["seed"],
                           test_fraction=test_fraction)
    rows_path = _write_dataset(ctx, dataset)
    n_train = sum(1 for t in dataset.split if t == "train")
    emit(ctx, {
        "dataset": str(rows_path),
        "sidecar": str(ctx.obj["data_dir"] / "dataset.sidecar.json"),
        "rows": len(dataset),
        "train_rows": n_train,
        "test_rows": len(dataset) - n_train,
        "countries": sorted(histories),
        "split": split_scheme,
    }, default_name=None)


@main.command("fit-rt")
@click.option("--country", required=True)
@click.option("--cases", default=None, help="Cumulative cases/deaths CSV.")
@click.option("--demographics", default=None, help="Demographics CSV (for population).")
@click.option("--case-weight", default=0.5, show_default=True,
              help="Weight of the case term in the joint loss.")
@click.pass_context
@handles_errors
def fit_rt_cmd(ctx, country, cases, demographics, case_weight):
    """Fit the Hill R_t decay to one country's cumulative series."""
    observed = _observed_for(ctx, country, cases, demographics)
    fit = rt.fit_hill(
        observed, epi.EpiParams(), rt.initial_state_from_observed(observed),
        case_weight=case_weight, seed=ctx.obj["seed"],
    )
    fit_file = _fit_path(ctx, country)
    fit_file.parent.mkdir(parents=True, exist_ok=True)
    fit_file.write_text(fit.to_json())

    # Keep an already-assembled dataset consistent with the new fit.
    rows_path = ctx.obj["data_dir"] / "dataset.jsonl"
    if rows_path.exists():
        dataset = _load_dataset(ctx)
        dataset = pipeline.label_dataset(dataset, country, fit.rt_history)
        _write_dataset(ctx, dataset)
        click.echo(f"relabeled {rows_path} for {country}", err=True)

    emit(ctx, json.loads(fit.to_json()), default_name=f"fit_{country}")


@main.command("train")
@click.option("--dataset", default=None, help="Dataset JSONL (default <data-dir>/dataset.jsonl).")
@click.option("--sidecar", default=None, help="Dataset sidecar JSON.")
@click.option("--hidden", default="1000,50", show_default=True,
              help="Comma-separated hidden layer widths.")
@click.option("--epochs", default=500, show_default=True)
@click.option("--learning-rate", default=1e-3, show_default=True)
@click.option("--batch-size", default=64, show_default=True)
@click.option("--patience", default=20, show_default=True)
@click.pass_context
@handles_errors
def train_cmd(ctx, dataset, sidecar, hidden, epochs, learning_rate, batch_size, patience):
    """Train the neural R_t surrogate on the ingested dataset."""
    data = _load_dataset(ctx, dataset, sidecar)
    layers = tuple(int(w) for w in hidden.split(",") if w.strip())
    config = network.NetworkConfig(hidden_layers=layers, seed=ctx.obj["seed"])
    training = network.TrainingConfig(
        max_epochs=epochs, learning_rate=learning_rate, batch_size=batch_size,
        patience=patience,
    )
    predictor = network.train(data, config, training)
    model_path = ctx.obj["data_dir"] / "model.json"
    model_path.write_text(predictor.to_json())
    report = network.evaluate(predictor, data)
    emit(ctx, {
        "model": str(model_path),
        "hidden_layers": list(layers),
        "r2": report.r2,
        "rmse": report.rmse,
        "n_test": report.n_test,
    }, default_name=None)


@main.command("evaluate")
@click.option("--dataset", default=None)
@click.option("--sidecar", default=None)
@click.option("--model", default=None, help="Model JSON (default <data-dir>/model.json).")
@click.pass_context
@handles_errors
def evaluate_cmd(ctx, dataset, sidecar, model):
    """Score a trained surrogate on the dataset's test split."""
    data = _load_dataset(ctx, dataset, sidecar)
    predictor = _load_predictor(ctx, model)
    report = network.evaluate(predictor, data)
    emit(ctx, {"r2": report.r2, "rmse": report.rmse, "n_test": report.n_test},
         default_name="evaluation")


@main.command("strategy")
@click.option("--kind", required=True,
              type=click.Choice(["hard", "progressive", "cyclic", "status_quo"]))
@click.option("--country", required=True)
@click.option("--icu", default=None, type=float, help="ICU capacity override.")
@click.pass_context
@handles_errors
def strategy_cmd(ctx, kind, country, icu):
    """Emit one of the canned exit schedules for a country."""
    context = _build_context(ctx, country, icu, need_fit=_fit_path(ctx, country).exists())
    schedule = strategy.canned_strategy(kind, context)
    emit(ctx, json.loads(schedule.to_json()), default_name=f"schedule_{kind}_{country}")


@main.command("simulate")
@click.option("--country", required=True)
@click.option("--schedule", "schedule_path", default=None,
              help="Schedule JSON produced by `strategy` or `optimize`.")
@click.option("--kind", default=None,
              type=click.Choice(["hard", "progressive", "cyclic", "status_quo"]),
              help="Canned schedule to simulate instead of --schedule.")
@click.option("--model", default=None)
@click.option("--stub", is_flag=True, help="Use the monotone stub predictor.")
@click.option("--icu", default=None, type=float)
@click.pass_context
@handles_errors
def simulate_cmd(ctx, country, schedule_path, kind, model, stub, icu):
    """Simulate a restriction schedule and report deaths, mobility and ICU load."""
    if (schedule_path is None) == (kind is None):
        raise InvalidParameterError("pass exactly one of --schedule or --kind")
    context = _build_context(ctx, country, icu)
    predictor = _load_predictor(ctx, model, stub)
    if kind is not None:
        schedule = strategy.canned_strategy(kind, context)
    else:
        schedule = strategy.PolicySchedule.from_json(
            _read(pathlib.Path(schedule_path), "schedule"))
    outcome = strategy.simulate_schedule(schedule, context, predictor, epi.EpiParams())
    emit(ctx, json.loads(outcome.to_json()), default_name=f"outcome_{country}")


@main.command("optimize")
@click.option("--country", required=True)
@click.option("--population-size", default=100, show_default=True)
@click.option("--generations", default=100, show_default=True)
@click.option("--model", default=None)
@click.option("--stub", is_flag=True, help="Use the monotone stub predictor.")
@click.option("--icu", default=None, type=float)
@click.pass_context
@handles_errors
def optimize_cmd(ctx, country, population_size, generations, model, stub, icu):
    """Search for Pareto-optimal schedules under the ICU constraint."""
    context = _build_context(ctx, country, icu)
    predictor = _load_predictor(ctx, model, stub)
    config = nsga.SearchConfig(
        population_size=population_size, generations=generations, seed=ctx.obj["seed"]
    )
    front = nsga.optimize(context, predictor, epi.EpiParams(), config)
    doc = json.loads(front.to_json())
    doc["country"] = country
    emit(ctx, doc, default_name=f"front_{country}")


@main.command("explain")
@click.option("--country", required=True)
@click.option("--date", required=True, type=click.DateTime(formats=["%Y-%m-%d"]))
@click.option("--model", default=None)
@click.option("--stub", is_flag=True)
@click.option("--icu", default=None, type=float)
@click.option("--n-permutations", default=256, show_default=True)
@click.pass_context
@handles_errors
def explain_cmd(ctx, country, date, model, stub, icu, n_permutations):
    """Shapley attribution for the surrogate's R_t prediction on one day."""
    context = _build_context(ctx, country, icu)
    predictor = _load_predictor(ctx, model, stub)
    schedule = strategy.canned_strategy("status_quo", context)
    features, _ = strategy.forecast_features(schedule, context)
    day = (date.date() - schedule.start_date).days
    if day < 0 or day >= len(features):
        raise DataError(f"no feature row for {country} on {date.date()}")
    attribution = shapley.shapley_sampled(
        predictor, features[day], features,
        n_permutations=n_permutations, seed=ctx.obj["seed"],
        feature_names=ingest.FEATURE_NAMES,
    )
    emit(ctx, json.loads(attribution.to_json()), default_name=f"attribution_{country}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--countries", default=None,
              help="Comma-separated country codes to expose (default: all with fits).")
@click.option("--model", default=None)
@click.option("--stub", is_flag=True, help="Serve with the stub predictor.")
@click.pass_context
@handles_errors
def serve_cmd(ctx, host, port, countries, model, stub):
    """Run the HTTP service over the artifacts in --data-dir."""
    import uvicorn

    from . import service

    data_dir = ctx.obj["data_dir"]
    if countries is not None:
        codes = [c.strip() for c in countries.split(",") if c.strip()]
    else:
        codes = sorted(p.stem for p in (data_dir / "fits").glob("*.json")) \
            if (data_dir / "fits").exists() else []
    contexts = {}
    for code in codes:
        contexts[code] = _build_context(ctx, code, None)
    try:
        predictor = _load_predictor(ctx, model, stub)
    except DataError:
        from . import synth

        click.echo("no trained model found; serving the stub predictor", err=True)
        predictor = synth.MonotoneStubPredictor()
    if not contexts:
        from . import synth

        click.echo("no fitted countries found; serving fixture contexts", err=True)
        contexts = {code: synth.stub_context(code) for code in synth.FIXTURE_COUNTRIES}
    app = service.create_app(
        service.AppState(str(data_dir), contexts, predictor)
    )
    uvicorn.run(app, host=host, port=port)


def cli_main():
    main(auto_envvar_prefix="EXITSIM")


if __name__ == "__main__":
    cli_main()
