"""Command-line pipeline: fetch -> analyze -> benchmark.

Exit codes: 0 ok, 2 network failure, 3 parse failure, 4 missing input,
5 model failure. Every output byte is determined by (config, seed, input
CSV); the resolved config is written next to the results.
"""

from __future__ import annotations

import argparse
import pathlib
import sys

from . import analysis, metrics, models, stacking
from .config import BENCHMARK_ALGORITHMS, RunConfig, config_to_text, load_config
from .ingest import (
    FetchError,
    IngestError,
    clean_missing,
    fetch_power_daily,
    parse_power_csv,
    serialize_power_csv,
)
from .preprocess import PrecipClasses, TempQuantiles, build_labeled_dataset
from .seeding import derive_seed

EXIT_OK = 0
EXIT_NETWORK = 2
EXIT_PARSE = 3
EXIT_MISSING_INPUT = 4
EXIT_MODEL = 5


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    return code


def _resolve_config(args):
    config = RunConfig()
    if args.config is not None:
        if not pathlib.Path(args.config).exists():
            raise FileNotFoundError(args.config)
        config = load_config(args.config, base=config)
    if getattr(args, "target", None):
        config.target = args.target
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "lag", None) is not None:
        config.lag = args.lag
    if getattr(args, "out", None):
        config.out_dir = args.out
    return config.validate()


def _out_dir(config):
    out = pathlib.Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_table(config, offline_csv):
    """Cleaned WeatherTable from --offline or <out>/cleaned.csv."""
    path = pathlib.Path(offline_csv) if offline_csv else pathlib.Path(config.out_dir) / "cleaned.csv"
    if not path.exists():
        raise FileNotFoundError(path)
    table = parse_power_csv(path.read_text())
    return clean_missing(table, policy=config.cleaning_policy)


def cmd_fetch(config, offline_csv=None):
    out = _out_dir(config)
    if offline_csv:
        source = pathlib.Path(offline_csv)
        if not source.exists():
            return _fail(EXIT_MISSING_INPUT, f"offline CSV not found: {source}")
        raw_text = source.read_text()
    else:
        try:
            raw_text = fetch_power_daily(
                config.latitude, config.longitude, config.start, config.end
            )
        except FetchError as exc:
            return _fail(EXIT_NETWORK, f"fetch failed: {exc}")
    try:
        table = parse_power_csv(raw_text)
        cleaned = clean_missing(table, policy=config.cleaning_policy)
    except IngestError as exc:
        return _fail(EXIT_PARSE, f"parse failed: {exc}")
    (out / "raw_power.csv").write_text(raw_text)
    (out / "cleaned.csv").write_text(serialize_power_csv(cleaned))
    print(f"raw rows: {len(table)}")
    print(f"cleaned rows: {len(cleaned)} (policy {config.cleaning_policy})")
    return EXIT_OK


def cmd_analyze(config, offline_csv=None):
    out = _out_dir(config)
    try:
        table = _load_table(config, offline_csv)
    except FileNotFoundError as exc:
        return _fail(EXIT_MISSING_INPUT, f"no cleaned CSV at {exc}; run fetch first")
    except IngestError as exc:
        return _fail(EXIT_PARSE, f"parse failed: {exc}")

    corr = analysis.pearson_matrix(table)
    (out / "corr.csv").write_text(analysis.correlation_to_csv(corr))
    for feature in ("PRECTOT", "T2M"):
        density = analysis.density_estimate(table.column(feature), method="gaussian_kde")
        (out / f"density_{feature}.csv").write_text(analysis.density_to_csv(density))
        profile = analysis.monthly_profile(table, feature)
        (out / f"monthly_{feature}.csv").write_text(analysis.monthly_to_csv(profile))
    print(f"analysis written to {out} ({len(table)} rows)")
    for name, r in corr.top_partners("PRECTOT", count=4):
        print(f"PRECTOT ~ {name}: r={r:+.3f}")
    return EXIT_OK


def _slug(name):
    return name.lower().replace(" ", "_")


def _benchmark_models(config, X_train, y_train, n_classes):
    """(algorithm name, trainer thunk) pairs in canonical table order.

    Trainers run lazily inside the benchmark loop so a failure is
    attributed to the right algorithm.
    """
    master = config.seed

    def plain(learner_config, name):
        seed = derive_seed(master, f"model.{name}")
        return lambda: models.train(learner_config, X_train, y_train, n_classes, seed=seed)

    pairs = [
        (BENCHMARK_ALGORITHMS[0], plain(config.gbm_config(), BENCHMARK_ALGORITHMS[0])),
        (BENCHMARK_ALGORITHMS[1], plain(config.adaboost_config(), BENCHMARK_ALGORITHMS[1])),
        (BENCHMARK_ALGORITHMS[2], plain(config.mlp_config(), BENCHMARK_ALGORITHMS[2])),
    ]
    stack_names = dict(zip(("forest", "mlp", "knn"), BENCHMARK_ALGORITHMS[3:]))
    if config.stacking_mode == "meta":
        # the three stacks share one base set and fold plan, so the
        # out-of-fold features and the refitted bases are computed once,
        # memoized inside the first stack trainer that runs
        shared = {}

        def shared_parts():
            if not shared:
                spec = config.stacking_spec("forest")
                meta_features, _ = stacking.oof_meta_features(
                    spec, X_train, y_train, n_classes=n_classes
                )
                shared["meta"] = meta_features
                shared["bases"] = stacking.refit_bases(spec, X_train, y_train, n_classes)
            return shared["meta"], shared["bases"]

        def stacked(meta_kind):
            def trainer():
                meta_features, bases = shared_parts()
                spec = config.stacking_spec(meta_kind)
                return stacking.assemble(spec, bases, meta_features, y_train, n_classes)

            return trainer

    else:

        def stacked(meta_kind):
            spec = config.stacking_spec(meta_kind)
            return lambda: stacking.fit_stacking(spec, X_train, y_train, n_classes=n_classes)

    pairs.extend((name, stacked(meta_kind)) for meta_kind, name in stack_names.items())
    return pairs


def _predict(model, X):
    if isinstance(model, stacking.StackingModel):
        return stacking.predict_stacking(model, X)
    return model.predict_all(X)


def cmd_benchmark(config, offline_csv=None):
    out = _out_dir(config)
    try:
        table = _load_table(config, offline_csv)
    except FileNotFoundError as exc:
        return _fail(EXIT_MISSING_INPUT, f"no cleaned CSV at {exc}; run fetch first")
    except IngestError as exc:
        return _fail(EXIT_PARSE, f"parse failed: {exc}")

    if config.target == "precipitation":
        scheme = PrecipClasses(thresholds=tuple(config.precip_thresholds))
    else:
        scheme = TempQuantiles(k=config.temp_classes)
    dataset, split = build_labeled_dataset(
        table,
        config.target,
        scheme,
        test_fraction=config.test_fraction,
        seed=derive_seed(config.seed, "split"),
        lag=config.lag,
    )
    X_train = dataset.features[split.train_idx]
    y_train = dataset.labels[split.train_idx]
    X_test = dataset.features[split.test_idx]
    y_test = dataset.labels[split.test_idx]
    k = dataset.n_classes

    (out / "run_config.txt").write_text(config_to_text(config))
    rows = []
    current = None
    try:
        for name, trainer in _benchmark_models(config, X_train, y_train, k):
            current = name
            model = trainer()
            predicted, _ = _predict(model, X_test)
            cm = metrics.confusion_matrix(y_test, predicted, k, dataset.class_names)
            report = metrics.classification_scores(cm)
            rows.append((name, report))
            (out / f"confusion_{_slug(name)}.csv").write_text(metrics.confusion_to_csv(cm))
            print(f"{name}: accuracy {report.accuracy * 100:.2f}%")
    except Exception as exc:  # partial results stay on disk
        if rows:
            _, csv_text = metrics.render_report(rows, target=config.target)
            (out / "metrics.csv").write_text(csv_text)
        return _fail(EXIT_MODEL, f"model {current!r} failed: {exc}")

    table_text, csv_text = metrics.render_report(rows, target=config.target)
    (out / "metrics.csv").write_text(csv_text)
    (out / "report.txt").write_text(table_text)
    print()
    print(table_text, end="")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wxbench",
        description="Daily-weather classification benchmark on NASA POWER point data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("fetch", "download (or import) the station CSV and clean it"),
        ("analyze", "correlation, density and monthly-profile CSVs"),
        ("benchmark", "train all six models and write the result tables"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="flat key = value config file")
        cmd.add_argument("--target", choices=("precipitation", "temperature"))
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--lag", type=int, help="predict the target N days ahead")
        cmd.add_argument("--out", help="output directory (default: runs)")
        cmd.add_argument(
            "--offline",
            metavar="CSV",
            help="use this POWER-format CSV instead of the network/out-dir file",
        )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
    except FileNotFoundError as exc:
        return _fail(EXIT_MISSING_INPUT, f"config file not found: {exc}")
    except ValueError as exc:
        return _fail(EXIT_MISSING_INPUT, f"bad config: {exc}")
    handler = {"fetch": cmd_fetch, "analyze": cmd_analyze, "benchmark": cmd_benchmark}
    return handler[args.command](config, offline_csv=args.offline)


if __name__ == "__main__":
    sys.exit(main())
