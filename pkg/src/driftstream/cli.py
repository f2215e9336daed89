"""Command-line entry point: ``driftstream {sample,synth,compare}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal invariant violation or model failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict

import numpy as np

from .core import ConfigError, DataError, DriftStreamError, InvariantError, derive_seed
from .ensembles import EnsembleConfig, build_ensemble
from .evaluation import ModelFailure, holdout_split, prequential_run, write_curve_csv, write_results_csv
from .pwpae import PWPAEClassifier, WeightTraceWriter
from .sampling import KMeansConfig, cluster_sample_indices
from .streams import (ArrayStream, ConceptSwitchConfig, generate_concept_switch, minmax_scale,
                      open_csv_stream, write_csv)
from .trees import ExtremelyFastDecisionTreeClassifier, HoeffdingTreeClassifier, HoeffdingTreeConfig

log = logging.getLogger("driftstream")

MODEL_NAMES = ("ht", "efdt", "lb", "arf-adwin", "arf-ddm", "srp-adwin", "srp-ddm", "pwpae")


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _fraction(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--fraction must be a number, got {text!r}") from None
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"--fraction must be in (0, 1], got {text}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def make_model(name: str, seed: int, n_classes: int, args) -> object:
    """Model registry. Standalone ensembles use the same derived seeds as the ones inside PWPAE."""
    tree = HoeffdingTreeConfig()
    if name == "ht":
        return HoeffdingTreeClassifier(**tree.as_params(), n_classes=n_classes,
                                       random_state=derive_seed(seed, name))
    if name == "efdt":
        return ExtremelyFastDecisionTreeClassifier(**tree.as_params(), n_classes=n_classes,
                                                   random_state=derive_seed(seed, name))
    if name == "pwpae":
        return PWPAEClassifier(epsilon=args.epsilon, n_members=args.members, poisson_lambda=args.lam,
                               adwin_delta=args.adwin_delta, ddm_warn=args.ddm_warn, ddm_drift=args.ddm_drift,
                               subspace_fraction=args.subspace_fraction, **tree.as_params(),
                               n_classes=n_classes, random_state=seed)
    cfg = EnsembleConfig(n_members=args.members, poisson_lambda=args.lam, adwin_delta=args.adwin_delta,
                         ddm_warn=args.ddm_warn, ddm_drift=args.ddm_drift,
                         subspace_fraction=args.subspace_fraction, tree=tree, n_classes=n_classes,
                         seed=derive_seed(seed, name))
    if name == "lb":
        return build_ensemble("lb", cfg)
    if name in MODEL_NAMES:
        kind, detector = name.split("-")
        return build_ensemble(kind, EnsembleConfig(**{**cfg.__dict__, "detector": detector}))
    raise ConfigError(f"unknown model {name!r}; valid names: {', '.join(MODEL_NAMES)}")


def _parse_models(text: str) -> list[str]:
    names = [n.strip().lower() for n in text.split(",") if n.strip()]
    if not names:
        raise ConfigError("--models is empty")
    bad = [n for n in names if n not in MODEL_NAMES]
    if bad:
        raise ConfigError(f"unknown model(s) {', '.join(bad)}; valid names: {', '.join(MODEL_NAMES)}")
    if len(set(names)) != len(names):
        raise ConfigError("--models lists a model twice")
    return names


def _synth_config(args) -> ConceptSwitchConfig:
    width = args.width if args.width is not None else (0 if args.kind == "abrupt" else 1000)
    position = args.position if args.position is not None else args.length // 2
    cfg = ConceptSwitchConfig(length=args.length, n_features=args.features, drift_kind=args.kind,
                              drift_position=position, drift_width=width, noise=args.noise, seed=args.seed)
    cfg.validate()
    return cfg


# -- commands -------------------------------------------------------------------------------------

def cmd_sample(args) -> int:
    stream = open_csv_stream(args.input, args.label, limit=args.limit)
    rows = stream.to_list()
    X = np.asarray([r.features for r in rows], dtype=float)
    y = np.asarray([r.label for r in rows], dtype=np.int64)
    cfg = KMeansConfig(k=args.k, seed=args.seed, scale=args.scale)
    res = cluster_sample_indices(X, args.fraction, cfg)
    names = stream.class_names
    write_csv(args.output, (rows[i] for i in res.indices.tolist()), stream.schema, names)

    def ratio(labels):
        counts = np.bincount(labels, minlength=len(names))
        return {names[c]: float(counts[c] / max(1, len(labels))) for c in range(len(names))}

    _write_json(args.output + ".meta.json", {
        "command": "sample",
        "input": os.path.basename(args.input),
        "label": args.label,
        "fraction": args.fraction,
        "limit": args.limit,
        "kmeans": asdict(cfg) | {"effective_k": res.cluster_model.k},
        "n_input": len(rows),
        "n_output": int(len(res.indices)),
        "cluster_sizes": res.per_cluster_sizes,
        "sampled_per_cluster": res.per_cluster_counts,
        "class_ratio_before": ratio(y),
        "class_ratio_after": ratio(y[res.indices]),
        "features_clustered": list(stream.schema.feature_names),
    })
    print(f"sampled {len(res.indices)} of {len(rows)} records -> {args.output}")
    return 0


def cmd_synth(args) -> int:
    cfg = _synth_config(args)
    stream = generate_concept_switch(cfg)
    write_csv(args.out, stream, stream.schema)
    meta = {k: v for k, v in asdict(cfg).items() if k not in ("concept_a", "concept_b")}
    meta |= {"command": "synth", "concept_a": asdict(stream.concept_a), "concept_b": asdict(stream.concept_b)}
    _write_json(args.out + ".meta.json", meta)
    print(f"wrote {cfg.length} instances ({cfg.drift_kind} drift at {cfg.drift_position}) -> {args.out}")
    return 0


def cmd_compare(args) -> int:
    models = _parse_models(args.models)
    if (args.input is None) == (args.synthetic is None):
        raise UsageError("compare needs exactly one of --input or --synthetic")
    if args.input is not None:
        if not args.label:
            raise UsageError("--label is required with --input")
        classes = None
        if args.positive_label is not None:
            probe = open_csv_stream(args.input, args.label, limit=args.limit)
            seen = list(dict.fromkeys(label for label in _raw_labels(probe)))
            if args.positive_label not in seen:
                raise DataError(f"--positive-label {args.positive_label!r} not found in column {args.label!r}")
            classes = [c for c in seen if c != args.positive_label]
            classes.insert(1, args.positive_label)
        stream = open_csv_stream(args.input, args.label, limit=args.limit, classes=classes)
        rows = stream.to_list()
        schema = stream.schema
        source = {"input": os.path.basename(args.input), "label": args.label, "classes": stream.class_names}
    else:
        args.kind = args.synthetic
        cfg = _synth_config(args)
        synth = generate_concept_switch(cfg)
        rows = synth.to_list()
        if args.limit is not None:
            rows = rows[:args.limit]
        schema = synth.schema
        source = {"synthetic": {k: v for k, v in asdict(cfg).items() if k not in ("concept_a", "concept_b")}}
    if args.scale == "minmax":
        X = minmax_scale(np.asarray([r.features for r in rows]))
        rows = list(ArrayStream(X, [r.label for r in rows], schema))
    warmup, test = holdout_split(rows, args.train_fraction)
    os.makedirs(args.out, exist_ok=True)
    n_classes = max(2, schema.class_count)
    config = {
        "command": "compare", "source": source, "models": models, "seed": args.seed,
        "train_fraction": args.train_fraction, "scale": args.scale, "limit": args.limit,
        "n_warmup": len(warmup), "n_test": len(test), "n_classes": n_classes,
        "positive_class_index": 1, "checkpoint_every": 50,
        "params": {"adwin_delta": args.adwin_delta, "ddm_warn": args.ddm_warn, "ddm_drift": args.ddm_drift,
                   "members": args.members, "lambda": args.lam, "subspace_fraction": args.subspace_fraction,
                   "epsilon": args.epsilon, "tree": asdict(HoeffdingTreeConfig())},
        "timing": "avg_test_time_ms is wall-clock predict-only latency",
    }
    reports = []
    for name in models:
        model = make_model(name, args.seed, n_classes, args)
        config.setdefault("model_params", {})[name] = model.get_params()
        hook = None
        trace = None
        if name == "pwpae" and args.weight_trace:
            trace = WeightTraceWriter(os.path.join(args.out, "pwpae_weights.csv"))
            hook = lambda t, m=model, w=trace: w.write(m.snapshot())  # noqa: E731
        try:
            report = prequential_run(model, warmup, test, model_name=name, seed=args.seed,
                                     n_features=schema.feature_count, after_predict=hook)
        finally:
            if trace is not None:
                trace.close()
        write_curve_csv(report, os.path.join(args.out, f"curve_{name}.csv"))
        reports.append(report)
        log.info("%s done: accuracy %.4f", name, report.accuracy)
    write_results_csv(reports, os.path.join(args.out, "results.csv"))
    _write_json(os.path.join(args.out, "config.json"), config)
    print(format_table(reports))
    return 0


def _raw_labels(stream):
    for _ in stream:
        pass
    return stream.class_names


def format_table(reports) -> str:
    head = f"{'Method':<12}{'Acc (%)':>9}{'Prec (%)':>10}{'Rec (%)':>9}{'F1 (%)':>9}{'Test (ms)':>11}"
    lines = [head, "-" * len(head)]
    for r in reports:
        def pct(v):
            return f"{100 * v:.2f}" if v is not None else "-"
        lines.append(f"{r.model_name:<12}{pct(r.accuracy):>9}{pct(r.precision):>10}{pct(r.recall):>9}"
                     f"{pct(r.f1):>9}{r.avg_test_time_ms:>11.3f}")
    return "\n".join(lines)


# -- parser ---------------------------------------------------------------------------------------

def _add_synth_flags(p):
    p.add_argument("--length", type=_positive_int, default=10_000)
    p.add_argument("--features", type=_positive_int, default=10)
    p.add_argument("--position", type=int, default=None, help="drift start index (default: length / 2)")
    p.add_argument("--width", type=int, default=None, help="gradual drift width (default 1000; 0 for abrupt)")
    p.add_argument("--noise", type=float, default=0.05)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="driftstream", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="k-means cluster sampling of a CSV file")
    p.add_argument("--input", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--fraction", type=_fraction, default=0.01)
    p.add_argument("--k", type=_positive_int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", choices=("minmax", "none"), default="minmax")
    p.add_argument("--limit", type=_positive_int, default=None)
    p.add_argument("--output", "--out", dest="output", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("synth", help="write a synthetic concept-switch stream")
    p.add_argument("--kind", choices=("abrupt", "gradual"), default="abrupt")
    _add_synth_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("compare", help="prequential comparison of several models on one stream")
    p.add_argument("--input")
    p.add_argument("--label")
    p.add_argument("--positive-label", default=None, help="label value mapped to the positive class index 1")
    p.add_argument("--synthetic", choices=("abrupt", "gradual"), default=None)
    _add_synth_flags(p)
    p.add_argument("--models", default=",".join(MODEL_NAMES))
    p.add_argument("--train-fraction", type=float, default=0.10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--adwin-delta", type=float, default=0.002)
    p.add_argument("--ddm-warn", type=float, default=2.0)
    p.add_argument("--ddm-drift", type=float, default=3.0)
    p.add_argument("--members", type=_positive_int, default=10)
    p.add_argument("--lambda", dest="lam", type=float, default=6.0)
    p.add_argument("--subspace-fraction", type=float, default=0.6)
    p.add_argument("--epsilon", type=float, default=0.001)
    p.add_argument("--limit", type=_positive_int, default=None)
    p.add_argument("--scale", choices=("minmax", "none"), default="none")
    p.add_argument("--weight-trace", action="store_true", help="also write pwpae_weights.csv")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        return args.func(args)
    except (ModelFailure, InvariantError) as exc:
        print(f"driftstream: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"driftstream: data error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, DriftStreamError) as exc:
        print(f"driftstream: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
