"""Hold-out warm-up, prequential (test-then-train) evaluation and binary metrics."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import ConfigError, DataError, DriftStreamError, LabeledInstance

POSITIVE_CLASS = 1
CHECKPOINT_EVERY = 50


class ModelFailure(DriftStreamError):
    """A model raised while being evaluated."""

    def __init__(self, model_name: str, index: int, cause: BaseException):
        super().__init__(f"model {model_name!r} failed at test instance {index}: {cause!r}")
        self.model_name = model_name
        self.index = index


@dataclass
class ConfusionCounts:
    """Binary confusion counts; class index 1 ("abnormal") is positive."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def add(self, y_true: int, y_pred: int, positive: int = POSITIVE_CLASS) -> None:
        if y_true == positive:
            if y_pred == positive:
                self.tp += 1
            else:
                self.fn += 1
        elif y_pred == positive:
            self.fp += 1
        else:
            self.tn += 1

    @classmethod
    def from_log(cls, y_true: Sequence[int], y_pred: Sequence[int], positive: int = POSITIVE_CLASS):
        c = cls()
        for t, p in zip(y_true, y_pred):
            c.add(t, p, positive)
        return c


def compute_metrics(c: ConfusionCounts) -> dict[str, float]:
    total = c.total
    if total <= 0:
        raise ConfigError("no instances evaluated")
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"accuracy": (c.tp + c.tn) / total, "precision": precision, "recall": recall, "f1": f1}


def holdout_split(data: Sequence, train_fraction: float = 0.10):
    """First floor(fraction * n) records for warm-up, the rest for testing; order is kept."""
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {train_fraction}")
    data = list(data)
    cut = math.floor(train_fraction * len(data))
    if cut == 0 or cut == len(data):
        raise ConfigError(f"split of {len(data)} records at fraction {train_fraction} leaves an empty partition")
    return data[:cut], data[cut:]


def config_fingerprint(model) -> str:
    params = model.get_params() if hasattr(model, "get_params") else {}
    blob = json.dumps({"model": type(model).__name__, "params": params}, sort_keys=True, default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class PrequentialReport:
    model_name: str
    curve: list[tuple[int, float]]
    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None
    mean_test_time: float
    config_fingerprint: str = ""
    seed: int | None = None
    y_true: list[int] = field(default_factory=list, repr=False)
    y_pred: list[int] = field(default_factory=list, repr=False)
    confusion: ConfusionCounts | None = None

    @property
    def avg_test_time_ms(self) -> float:
        return self.mean_test_time * 1e3

    def summary_row(self) -> dict:
        return {"model": self.model_name, "accuracy": self.accuracy, "precision": self.precision,
                "recall": self.recall, "f1": self.f1, "avg_test_time_ms": self.avg_test_time_ms}


def prequential_run(model, warmup: Iterable[LabeledInstance], test_stream: Iterable[LabeledInstance], *,
                    model_name: str | None = None, seed: int | None = None, n_features: int | None = None,
                    checkpoint_every: int = CHECKPOINT_EVERY, positive: int = POSITIVE_CLASS,
                    after_predict=None) -> PrequentialReport:
    """Train on ``warmup`` silently, then predict-record-train on every test instance.

    Only the prediction call is timed. The curve holds cumulative accuracy every
    ``checkpoint_every`` test instances and at the last one. Precision, recall
    and F1 are left as None when more than two classes occur.
    ``after_predict(t)``, if given, runs between prediction and training of
    test instance ``t`` (1-based).
    """
    name = model_name or type(model).__name__
    for x, y in warmup:
        if n_features is not None and len(x) != n_features:
            raise DataError(f"warm-up instance has {len(x)} features, expected {n_features}")
        model.learn_one(x, y)
    y_true: list[int] = []
    y_pred: list[int] = []
    curve: list[tuple[int, float]] = []
    correct = 0
    elapsed = 0.0
    clock = time.perf_counter
    t = 0
    for x, y in test_stream:
        if n_features is not None and len(x) != n_features:
            raise DataError(f"test instance {t + 1} has {len(x)} features, expected {n_features}")
        t += 1
        try:
            start = clock()
            pred = model.predict_one(x)
            elapsed += clock() - start
            y_true.append(y)
            y_pred.append(pred)
            correct += pred == y
            if t % checkpoint_every == 0:
                curve.append((t, correct / t))
            if after_predict is not None:
                after_predict(t)
            model.learn_one(x, y)
        except DriftStreamError:
            raise
        except Exception as exc:
            raise ModelFailure(name, t, exc) from exc
    if t == 0:
        raise ConfigError("test stream is empty")
    if t % checkpoint_every:
        curve.append((t, correct / t))
    binary = max(max(y_true), max(y_pred)) <= 1 and getattr(model, "n_classes", 2) <= 2
    confusion = ConfusionCounts.from_log(y_true, y_pred, positive) if binary else None
    metrics = compute_metrics(confusion) if binary else {"precision": None, "recall": None, "f1": None}
    return PrequentialReport(
        model_name=name,
        curve=curve,
        accuracy=correct / t,
        precision=metrics["precision"],
        recall=metrics["recall"],
        f1=metrics["f1"],
        mean_test_time=elapsed / t,
        config_fingerprint=config_fingerprint(model),
        seed=seed,
        y_true=y_true,
        y_pred=y_pred,
        confusion=confusion,
    )


def write_curve_csv(report: PrequentialReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance_index", "cumulative_accuracy"])
        for idx, acc in report.curve:
            w.writerow([idx, repr(acc)])


RESULT_COLUMNS = ("model", "accuracy", "precision", "recall", "f1", "avg_test_time_ms")


def write_results_csv(reports: Sequence[PrequentialReport], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in reports:
            row = r.summary_row()
            w.writerow([row["model"]] + ["" if row[c] is None else f"{row[c]:.6f}" for c in RESULT_COLUMNS[1:]])


def windowed_accuracy(y_true: Sequence[int], y_pred: Sequence[int], start: int, stop: int) -> float:
    n = stop - start
    if n <= 0:
        raise ConfigError("empty window")
    return sum(1 for t, p in zip(y_true[start:stop], y_pred[start:stop]) if t == p) / n

