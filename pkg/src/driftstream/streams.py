"""Stream sources: CSV ingestion and seeded synthetic drift generators."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .core import ConfigError, DataError, LabeledInstance, StreamSchema, make_rng


class StreamSource:
    """Single-consumer iterator of ``LabeledInstance`` values with a schema."""

    schema: StreamSchema

    def __iter__(self) -> Iterator[LabeledInstance]:
        raise NotImplementedError

    def to_list(self) -> list[LabeledInstance]:
        return list(self)

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        rows = self.to_list()
        X = np.asarray([r.features for r in rows], dtype=float).reshape(len(rows), self.schema.feature_count)
        y = np.asarray([r.label for r in rows], dtype=np.int64)
        return X, y


class ArrayStream(StreamSource):
    """Stream over in-memory arrays, replayable any number of times."""

    def __init__(self, X, y, schema: StreamSchema | None = None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(X) != len(y):
            raise DataError(f"X must be 2-D with one row per label, got {X.shape} and {y.shape}")
        if not np.isfinite(X).all():
            raise DataError("features contain NaN or infinite values")
        if schema is None:
            n_classes = max(2, int(y.max()) + 1) if len(y) else 2
            schema = StreamSchema(tuple(f"f{i + 1}" for i in range(X.shape[1])), n_classes)
        if len(y) and (y.min() < 0 or y.max() >= schema.class_count):
            raise DataError(f"labels must lie in 0..{schema.class_count - 1}")
        self.schema = schema
        self.X = X
        self.y = y

    def __len__(self):
        return len(self.y)

    def __iter__(self):
        for row, label in zip(self.X.tolist(), self.y.tolist()):
            yield LabeledInstance(tuple(row), label)

    def to_arrays(self):
        return self.X.copy(), self.y.copy()


class CsvStream(StreamSource):
    """Lazy reader for a headed CSV file with one label column.

    Labels are mapped to dense integers in first-seen order unless ``classes``
    fixes the order up front. Data rows are numbered from 1 in error messages
    (the header is not counted).
    """

    def __init__(self, path, label_column: str, limit: int | None = None,
                 classes: Sequence[str] | None = None):
        self.path = os.fspath(path)
        self.label_column = label_column
        self.limit = limit
        if limit is not None and limit < 0:
            raise ConfigError(f"limit must be non-negative, got {limit}")
        if not os.path.isfile(self.path):
            raise DataError(f"no such file: {self.path}")
        with open(self.path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header:
                raise DataError(f"{self.path}: empty file")
            if next(reader, None) is None:
                raise DataError(f"{self.path}: no data rows")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DataError(f"{self.path}: label column {label_column!r} not in header {header}")
        self._label_idx = header.index(label_column)
        self._feature_idx = [i for i, _ in enumerate(header) if i != self._label_idx]
        if not self._feature_idx:
            raise DataError(f"{self.path}: no feature columns")
        self.label_map: dict[str, int] = {}
        for name in classes or ():
            self.label_map.setdefault(name, len(self.label_map))
        self._fixed_classes = classes is not None
        self._header = header
        n_classes = max(2, len(self.label_map))
        self.schema = StreamSchema(tuple(header[i] for i in self._feature_idx), n_classes, label_column)

    @property
    def class_names(self) -> list[str]:
        return sorted(self.label_map, key=self.label_map.get)

    def _encode(self, label: str, row_no: int) -> int:
        code = self.label_map.get(label)
        if code is None:
            if self._fixed_classes:
                raise DataError(f"{self.path}: row {row_no}: label {label!r} not among declared classes")
            code = self.label_map[label] = len(self.label_map)
            if code + 1 > self.schema.class_count:
                self.schema = StreamSchema(self.schema.feature_names, code + 1, self.schema.label_name)
        return code

    def __iter__(self):
        with open(self.path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            next(reader)
            width = len(self._header)
            for row_no, row in enumerate(reader, start=1):
                if self.limit is not None and row_no > self.limit:
                    break
                if len(row) != width:
                    raise DataError(f"{self.path}: row {row_no}: expected {width} cells, got {len(row)}")
                if any(not cell.strip() for cell in row):
                    raise DataError(f"{self.path}: row {row_no}: empty cell")
                feats = []
                for i in self._feature_idx:
                    try:
                        v = float(row[i])
                    except ValueError:
                        raise DataError(
                            f"{self.path}: row {row_no}: non-numeric value {row[i]!r} "
                            f"in column {self._header[i]!r}") from None
                    if not math.isfinite(v):
                        raise DataError(f"{self.path}: row {row_no}: non-finite value in column {self._header[i]!r}")
                    feats.append(v)
                yield LabeledInstance(tuple(feats), self._encode(row[self._label_idx].strip(), row_no))


def open_csv_stream(path, label_column: str, limit: int | None = None,
                    classes: Sequence[str] | None = None) -> CsvStream:
    return CsvStream(path, label_column, limit=limit, classes=classes)


def write_csv(path, instances, schema: StreamSchema, class_names: Sequence[str] | None = None) -> None:
    """Write instances with a header; floats use ``repr`` so re-ingestion is exact."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*schema.feature_names, schema.label_name])
        for x, y in instances:
            label = class_names[y] if class_names else str(y)
            w.writerow([repr(float(v)) for v in x] + [label])


def generate_bernoulli_stream(segments: Sequence[tuple[float, int]], seed: int | None = None) -> list[int]:
    """Concatenated Bernoulli(p_i) segments of the given lengths."""
    if not segments:
        raise ConfigError("at least one segment is required")
    rng = make_rng(seed)
    out: list[int] = []
    for p, length in segments:
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"segment probability must be in [0, 1], got {p}")
        if length <= 0:
            raise ConfigError(f"segment length must be positive, got {length}")
        out.extend((rng.random(int(length)) < p).astype(int).tolist())
    return out


def generate_ramp_bernoulli(p_before: float, p_after: float, position: int, width: int,
                            length: int, seed: int | None = None) -> list[int]:
    """Bernoulli stream whose rate moves linearly from p_before to p_after over ``width`` steps."""
    if not (0 <= position and position + width <= length and width >= 0):
        raise ConfigError("need 0 <= position and position + width <= length")
    rng = make_rng(seed)
    t = np.arange(length)
    frac = np.clip((t - position) / width, 0.0, 1.0) if width else (t >= position).astype(float)
    p = p_before + (p_after - p_before) * frac
    return (rng.random(length) < p).astype(int).tolist()


@dataclass(frozen=True)
class LinearConcept:
    """Label is 1 when ``weights . x > threshold``."""

    weights: tuple[float, ...]
    threshold: float

    @classmethod
    def random(cls, n_features: int, rng: np.random.Generator) -> "LinearConcept":
        w = rng.normal(size=n_features)
        # the hyperplane passes through the cube centre, so classes stay roughly balanced
        return cls(tuple(w.tolist()), float(w.sum() * 0.5))

    @classmethod
    def axis(cls, n_features: int, feature: int, threshold: float = 0.5) -> "LinearConcept":
        w = [0.0] * n_features
        w[feature] = 1.0
        return cls(tuple(w), threshold)

    def label(self, X: np.ndarray) -> np.ndarray:
        return (X @ np.asarray(self.weights) > self.threshold).astype(np.int64)


@dataclass(frozen=True)
class ConceptSwitchConfig:
    length: int = 10_000
    n_features: int = 10
    drift_kind: str = "abrupt"
    drift_position: int = 5_000
    drift_width: int = 0
    noise: float = 0.0
    seed: int = 0
    concept_a: LinearConcept | None = None
    concept_b: LinearConcept | None = None

    def validate(self) -> None:
        if self.length <= 0:
            raise ConfigError(f"length must be positive, got {self.length}")
        if self.n_features < 1:
            raise ConfigError(f"n_features must be >= 1, got {self.n_features}")
        if self.drift_kind not in ("abrupt", "gradual"):
            raise ConfigError(f"drift_kind must be 'abrupt' or 'gradual', got {self.drift_kind!r}")
        if self.drift_kind == "abrupt" and self.drift_width != 0:
            raise ConfigError("abrupt drift requires drift_width == 0")
        if self.drift_kind == "gradual" and self.drift_width <= 0:
            raise ConfigError("gradual drift requires drift_width > 0")
        if self.drift_position < 0 or self.drift_position + self.drift_width > self.length:
            raise ConfigError(
                f"drift_position + drift_width ({self.drift_position + self.drift_width}) "
                f"exceeds length ({self.length})")
        if not 0.0 <= self.noise < 0.5:
            raise ConfigError(f"noise must be in [0, 0.5), got {self.noise}")
        for c in (self.concept_a, self.concept_b):
            if c is not None and len(c.weights) != self.n_features:
                raise ConfigError("concept dimensionality does not match n_features")


class ConceptSwitchStream(ArrayStream):
    """Synthetic stream switching from concept A to concept B.

    ``concept_ids`` records which concept labelled each instance and
    ``flipped`` which labels were inverted by noise.
    """

    def __init__(self, cfg: ConceptSwitchConfig):
        cfg.validate()
        concept_rng, data_rng = (np.random.Generator(np.random.PCG64(s))
                                 for s in np.random.SeedSequence(cfg.seed).spawn(2))
        a = cfg.concept_a or LinearConcept.random(cfg.n_features, concept_rng)
        b = cfg.concept_b or LinearConcept.random(cfg.n_features, concept_rng)
        X = data_rng.random((cfg.length, cfg.n_features))
        u_concept = data_rng.random(cfg.length)
        u_noise = data_rng.random(cfg.length)
        t = np.arange(cfg.length)
        if cfg.drift_kind == "abrupt":
            p_b = (t >= cfg.drift_position).astype(float)
        else:
            p_b = np.clip((t - cfg.drift_position) / cfg.drift_width, 0.0, 1.0)
        use_b = u_concept < p_b
        y = np.where(use_b, b.label(X), a.label(X))
        flipped = u_noise < cfg.noise
        y = np.where(flipped, 1 - y, y)
        super().__init__(X, y, StreamSchema(tuple(f"f{i + 1}" for i in range(cfg.n_features)), 2))
        self.config = cfg
        self.concept_a = a
        self.concept_b = b
        self.concept_ids = use_b.astype(np.int64)
        self.flipped = flipped


def generate_concept_switch(cfg: ConceptSwitchConfig) -> ConceptSwitchStream:
    return ConceptSwitchStream(cfg)


def minmax_scale(X: np.ndarray) -> np.ndarray:
    """Per-column scaling to [0, 1]; constant columns map to 0."""
    X = np.asarray(X, dtype=float)
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    span[span == 0] = 1.0
    return (X - lo) / span
