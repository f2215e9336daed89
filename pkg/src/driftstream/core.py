"""Shared stream types, seeded randomness and probability-vector helpers."""
from __future__ import annotations

import enum
import math
import zlib
from dataclasses import dataclass, field
from typing import NamedTuple, Protocol, Sequence

import numpy as np


class DriftStreamError(Exception):
    """Base class for all package errors."""


class ConfigError(DriftStreamError, ValueError):
    """Invalid parameter or configuration value."""


class DataError(DriftStreamError, ValueError):
    """Malformed or inconsistent input data."""


class InvariantError(DriftStreamError, RuntimeError):
    """An internal consistency check failed."""


class DriftSignal(enum.Enum):
    STABLE = "stable"
    WARNING = "warning"
    DRIFT = "drift"


@dataclass(frozen=True)
class StreamSchema:
    feature_names: tuple[str, ...]
    class_count: int = 2
    label_name: str = "label"
    class_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if not self.feature_names:
            raise ConfigError("schema needs at least one feature")
        if self.class_count < 2:
            raise ConfigError(f"class_count must be >= 2, got {self.class_count}")

    @property
    def feature_count(self) -> int:
        return len(self.feature_names)


class LabeledInstance(NamedTuple):
    """One stream record. ``features`` is a tuple of floats, ``label`` a dense class index."""

    features: tuple
    label: int


class AdaptiveLearner(Protocol):
    """What the evaluator needs from a model: predict first, then learn."""

    def predict_proba_one(self, x: Sequence[float]) -> list[float]: ...

    def learn_one(self, x: Sequence[float], y: int) -> None: ...


def make_rng(seed: int | None) -> np.random.Generator:
    """Seeded generator. Always numpy's PCG64 so draws are stable across platforms."""
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(seed: int | None, *keys: str | int) -> int | None:
    """Child seed for a named sub-component, independent of call order.

    ``None`` propagates so an unseeded parent yields unseeded children.
    """
    if seed is None:
        return None
    spawn_key = tuple(zlib.crc32(k.encode()) if isinstance(k, str) else int(k) for k in keys)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=spawn_key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def poisson_draw(lam: float, rng: np.random.Generator) -> int:
    if not lam > 0:
        raise ConfigError(f"Poisson rate must be positive, got {lam}")
    return int(rng.poisson(lam))


class PoissonSource:
    """Buffered Poisson(lam) draws from one generator.

    Scalar ``Generator.poisson`` calls dominate ensemble training time, so draws
    are taken in blocks; the sequence is still a pure function of the seed.
    """

    __slots__ = ("lam", "_rng", "_buf", "_pos", "_block")

    def __init__(self, lam: float, rng: np.random.Generator, block: int = 1024):
        if not lam > 0:
            raise ConfigError(f"Poisson rate must be positive, got {lam}")
        self.lam = lam
        self._rng = rng
        self._block = block
        self._buf: list[int] = []
        self._pos = 0

    def draw(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._rng.poisson(self.lam, self._block).tolist()
            self._pos = 0
        k = self._buf[self._pos]
        self._pos += 1
        return k


def normalize(dist: Sequence[float]) -> list[float]:
    """Scale non-negative weights to sum to one; an all-zero vector becomes uniform."""
    total = math.fsum(dist)
    if total <= 0.0:
        if not len(dist):
            raise ConfigError("cannot normalize an empty distribution")
        return [1.0 / len(dist)] * len(dist)
    return [v / total for v in dist]


def argmax_class(dist: Sequence[float]) -> int:
    """Index of the largest entry; ties go to the lowest index."""
    best = 0
    best_val = dist[0]
    for i in range(1, len(dist)):
        if dist[i] > best_val:
            best = i
            best_val = dist[i]
    return best
