"""Drift detectors fed one value per instance: ADWIN and DDM."""
from __future__ import annotations

import math

from .core import ConfigError, DriftSignal


class ADWIN:
    """Adaptive windowing over an exponential histogram of buckets.

    Bucket sizes double per level and each level holds at most ``max_buckets``
    buckets, so memory grows with the log of the window length. After every
    insertion all bucket boundaries are tested as a split into an older
    sub-window W0 and a newer W1; a cut happens when

        |mean(W0) - mean(W1)| >= sqrt(ln(4 n / delta) / (2 m)),  m = 1 / (1/n0 + 1/n1)

    and drops W0. Cuts repeat until none fires.

    Parameters
    ----------
    delta : float, default=0.002
        Confidence parameter; smaller is more conservative.
    max_buckets : int, default=5
        Buckets kept per level before the two oldest are merged.
    """

    def __init__(self, delta: float = 0.002, max_buckets: int = 5):
        if not 0.0 < delta < 1.0:
            raise ConfigError(f"delta must be in (0, 1), got {delta}")
        if max_buckets < 1:
            raise ConfigError(f"max_buckets must be >= 1, got {max_buckets}")
        self.delta = delta
        self.max_buckets = max_buckets
        self.reset()

    def reset(self) -> None:
        # _levels[i] holds bucket sums of size 2**i, oldest first
        self._levels: list[list[float]] = [[]]
        self.width = 0
        self.total = 0.0
        self.n_detections = 0

    @property
    def estimation(self) -> float:
        return self.total / self.width if self.width else 0.0

    @property
    def n_buckets(self) -> int:
        return sum(len(level) for level in self._levels)

    def bucket_sizes(self) -> list[int]:
        """Bucket sizes, oldest first."""
        return [1 << lvl for lvl in range(len(self._levels) - 1, -1, -1) for _ in self._levels[lvl]]

    def update(self, value: float) -> DriftSignal:
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"ADWIN expects values in [0, 1], got {value}")
        self._levels[0].append(float(value))
        self.width += 1
        self.total += value
        self._compress()
        detected = False
        while True:
            n_drop = self._find_cut()
            if not n_drop:
                break
            self._drop_oldest(n_drop)
            detected = True
        if detected:
            self.n_detections += 1
            return DriftSignal.DRIFT
        return DriftSignal.STABLE

    def _compress(self) -> None:
        levels = self._levels
        m = self.max_buckets
        lvl = 0
        while len(levels[lvl]) > m:
            bucket = levels[lvl]
            merged = bucket.pop(0) + bucket.pop(0)
            if lvl + 1 == len(levels):
                levels.append([])
            levels[lvl + 1].append(merged)
            lvl += 1

    def _find_cut(self) -> int:
        """Number of oldest buckets forming W0 at the first failing split, or 0."""
        n = self.width
        if n < 2:
            return 0
        total = self.total
        # cut test rearranged to avoid divisions:
        # (s0 n1 - s1 n0)^2 >= ln(4n/delta)/2 * n * n0 * n1
        c = 0.5 * math.log(4.0 * n / self.delta) * n
        n0 = 0
        s0 = 0.0
        count = 0
        levels = self._levels
        for lvl in range(len(levels) - 1, -1, -1):
            size = 1 << lvl
            for s in levels[lvl]:
                n0 += size
                n1 = n - n0
                if n1 == 0:
                    return 0
                s0 += s
                count += 1
                d = s0 * n1 - (total - s0) * n0
                if d * d >= c * n0 * n1:
                    return count
        return 0

    def _drop_oldest(self, count: int) -> None:
        levels = self._levels
        while count:
            lvl = len(levels) - 1
            while not levels[lvl]:
                lvl -= 1
            s = levels[lvl].pop(0)
            self.width -= 1 << lvl
            self.total -= s
            count -= 1
            while len(levels) > 1 and not levels[-1]:
                levels.pop()
        if self.width == 0:
            self.total = 0.0


class DDM:
    """Drift Detection Method on a 0/1 error stream.

    Tracks the error probability ``p`` and ``s = sqrt(p (1 - p) / n)``, records
    the pair at the minimal ``p + s`` and signals Warning / Drift when ``p + s``
    reaches ``p_min + warning_level * s_min`` / ``p_min + drift_level * s_min``.
    ``p`` is the Laplace-smoothed rate ``(errors + 1) / (n + 2)`` so a run of
    perfect predictions cannot pin ``s_min`` at zero. State resets on Drift.
    """

    def __init__(self, warning_level: float = 2.0, drift_level: float = 3.0, min_instances: int = 30):
        if not 0 < warning_level < drift_level:
            raise ConfigError("need 0 < warning_level < drift_level")
        if min_instances < 1:
            raise ConfigError(f"min_instances must be >= 1, got {min_instances}")
        self.warning_level = warning_level
        self.drift_level = drift_level
        self.min_instances = min_instances
        self.reset()

    def reset(self) -> None:
        self.n = 0
        self.errors = 0
        self.p = 0.5
        self.s = 0.0
        self.p_min = math.inf
        self.s_min = math.inf
        self.in_warning = False

    def update(self, error: int) -> DriftSignal:
        if error not in (0, 1):
            raise ConfigError(f"DDM expects 0/1 errors, got {error}")
        self.n += 1
        self.errors += error
        n = self.n
        p = (self.errors + 1.0) / (n + 2.0)
        s = math.sqrt(p * (1.0 - p) / n)
        self.p = p
        self.s = s
        if n < self.min_instances:
            return DriftSignal.STABLE
        if p + s < self.p_min + self.s_min:
            self.p_min = p
            self.s_min = s
        level = p + s
        if level >= self.p_min + self.drift_level * self.s_min:
            self.reset()
            return DriftSignal.DRIFT
        if level >= self.p_min + self.warning_level * self.s_min:
            self.in_warning = True
            return DriftSignal.WARNING
        self.in_warning = False
        return DriftSignal.STABLE


def make_detector(kind: str, adwin_delta: float = 0.002, ddm_warn: float = 2.0, ddm_drift: float = 3.0):
    kind = kind.lower()
    if kind == "adwin":
        return ADWIN(delta=adwin_delta)
    if kind == "ddm":
        return DDM(warning_level=ddm_warn, drift_level=ddm_drift)
    raise ConfigError(f"unknown detector {kind!r}; expected 'adwin' or 'ddm'")
