"""Incremental decision trees: Hoeffding Tree and Extremely Fast Decision Tree.

Numeric attributes are summarised per leaf by equal-width class histograms.
A fresh leaf buffers its first ``grace_period`` (weighted) arrivals, fixes the
bin edges from their observed min/max, and from then on bins each arrival,
clipping out-of-range values into the edge bins. Candidate thresholds are the
interior bin edges; a record goes left when ``x[f] < threshold``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._base import OnlineClassifier
from .core import ConfigError, DataError, make_rng, normalize


def hoeffding_bound(value_range: float, delta: float, n: float) -> float:
    """sqrt(R^2 ln(1/delta) / (2n)): deviation bound for a mean of n samples in a range R."""
    if not value_range > 0:
        raise ConfigError(f"range must be positive, got {value_range}")
    if not 0.0 < delta < 1.0:
        raise ConfigError(f"delta must be in (0, 1), got {delta}")
    if not n > 0:
        raise ConfigError(f"n must be positive, got {n}")
    return math.sqrt(value_range * value_range * math.log(1.0 / delta) / (2.0 * n))


@dataclass(frozen=True)
class HoeffdingTreeConfig:
    delta: float = 1e-7
    grace_period: int = 200
    tie_threshold: float = 0.05
    numeric_bins: int = 10
    max_depth: int | None = None

    def validate(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must be in (0, 1), got {self.delta}")
        if self.grace_period < 1:
            raise ConfigError(f"grace_period must be >= 1, got {self.grace_period}")
        if self.numeric_bins < 2:
            raise ConfigError(f"numeric_bins must be >= 2, got {self.numeric_bins}")
        if self.tie_threshold < 0:
            raise ConfigError("tie_threshold must be non-negative")
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigError("max_depth must be non-negative")

    def as_params(self) -> dict:
        return {"delta": self.delta, "grace_period": self.grace_period,
                "tie_threshold": self.tie_threshold, "numeric_bins": self.numeric_bins,
                "max_depth": self.max_depth}


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Base-2 entropy along the last axis; all-zero rows give 0."""
    tot = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(tot > 0, counts / np.where(tot > 0, tot, 1.0), 0.0)
        logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -(p * logs).sum(axis=-1)


class _Stats:
    """Class counts plus binned per-feature histograms for one node."""

    __slots__ = ("class_counts", "seen", "last_attempt", "features", "buffer", "lo", "inv_width",
                 "width", "hist", "depth")

    def __init__(self, n_classes: int, features: list[int], depth: int, class_counts=None):
        self.class_counts = list(class_counts) if class_counts is not None else [0.0] * n_classes
        self.seen = 0.0
        self.last_attempt = 0.0
        self.features = features
        self.buffer: list | None = []
        self.lo: list[float] = []
        self.width: list[float] = []
        self.inv_width: list[float] = []
        self.hist: list[list[list[float]]] = []
        self.depth = depth

    def add(self, x, y: int, w: float, n_bins: int) -> None:
        self.class_counts[y] += w
        self.seen += w
        if self.buffer is not None:
            self.buffer.append((x, y, w))
            return
        last = n_bins - 1
        for j, f in enumerate(self.features):
            b = int((x[f] - self.lo[j]) * self.inv_width[j])
            if b < 0:
                b = 0
            elif b > last:
                b = last
            self.hist[j][b][y] += w

    def build_histograms(self, n_bins: int, n_classes: int) -> None:
        buf = self.buffer
        self.buffer = None
        self.lo, self.width, self.inv_width, self.hist = [], [], [], []
        for f in self.features:
            vals = [row[0][f] for row in buf]
            lo, hi = min(vals), max(vals)
            width = (hi - lo) / n_bins
            self.lo.append(lo)
            self.width.append(width)
            self.inv_width.append(1.0 / width if width > 0 else 0.0)
            self.hist.append([[0.0] * n_classes for _ in range(n_bins)])
        # class_counts already include the buffered rows
        cc = self.class_counts[:]
        seen = self.seen
        for x, y, w in buf:
            self.add(x, y, w, n_bins)
        self.class_counts = cc
        self.seen = seen

    def histogram_total(self) -> float:
        if not self.hist:
            return 0.0
        return float(sum(sum(row) for row in self.hist[0]))

    def candidate_splits(self):
        """(gain, local feature index, bin edge index) of the best threshold per feature, and parent counts."""
        H = np.asarray(self.hist, dtype=float)  # (features, bins, classes)
        total = H[0].sum(axis=0)
        n = total.sum()
        left = np.cumsum(H, axis=1)[:, :-1, :]
        right = total - left
        nl = left.sum(axis=-1)
        nr = right.sum(axis=-1)
        parent = _entropy_rows(total)
        child = (nl * _entropy_rows(left) + nr * _entropy_rows(right)) / n
        gains = parent - child
        # a threshold leaving one side empty is not a split
        gains = np.where((nl > 0) & (nr > 0), gains, 0.0)
        best_edge = gains.argmax(axis=1)
        best_gain = gains[np.arange(len(gains)), best_edge]
        return best_gain, best_edge, left, right, n

    def threshold(self, j: int, edge: int) -> float:
        return self.lo[j] + (edge + 1) * self.width[j]


class _Leaf:
    __slots__ = ("stats",)
    is_leaf = True

    def __init__(self, stats: _Stats):
        self.stats = stats


class _Split:
    __slots__ = ("feature", "threshold", "left", "right", "stats", "local_feature", "edge")
    is_leaf = False

    def __init__(self, feature, threshold, left, right, stats=None, local_feature=None, edge=None):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.stats = stats
        self.local_feature = local_feature
        self.edge = edge


class HoeffdingTreeClassifier(OnlineClassifier):
    """Very Fast Decision Tree with information-gain splits bounded by Hoeffding's inequality.

    Parameters
    ----------
    delta : float, default=1e-7
        Split confidence.
    grace_period : int, default=200
        Weighted arrivals at a leaf between split attempts.
    tie_threshold : float, default=0.05
        Split anyway once the bound falls below this value.
    numeric_bins : int, default=10
        Histogram bins per feature; interior edges are the candidate thresholds.
    max_depth : int or None
        Leaves at this depth never split.
    max_features : int, "sqrt" or None
        Candidate attributes sampled per leaf at creation. ``"sqrt"`` gives
        floor(sqrt(d)) + 1; None uses every attribute.
    n_classes : int, default=2
    random_state : int or None
        Seeds attribute sampling when ``max_features`` is set.
    """

    def __init__(self, delta=1e-7, grace_period=200, tie_threshold=0.05, numeric_bins=10,
                 max_depth=None, max_features=None, n_classes=2, random_state=None):
        self.delta = delta
        self.grace_period = grace_period
        self.tie_threshold = tie_threshold
        self.numeric_bins = numeric_bins
        self.max_depth = max_depth
        self.max_features = max_features
        self.n_classes = n_classes
        self.random_state = random_state

    _keep_split_stats = False

    def _reset(self):
        HoeffdingTreeConfig(self.delta, self.grace_period, self.tie_threshold,
                            self.numeric_bins, self.max_depth).validate()
        if self.n_classes < 2:
            raise ConfigError("n_classes must be >= 2")
        self._rng = make_rng(self.random_state)
        self._root = None
        self.n_features_in_ = None
        self._n_train = 0.0
        self._range = math.log2(self.n_classes)
        self.split_attempt_log_ = deque(maxlen=10_000)
        self.n_splits_ = 0
        self.n_subtree_replacements_ = 0
        self._state = True

    # -- structure -----------------------------------------------------------------------------

    def n_candidate_features(self, n_features: int) -> int:
        mf = self.max_features
        if mf is None:
            return n_features
        if mf == "sqrt":
            return min(n_features, int(math.isqrt(n_features)) + 1)
        if isinstance(mf, float):
            return max(1, min(n_features, int(math.ceil(mf * n_features))))
        return max(1, min(n_features, int(mf)))

    def _new_stats(self, depth: int, class_counts=None) -> _Stats:
        d = self.n_features_in_
        m = self.n_candidate_features(d)
        if m == d:
            feats = list(range(d))
        else:
            feats = sorted(self._rng.choice(d, size=m, replace=False).tolist())
        return _Stats(self.n_classes, feats, depth, class_counts)

    def _sort(self, x):
        node = self._root
        while not node.is_leaf:
            node = node.left if x[node.feature] < node.threshold else node.right
        return node

    @property
    def n_leaves(self) -> int:
        return sum(1 for _ in self._leaves())

    @property
    def depth(self) -> int:
        return max((leaf.stats.depth for leaf in self._leaves()), default=0)

    def _leaves(self):
        if self._state is None or self._root is None:
            return
        stack = [self._root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.append(node.right)
                stack.append(node.left)

    def leaf_class_counts(self) -> list[list[float]]:
        return [list(leaf.stats.class_counts) for leaf in self._leaves()]

    @property
    def root_feature(self) -> int | None:
        if self._state is None or self._root is None or self._root.is_leaf:
            return None
        return self._root.feature

    # -- learning ------------------------------------------------------------------------------

    def predict_proba_one(self, x: Sequence[float]) -> list[float]:
        if self._state is None or self._root is None:
            return [1.0 / self.n_classes] * self.n_classes
        return normalize(self._sort(x).stats.class_counts)

    def learn_one(self, x: Sequence[float], y: int, w: float = 1.0) -> None:
        if self._state is None:
            self._reset()
        if self._root is None:
            self.n_features_in_ = len(x)
            self._root = _Leaf(self._new_stats(0))
        elif len(x) != self.n_features_in_:
            raise DataError(f"expected {self.n_features_in_} features, got {len(x)}")
        if not 0 <= y < self.n_classes:
            raise DataError(f"label {y} outside 0..{self.n_classes - 1}")
        self._n_train += w
        bins = self.numeric_bins
        parent = None
        node = self._root
        while not node.is_leaf:
            if self._keep_split_stats:
                node.stats.add(x, y, w, bins)
                if node.stats.seen - node.stats.last_attempt >= self.grace_period:
                    replaced = self._reevaluate(node, parent)
                    if replaced is not None:
                        return
            parent = node
            node = node.left if x[node.feature] < node.threshold else node.right
        stats = node.stats
        stats.add(x, y, w, bins)
        if stats.seen - stats.last_attempt >= self.grace_period:
            stats.last_attempt = stats.seen
            if self.max_depth is None or stats.depth < self.max_depth:
                self._attempt_split(node, parent)

    def _hoeffding(self, n: float) -> float:
        return hoeffding_bound(self._range, self.delta, n)

    def _attempt_split(self, leaf: _Leaf, parent) -> None:
        stats = leaf.stats
        if stats.buffer is not None:
            stats.build_histograms(self.numeric_bins, self.n_classes)
        self.split_attempt_log_.append(stats.seen)
        if sum(1 for c in stats.class_counts if c > 0) < 2:
            return
        best_gain, best_edge, left, right, n = stats.candidate_splits()
        if n <= 0:
            return
        order = np.argsort(-best_gain, kind="stable")
        j = int(order[0])
        g1 = float(best_gain[j])
        if g1 <= 0.0:
            return
        eps = self._hoeffding(n)
        if self._split_confirmed(g1, best_gain, order, eps):
            e = int(best_edge[j])
            self._install_split(leaf, parent, stats, j, e, left[j, e].tolist(), right[j, e].tolist())

    def _split_confirmed(self, g1, best_gain, order, eps) -> bool:
        # best vs second-best attribute; the null split (gain 0) is always a candidate
        g2 = float(best_gain[order[1]]) if len(order) > 1 else 0.0
        g2 = max(g2, 0.0)
        return g1 - g2 > eps or eps < self.tie_threshold

    def _install_split(self, node, parent, stats: _Stats, j: int, edge: int, left_counts, right_counts):
        feature = stats.features[j]
        threshold = stats.threshold(j, edge)
        depth = stats.depth
        # counts inherited from an ancestor are not in the histogram; share them
        # out by each class's left/right proportion so no weight is lost
        for c, total in enumerate(stats.class_counts):
            binned = left_counts[c] + right_counts[c]
            extra = total - binned
            if extra > 0:
                share = left_counts[c] / binned if binned > 0 else 0.5
                left_counts[c] += extra * share
                right_counts[c] += extra * (1.0 - share)
        left = _Leaf(self._new_stats(depth + 1, left_counts))
        right = _Leaf(self._new_stats(depth + 1, right_counts))
        keep = stats if self._keep_split_stats else None
        new = _Split(feature, threshold, left, right, keep, j, edge)
        if parent is None:
            self._root = new
        elif parent.left is node:
            parent.left = new
        else:
            parent.right = new
        self.n_splits_ += 1
        return new

    def _reevaluate(self, node, parent):
        return None

    # -- debugging -----------------------------------------------------------------------------

    def export_text(self) -> str:
        if self._state is None or self._root is None:
            return "<empty>"
        lines = []

        def walk(node, indent):
            pad = "  " * indent
            if node.is_leaf:
                counts = ", ".join(f"{c:g}" for c in node.stats.class_counts)
                lines.append(f"{pad}leaf [{counts}]")
            else:
                lines.append(f"{pad}x[{node.feature}] < {node.threshold:.6g}")
                walk(node.left, indent + 1)
                lines.append(f"{pad}x[{node.feature}] >= {node.threshold:.6g}")
                walk(node.right, indent + 1)

        walk(self._root, 0)
        return "\n".join(lines)


class ExtremelyFastDecisionTreeClassifier(HoeffdingTreeClassifier):
    """Hoeffding Anytime Tree.

    A leaf splits once its best attribute beats the null split by the bound.
    Split nodes keep their statistics and every ``grace_period`` arrivals check
    whether another attribute now beats the installed one by the bound; if so
    the subtree is discarded and rebuilt from a fresh split on that attribute.
    """

    _keep_split_stats = True

    def _split_confirmed(self, g1, best_gain, order, eps) -> bool:
        return g1 > eps or eps < self.tie_threshold

    def _reevaluate(self, node: _Split, parent):
        stats = node.stats
        stats.last_attempt = stats.seen
        best_gain, best_edge, left, right, n = stats.candidate_splits()
        if n <= 0:
            return None
        j = int(np.argmax(best_gain))
        if j == node.local_feature:
            return None
        cur = self._gain_at(left, right, n, node.local_feature, node.edge)
        eps = self._hoeffding(n)
        if float(best_gain[j]) - cur > eps:
            e = int(best_edge[j])
            self.n_subtree_replacements_ += 1
            return self._install_split(node, parent, stats, j, e, left[j, e].tolist(), right[j, e].tolist())
        return None

    @staticmethod
    def _gain_at(left, right, n, j, e) -> float:
        total = left[j, e] + right[j, e]
        nl, nr = left[j, e].sum(), right[j, e].sum()
        if nl <= 0 or nr <= 0:
            return 0.0
        ent = _entropy_rows(np.stack([total, left[j, e], right[j, e]]))
        return float(ent[0] - (nl * ent[1] + nr * ent[2]) / n)
