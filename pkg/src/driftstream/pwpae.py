"""Performance Weighted Probability Averaging Ensemble.

Four drift-adaptive ensembles (ARF and SRP, each with ADWIN and with DDM) are
fused by weighting each one's class probabilities with the reciprocal of its
cumulative error rate:

    w_j   = 1 / (errors_j / processed_j + epsilon)
    score = sum_j w_j * p_j(y = i | x) / k,   y_hat = argmax_i score_i
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

from ._base import OnlineClassifier
from .core import ConfigError, InvariantError, argmax_class, derive_seed, normalize
from .ensembles import EnsembleConfig, build_ensemble
from .trees import HoeffdingTreeConfig

BASE_LEARNERS = ("arf-adwin", "arf-ddm", "srp-adwin", "srp-ddm")


def error_rate(processed: int, misclassified: int) -> float:
    """Cumulative error rate; an untested learner counts as perfect."""
    if processed < 0 or misclassified < 0:
        raise ConfigError("counters must be non-negative")
    if misclassified > processed:
        raise InvariantError(f"misclassified ({misclassified}) exceeds processed ({processed})")
    if processed == 0:
        return 0.0
    return misclassified / processed


def performance_weight(error_rt: float, epsilon: float = 0.001) -> float:
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    if not 0.0 <= error_rt <= 1.0:
        raise ConfigError(f"error rate must be in [0, 1], got {error_rt}")
    return 1.0 / (error_rt + epsilon)


class FusionCounter:
    """Counts score accumulations done by ``fuse`` (used to check the c*k cost)."""

    def __init__(self):
        self.ops = 0


def fuse(probas, weights, counter: FusionCounter | None = None) -> list[float]:
    """Weighted probability sum divided by the number of learners."""
    k = len(probas)
    n_classes = len(probas[0])
    scores = [0.0] * n_classes
    for j in range(k):
        w = weights[j]
        pj = probas[j]
        for i in range(n_classes):
            scores[i] += w * pj[i]
    if counter is not None:
        counter.ops += k * n_classes
    return [s / k for s in scores]


@dataclass(frozen=True)
class LearnerWeightSnapshot:
    index: int
    error_rates: tuple[float, ...]
    weights: tuple[float, ...]


class PredictionRecord(NamedTuple):
    prediction: int
    distribution: list[float]
    learner_predictions: tuple[int, ...]
    snapshot: LearnerWeightSnapshot


class PWPAEClassifier(OnlineClassifier):
    """Reciprocal-error weighted fusion of ARF-ADWIN, ARF-DDM, SRP-ADWIN and SRP-DDM.

    Error counters are cumulative over the whole run, including instances seen
    through ``learn_one`` during warm-up, and the weights applied to an
    instance only reflect the instances before it. ``learn_one`` on its own
    is test-then-train for the base learners, so calling
    ``predict_proba_one(x)`` then ``learn_one(x, y)`` is equivalent to
    ``process_one(x, y)``.

    Base learners share every tree and detector setting and get seeds derived
    from ``random_state`` and their name, so a standalone ``arf-adwin`` built
    with the same seed behaves identically to the one inside this ensemble.
    """

    def __init__(self, epsilon=0.001, n_members=10, poisson_lambda=6.0, adwin_delta=0.002,
                 ddm_warn=2.0, ddm_drift=3.0, subspace_fraction=0.6, delta=1e-7, grace_period=200,
                 tie_threshold=0.05, numeric_bins=10, max_depth=None, n_classes=2, random_state=None):
        self.epsilon = epsilon
        self.n_members = n_members
        self.poisson_lambda = poisson_lambda
        self.adwin_delta = adwin_delta
        self.ddm_warn = ddm_warn
        self.ddm_drift = ddm_drift
        self.subspace_fraction = subspace_fraction
        self.delta = delta
        self.grace_period = grace_period
        self.tie_threshold = tie_threshold
        self.numeric_bins = numeric_bins
        self.max_depth = max_depth
        self.n_classes = n_classes
        self.random_state = random_state

    def ensemble_config(self) -> EnsembleConfig:
        return EnsembleConfig(
            n_members=self.n_members, poisson_lambda=self.poisson_lambda,
            subspace_fraction=self.subspace_fraction, adwin_delta=self.adwin_delta,
            ddm_warn=self.ddm_warn, ddm_drift=self.ddm_drift,
            tree=HoeffdingTreeConfig(self.delta, self.grace_period, self.tie_threshold,
                                     self.numeric_bins, self.max_depth),
            n_classes=self.n_classes)

    def _reset(self):
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        base = self.ensemble_config()
        self.learners_ = [
            build_ensemble(name.split("-")[0],
                           EnsembleConfig(**{**base.__dict__, "detector": name.split("-")[1],
                                             "seed": derive_seed(self.random_state, name)}))
            for name in BASE_LEARNERS
        ]
        self.processed_ = [0] * len(self.learners_)
        self.misclassified_ = [0] * len(self.learners_)
        self.n_seen_ = 0
        self.fusion_counter_ = FusionCounter()
        self._cache_x = None
        self._cache = None
        self._state = True

    @property
    def k(self) -> int:
        return len(BASE_LEARNERS)

    def error_rates(self) -> list[float]:
        if self._state is None:
            return [0.0] * self.k
        return [error_rate(p, m) for p, m in zip(self.processed_, self.misclassified_)]

    def weights(self) -> list[float]:
        return [performance_weight(e, self.epsilon) for e in self.error_rates()]

    def snapshot(self) -> LearnerWeightSnapshot:
        rates = self.error_rates()
        return LearnerWeightSnapshot(self.n_seen_ if self._state else 0, tuple(rates),
                                     tuple(performance_weight(e, self.epsilon) for e in rates))

    def _learner_probas(self, x):
        return [learner.predict_proba_one(x) for learner in self.learners_]

    def _predict(self, x):
        probas = self._learner_probas(x)
        snap = self.snapshot()
        scores = fuse(probas, snap.weights, self.fusion_counter_)
        return probas, snap, scores

    def predict_fused(self, x) -> tuple[int, list[float]]:
        """Predicted class and normalized fused distribution."""
        if self._state is None:
            self._reset()
        probas, snap, scores = self._predict(x)
        self._cache_x, self._cache = x, probas
        return argmax_class(scores), normalize(scores)

    def predict_proba_one(self, x) -> list[float]:
        return self.predict_fused(x)[1]

    def predict_one(self, x) -> int:
        return self.predict_fused(x)[0]

    def process_one(self, x, y: int) -> PredictionRecord:
        """Test-then-train on one labelled instance."""
        if self._state is None:
            self._reset()
        probas, snap, scores = self._predict(x)
        learner_preds = self._update_and_train(x, y, probas)
        return PredictionRecord(argmax_class(scores), normalize(scores), learner_preds, snap)

    def learn_one(self, x, y: int) -> None:
        if self._state is None:
            self._reset()
        if self._cache_x is x:
            probas = self._cache
        else:
            probas = self._learner_probas(x)
        self._update_and_train(x, y, probas)

    def _update_and_train(self, x, y, probas) -> tuple[int, ...]:
        self._cache_x = self._cache = None
        preds = tuple(argmax_class(p) for p in probas)
        for j, pred in enumerate(preds):
            self.processed_[j] += 1
            if pred != y:
                self.misclassified_[j] += 1
        self.n_seen_ += 1
        for learner in self.learners_:
            learner.learn_one(x, y)
        return preds


class WeightTraceWriter:
    """CSV trace: instance_index, then error_rate and weight for each learner."""

    def __init__(self, path, names=BASE_LEARNERS):
        self._fh = open(path, "w", newline="", encoding="utf-8")
        self._w = csv.writer(self._fh, lineterminator="\n")
        header = ["instance_index"]
        for name in names:
            header += [f"{name}_error_rate", f"{name}_weight"]
        self._w.writerow(header)

    def write(self, snap: LearnerWeightSnapshot) -> None:
        row = [snap.index]
        for e, w in zip(snap.error_rates, snap.weights):
            row += [repr(e), repr(w)]
        self._w.writerow(row)

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
