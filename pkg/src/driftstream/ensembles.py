"""Online bagging ensembles of Hoeffding trees with per-member drift detectors.

All three share one engine; they differ only in how members see features:

* ``ARFClassifier`` (local subspaces): each leaf samples floor(sqrt(d)) + 1
  candidate attributes when it is created.
* ``SRPClassifier`` (global subspaces): each member is trained on a fixed
  random feature subset, resampled when the member is replaced.
* ``LeveragingBaggingClassifier``: every member sees every feature.

Per member and instance: predict, draw k ~ Poisson(lambda), train k-weighted,
then feed the 0/1 error of the pre-training prediction to the detector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from ._base import OnlineClassifier
from .core import ConfigError, DataError, DriftSignal, PoissonSource, argmax_class, derive_seed, make_rng
from .detectors import ADWIN, DDM
from .trees import HoeffdingTreeClassifier, HoeffdingTreeConfig


class MemberEvent(NamedTuple):
    member: int
    signal: DriftSignal
    replaced: bool


class _Member:
    __slots__ = ("tree", "detector", "mask", "background", "background_mask", "poisson", "rng",
                 "n_replacements", "weight_trained")

    def __init__(self, tree, detector, mask, poisson, rng):
        self.tree = tree
        self.detector = detector
        self.mask = mask
        self.background = None
        self.background_mask = None
        self.poisson = poisson
        self.rng = rng
        self.n_replacements = 0
        self.weight_trained = 0


def _project(x, mask):
    return x if mask is None else [x[i] for i in mask]


class OnlineBaggingEnsemble(OnlineClassifier):
    """Shared engine; use one of the concrete subclasses."""

    subspace_mode = "none"

    def __init__(self, n_members=10, poisson_lambda=6.0, detector="adwin", adwin_delta=0.002,
                 ddm_warn=2.0, ddm_drift=3.0, subspace_fraction=0.6, delta=1e-7, grace_period=200,
                 tie_threshold=0.05, numeric_bins=10, max_depth=None, n_classes=2, random_state=None):
        self.n_members = n_members
        self.poisson_lambda = poisson_lambda
        self.detector = detector
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

    def _reset(self):
        if self.n_members < 1:
            raise ConfigError(f"n_members must be >= 1, got {self.n_members}")
        if not self.poisson_lambda > 0:
            raise ConfigError(f"poisson_lambda must be positive, got {self.poisson_lambda}")
        if self.detector not in ("adwin", "ddm"):
            raise ConfigError(f"detector must be 'adwin' or 'ddm', got {self.detector!r}")
        if not 0.0 < self.subspace_fraction <= 1.0:
            raise ConfigError(f"subspace_fraction must be in (0, 1], got {self.subspace_fraction}")
        self._tree_config = HoeffdingTreeConfig(self.delta, self.grace_period, self.tie_threshold,
                                                self.numeric_bins, self.max_depth)
        self._tree_config.validate()
        self._members: list[_Member] | None = None
        self.n_features_in_ = None
        self.events_: list[tuple[int, MemberEvent]] = []
        self._t = 0
        self._cache_x = None
        self._cache_probas = None
        self._state = True

    # -- member construction ------------------------------------------------------------------

    def n_subspace_features(self, n_features: int) -> int:
        if self.subspace_mode != "global":
            return n_features
        return max(1, min(n_features, math.ceil(self.subspace_fraction * n_features - 1e-9)))

    def _new_mask(self, rng):
        if self.subspace_mode != "global":
            return None
        d = self.n_features_in_
        m = self.n_subspace_features(d)
        return sorted(rng.choice(d, size=m, replace=False).tolist())

    def _new_tree(self, rng):
        return HoeffdingTreeClassifier(
            **self._tree_config.as_params(),
            max_features="sqrt" if self.subspace_mode == "local" else None,
            n_classes=self.n_classes,
            random_state=int(rng.integers(2**63)),
        )

    def _new_detector(self):
        if self.detector == "adwin":
            return ADWIN(delta=self.adwin_delta)
        return DDM(warning_level=self.ddm_warn, drift_level=self.ddm_drift)

    def _build_members(self, n_features: int):
        self.n_features_in_ = n_features
        members = []
        for i in range(self.n_members):
            seed = derive_seed(self.random_state, "member", i)
            struct_rng, bag_rng = (np.random.Generator(np.random.PCG64(s))
                                   for s in np.random.SeedSequence(seed).spawn(2))
            mask = self._new_mask(struct_rng)
            members.append(_Member(self._new_tree(struct_rng), self._new_detector(), mask,
                                   PoissonSource(self.poisson_lambda, bag_rng), struct_rng))
        self._members = members

    @property
    def members(self) -> list[_Member]:
        if self._state is None or self._members is None:
            return []
        return self._members

    @property
    def feature_masks(self) -> list[list[int] | None]:
        return [m.mask for m in self.members]

    @property
    def n_replacements(self) -> int:
        return sum(m.n_replacements for m in self.members)

    # -- prediction / learning ----------------------------------------------------------------

    def member_probas(self, x) -> list[list[float]]:
        if self._state is None or self._members is None:
            return []
        return [m.tree.predict_proba_one(_project(x, m.mask)) for m in self._members]

    def predict_proba_one(self, x) -> list[float]:
        probas = self.member_probas(x)
        if not probas:
            return [1.0 / self.n_classes] * self.n_classes
        self._cache_x = x
        self._cache_probas = probas
        # fsum keeps the mean exactly independent of member order
        sums = [math.fsum(p[c] for p in probas) for c in range(self.n_classes)]
        total = math.fsum(sums)
        if total <= 0:
            return [1.0 / self.n_classes] * self.n_classes
        return [s / total for s in sums]

    def learn_one(self, x, y: int) -> list[MemberEvent]:
        if self._state is None:
            self._reset()
        if self._members is None:
            self._build_members(len(x))
        elif len(x) != self.n_features_in_:
            raise DataError(f"expected {self.n_features_in_} features, got {len(x)}")
        # reuse predictions made on this very object by predict_proba_one
        if self._cache_x is x:
            probas = self._cache_probas
        else:
            probas = self.member_probas(x)
        self._cache_x = self._cache_probas = None
        self._t += 1
        events = []
        for i, m in enumerate(self._members):
            xm = _project(x, m.mask)
            error = 0 if argmax_class(probas[i]) == y else 1
            k = m.poisson.draw()
            if k:
                m.tree.learn_one(xm, y, k)
                m.weight_trained += k
                if m.background is not None:
                    m.background.learn_one(_project(x, m.background_mask), y, k)
            estimate_before = m.detector.estimation if self.detector == "adwin" else 0.0
            signal = m.detector.update(error)
            if signal is DriftSignal.STABLE:
                if m.background is not None:
                    m.background = m.background_mask = None
                continue
            if signal is DriftSignal.WARNING:
                if m.background is None:
                    m.background = self._new_tree(m.rng)
                    m.background_mask = self._new_mask(m.rng)
                events.append(MemberEvent(i, signal, False))
                continue
            # ADWIN is two-sided; only a rise in error means the member degraded
            if self.detector == "adwin" and m.detector.estimation <= estimate_before:
                events.append(MemberEvent(i, signal, False))
                continue
            self._replace(m)
            events.append(MemberEvent(i, signal, True))
        for ev in events:
            self.events_.append((self._t, ev))
        return events

    def _replace(self, m: _Member) -> None:
        if m.background is not None:
            m.tree, m.mask = m.background, m.background_mask
            m.background = m.background_mask = None
        else:
            m.tree = self._new_tree(m.rng)
            m.mask = self._new_mask(m.rng)
        m.detector.reset()
        m.n_replacements += 1


class ARFClassifier(OnlineBaggingEnsemble):
    """Adaptive Random Forest: local (per-leaf) attribute sampling."""

    subspace_mode = "local"


class SRPClassifier(OnlineBaggingEnsemble):
    """Streaming Random Patches: one fixed random feature subset per member."""

    subspace_mode = "global"


class LeveragingBaggingClassifier(OnlineBaggingEnsemble):
    """Leveraging Bagging: Poisson(lambda) resampling, full feature set, ADWIN per member."""

    subspace_mode = "none"


_KINDS = {"arf": ARFClassifier, "srp": SRPClassifier, "lb": LeveragingBaggingClassifier}


@dataclass(frozen=True)
class EnsembleConfig:
    n_members: int = 10
    poisson_lambda: float = 6.0
    detector: str = "adwin"
    subspace_mode: str | None = None
    subspace_fraction: float = 0.6
    adwin_delta: float = 0.002
    ddm_warn: float = 2.0
    ddm_drift: float = 3.0
    tree: HoeffdingTreeConfig = field(default_factory=HoeffdingTreeConfig)
    n_classes: int = 2
    seed: int | None = None

    def with_seed(self, seed):
        return replace(self, seed=seed)


def build_ensemble(kind: str, cfg: EnsembleConfig) -> OnlineBaggingEnsemble:
    """Instantiate ARF, SRP or LB from a config; ``subspace_mode``, if set, must agree with ``kind``."""
    kind = kind.lower()
    if kind not in _KINDS:
        raise ConfigError(f"unknown ensemble {kind!r}; expected one of {sorted(_KINDS)}")
    cls = _KINDS[kind]
    if cfg.subspace_mode is not None and cfg.subspace_mode != cls.subspace_mode:
        raise ConfigError(f"{kind} uses subspace_mode={cls.subspace_mode!r}, config asks for {cfg.subspace_mode!r}")
    if kind == "lb" and cfg.detector != "adwin":
        raise ConfigError("leveraging bagging uses ADWIN per member")
    return cls(n_members=cfg.n_members, poisson_lambda=cfg.poisson_lambda, detector=cfg.detector,
               adwin_delta=cfg.adwin_delta, ddm_warn=cfg.ddm_warn, ddm_drift=cfg.ddm_drift,
               subspace_fraction=cfg.subspace_fraction, **cfg.tree.as_params(),
               n_classes=cfg.n_classes, random_state=cfg.seed)
