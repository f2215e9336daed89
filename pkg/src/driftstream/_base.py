"""scikit-learn compatible wrapper shared by every online classifier."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_X_y

from .core import DataError, argmax_class


class OnlineClassifier(ClassifierMixin, BaseEstimator):
    """Adds the batch estimator API on top of ``learn_one`` / ``predict_proba_one``.

    Subclasses keep hyper-parameters as plain attributes set in ``__init__`` and
    build their mutable state in ``_reset``, which runs lazily on first use, so
    ``get_params`` / ``clone`` behave as for any scikit-learn estimator.
    """

    _state = None

    def _reset(self):
        raise NotImplementedError

    def learn_one(self, x, y: int) -> None:
        raise NotImplementedError

    def predict_proba_one(self, x) -> list[float]:
        raise NotImplementedError

    def predict_one(self, x) -> int:
        return argmax_class(self.predict_proba_one(x))

    @property
    def classes_(self):
        return np.arange(self.n_classes)

    def partial_fit(self, X, y, classes=None):
        X, y = check_X_y(X, y, dtype=float)
        if self._state is None:
            self._reset()
        if classes is not None and len(classes) > self.n_classes:
            raise DataError(f"{len(classes)} classes given but n_classes={self.n_classes}")
        y = np.asarray(y)
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.mod(y, 1) == 0):
                raise DataError("labels must be integer class indices")
            y = y.astype(np.int64)
        for row, label in zip(X.tolist(), y.tolist()):
            self.learn_one(row, int(label))
        return self

    def fit(self, X, y):
        self._reset()
        return self.partial_fit(X, y)

    def predict_proba(self, X):
        X = check_array(X, dtype=float)
        return np.asarray([self.predict_proba_one(row) for row in X.tolist()])

    def predict(self, X):
        return self.predict_proba(X).argmax(axis=1)
