"""scikit-learn style wrappers so the transceiver blocks compose in pipelines.

The estimators are thin: all numerics live in the functional modules.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .equalize import mmse_equalize
from .errors import InputShapeError, NumericError
from .modem import demap_hard, map_bits, qam
from .transforms import WaveformSpec, build_transform, demodulate, modulate


def check_complex_2d(X, n_features: int | None = None, name: str = "X") -> np.ndarray:
    """Complex analogue of ``check_array``: 2-D, finite, optional width check.

    1-D input is treated as a single row.
    """
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise InputShapeError(f"{name} must be 1-D or 2-D, got {X.ndim}-D")
    X = X.astype(complex, copy=False)
    if not np.all(np.isfinite(X)):
        raise NumericError(f"{name} contains NaN or inf")
    if n_features is not None and X.shape[1] != n_features:
        raise InputShapeError(f"{name} has {X.shape[1]} columns, expected {n_features}")
    return X


class A2FDMModulator(TransformerMixin, BaseEstimator):
    """Rows of symbols -> rows of time samples (``x = A^H s``).

    ``inverse_transform`` is the receiver-side DAFT/DA2FT, ``r = A y``.
    """

    def __init__(self, kind="ia2fdm", N=256, mu=4, c1=0.0, c2=0.0, order=4):
        self.kind = kind
        self.N = N
        self.mu = mu
        self.c1 = c1
        self.c2 = c2
        self.order = order

    def fit(self, X=None, y=None):
        self.spec_ = WaveformSpec(kind=self.kind, N=self.N, mu=self.mu, c1=self.c1,
                                  c2=self.c2, order=self.order)
        self.n_features_in_ = self.spec_.N
        return self

    @property
    def matrix_(self) -> np.ndarray:
        check_is_fitted(self, "spec_")
        return build_transform(self.spec_)

    def transform(self, X):
        check_is_fitted(self, "spec_")
        return modulate(self.spec_, check_complex_2d(X, self.spec_.N))

    def inverse_transform(self, X):
        check_is_fitted(self, "spec_")
        return demodulate(self.spec_, check_complex_2d(X, self.spec_.N))


class QAMMapper(TransformerMixin, BaseEstimator):
    """Rows of bits -> rows of Gray-mapped QAM symbols, and hard decisions back."""

    def __init__(self, order=4):
        self.order = order

    def fit(self, X=None, y=None):
        self.constellation_ = qam(self.order)
        return self

    def transform(self, X):
        check_is_fitted(self, "constellation_")
        X = np.atleast_2d(np.asarray(X, dtype=np.uint8))
        return np.stack([map_bits(row, self.constellation_) for row in X])

    def inverse_transform(self, X):
        check_is_fitted(self, "constellation_")
        X = check_complex_2d(X)
        return np.stack([demap_hard(row, self.constellation_) for row in X])


class MMSEEqualizer(BaseEstimator):
    """Linear MMSE detector; ``fit`` takes the effective channel matrix."""

    def __init__(self, snr=10.0):
        self.snr = snr

    def fit(self, H_eff, y=None):
        H = np.asarray(H_eff, dtype=complex)
        if H.ndim != 2:
            raise InputShapeError("H_eff must be a matrix")
        self.H_ = H
        self.n_features_in_ = H.shape[0]
        return self

    def predict(self, R):
        check_is_fitted(self, "H_")
        R = check_complex_2d(R, self.n_features_in_, name="R")
        return np.stack([mmse_equalize(self.H_, r, self.snr).s_hat for r in R])
