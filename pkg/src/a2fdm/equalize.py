"""Linear MMSE equalisation of the effective channel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import InputShapeError, NumericError


@dataclass(frozen=True)
class EqualizerOutput:
    s_hat: np.ndarray
    method: str = "MMSE"


def mmse_equalize(H_eff, r, snr: float) -> EqualizerOutput:
    """Decision variables ``W^H r`` with ``W = (H H^H + I/snr)^-1 H``.

    ``H_eff`` may be ``N x K`` (K active symbols). The Hermitian positive
    definite system is solved by Cholesky; nothing is inverted explicitly.
    """
    H = np.asarray(H_eff, dtype=complex)
    r = np.asarray(r, dtype=complex)
    if H.ndim != 2 or r.shape[0] != H.shape[0]:
        raise InputShapeError(f"H_eff {H.shape} and r {r.shape} do not conform")
    if not snr > 0:
        raise NumericError("snr must be positive")
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(r)) and np.isfinite(snr)):
        raise NumericError("non-finite input to the equaliser")
    G = H @ H.conj().T
    G[np.diag_indices_from(G)] += 1.0 / snr
    u = cho_solve(cho_factor(G, lower=True, check_finite=False), r, check_finite=False)
    return EqualizerOutput(s_hat=H.conj().T @ u)


def mmse_explicit(H_eff, r, snr: float) -> np.ndarray:
    """Literal explicit-inverse form; a test oracle only."""
    H = np.asarray(H_eff, dtype=complex)
    W = np.linalg.inv(H @ H.conj().T + np.eye(H.shape[0]) / snr) @ H
    return W.conj().T @ np.asarray(r, dtype=complex)
