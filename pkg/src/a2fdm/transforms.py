"""AFDM / A2FDM unitary transforms, modulation and the chirp-periodic prefix.

Sign convention
---------------
The outer N-point stage ``F`` is the ordinary unitary DFT,
``F[m, n] = exp(-2j*pi*m*n/N) / sqrt(N)``, and the A2FDM sub-block DFTs use
the same sign. With ``Lambda_c = diag(exp(-2j*pi*c*n**2))`` this gives

* AFDM:  ``A = Lambda_c2 @ F @ Lambda_c1``
* A2FDM: ``A = Upsilon^H @ P^T @ F @ Lambda_c1``, ``Upsilon = I_mu (x) F_Nmu``

and ``x = A^H s`` reproduces the IDAFT sample formula
``x_n = N^-1/2 sum_m exp(2j*pi*(c1 n^2 + m n / N + c2 m^2)) s_m``.
Every other module relies on this one convention.

The dense matrices are the reference. ``modulate``/``demodulate`` default to an
FFT-factored path that is tested against them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, InputShapeError
from .modem import Constellation, qam


class Kind(str, enum.Enum):
    OFDM = "ofdm"
    AFDM = "afdm"
    IA2FDM = "ia2fdm"
    LA2FDM = "la2fdm"

    @property
    def augmented(self) -> bool:
        return self in (Kind.IA2FDM, Kind.LA2FDM)


@dataclass(frozen=True)
class WaveformSpec:
    """Everything needed to build the transform ``A``.

    ``mu`` is only meaningful for the A2FDM kinds, ``c2`` only for AFDM.
    ``order`` selects the square QAM alphabet.
    """

    kind: Kind
    N: int
    mu: int = 1
    c1: float = 0.0
    c2: float = 0.0
    order: int = 4

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.N) != self.N or self.N < 1:
            raise ConfigurationError(f"N must be a positive integer, got {self.N}")
        if self.kind is Kind.OFDM and (self.c1 != 0 or self.c2 != 0):
            raise ConfigurationError("OFDM has no chirp parameters; use AFDM with c1, c2")
        if self.kind.augmented:
            if int(self.mu) != self.mu or self.mu < 1 or self.N % self.mu:
                raise ConfigurationError(f"mu={self.mu} must be a positive divisor of N={self.N}")
            if self.c2 != 0:
                raise ConfigurationError("A2FDM replaces the c2 chirp; c2 must be 0")
        if not np.isfinite(self.c1) or not np.isfinite(self.c2):
            raise ConfigurationError("chirp rates must be finite")

    @property
    def N_mu(self) -> int:
        return self.N // self.mu if self.kind.augmented else 1

    @property
    def constellation(self) -> Constellation:
        return qam(self.order)


def _cis(cycles) -> np.ndarray:
    """exp(2j*pi*cycles), reducing the argument mod 1 first."""
    return np.exp(2j * np.pi * np.mod(cycles, 1.0))


def _chirp(N: int, c: float) -> np.ndarray:
    n = np.arange(N, dtype=float)
    return _cis(-c * n * n)


def chirp_matrix(N: int, c: float) -> np.ndarray:
    return np.diag(_chirp(N, c))


def dft_matrix(N: int) -> np.ndarray:
    idx = np.arange(N)
    # Integer products mod N keep the phases exact for large N.
    return _cis(-np.outer(idx, idx) % N / N) / np.sqrt(N)


def subblock_dft(N: int, mu: int) -> np.ndarray:
    if mu < 1 or N % mu:
        raise ConfigurationError(f"mu={mu} does not divide N={N}")
    return np.kron(np.eye(mu), dft_matrix(N // mu))


def _interleave_index(N: int, mu: int) -> np.ndarray:
    """dest[src]: z index k*Nmu + p goes to subcarrier p*mu + k."""
    n_mu = N // mu
    src = np.arange(N)
    k, p = np.divmod(src, n_mu)
    return p * mu + k


def permutation_matrix(N: int, mu: int, mapping: str = "interleaved") -> np.ndarray:
    if mu < 1 or N % mu:
        raise ConfigurationError(f"mu={mu} does not divide N={N}")
    if mapping == "localized":
        return np.eye(N)
    if mapping != "interleaved":
        raise ConfigurationError(f"unknown mapping {mapping!r}")
    P = np.zeros((N, N))
    P[_interleave_index(N, mu), np.arange(N)] = 1.0
    return P


@lru_cache(maxsize=64)
def _dense_transform(spec: WaveformSpec) -> np.ndarray:
    N = spec.N
    F = dft_matrix(N)
    if spec.kind is Kind.OFDM:
        A = F
    elif spec.kind is Kind.AFDM:
        A = _chirp(N, spec.c2)[:, None] * F * _chirp(N, spec.c1)[None, :]
    else:
        mapping = "interleaved" if spec.kind is Kind.IA2FDM else "localized"
        Ups = subblock_dft(N, spec.mu)
        P = permutation_matrix(N, spec.mu, mapping)
        A = Ups.conj().T @ P.T @ (F * _chirp(N, spec.c1)[None, :])
    A.setflags(write=False)
    return A


def build_transform(spec: WaveformSpec) -> np.ndarray:
    """Dense unitary ``A`` for ``spec`` (read-only, cached)."""
    return _dense_transform(spec)


def _check_len(spec: WaveformSpec, v: np.ndarray, axis: int) -> None:
    if v.shape[axis] != spec.N:
        raise InputShapeError(f"expected length {spec.N} along axis {axis}, got {v.shape[axis]}")


def _inverse(spec: WaveformSpec, s: np.ndarray) -> np.ndarray:
    """A^H along the last axis."""
    N = spec.N
    if spec.kind is Kind.AFDM:
        s = s * _chirp(N, spec.c2).conj()
    elif spec.kind.augmented:
        mu, n_mu = spec.mu, spec.N_mu
        z = np.fft.fft(s.reshape(s.shape[:-1] + (mu, n_mu)), axis=-1, norm="ortho")
        if spec.kind is Kind.IA2FDM:
            # g[p*mu + k] = z[k*Nmu + p]
            z = np.swapaxes(z, -1, -2)
        s = z.reshape(s.shape)
    x = np.fft.ifft(s, axis=-1, norm="ortho")
    return x * _chirp(N, spec.c1).conj()


def _forward(spec: WaveformSpec, y: np.ndarray) -> np.ndarray:
    """A along the last axis."""
    N = spec.N
    u = np.fft.fft(y * _chirp(N, spec.c1), axis=-1, norm="ortho")
    if spec.kind is Kind.AFDM:
        return u * _chirp(N, spec.c2)
    if spec.kind.augmented:
        mu, n_mu = spec.mu, spec.N_mu
        if spec.kind is Kind.IA2FDM:
            z = np.swapaxes(u.reshape(u.shape[:-1] + (n_mu, mu)), -1, -2)
        else:
            z = u.reshape(u.shape[:-1] + (mu, n_mu))
        u = np.fft.ifft(z, axis=-1, norm="ortho").reshape(u.shape)
    return u


def modulate(spec: WaveformSpec, s, *, dense: bool = False) -> np.ndarray:
    """``x = A^H s``. Accepts a batch with the symbol axis last."""
    s = np.asarray(s, dtype=complex)
    _check_len(spec, s, -1)
    if dense:
        return s @ build_transform(spec).conj()
    return _inverse(spec, s)


def demodulate(spec: WaveformSpec, y, *, dense: bool = False) -> np.ndarray:
    """``r = A y``. Accepts a batch with the sample axis last."""
    y = np.asarray(y, dtype=complex)
    _check_len(spec, y, -1)
    if dense:
        return y @ build_transform(spec).T
    return _forward(spec, y)


def apply_transform(spec: WaveformSpec, M, axis: int = 0) -> np.ndarray:
    """``A`` applied along ``axis`` of ``M`` (axis 0 gives ``A @ M``)."""
    M = np.moveaxis(np.asarray(M, dtype=complex), axis, -1)
    _check_len(spec, M, -1)
    return np.moveaxis(_forward(spec, M), -1, axis)


def apply_inverse(spec: WaveformSpec, M, axis: int = 0) -> np.ndarray:
    M = np.moveaxis(np.asarray(M, dtype=complex), axis, -1)
    _check_len(spec, M, -1)
    return np.moveaxis(_inverse(spec, M), -1, axis)


def cpp_phase(N: int, c1: float, L_cpp: int) -> np.ndarray:
    """Factors multiplying x[n+N] to form prefix sample n = -L_cpp..-1."""
    n = np.arange(-L_cpp, 0, dtype=float)
    return _cis(-c1 * (N * N + 2 * N * n))


def add_cpp(spec: WaveformSpec, x, L_cpp: int) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    _check_len(spec, x, -1)
    N = spec.N
    if int(L_cpp) != L_cpp or not 1 <= L_cpp < N:
        raise ConfigurationError(f"CPP length must satisfy 1 <= L_cpp < N={N}, got {L_cpp}")
    prefix = x[..., N - L_cpp:] * cpp_phase(N, spec.c1, L_cpp)
    return np.concatenate([prefix, x], axis=-1)


def strip_cpp(extended, L_cpp: int, N: int | None = None) -> np.ndarray:
    extended = np.asarray(extended)
    if L_cpp < 0:
        raise ConfigurationError("CPP length must be non-negative")
    if N is not None and extended.shape[-1] != N + L_cpp:
        raise InputShapeError(f"expected {N + L_cpp} samples, got {extended.shape[-1]}")
    if extended.shape[-1] <= L_cpp:
        raise InputShapeError("received block is not longer than the prefix")
    return extended[..., L_cpp:]


def ia2fdm_samples_closed_form(spec: WaveformSpec, s) -> np.ndarray:
    """Interleaved A2FDM samples without any FFT.

    ``x_n = mu^-1/2 exp(2j pi c1 n^2) sum_k exp(2j pi k n / N) s[k Nmu + (n mod Nmu)]``
    """
    if spec.kind is not Kind.IA2FDM:
        raise ConfigurationError("closed form applies to IA2FDM only")
    s = np.asarray(s, dtype=complex)
    _check_len(spec, s, -1)
    N, mu, n_mu = spec.N, spec.mu, spec.N_mu
    n = np.arange(N)
    k = np.arange(mu)
    m = k[:, None] * n_mu + (n % n_mu)[None, :]            # (mu, N)
    rot = _cis(np.outer(k, n) % N / N)                      # (mu, N)
    acc = np.sum(rot * s[..., m], axis=-2)
    return _chirp(N, spec.c1).conj() * acc / np.sqrt(mu)


def _la2fdm_kernel(N: int, mu: int) -> np.ndarray:
    """K[n, l] so that x'_{k,n} = sum_l K[n, l] s[k Nmu + l]."""
    n_mu = N // mu
    n = np.arange(N)[:, None]
    l = np.arange(n_mu)[None, :]
    on_grid = (n % mu == 0)[:, 0]
    num = 1 - _cis(n / mu)
    den = 1 - _cis(n / N - l / n_mu)
    K = np.empty((N, n_mu), dtype=complex)
    safe = np.abs(den) >= 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        K[:] = np.where(safe, num / np.where(safe, den, 1.0), 0.0) / n_mu
    # Near-singular denominators: evaluate the geometric sum directly.
    for nn, ll in zip(*np.nonzero(~safe & ~on_grid[:, None])):
        p = np.arange(n_mu)
        K[nn, ll] = np.sum(_cis((nn - ll * mu) * p / N)) / n_mu
    # On-grid rows n = b*mu pick exactly s[k Nmu + b].
    K[on_grid] = 0.0
    b = np.arange(0, N, mu) // mu
    K[np.arange(0, N, mu), b] = 1.0
    return K


def la2fdm_samples_closed_form(spec: WaveformSpec, s) -> np.ndarray:
    """Localized A2FDM samples from the two-branch (n = b*mu or not) formula."""
    if spec.kind is not Kind.LA2FDM:
        raise ConfigurationError("closed form applies to LA2FDM only")
    s = np.asarray(s, dtype=complex)
    _check_len(spec, s, -1)
    N, mu, n_mu = spec.N, spec.mu, spec.N_mu
    K = _la2fdm_kernel(N, mu)                                # (N, Nmu)
    blocks = s.reshape(s.shape[:-1] + (mu, n_mu))            # (..., mu, Nmu)
    xprime = blocks @ K.T                                    # (..., mu, N)
    n = np.arange(N)
    k = np.arange(mu)
    rot = _cis(np.outer(k, n % mu) / mu)                     # (mu, N)
    acc = np.sum(rot * xprime, axis=-2)
    return _chirp(N, spec.c1).conj() * acc / np.sqrt(mu)


def geometric_block_sum(n_mu: int, b: int, l: int) -> complex:
    """sum_p exp(2j pi (b - l) p / Nmu): Nmu when b == l, else 0."""
    p = np.arange(n_mu)
    return complex(np.sum(_cis((b - l) * p / n_mu)))
