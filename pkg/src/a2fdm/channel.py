"""Doubly-selective multipath channel: random draws, matrix model, convolution."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InputShapeError
from .transforms import WaveformSpec, _cis

SPEED_OF_LIGHT = 3e8


@dataclass(frozen=True)
class ChannelProfile:
    L: int
    ell_max: int
    nu_max: float = 0.0
    path_power: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.L < 1:
            raise ConfigurationError("need at least one path")
        if self.ell_max < self.L:
            raise ConfigurationError(
                f"ell_max={self.ell_max} < L={self.L}: cannot draw distinct delays in [1, ell_max]")
        if self.nu_max < 0:
            raise ConfigurationError("nu_max must be non-negative")
        power = self.path_power
        if power is None:
            power = (1.0 / self.L,) * self.L
        power = tuple(float(p) for p in power)
        if len(power) != self.L or any(p < 0 for p in power):
            raise ConfigurationError("path_power must hold L non-negative values")
        if abs(sum(power) - 1.0) > 1e-12:
            raise ConfigurationError(f"path powers sum to {sum(power)}, expected 1")
        object.__setattr__(self, "path_power", power)

    def check_fits(self, N: int) -> None:
        if self.ell_max >= N:
            raise ConfigurationError(f"ell_max={self.ell_max} must be below N={N}")


def split_doppler(nu):
    """Integer part (nearest) and fractional part in (-1/2, 1/2]."""
    nu = np.asarray(nu, dtype=float)
    alpha = np.ceil(nu - 0.5)
    return alpha.astype(int), nu - alpha


@dataclass(frozen=True)
class ChannelRealization:
    """One channel draw; ``nu`` is Doppler normalised to the subcarrier spacing."""

    h: np.ndarray
    ell: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        h = np.atleast_1d(np.asarray(self.h, dtype=complex))
        ell = np.atleast_1d(np.asarray(self.ell))
        nu = np.atleast_1d(np.asarray(self.nu, dtype=float))
        if not (h.shape == ell.shape == nu.shape) or h.ndim != 1:
            raise InputShapeError("h, ell and nu must be 1-D arrays of equal length")
        if np.any(ell != np.round(ell)) or np.any(ell < 0):
            raise ConfigurationError("delays must be non-negative integers")
        ell = ell.astype(int)
        if len(np.unique(ell)) != len(ell):
            raise ConfigurationError("path delays must be distinct")
        for name, arr in (("h", h), ("ell", ell), ("nu", nu)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def L(self) -> int:
        return len(self.h)

    def f(self, N: int) -> np.ndarray:
        """Digital Doppler frequencies nu / N."""
        return self.nu / N

    @property
    def alpha(self) -> np.ndarray:
        return split_doppler(self.nu)[0]

    @property
    def beta(self) -> np.ndarray:
        return split_doppler(self.nu)[1]

    def to_text(self) -> str:
        """One path per line: re(h) im(h) ell nu, round-trip exact."""
        return "".join(
            f"{float(hh.real)!r} {float(hh.imag)!r} {int(l)} {float(v)!r}\n"
            for hh, l, v in zip(self.h, self.ell, self.nu))

    @classmethod
    def from_text(cls, text: str) -> "ChannelRealization":
        rows = [line.split() for line in io.StringIO(text) if line.strip()]
        if not rows or any(len(r) != 4 for r in rows):
            raise InputShapeError("each path line needs 4 fields: re im ell nu")
        h = np.array([float(r[0]) + 1j * float(r[1]) for r in rows])
        return cls(h=h, ell=np.array([int(r[2]) for r in rows]),
                   nu=np.array([float(r[3]) for r in rows]))


def doppler_from_kinematics(v: float, fc: float, delta_f: float) -> float:
    """Maximum Doppler normalised to the subcarrier spacing, (v fc / c) / delta_f."""
    if v < 0 or fc <= 0 or delta_f <= 0:
        raise ConfigurationError("speed must be >= 0; carrier and spacing must be > 0")
    return v * fc / (SPEED_OF_LIGHT * delta_f)


def sample_realization(profile: ChannelProfile, rng: np.random.Generator,
                       *, integer_doppler: bool = False) -> ChannelRealization:
    L = profile.L
    power = np.asarray(profile.path_power)
    h = np.sqrt(power / 2) * (rng.standard_normal(L) + 1j * rng.standard_normal(L))
    ell = rng.choice(np.arange(1, profile.ell_max + 1), size=L, replace=False)
    phi = rng.uniform(-np.pi, np.pi, size=L)
    nu = profile.nu_max * np.cos(phi)
    if integer_doppler:
        nu = np.round(nu)
    return ChannelRealization(h=h, ell=ell, nu=nu)


def _check_delays(r: ChannelRealization, N: int) -> None:
    if np.any(r.ell >= N):
        raise ConfigurationError(f"path delay {r.ell.max()} must be below N={N}")


def cpp_diagonal(N: int, c1: float, ell: int) -> np.ndarray:
    """Diagonal of the CPP phase matrix for a path with delay ``ell``."""
    n = np.arange(N, dtype=float)
    d = np.ones(N, dtype=complex)
    head = n < ell
    d[head] = _cis(-c1 * (N * N - 2 * N * (ell - n[head])))
    return d


def path_matrix(N: int, c1: float, ell: int, nu: float) -> np.ndarray:
    """Gamma_CPP @ Delta_f @ Pi^ell for one unit-gain path."""
    n = np.arange(N)
    Pi = np.zeros((N, N))
    Pi[n, (n - ell) % N] = 1.0
    diag = cpp_diagonal(N, c1, ell) * _cis(-nu / N * n)
    return diag[:, None] * Pi


def channel_matrix(r: ChannelRealization, spec: WaveformSpec) -> np.ndarray:
    N = spec.N
    _check_delays(r, N)
    H = np.zeros((N, N), dtype=complex)
    for hh, l, v in zip(r.h, r.ell, r.nu):
        H += hh * path_matrix(N, spec.c1, int(l), float(v))
    return H


def apply_channel(r: ChannelRealization, spec: WaveformSpec, M, axis: int = 0) -> np.ndarray:
    """``H @ M`` along ``axis`` without forming ``H`` (O(L N) per column)."""
    N = spec.N
    _check_delays(r, N)
    M = np.moveaxis(np.asarray(M, dtype=complex), axis, 0)
    if M.shape[0] != N:
        raise InputShapeError(f"expected length {N}, got {M.shape[0]}")
    n = np.arange(N)
    out = np.zeros_like(M)
    extra = (slice(None),) + (None,) * (M.ndim - 1)
    shifted = np.empty_like(M)
    for hh, l, v in zip(r.h, r.ell, r.nu):
        l = int(l)
        diag = hh * cpp_diagonal(N, spec.c1, l) * _cis(-v / N * n)
        shifted[l:] = M[:N - l]
        shifted[:l] = M[N - l:]
        np.multiply(diag[extra], shifted, out=shifted)
        out += shifted
    return np.moveaxis(out, 0, axis)


def apply_time_domain(r: ChannelRealization, x_cpp, L_cpp: int) -> np.ndarray:
    """Time-varying convolution of a prefixed block; no noise.

    Sample ``k`` of the extended block has time index ``n = k - L_cpp`` so that
    ``n = 0`` is the first sample after the prefix, matching the phase origin
    of the Doppler and CPP terms in the matrix model. Samples before the block
    (previous frames) are taken as zero; the prefix absorbs them.
    """
    x_cpp = np.asarray(x_cpp, dtype=complex)
    if L_cpp < int(r.ell.max(initial=0)):
        raise ConfigurationError(
            f"CPP length {L_cpp} shorter than the largest delay {r.ell.max()}")
    total = x_cpp.shape[-1]
    n = np.arange(total) - L_cpp
    y = np.zeros_like(x_cpp)
    for hh, l, v in zip(r.h, r.ell, r.nu):
        l = int(l)
        shifted = np.zeros_like(x_cpp)
        shifted[..., l:] = x_cpp[..., :total - l]
        y += hh * _cis(-v * n / (total - L_cpp)) * shifted
    return y


def add_awgn(y, snr: float, rng: np.random.Generator) -> np.ndarray:
    """Circular Gaussian noise of variance 1/snr per complex sample."""
    y = np.asarray(y, dtype=complex)
    if not snr > 0:
        raise ConfigurationError("snr must be positive")
    if np.isinf(snr):
        return y.copy()
    sigma = np.sqrt(0.5 / snr)
    noise = sigma * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y + noise
