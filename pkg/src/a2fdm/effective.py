"""Effective channel ``A H A^H``, its closed-form structure, and c1 selection.

Closed form for interleaved A2FDM
---------------------------------
Write a symbol index as ``q = k*Nmu + l`` (block ``k``, offset ``l``). Column
``q`` of ``A^H`` lives only on the ``mu`` time samples ``n = l (mod Nmu)``,
where it equals ``mu^-1/2 exp(2j pi (c1 n^2 + k n / N))``. Hence path ``i``
couples row ``p = k_p*Nmu + l_p`` to column ``q`` only when
``l_p = l_q + ell_i (mod Nmu)``, and then::

    H_i[p, q] = (1/mu) exp(2j pi (c1 ell^2 - k_q ell / N))
                * sum_{a<mu} exp(-2j pi n_a theta / N),  n_a = l_p + a*Nmu,
    theta = k_p - k_q + nu_i + 2 N c1 ell_i.

The sum runs over ``mu`` samples spaced ``Nmu`` apart, not over ``n < mu``,
and the row/column indices entering ``theta`` are block indices. With
``mu = N`` this is the familiar AFDM (c2 = 0) element, with ``N`` terms and a
``1/N`` prefactor. :func:`literal_element` keeps the consecutive-``n`` reading
for comparison; it only agrees with the dense matrix when ``mu = N``.

The same derivation shows the CPP phase matrix is exact for any ``c1``: the
prefix extends every transmit vector chirp-periodically, so no
``Gamma_CPP = I`` assumption is needed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelProfile, ChannelRealization, channel_matrix, path_matrix, apply_channel
from .errors import ConfigurationError, InputShapeError
from .transforms import Kind, WaveformSpec, _cis, apply_transform, build_transform


@dataclass
class EffectiveChannel:
    matrix: np.ndarray
    spec: WaveformSpec
    realization: ChannelRealization = field(repr=False)

    def components(self) -> list[np.ndarray]:
        """Per-path unit-gain effective matrices ``H_i`` (dense)."""
        A = build_transform(self.spec)
        N = self.spec.N
        return [A @ path_matrix(N, self.spec.c1, int(l), float(v)) @ A.conj().T
                for l, v in zip(self.realization.ell, self.realization.nu)]


def effective_channel(spec: WaveformSpec, r: ChannelRealization, *,
                      dense: bool = True) -> EffectiveChannel:
    """``A H A^H``. The dense product is the reference; ``dense=False`` uses FFTs."""
    if dense:
        A = build_transform(spec)
        H = A @ channel_matrix(r, spec) @ A.conj().T
    else:
        AH = build_transform(spec).conj().T
        H = apply_transform(spec, apply_channel(r, spec, AH, axis=0), axis=0)
    return EffectiveChannel(matrix=H, spec=spec, realization=r)


def eta(spec: WaveformSpec, r: ChannelRealization) -> np.ndarray:
    """Real-valued support offsets ``nu_i + 2 N c1 ell_i``."""
    return r.nu + 2 * spec.N * spec.c1 * r.ell


def eta_index(spec: WaveformSpec, r: ChannelRealization) -> np.ndarray:
    """Support offsets rounded to the nearest integer and reduced into [0, N)."""
    return np.mod(np.ceil(eta(spec, r) - 0.5).astype(int), spec.N)


def _geometric(ratio_cycles: float, terms: int) -> complex:
    """sum_{a<terms} exp(-2j pi a ratio_cycles), with the removable limit."""
    den = 1 - _cis(-ratio_cycles)
    if abs(den) < 1e-12:
        return complex(terms)
    return complex((1 - _cis(-ratio_cycles * terms)) / den)


def _block_coords(spec: WaveformSpec, idx: int) -> tuple[int, int]:
    """(block k, offset l) of a symbol index; AFDM/OFDM are mu = N, Nmu = 1."""
    if spec.kind is Kind.IA2FDM:
        return divmod(idx, spec.N_mu)
    return idx, 0


def closed_form_element(spec: WaveformSpec, r: ChannelRealization, i: int,
                        p: int, q: int) -> complex:
    """Closed-form ``H_i[p, q]`` for IA2FDM (and AFDM/OFDM as the mu = N case)."""
    if spec.kind is Kind.LA2FDM:
        raise ConfigurationError("no closed form implemented for LA2FDM")
    N = spec.N
    mu, n_mu = (spec.mu, spec.N_mu) if spec.kind is Kind.IA2FDM else (N, 1)
    ell, nu = int(r.ell[i]), float(r.nu[i])
    k_p, l_p = _block_coords(spec, p)
    k_q, l_q = _block_coords(spec, q)
    if (l_p - l_q - ell) % n_mu:
        return 0j
    theta = k_p - k_q + nu + 2 * N * spec.c1 * ell
    lead = _cis(spec.c1 * ell * ell - k_q * ell / N - l_p * theta / N)
    value = lead * _geometric(theta / mu, mu) / mu
    if spec.kind is Kind.AFDM:
        value *= _cis(-spec.c2 * (p * p - q * q))
    return complex(value)


def literal_element(spec: WaveformSpec, r: ChannelRealization, i: int,
                    p: int, q: int, terms: int | None = None) -> complex:
    """Consecutive-index reading: (1/terms) e^{..} sum_{n<terms} e^{-2j pi n (p-q+eta)/N}.

    ``terms`` defaults to ``mu``. Kept as a cross-check only.
    """
    N = spec.N
    terms = spec.mu if terms is None else terms
    ell, nu = int(r.ell[i]), float(r.nu[i])
    x = (p - q + nu + 2 * N * spec.c1 * ell) / N
    n = np.arange(terms)
    s = np.sum(_cis(-n * x))
    return complex(_cis(spec.c1 * ell * ell - q * ell / N) * s / terms)


def closed_form_matrix(spec: WaveformSpec, r: ChannelRealization, i: int) -> np.ndarray:
    N = spec.N
    out = np.empty((N, N), dtype=complex)
    for p in range(N):
        for q in range(N):
            out[p, q] = closed_form_element(spec, r, i, p, q)
    return out


def banded_support(spec: WaveformSpec, r: ChannelRealization, zeta: int) -> np.ndarray:
    """Admissible columns per path and row, shape ``(L, N, width)``.

    Row ``p`` of path ``i`` peaks at block ``k_p + eta_i`` (mod ``mu``; mu = N
    for AFDM/OFDM, where this is ``q = p + eta_i mod N``) and offset
    ``l_p - ell_i`` (mod ``Nmu``). The window spans ``zeta`` blocks either
    side; ``width = min(2*zeta + 1, mu)``.
    """
    if zeta < 0:
        raise ConfigurationError("zeta must be non-negative")
    if spec.kind is Kind.LA2FDM:
        raise ConfigurationError("LA2FDM effective channels have no banded structure")
    N = spec.N
    mu, n_mu = (spec.mu, spec.N_mu) if spec.kind is Kind.IA2FDM else (N, 1)
    if 2 * zeta + 1 >= mu:
        offsets = np.arange(mu) - (mu - 1) // 2
    else:
        offsets = np.arange(-zeta, zeta + 1)
    width = len(offsets)
    p = np.arange(N)
    k_p, l_p = np.divmod(p, n_mu)
    centre = np.ceil(eta(spec, r) - 0.5).astype(int)
    out = np.empty((r.L, N, width), dtype=int)
    for i in range(r.L):
        k_q = np.mod(k_p[:, None] + centre[i] + offsets[None, :], mu)
        l_q = np.mod(l_p - int(r.ell[i]), n_mu)
        out[i] = k_q * n_mu + l_q[:, None]
    return out


def support_mask(windows: np.ndarray, N: int) -> np.ndarray:
    """Boolean ``(L, N, N)`` mask from :func:`banded_support` output."""
    L = windows.shape[0]
    mask = np.zeros((L, N, N), dtype=bool)
    rows = np.arange(N)[:, None]
    for i in range(L):
        mask[i, rows, windows[i]] = True
    return mask


def captured_energy(components: list[np.ndarray], windows: np.ndarray) -> np.ndarray:
    """Fraction of each row's energy inside its window, shape ``(L, N)``."""
    N = components[0].shape[0]
    mask = support_mask(windows, N)
    out = np.empty((len(components), N))
    for i, Hi in enumerate(components):
        power = np.abs(Hi) ** 2
        out[i] = np.sum(power * mask[i], axis=1) / np.sum(power, axis=1)
    return out


def select_zeta(spec: WaveformSpec, r: ChannelRealization, threshold: float = 0.99,
                components: list[np.ndarray] | None = None) -> int:
    """Smallest zeta whose window keeps ``threshold`` of every row's energy, all paths."""
    if components is None:
        components = effective_channel(spec, r).components()
    mu = spec.mu if spec.kind is Kind.IA2FDM else spec.N
    for zeta in range(mu // 2 + 1):
        if captured_energy(components, banded_support(spec, r, zeta)).min() >= threshold:
            return zeta
    return mu // 2


def c1_full_diversity(profile: ChannelProfile | float, N: int, min_delay_gap: int = 1) -> float:
    """Chirp rate ``(2 nu_max + 1) / (2 N gap)`` separating all path supports."""
    nu_max = profile.nu_max if isinstance(profile, ChannelProfile) else float(profile)
    if N < 2:
        raise ConfigurationError("N must be at least 2")
    if min_delay_gap < 1:
        raise ConfigurationError("minimum delay gap must be >= 1")
    return (2 * nu_max + 1) / (2 * N * min_delay_gap)


def c1_lower_bound(nu_max: float, N: int, min_delay_gap: int = 1) -> float:
    return 2 * nu_max / (2 * N * min_delay_gap)


def c1_overlap(d: int, nu_i: float, nu_j: float, ell_i: int, ell_j: int, N: int) -> float:
    """Chirp rate that lands paths i and j exactly ``d*N`` apart in support offset."""
    if ell_i == ell_j:
        raise InputShapeError("paths must have different delays")
    if d == 0:
        raise ConfigurationError("d must be a non-zero integer")
    return (d * N + nu_i - nu_j) / (2 * N * (ell_j - ell_i))


def c1_overlap_approx(d: int, min_delay_gap: int = 1) -> float:
    """Doppler-free approximation ``d / (2 gap)``."""
    if d == 0 or min_delay_gap < 1:
        raise ConfigurationError("need d != 0 and gap >= 1")
    return d / (2 * min_delay_gap)


def predicted_diversity_order(spec: WaveformSpec, L: int, *, c1_overlap: bool = False) -> int:
    """Diversity order expected from the support analysis.

    A2FDM: ``min(Nmu, L)`` regardless of c1. AFDM: ``L`` with a separating
    c1, 1 when c1 folds every path onto the same support. OFDM: 1.
    """
    if spec.kind.augmented:
        return min(spec.N_mu, L)
    if spec.kind is Kind.AFDM and not c1_overlap:
        return L
    return 1


def write_csv(H: np.ndarray, fh) -> None:
    """``row,col,re,im`` records, 10 significant digits."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["row", "col", "re", "im"])
    for (p, q), v in np.ndenumerate(H):
        w.writerow([p, q, f"{v.real:.10g}", f"{v.imag:.10g}"])
