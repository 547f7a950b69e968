"""PAPR, CCDF estimation, BER accounting and diversity slopes."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import erfc

from .errors import EstimationError, InputShapeError


def papr(x, axis: int = -1, oversample: int = 1) -> np.ndarray | float:
    """Peak over mean power along ``axis``.

    ``oversample > 1`` zero-pads in the frequency domain before measuring.
    """
    x = np.asarray(x, dtype=complex)
    if oversample > 1:
        x = np.moveaxis(x, axis, -1)
        N = x.shape[-1]
        X = np.fft.fft(x, axis=-1)
        pad = np.zeros(x.shape[:-1] + (N * oversample,), dtype=complex)
        half = (N + 1) // 2
        pad[..., :half] = X[..., :half]
        pad[..., N * oversample - (N - half):] = X[..., half:]
        x = np.fft.ifft(pad, axis=-1)
        axis = -1
    power = np.abs(x) ** 2
    mean = power.mean(axis=axis)
    if np.any(mean == 0):
        raise InputShapeError("PAPR of an all-zero vector is undefined")
    out = power.max(axis=axis) / mean
    return float(out) if np.ndim(out) == 0 else out


def db(x):
    return 10 * np.log10(x)


def qfunc(x):
    return 0.5 * erfc(np.asarray(x) / np.sqrt(2))


def ber_4qam_awgn(ebn0_db):
    """Q(sqrt(2 Eb/N0)) for Gray-coded 4QAM."""
    return qfunc(np.sqrt(2 * 10 ** (np.asarray(ebn0_db) / 10)))


def ber_4qam_rayleigh(snr_db):
    """Flat Rayleigh, Gray 4QAM, SNR per symbol (per-bit SNR is half)."""
    g = 10 ** (np.asarray(snr_db) / 10) / 2
    return 0.5 * (1 - np.sqrt(g / (1 + g)))


@dataclass(frozen=True)
class MetricPoint:
    """One curve point; ``count``/``n_samples`` keep the exact integers."""

    abscissa: float
    count: int = 0
    n_samples: int = 0

    @property
    def value(self) -> float:
        return self.count / self.n_samples if self.n_samples else float("nan")

    def sigma(self) -> float:
        """Binomial (normal approximation) standard error of ``value``."""
        if not self.n_samples:
            return float("nan")
        p = self.value
        return float(np.sqrt(p * (1 - p) / self.n_samples))

    def interval(self, k: float = 3.0) -> tuple[float, float]:
        s = self.sigma()
        return self.value - k * s, self.value + k * s


@dataclass
class MetricSeries:
    kind: str
    points: list[MetricPoint] = field(default_factory=list)

    @property
    def abscissa(self) -> np.ndarray:
        return np.array([p.abscissa for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])


def ber_accumulate(errors: int, bits: int, into: MetricPoint) -> MetricPoint:
    if errors < 0 or bits < 0 or errors > bits:
        raise ValueError(f"invalid error count {errors} for {bits} bits")
    return replace(into, count=into.count + int(errors), n_samples=into.n_samples + int(bits))


def ccdf(values, thresholds_db) -> MetricSeries:
    """Fraction of ``values`` (linear power ratios) exceeding each dB threshold."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise InputShapeError("CCDF of an empty sample")
    v_db = db(values)
    pts = [MetricPoint(float(t), int(np.count_nonzero(v_db > t)), values.size)
           for t in np.asarray(thresholds_db, dtype=float)]
    return MetricSeries("CCDF_vs_PAPR_dB", pts)


def ccdf_level_threshold(values, level: float) -> float:
    """Smallest dB threshold whose empirical CCDF is at most ``level``."""
    v = np.sort(db(np.asarray(values, dtype=float).ravel()))[::-1]
    k = int(np.floor(level * v.size))
    return float(v[min(k, v.size - 1)])


def diversity_slope(series: MetricSeries, snr_window_db: tuple[float, float]) -> float:
    """Least-squares decades of BER per 10 dB inside the window (magnitude)."""
    lo, hi = snr_window_db
    sel = [(p.abscissa, p.value) for p in series.points
           if lo <= p.abscissa <= hi and p.n_samples and p.count > 0]
    if len(sel) < 2:
        raise EstimationError(
            f"need >= 2 points with non-zero BER in [{lo}, {hi}] dB, found {len(sel)}")
    x, y = np.array(sel).T
    slope = np.polyfit(x, np.log10(y), 1)[0]
    return float(-10 * slope)


def intervals_overlap(a: MetricPoint, b: MetricPoint, k: float = 3.0) -> bool:
    alo, ahi = a.interval(k)
    blo, bhi = b.interval(k)
    return alo <= bhi and blo <= ahi
