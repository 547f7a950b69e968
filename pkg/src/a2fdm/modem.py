"""Square QAM mapping with per-axis reflected-Gray labels."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InputShapeError

SUPPORTED_ORDERS = (4, 16, 64)


def _gray(n: np.ndarray) -> np.ndarray:
    return n ^ (n >> 1)


@dataclass(frozen=True)
class Constellation:
    """Unit-energy square QAM alphabet.

    Point index ``i`` carries the label ``bit_labels[i]`` (MSB first). The
    first half of the label selects the in-phase level, the second half the
    quadrature level; each half is a reflected-Gray code of the level index,
    levels ordered from most positive to most negative, so
    the all-zero label sits in the first quadrant.
    """

    order: int
    points: np.ndarray = field(repr=False)
    bit_labels: np.ndarray = field(repr=False)

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    @property
    def constant_modulus(self) -> bool:
        mags = np.abs(self.points)
        return bool(np.allclose(mags, mags[0], atol=1e-12))


@lru_cache(maxsize=None)
def qam(order: int = 4) -> Constellation:
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported QAM order {order}; choose from {SUPPORTED_ORDERS}")
    k = int(np.log2(order))
    side = int(np.sqrt(order))
    half = k // 2
    levels = (side - 1) - 2 * np.arange(side)
    gray = _gray(np.arange(side))

    idx_i, idx_q = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    idx_i, idx_q = idx_i.ravel(), idx_q.ravel()
    points = levels[idx_i] + 1j * levels[idx_q]
    points = points / np.sqrt(np.mean(np.abs(points) ** 2))

    label_ints = (gray[idx_i] << half) | gray[idx_q]
    shifts = np.arange(k - 1, -1, -1)
    labels = ((label_ints[:, None] >> shifts) & 1).astype(np.uint8)

    # Order points by their label value so index == integer label.
    order_idx = np.argsort(label_ints)
    points = points[order_idx]
    labels = labels[order_idx]
    points.setflags(write=False)
    labels.setflags(write=False)
    return Constellation(order=order, points=points, bit_labels=labels)


def map_bits(bits, c: Constellation) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    k = c.bits_per_symbol
    if bits.size % k:
        raise InputShapeError(f"{bits.size} bits is not a multiple of {k}")
    if bits.size == 0:
        return np.zeros(0, dtype=complex)
    weights = 1 << np.arange(k - 1, -1, -1)
    index = bits.reshape(-1, k) @ weights
    return c.points[index]


def demap_hard(symbols, c: Constellation) -> np.ndarray:
    """Nearest-point hard decisions; ties go to the lowest point index."""
    symbols = np.asarray(symbols, dtype=complex).ravel()
    if symbols.size == 0:
        return np.zeros(0, dtype=np.uint8)
    dist = np.abs(symbols[:, None] - c.points[None, :]) ** 2
    # argmin returns the first minimum, which is the lowest index.
    return c.bit_labels[np.argmin(dist, axis=1)].ravel()


def count_bit_errors(a, b) -> int:
    a = np.asarray(a, dtype=np.uint8).ravel()
    b = np.asarray(b, dtype=np.uint8).ravel()
    if a.shape != b.shape:
        raise InputShapeError(f"length mismatch: {a.size} vs {b.size}")
    return int(np.count_nonzero(a != b))
