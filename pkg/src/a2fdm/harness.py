"""Seeded, parallel Monte Carlo experiments.

Every trial owns an independent ``numpy.random.Generator(PCG64(seed))`` with
``seed = trial_seed(master_seed, snr_index, trial_index)``. Trial results are
integers (bit errors, bits) merged by addition, so the number of workers and
the completion order never change an emitted value.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .channel import (ChannelProfile, ChannelRealization, add_awgn, apply_time_domain,
                      doppler_from_kinematics, sample_realization)
from .effective import c1_full_diversity, c1_overlap_approx, effective_channel
from .equalize import mmse_equalize
from .errors import ConfigurationError
from .metrics import MetricPoint, MetricSeries, ber_accumulate, ccdf, papr
from .modem import count_bit_errors, demap_hard, map_bits
from .transforms import Kind, WaveformSpec, add_cpp, demodulate, modulate, strip_cpp

C1_MODES = ("explicit", "full_diversity", "overlap")
DOPPLER_MODES = ("fractional", "integer")
CHANNEL_MODELS = ("rayleigh", "awgn")


def trial_seed(master_seed: int, snr_index: int, trial_index: int) -> int:
    """64-bit seed from NumPy's ``SeedSequence`` hash of the three integers.

    ``SeedSequence(master_seed, spawn_key=(snr_index, trial_index))`` is
    platform independent and its output is fixed by NumPy's compatibility
    policy.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(snr_index), int(trial_index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def trial_rng(master_seed: int, snr_index: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(trial_seed(master_seed, snr_index, trial_index)))


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment; ``c1`` is derived from ``c1_mode`` for every frame."""

    kind: str = "afdm"
    N: int = 256
    mu: int = 1
    c2: float = 0.0
    order: int = 4
    L: int = 10
    ell_max: int = 30
    nu_max: float = 0.0
    c1_mode: str = "full_diversity"
    c1: float = 0.0
    d: int = 2
    min_delay_gap: int = 1
    snr_grid_db: tuple[float, ...] = (0.0,)
    trials_per_point: int = 100
    master_seed: int = 0
    cpp_len: Optional[int] = None
    active_count: Optional[int] = None
    doppler_mode: str = "fractional"
    channel_model: str = "rayleigh"
    stop_after_errors: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "snr_grid_db", tuple(float(v) for v in self.snr_grid_db))
        if self.c1_mode not in C1_MODES:
            raise ConfigurationError(f"c1_mode must be one of {C1_MODES}")
        if self.doppler_mode not in DOPPLER_MODES:
            raise ConfigurationError(f"doppler_mode must be one of {DOPPLER_MODES}")
        if self.channel_model not in CHANNEL_MODELS:
            raise ConfigurationError(f"channel_model must be one of {CHANNEL_MODELS}")
        if self.trials_per_point < 1:
            raise ConfigurationError("trials_per_point must be >= 1")
        grid = np.asarray(self.snr_grid_db)
        if grid.size == 0 or np.any(np.diff(grid) <= 0):
            raise ConfigurationError("SNR grid must be non-empty and strictly increasing")
        if self.active_count is not None and not 1 <= self.active_count <= self.N:
            raise ConfigurationError(f"active_count must lie in [1, N={self.N}]")
        if self.cpp_len is not None and self.cpp_len < self.ell_max:
            raise ConfigurationError("cpp_len must be at least ell_max")
        # Surface spec/profile errors at construction time.
        self.spec
        if self.channel_model == "rayleigh":
            self.profile.check_fits(self.N)

    @property
    def profile(self) -> ChannelProfile:
        return ChannelProfile(L=self.L, ell_max=self.ell_max, nu_max=self.nu_max)

    @property
    def resolved_c1(self) -> float:
        if self.kind == "ofdm":
            return 0.0
        if self.c1_mode == "explicit":
            return float(self.c1)
        if self.c1_mode == "full_diversity":
            return c1_full_diversity(self.nu_max, self.N, self.min_delay_gap)
        return c1_overlap_approx(self.d, self.min_delay_gap)

    @property
    def spec(self) -> WaveformSpec:
        kind = Kind(self.kind)
        return WaveformSpec(kind=kind, N=self.N, mu=self.mu if kind.augmented else 1,
                            c1=self.resolved_c1, c2=self.c2 if kind is Kind.AFDM else 0.0,
                            order=self.order)

    @property
    def L_cpp(self) -> int:
        return self.ell_max if self.cpp_len is None else self.cpp_len

    @property
    def active_indices(self) -> np.ndarray:
        n_a = self.N if self.active_count is None else self.active_count
        return np.arange(n_a)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_grid_db"] = list(self.snr_grid_db)
        return d


def table1(**overrides) -> ExperimentConfig:
    """Simulation parameters of the reference scenario (3.5 GHz, 30 kHz, 100 km/h)."""
    nu_max = doppler_from_kinematics(100 / 3.6, 3.5e9, 30e3)
    base = dict(kind="afdm", N=256, L=10, ell_max=30, nu_max=nu_max, order=4, c2=0.0)
    base.update(overrides)
    return ExperimentConfig(**base)


@dataclass
class TrialResult:
    bit_errors: int
    bits: int
    papr_values: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not 0 <= self.bit_errors <= self.bits:
            raise ValueError("bit errors exceed bits")


_IDENTITY = ChannelRealization(h=np.array([1.0 + 0j]), ell=np.array([0]), nu=np.array([0.0]))


def _check_papr_bound(spec: WaveformSpec, value: float, masked: bool) -> None:
    if spec.kind is Kind.IA2FDM and not masked and spec.constellation.constant_modulus:
        if value > spec.mu * (1 + 1e-9):
            raise AssertionError(f"IA2FDM frame PAPR {value} exceeds mu={spec.mu}")


def run_trial(cfg: ExperimentConfig, snr_index: int, trial_index: int) -> TrialResult:
    """One frame: channel draw, modulation, CPP, channel, noise, MMSE, slicing."""
    rng = trial_rng(cfg.master_seed, snr_index, trial_index)
    spec = cfg.spec
    const = spec.constellation
    if cfg.channel_model == "awgn":
        chan = _IDENTITY
    else:
        chan = sample_realization(cfg.profile, rng, integer_doppler=cfg.doppler_mode == "integer")
    active = cfg.active_indices
    bits = rng.integers(0, 2, size=active.size * const.bits_per_symbol, dtype=np.uint8)
    s = np.zeros(spec.N, dtype=complex)
    s[active] = map_bits(bits, const)

    x = modulate(spec, s)
    peak = papr(x)
    _check_papr_bound(spec, peak, active.size < spec.N)
    L_cpp = cfg.L_cpp
    rx = apply_time_domain(chan, add_cpp(spec, x, L_cpp), L_cpp)
    snr = 10 ** (cfg.snr_grid_db[snr_index] / 10)
    rx = add_awgn(rx, snr, rng)
    r = demodulate(spec, strip_cpp(rx, L_cpp, spec.N))

    H = effective_channel(spec, chan, dense=False).matrix
    if active.size < spec.N:
        H = H[:, active]
    s_hat = mmse_equalize(H, r, snr).s_hat
    errors = count_bit_errors(bits, demap_hard(s_hat, const))
    return TrialResult(bit_errors=errors, bits=bits.size, papr_values=[peak])


def _run_chunk(args) -> list[tuple[int, int]]:
    cfg, snr_index, trials = args
    out = []
    for t in trials:
        res = run_trial(cfg, snr_index, t)
        out.append((res.bit_errors, res.bits))
    return out


def default_workers() -> int:
    env = os.environ.get("A2FDM_WORKERS")
    return max(1, int(env)) if env else 1


def _map(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_run_chunk(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_chunk, tasks))


def run_ber_sweep(cfg: ExperimentConfig, workers: int | None = None,
                  chunk: int = 16) -> MetricSeries:
    """BER per SNR point. Identical output for any ``workers``."""
    workers = default_workers() if workers is None else workers
    points = [MetricPoint(snr) for snr in cfg.snr_grid_db]
    T = cfg.trials_per_point
    if cfg.stop_after_errors is None:
        tasks = [(cfg, si, range(t0, min(t0 + chunk, T)))
                 for si in range(len(points)) for t0 in range(0, T, chunk)]
        for (_, si, _), results in zip(tasks, _map(tasks, workers)):
            for e, b in results:
                points[si] = ber_accumulate(e, b, points[si])
        return MetricSeries("BER_vs_SNR_dB", points)

    # Early stopping: run rounds of chunks in trial order and stop at the exact
    # trial where the error target is reached, so the cut is worker-independent.
    for si in range(len(points)):
        t0 = 0
        done = False
        while t0 < T and not done:
            span = chunk * max(workers, 1)
            tasks = [(cfg, si, range(a, min(a + chunk, T))) for a in range(t0, min(t0 + span, T), chunk)]
            for results in _map(tasks, workers):
                for e, b in results:
                    if done:
                        break
                    points[si] = ber_accumulate(e, b, points[si])
                    done = points[si].count >= cfg.stop_after_errors
            t0 += span
    return MetricSeries("BER_vs_SNR_dB", points)


def papr_frames(cfg: ExperimentConfig, frames: int, snr_index: int = 0) -> np.ndarray:
    """PAPR of ``frames`` random transmit blocks (no channel involved)."""
    if frames < 1:
        raise ConfigurationError("frames must be >= 1")
    spec = cfg.spec
    const = spec.constellation
    active = cfg.active_indices
    k = const.bits_per_symbol
    S = np.zeros((frames, spec.N), dtype=complex)
    for f in range(frames):
        rng = trial_rng(cfg.master_seed, snr_index, f)
        S[f, active] = map_bits(rng.integers(0, 2, size=active.size * k, dtype=np.uint8), const)
    values = papr(modulate(spec, S), axis=-1)
    for v in values:
        _check_papr_bound(spec, float(v), active.size < spec.N)
    return values


def run_papr_sweep(cfg: ExperimentConfig, frames: int, thresholds_db) -> MetricSeries:
    series = ccdf(papr_frames(cfg, frames), thresholds_db)
    vals = series.values
    assert np.all(np.diff(vals) <= 0), "CCDF must be non-increasing"
    return series


def with_snr(cfg: ExperimentConfig, snr_grid_db) -> ExperimentConfig:
    return replace(cfg, snr_grid_db=tuple(snr_grid_db))
