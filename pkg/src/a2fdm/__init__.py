"""AFDM and augmented AFDM (A2FDM) link-level simulation."""

__version__ = "0.1.0"

from .channel import (ChannelProfile, ChannelRealization, add_awgn, apply_time_domain,
                      channel_matrix, doppler_from_kinematics, sample_realization)
from .effective import (EffectiveChannel, banded_support, c1_full_diversity, c1_overlap,
                        closed_form_element, effective_channel, predicted_diversity_order)
from .equalize import EqualizerOutput, mmse_equalize
from .errors import ConfigurationError, EstimationError, InputShapeError, NumericError
from .estimators import A2FDMModulator, MMSEEqualizer, QAMMapper
from .harness import ExperimentConfig, run_ber_sweep, run_papr_sweep, table1, trial_seed
from .metrics import MetricPoint, MetricSeries, ccdf, diversity_slope, papr
from .modem import Constellation, count_bit_errors, demap_hard, map_bits, qam
from .transforms import (Kind, WaveformSpec, add_cpp, build_transform, demodulate, modulate,
                         strip_cpp)
