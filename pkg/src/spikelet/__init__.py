"""
spikelet: scale-covariant spiking wavelets.

Time-causal and non-causal difference-of-smoothing filter banks, leaky
integrate-and-fire polarity encoding, least-squares spike decoding, frame
diagnostics, and comparison baselines.
"""

__version__ = "0.1.0"

from .kernels import (
    Signal, ScaleGrid, KernelSpec, StabilityError, make_scale_grid,
    smooth_gaussian, smooth_exponential, smooth_limit_kernel,
)
from .wavelets import (
    FilterBank, ChannelDecomposition, make_bank, analyze, synthesize,
    frequency_response, peak_frequency, bandwidth_3db,
)
from .frames import FrameReport, energy_capture, frame_bounds, gram_matrix, design_ratio
from .spike_codec import SpikeTrain, encode_channel, encode
from .decoder import decode, decode_channel, reconstruction_kernel, nrmse
from .baselines import haar_round_trip, morlet_bank, szu_bank, cwt_encode_decode
from .harness import (
    ExperimentConfig, ResultTable, run_experiment, threshold_sweep,
    synthetic_corpus, z_score,
)

__all__ = [
    "Signal", "ScaleGrid", "KernelSpec", "StabilityError", "make_scale_grid",
    "smooth_gaussian", "smooth_exponential", "smooth_limit_kernel",
    "FilterBank", "ChannelDecomposition", "make_bank", "analyze", "synthesize",
    "frequency_response", "peak_frequency", "bandwidth_3db",
    "FrameReport", "energy_capture", "frame_bounds", "gram_matrix", "design_ratio",
    "SpikeTrain", "encode_channel", "encode",
    "decode", "decode_channel", "reconstruction_kernel", "nrmse",
    "haar_round_trip", "morlet_bank", "szu_bank", "cwt_encode_decode",
    "ExperimentConfig", "ResultTable", "run_experiment", "threshold_sweep",
    "synthetic_corpus", "z_score",
]
