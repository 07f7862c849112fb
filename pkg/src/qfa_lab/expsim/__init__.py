"""Loop-experiment simulator and the analysis chain applied to its output."""
from .analysis import (
    LoopProbabilities,
    accept_probabilities,
    estimate_accidentals,
    locate_center,
    loop_counts_corrected,
    window_counts,
)
from .calibration import CalibrationFit, calibration_fit, synthetic_scan
from .model import ExperimentConfig, TimeHistogram
from .simulate import simulate_repeats, simulate_run
from .tomography import BlochVector, accept_prob_from_bloch, qst_direct_inversion

__all__ = [
    "BlochVector",
    "CalibrationFit",
    "ExperimentConfig",
    "LoopProbabilities",
    "TimeHistogram",
    "accept_prob_from_bloch",
    "accept_probabilities",
    "calibration_fit",
    "estimate_accidentals",
    "locate_center",
    "loop_counts_corrected",
    "qst_direct_inversion",
    "simulate_repeats",
    "simulate_run",
    "synthetic_scan",
    "window_counts",
]
