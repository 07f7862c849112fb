"""Quantum finite automata for MOD_p, their OAM photonic encoding, and a
simulated single-photon loop experiment with its analysis chain."""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .automata import (
    DfaSpec,
    PfaSpec,
    QfaSpec,
    RunResult,
    dfa_build_modn,
    dfa_run,
    pfa_run,
    qfa2_build,
    qfa2d_build,
    qfa_run,
)
from .kset import (
    KSetResult,
    exhaustive_best_kset,
    randomized_best_kset,
    verify_log_bound,
    worst_false_accept,
)
from .photonic import (
    LoopConfig,
    PetalBasis,
    accept_prob_closed_form,
    dove_angle_for_p,
    dove_unitary,
    exit_probability,
    va_block,
)
