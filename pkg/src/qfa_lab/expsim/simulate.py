"""Monte Carlo generation of coincidence histograms for the loop experiment.

Each heralded photon leaves the loop after ``n`` passes with the beamsplitter
law, survives ``eta_loop**n`` transmission, and for structured modes is
detected behind the accepting-state filter with the QFA acceptance
probability. Independent thinning of a multinomial is again multinomial, so
the per-photon process is drawn as one multinomial over exit loops. Timing
jitter and accidentals are added per bin.

Random streams are derived from ``(seed, mode, repeat, stream)`` so results do
not depend on how repeats are scheduled. The signal and accidental streams are
separate: switching accidentals on leaves the signal counts unchanged.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..photonic import accept_prob_closed_form, exit_probability
from .model import ExperimentConfig, TimeHistogram

_SIGNAL, _ACCIDENTAL = 0, 1


def _rng(cfg: ExperimentConfig, repeat: int, stream: int) -> np.random.Generator:
    mode = 0 if cfg.is_reference else 1
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(mode, repeat, stream))
    return np.random.default_rng(ss)


def mode_acceptance(cfg: ExperimentConfig, n: int) -> float:
    """Probability that a photon after ``n`` passes passes the mode filter."""
    if cfg.is_reference:
        return 1.0
    ideal = accept_prob_closed_form(cfg.ells, cfg.phi, n)
    if cfg.depolarization == 0:
        return ideal
    keep = (1.0 - cfg.depolarization) ** n
    return keep * ideal + (1.0 - keep) / (2 * len(cfg.ells))


def detection_probabilities(cfg: ExperimentConfig) -> np.ndarray:
    """Per-photon probability of a detected coincidence in loop ``0..n_max``."""
    return np.array([
        exit_probability(cfg.loop, n) * cfg.encoding_efficiency * mode_acceptance(cfg, n)
        for n in range(cfg.n_max + 1)
    ])


def jitter_pmf(cfg: ExperimentConfig) -> np.ndarray:
    """Discrete Gaussian over offsets ``-h..h`` with ``h = window_bins // 2``."""
    h = cfg.window_bins // 2
    offsets = np.arange(-h, h + 1)
    if cfg.jitter_sigma_bins == 0:
        return (offsets == 0).astype(float)
    w = np.exp(-0.5 * (offsets / cfg.jitter_sigma_bins) ** 2)
    return w / w.sum()


def simulate_run(cfg: ExperimentConfig, repeat: int = 0) -> TimeHistogram:
    """Simulate one dataset (repeat index ``repeat``) of ``cfg``."""
    counts = np.zeros(cfg.span, dtype=np.int64)
    h = cfg.window_bins // 2
    if cfg.budget > 0:
        rng = _rng(cfg, repeat, _SIGNAL)
        det = detection_probabilities(cfg)
        pvals = np.append(det, max(0.0, 1.0 - det.sum()))
        per_loop = rng.multinomial(cfg.budget, pvals)[:-1]
        pmf = jitter_pmf(cfg)
        for n, c in enumerate(per_loop):
            if c == 0:
                continue
            centre = cfg.t0_bin + n * cfg.peak_spacing_bins
            counts[centre - h:centre + h + 1] += rng.multinomial(c, pmf)
    rate = cfg.accidentals_per_bin
    if rate > 0:
        counts += _rng(cfg, repeat, _ACCIDENTAL).poisson(rate, size=cfg.span)
    meta = {
        "mode": "gaussian" if cfg.is_reference else "qfa",
        "ells": None if cfg.ells is None else list(cfg.ells),
        "phi_rad": cfg.phi,
        "budget": cfg.budget,
        "seed": cfg.seed,
        "repeat": repeat,
        "label": cfg.label,
    }
    return TimeHistogram(counts, cfg.bin_width, cfg.t0_bin, cfg.peak_spacing_bins,
                         cfg.window_bins, cfg.lead_bins, meta)


def _threads() -> int:
    env = os.environ.get("QFA_LAB_THREADS")
    if env and env.isdigit() and int(env) > 0:
        return int(env)
    return min(8, os.cpu_count() or 1)


def simulate_repeats(cfg: ExperimentConfig, repeats: int | None = None,
                     threads: int | None = None) -> list:
    """All repeats of ``cfg`` in repeat order."""
    repeats = cfg.repeats if repeats is None else repeats
    nthreads = threads or _threads()
    if nthreads == 1 or repeats == 1:
        return [simulate_run(cfg, r) for r in range(repeats)]
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        return list(pool.map(lambda r: simulate_run(cfg, r), range(repeats)))


def merge(hists) -> TimeHistogram:
    """Sum histograms sharing bin geometry (associative and commutative)."""
    hists = list(hists)
    total = hists[0]
    for h in hists[1:]:
        total = total + h
    return total
