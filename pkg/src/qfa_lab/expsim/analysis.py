"""Histogram analysis: loop windows, accidental subtraction and normalization.

Per dataset the corrected counts in loop ``n`` are
``C_n = sum_window (C_b - A)`` with ``A`` the mean accidental count per bin in
the lead region. Each dataset is normalized to its zeroth loop, the ratios are
averaged over datasets, and the structured-mode average is divided by the
Gaussian-reference average. Negative corrected counts are kept as they are;
clamping them would bias the ratios upward.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, NormalizationError, RangeError
from .model import TimeHistogram


def _as_list(h):
    if isinstance(h, TimeHistogram):
        return [h]
    out = list(h)
    if not out:
        raise ConfigError("no histograms given")
    return out


def window_bounds(hist: TimeHistogram, n: int, center0: int | None = None):
    """Half-open bin range ``[lo, hi)`` of the loop-``n`` window."""
    c0 = hist.t0_bin if center0 is None else center0
    centre = c0 + n * hist.peak_spacing_bins
    lo = centre - hist.window_bins // 2
    hi = lo + hist.window_bins
    if n < 0 or lo < 0 or hi > hist.span:
        raise RangeError(f"loop {n} window [{lo}, {hi}) outside span {hist.span}")
    return lo, hi


def window_counts(hist: TimeHistogram, n: int, center0: int | None = None) -> int:
    lo, hi = window_bounds(hist, n, center0)
    return int(hist.counts[lo:hi].sum())


def estimate_accidentals(hist: TimeHistogram) -> float:
    """Mean counts per bin over the lead region before the first peak."""
    if hist.lead_bins < 1:
        raise ConfigError("histogram has no accidental lead region")
    if hist.lead_bins > hist.t0_bin - hist.window_bins // 2:
        raise ConfigError("lead region overlaps the zeroth-loop window")
    return float(hist.counts[:hist.lead_bins].mean())


def loop_counts_corrected(hist: TimeHistogram, n: int, center0: int | None = None,
                          accidentals: float | None = None) -> float:
    a = estimate_accidentals(hist) if accidentals is None else accidentals
    return window_counts(hist, n, center0) - hist.window_bins * a


def locate_center(hists) -> int:
    """Bin of the zeroth-loop maximum of the summed (Gaussian) histograms."""
    hists = _as_list(hists)
    total = np.sum([h.counts for h in hists], axis=0)
    h0 = hists[0]
    half = h0.peak_spacing_bins // 2
    lo = max(0, h0.t0_bin - half)
    hi = min(h0.span, h0.t0_bin + half)
    return lo + int(np.argmax(total[lo:hi]))


@dataclass(frozen=True, eq=False)
class LoopProbabilities:
    n: np.ndarray
    p: np.ndarray
    sigma: np.ndarray

    def rows(self):
        return list(zip(self.n.tolist(), self.p.tolist(), self.sigma.tolist()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "P_n", "sigma_n"])
            for n, p, s in self.rows():
                w.writerow([n, repr(p), repr(s)])

    @classmethod
    def from_csv(cls, path) -> "LoopProbabilities":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(np.array([int(r["n"]) for r in rows]),
                   np.array([float(r["P_n"]) for r in rows]),
                   np.array([float(r["sigma_n"]) for r in rows]))


def _relative_loops(hist, n_max, center0):
    """Per-dataset ``C_n / C_0`` and its Poisson variance."""
    a = estimate_accidentals(hist)
    var_a = a / hist.lead_bins
    w = hist.window_bins
    raw = np.array([window_counts(hist, n, center0) for n in range(n_max + 1)], float)
    c = raw - w * a
    if c[0] <= 0:
        raise NormalizationError(f"zeroth-loop counts {c[0]:.6g} are not positive")
    var_c = raw + w * w * var_a
    ratio = c / c[0]
    var = (var_c + ratio ** 2 * var_c[0]) / c[0] ** 2
    var[0] = 0.0
    return ratio, var


def _mode_average(hists, n_max, center0):
    per = [_relative_loops(h, n_max, center0) for h in hists]
    ratios = np.array([r for r, _ in per])
    mean = ratios.mean(axis=0)
    if len(per) > 1:
        var = ratios.var(axis=0, ddof=1)
    else:
        var = per[0][1]
    return mean, var


def accept_probabilities(qfa_hist, gauss_hist, n_max: int,
                         center0: int | None = None) -> LoopProbabilities:
    """Gaussian-normalized acceptance probability per loop.

    Either argument may be one histogram or a sequence of repeats. With
    repeats, ``sigma`` is the spread (one standard deviation) across datasets;
    with a single dataset it is propagated from Poisson statistics.
    Windows are centred on the zeroth-loop maximum of the Gaussian data unless
    ``center0`` is given.
    """
    qs = _as_list(qfa_hist)
    gs = _as_list(gauss_hist)
    geometry = {(h.span, h.t0_bin, h.peak_spacing_bins, h.window_bins, h.lead_bins)
                for h in qs + gs}
    if len(geometry) != 1 or len({h.bin_width for h in qs + gs}) != 1:
        raise ConfigError("QFA and Gaussian histograms must share bin geometry")
    if center0 is None:
        center0 = locate_center(gs)
    pq, vq = _mode_average(qs, n_max, center0)
    pg, vg = _mode_average(gs, n_max, center0)
    if np.any(pg <= 0):
        raise NormalizationError("Gaussian reference has non-positive loop counts")
    p = pq / pg
    sigma = np.sqrt(vq + p ** 2 * vg) / pg
    return LoopProbabilities(np.arange(n_max + 1), p, sigma)


def within_sigmas(probs: LoopProbabilities, expected, k: float = 3.0) -> np.ndarray:
    """Boolean per loop: ``|P_n - expected_n| <= k sigma_n``."""
    expected = np.asarray(expected, float)
    return np.abs(probs.p - expected) <= k * probs.sigma + 1e-15


def poisson_sigma_scaling(sig_small, sig_large, budget_ratio: float) -> np.ndarray:
    """Observed ``sigma_small / sigma_large`` divided by ``sqrt(budget_ratio)``
    (1 for ideal shot-noise scaling)."""
    return np.asarray(sig_small) / np.asarray(sig_large) / math.sqrt(budget_ratio)
