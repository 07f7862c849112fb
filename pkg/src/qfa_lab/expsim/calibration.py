"""Dove-prism angle calibration from a rotated-mask power scan.

The scan is modelled as ``A cos^2(l (theta - delta)) + B`` with ``theta`` in
degrees. Writing ``cos^2 u = (1 + cos 2u)/2`` turns the model into
``c0 + c1 cos(2 l theta) + c2 sin(2 l theta)``, so the least-squares fit is a
linear solve with no starting guess and no local minima.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import FitError


@dataclass(frozen=True)
class CalibrationFit:
    offset_deg: float
    amplitude: float
    baseline: float
    rms_residual: float
    ell: int

    @property
    def period_deg(self) -> float:
        return 180.0 / self.ell

    @property
    def prism_error_deg(self) -> float:
        """Prism tilt error: the structure turns by twice the tilt."""
        return self.offset_deg / 2


def calibration_fit(samples, ell: int, powers=None) -> CalibrationFit:
    """Fit a power scan.

    ``samples`` is an ``(N, 2)`` array of ``(angle_deg, power)`` or, with
    ``powers`` given, the angles alone. The offset is reduced into
    ``(-period/2, period/2]`` with ``period = 180/l`` degrees.
    """
    if ell < 1:
        raise FitError("ell must be >= 1")
    if powers is None:
        arr = np.asarray(samples, float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise FitError("samples must be (angle_deg, power) pairs")
        theta, power = arr[:, 0], arr[:, 1]
    else:
        theta, power = np.asarray(samples, float), np.asarray(powers, float)
    if theta.size < 4:
        raise FitError("need at least four samples")
    period = 180.0 / ell
    if np.ptp(theta) < period * (1 - 1e-9):
        raise FitError(f"scan spans {np.ptp(theta):.3g} deg, less than one period ({period:.3g} deg)")
    scale = max(float(np.max(np.abs(power))), 1e-300)
    if np.ptp(power) <= 1e-12 * scale:
        raise FitError("power is constant; no modulation to fit")

    u = np.deg2rad(2 * ell * theta)
    design = np.column_stack([np.ones_like(u), np.cos(u), np.sin(u)])
    (c0, c1, c2), *_ = np.linalg.lstsq(design, power, rcond=None)
    half_amp = math.hypot(c1, c2)
    if half_amp <= 1e-9 * scale:
        raise FitError("fitted modulation vanishes")
    amplitude = 2 * half_amp
    baseline = c0 - half_amp
    offset = math.degrees(math.atan2(c2, c1)) / (2 * ell)
    # fold into (-period/2, period/2]
    offset = offset - period * math.floor(offset / period + 0.5)
    if offset <= -period / 2:
        offset += period
    resid = power - design @ np.array([c0, c1, c2])
    return CalibrationFit(offset, amplitude, baseline, float(np.sqrt(np.mean(resid ** 2))), ell)


def synthetic_scan(ell: int, offset_deg: float, *, start: float = 0.0, stop: float = 34.0,
                   step: float = 0.1, amplitude: float = 1.0, baseline: float = 0.0,
                   noise: float = 0.0, rng=None) -> np.ndarray:
    """``(angle_deg, power)`` pairs of an ideal scan plus optional Gaussian noise
    (``noise`` is the standard deviation in units of ``amplitude``)."""
    n = int(round((stop - start) / step)) + 1
    theta = start + step * np.arange(n)
    power = amplitude * np.cos(np.deg2rad(ell * (theta - offset_deg))) ** 2 + baseline
    if noise:
        rng = rng if rng is not None else np.random.default_rng()
        power = power + rng.normal(0.0, noise * amplitude, size=n)
    return np.column_stack([theta, power])
