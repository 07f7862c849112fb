"""Configuration and histogram containers for the loop experiment."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..photonic import DoveConfig, LoopConfig, PetalBasis

TAU = 13e-12
WINDOW_BINS = 77
PEAK_SPACING_BINS = 174


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulated measurement campaign.

    ``ells=None`` selects the rotation-invariant Gaussian reference mode.
    ``budget`` is the number of heralded photons per repeat. When
    ``measurement_time`` is not given it is taken as ``budget / r1``.
    ``depolarization`` is the per-pass probability that the structured state
    is replaced by the maximally mixed state of the ``2d``-dimensional space;
    it is the single knob used to mimic imperfect optics.
    """

    loop: LoopConfig
    n_max: int
    ells: tuple | None = None
    phi: float = 0.0
    r1: float = 0.0
    r2: float = 0.0
    budget: int = 10 ** 6
    repeats: int = 1
    window_bins: int = WINDOW_BINS
    peak_spacing_bins: int = PEAK_SPACING_BINS
    bin_width: float = TAU
    pre_record: float = 10e-9
    accidental_lead_time: float = 4e-9
    jitter_sigma_bins: float = 5.0
    encoding_efficiency: float = 1.0
    depolarization: float = 0.0
    measurement_time: float | None = None
    span_bins: int | None = None
    seed: int = 0
    label: str = ""

    def __post_init__(self):
        if self.ells is not None:
            object.__setattr__(self, "ells", PetalBasis(tuple(self.ells)).ells)
        if self.n_max < 0:
            raise ConfigError("n_max must be non-negative")
        if self.budget < 0:
            raise ConfigError("budget must be non-negative")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if not 1 <= self.window_bins <= self.peak_spacing_bins:
            raise ConfigError("need 1 <= window_bins <= peak_spacing_bins")
        if self.bin_width <= 0:
            raise ConfigError("bin_width must be positive")
        if self.r1 < 0 or self.r2 < 0:
            raise ConfigError("singles rates must be non-negative")
        if self.jitter_sigma_bins < 0:
            raise ConfigError("jitter_sigma_bins must be non-negative")
        if not 0 < self.encoding_efficiency <= 1:
            raise ConfigError("encoding_efficiency must lie in (0, 1]")
        if not 0 <= self.depolarization <= 1:
            raise ConfigError("depolarization must lie in [0, 1]")
        if self.measurement_time is not None and self.measurement_time < 0:
            raise ConfigError("measurement_time must be non-negative")
        if self.lead_bins < 1:
            raise ConfigError("accidental lead region is empty")
        if self.lead_bins > self.t0_bin - self.window_bins // 2:
            raise ConfigError("accidental lead region overlaps the zeroth-loop window")
        if self.span_bins is not None and self.span_bins < self.required_span:
            raise ConfigError(
                f"span of {self.span_bins} bins cannot hold {self.n_max} loops "
                f"(need {self.required_span})"
            )

    @property
    def is_reference(self) -> bool:
        return self.ells is None

    @property
    def t0_bin(self) -> int:
        return int(round(self.pre_record / self.bin_width))

    @property
    def lead_bins(self) -> int:
        return int(round(self.accidental_lead_time / self.bin_width))

    @property
    def required_span(self) -> int:
        return self.t0_bin + self.n_max * self.peak_spacing_bins + self.window_bins

    @property
    def span(self) -> int:
        if self.span_bins is not None:
            return self.span_bins
        return self.t0_bin + (self.n_max + 1) * self.peak_spacing_bins

    @property
    def effective_measurement_time(self) -> float:
        if self.measurement_time is not None:
            return self.measurement_time
        return self.budget / self.r1 if self.r1 > 0 else 0.0

    @property
    def accidentals_per_bin(self) -> float:
        """Expected accidental counts per bin, ``R1 R2 tau T_meas``."""
        return self.r1 * self.r2 * self.bin_width * self.effective_measurement_time

    def reference(self) -> "ExperimentConfig":
        """Gaussian-reference twin sharing every setting but the mode."""
        return dataclasses.replace(self, ells=None, depolarization=0.0,
                                   label=(self.label + ":gauss") if self.label else "gauss")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "loop":
                v = {"R": v.R, "T": v.T, "eta_loop": v.eta_loop,
                     "delta_t_s": v.delta_t, "phi_rad": v.dove.phi}
            elif f.name == "ells" and v is not None:
                v = list(v)
            out[f.name] = v
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        lp = doc.pop("loop")
        loop = LoopConfig(R=lp["R"], T=lp["T"], eta_loop=lp.get("eta_loop", 1.0),
                          delta_t=lp.get("delta_t_s", 2.26e-9),
                          dove=DoveConfig(lp.get("phi_rad", 0.0)))
        if doc.get("ells") is not None:
            doc["ells"] = tuple(doc["ells"])
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(loop=loop, **doc)


@dataclass(frozen=True, eq=False)
class TimeHistogram:
    """Coincidence counts per time bin for one dataset."""

    counts: np.ndarray
    bin_width: float = TAU
    t0_bin: int = 0
    peak_spacing_bins: int = PEAK_SPACING_BINS
    window_bins: int = WINDOW_BINS
    lead_bins: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64, copy=True)
        if c.ndim != 1:
            raise ConfigError("counts must be one-dimensional")
        if np.any(c < 0):
            raise ConfigError("counts must be non-negative")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def span(self) -> int:
        return self.counts.shape[0]

    def with_counts(self, counts) -> "TimeHistogram":
        return dataclasses.replace(self, counts=counts)

    def __add__(self, other: "TimeHistogram") -> "TimeHistogram":
        if (self.span, self.t0_bin, self.peak_spacing_bins, self.window_bins,
                self.lead_bins) != (other.span, other.t0_bin, other.peak_spacing_bins,
                                    other.window_bins, other.lead_bins) or \
                not math.isclose(self.bin_width, other.bin_width):
            raise ConfigError("histograms have different bin geometry")
        return self.with_counts(self.counts + other.counts)

    @classmethod
    def empty_like(cls, cfg: ExperimentConfig, **meta) -> "TimeHistogram":
        return cls(np.zeros(cfg.span, dtype=np.int64), cfg.bin_width, cfg.t0_bin,
                   cfg.peak_spacing_bins, cfg.window_bins, cfg.lead_bins, dict(meta))
