"""Scalar fields on a square grid, mode-carving holograms and fiber filters.

Fields are sampled on ``grid_n x grid_n`` points spaced ``pitch`` metres apart,
with the optical axis on sample ``(grid_n // 2, grid_n // 2)``. Arrays are
indexed ``[row, col] = [y, x]``. Power is ``sum |u|^2 pitch^2``.

Propagation between the SLM, the loop and the fiber is taken to be ideal
imaging, so no diffraction integral appears anywhere here.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import AmplitudeExceedsInput, DomainError, GridError, ResolutionError

DEFAULT_GRID_N = 512
DEFAULT_EXTENT_FACTOR = 8.0
BISECTION_STEPS = 60
_BIN_HEADER = struct.Struct("<4sQd")
_BIN_MAGIC = b"QFAF"


@dataclass(frozen=True)
class Grid:
    n: int
    pitch: float

    def __post_init__(self):
        if self.n < 2 or self.pitch <= 0:
            raise GridError("grid needs n >= 2 and a positive pitch")

    @classmethod
    def for_waist(cls, w: float, n: int = DEFAULT_GRID_N,
                  extent_factor: float = DEFAULT_EXTENT_FACTOR) -> "Grid":
        """Grid whose full width is ``extent_factor`` times the waist ``w``."""
        return cls(n, extent_factor * w / n)

    @property
    def axis(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.pitch

    @property
    def half_extent(self) -> float:
        return (self.n // 2) * self.pitch

    def mesh(self):
        x = self.axis
        return np.meshgrid(x, x, indexing="xy")

    def polar(self):
        x, y = self.mesh()
        return np.hypot(x, y), np.arctan2(y, x)


@dataclass(frozen=True, eq=False)
class ScalarField:
    values: np.ndarray
    pitch: float

    def __post_init__(self):
        v = np.array(self.values, dtype=complex, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise GridError("field must be sampled on a square grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def grid_n(self) -> int:
        return self.values.shape[0]

    @property
    def grid(self) -> Grid:
        return Grid(self.grid_n, self.pitch)

    def power(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.pitch ** 2)

    def normalize(self) -> "ScalarField":
        p = self.power()
        if p == 0:
            raise DomainError("cannot normalize a zero field")
        return ScalarField(self.values / math.sqrt(p), self.pitch)

    def inner(self, other: "ScalarField") -> complex:
        """``<self|other>`` as a grid sum."""
        _check_same_grid(self, other)
        return complex(np.vdot(self.values, other.values) * self.pitch ** 2)

    def overlap(self, other: "ScalarField") -> float:
        """Normalized ``|<self|other>| / (|self| |other|)``."""
        return abs(self.inner(other)) / math.sqrt(self.power() * other.power())

    def scaled(self, c) -> "ScalarField":
        return ScalarField(self.values * c, self.pitch)

    def __add__(self, other):
        _check_same_grid(self, other)
        return ScalarField(self.values + other.values, self.pitch)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return ScalarField(self.values - other.values, self.pitch)

    def rotated(self, angle: float, order: int = 3) -> "ScalarField":
        """Rotate the transverse structure by ``angle`` (counter-clockwise)
        using spline interpolation of the sampled field."""
        n = self.grid_n
        c = n // 2
        idx = np.arange(n) - c
        col, row = np.meshgrid(idx, idx, indexing="xy")
        ca, sa = math.cos(angle), math.sin(angle)
        src_col = ca * col + sa * row + c
        src_row = -sa * col + ca * row + c
        coords = np.array([src_row, src_col])
        re = ndimage.map_coordinates(self.values.real, coords, order=order, mode="constant")
        im = ndimage.map_coordinates(self.values.imag, coords, order=order, mode="constant")
        return ScalarField(re + 1j * im, self.pitch)

    # ------------------------------------------------------------------ export

    def to_bytes(self) -> bytes:
        body = np.empty((self.grid_n, self.grid_n, 2), dtype="<f8")
        body[..., 0] = self.values.real
        body[..., 1] = self.values.imag
        return _BIN_HEADER.pack(_BIN_MAGIC, self.grid_n, self.pitch) + body.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "ScalarField":
        magic, n, pitch = _BIN_HEADER.unpack_from(data)
        if magic != _BIN_MAGIC:
            raise GridError("not a field file")
        body = np.frombuffer(data, dtype="<f8", offset=_BIN_HEADER.size)
        if body.size != 2 * n * n:
            raise GridError("field file truncated")
        body = body.reshape(n, n, 2)
        return cls(body[..., 0] + 1j * body[..., 1], pitch)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "ScalarField":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def to_csv(self, path) -> None:
        """Write ``row, col, x_m, y_m, intensity, phase`` for plotting."""
        x, y = self.grid.mesh()
        n = self.grid_n
        rows, cols = np.divmod(np.arange(n * n), n)
        table = np.column_stack([
            rows, cols, x.ravel(), y.ravel(),
            np.abs(self.values.ravel()) ** 2, np.angle(self.values.ravel()),
        ])
        np.savetxt(path, table, delimiter=",", header="row,col,x_m,y_m,intensity,phase",
                   comments="", fmt=["%d", "%d", "%.9e", "%.9e", "%.9e", "%.9e"])


def _check_same_grid(a: ScalarField, b: ScalarField):
    if a.values.shape != b.values.shape or not math.isclose(a.pitch, b.pitch, rel_tol=1e-12):
        raise GridError(
            f"grid mismatch: {a.grid_n}@{a.pitch:g} m vs {b.grid_n}@{b.pitch:g} m"
        )


# --------------------------------------------------------------------------- modes


def lg_amplitude_constant(ell: int, w: float) -> float:
    """Normalization of ``(r sqrt2/w)^|l| exp(-r^2/w^2)`` to unit power."""
    return math.sqrt(2.0 / (math.pi * math.factorial(abs(ell)))) / w


def lg_field(ell: int, w: float, grid: Grid, rotation: float = 0.0) -> ScalarField:
    """Radial-index-zero Laguerre-Gauss mode at its waist, unit power on ``grid``.

    ``rotation`` evaluates the mode rotated by that angle analytically
    (equivalent to the phase ``exp(-i l rotation)``).
    """
    a = abs(ell)
    if w < 8 * grid.pitch * math.sqrt(a + 1):
        raise ResolutionError(
            f"waist {w:g} m under-resolved for |l|={a} at pitch {grid.pitch:g} m"
        )
    r, az = grid.polar()
    amp = (r * math.sqrt(2) / w) ** a * np.exp(-(r ** 2) / w ** 2)
    u = lg_amplitude_constant(ell, w) * amp * np.exp(1j * ell * (az - rotation))
    return ScalarField(u, grid.pitch).normalize()


def petal_field(ell: int, sign: int, w: float, grid: Grid, rotation: float = 0.0) -> ScalarField:
    """``(LG_{+l} + sign * LG_{-l}) / sqrt(2)``; ``2l`` azimuthal lobes."""
    if ell < 1:
        raise DomainError("petal modes need l >= 1")
    plus = lg_field(ell, w, grid, rotation)
    minus = lg_field(-ell, w, grid, rotation)
    s = 1 if sign > 0 else -1
    return ScalarField((plus.values + s * minus.values) / math.sqrt(2), grid.pitch)


def petal_superposition(ells, w: float, grid: Grid, rotation: float = 0.0) -> ScalarField:
    """Equal-weight superposition of positive petal modes (the encoded initial state)."""
    fields = [petal_field(l, +1, w, grid, rotation) for l in ells]
    total = sum((f.values for f in fields), np.zeros((grid.n, grid.n), complex))
    return ScalarField(total / math.sqrt(len(fields)), grid.pitch).normalize()


def gaussian_amplitude(grid: Grid, w: float) -> np.ndarray:
    """Peak-one Gaussian amplitude ``exp(-r^2/w^2)``."""
    r, _ = grid.polar()
    return np.exp(-(r ** 2) / w ** 2)


def gaussian_mode(grid: Grid, w: float) -> ScalarField:
    return ScalarField(lg_amplitude_constant(0, w) * gaussian_amplitude(grid, w), grid.pitch)


# --------------------------------------------------------------------------- holograms


def sinc(x):
    """Unnormalized ``sin(x)/x``."""
    return np.sinc(np.asarray(x, dtype=float) / math.pi)


def inv_sinc(y):
    """Inverse of ``sin(x)/x`` on ``x in [-pi, 0]`` by bisection.

    Accepts scalars or arrays; raises :class:`DomainError` outside ``[0, 1]``.
    """
    y_arr = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(y_arr)) or np.any(y_arr < 0) or np.any(y_arr > 1):
        raise DomainError("inv_sinc is defined on [0, 1]")
    lo = np.full(y_arr.shape, -math.pi)
    hi = np.zeros(y_arr.shape)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = sinc(mid) < y_arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    x = np.where(y_arr == 1.0, 0.0, np.where(y_arr == 0.0, -math.pi, x))
    return float(x) if np.ndim(y) == 0 else x


@dataclass(frozen=True, eq=False)
class HologramSpec:
    target: ScalarField
    w_in: float
    grating_period: float
    phase: np.ndarray
    M: np.ndarray
    F: np.ndarray


def fit_to_envelope(target: ScalarField, w_in: float, fill: float = 1.0) -> ScalarField:
    """Scale ``target`` so that its largest ratio to the input Gaussian is ``fill``."""
    ag = gaussian_amplitude(target.grid, w_in)
    ratio = np.abs(target.values) / ag
    return target.scaled(fill / float(ratio.max()))


def hologram_phase(target: ScalarField, w_in: float, grating_period: float,
                   tol: float = 1e-9) -> HologramSpec:
    """Phase-only hologram carving ``target`` out of a Gaussian of waist ``w_in``.

    The target amplitude is taken relative to the peak of the illuminating
    Gaussian, so it must satisfy ``|target| <= exp(-r^2/w_in^2)`` everywhere;
    :func:`fit_to_envelope` produces such a scaling.
    """
    grid = target.grid
    amp = np.abs(target.values)
    ag = gaussian_amplitude(grid, w_in)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(amp > 0, amp / ag, 0.0)
    worst_idx = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    worst = float(ratio[worst_idx])
    if worst > 1 + tol:
        x = grid.axis
        raise AmplitudeExceedsInput(worst, (x[worst_idx[1]], x[worst_idx[0]]))
    ratio = np.clip(ratio, 0.0, 1.0)
    m = 1.0 + inv_sinc(ratio) / math.pi
    f = np.angle(target.values) - math.pi * m
    x, _ = grid.mesh()
    phase = m * np.mod(f + 2 * math.pi * x / grating_period, 2 * math.pi)
    for a in (phase, m, f):
        a.setflags(write=False)
    return HologramSpec(target, w_in, grating_period, phase, m, f)


def first_order_field(holo: HologramSpec) -> ScalarField:
    """First diffraction order ``-sinc(pi(M-1)) exp(i(F + pi M))`` times the
    illuminating Gaussian amplitude."""
    ag = gaussian_amplitude(holo.target.grid, holo.w_in)
    t1 = -sinc(math.pi * (holo.M - 1)) * np.exp(1j * (holo.F + math.pi * holo.M))
    return ScalarField(ag * t1, holo.target.pitch)


def illumination(holo: HologramSpec) -> ScalarField:
    """The peak-one input Gaussian that lights the hologram."""
    return ScalarField(gaussian_amplitude(holo.target.grid, holo.w_in), holo.target.pitch)


# --------------------------------------------------------------------------- filters


@dataclass(frozen=True, eq=False)
class FilterSpec:
    """Measurement hologram plus single-mode fiber.

    ``gaussian_corrected`` divides the hologram by the back-propagated fiber
    mode amplitude so the fiber Gaussian drops out of the overlap. ``r_max``
    is the aperture radius (defaults to the grid half extent).
    """

    measured_structure: ScalarField
    w_out: float
    gaussian_corrected: bool = True
    r_max: float | None = None

    def __post_init__(self):
        if self.w_out <= 0:
            raise DomainError("w_out must be positive")
        object.__setattr__(self, "measured_structure", self.measured_structure.normalize())

    def detection_mode(self) -> np.ndarray:
        """``H_holo * Psi_G`` inside the aperture (the conjugated mode the
        fiber projects onto)."""
        grid = self.measured_structure.grid
        r, _ = grid.polar()
        r_max = grid.half_extent if self.r_max is None else self.r_max
        h = np.conj(self.measured_structure.values)
        ag = gaussian_amplitude(grid, self.w_out)
        if self.gaussian_corrected:
            h = h / ag
        psi_g = lg_amplitude_constant(0, self.w_out) * ag
        return np.where(r <= r_max, h * psi_g, 0.0)


def measurement_overlap(incident: ScalarField, filt: FilterSpec) -> complex:
    """Detection amplitude of ``incident`` behind the filter.

    The integral of ``H_holo Psi_in Psi_G`` over the aperture is divided by the
    norm of ``H_holo Psi_G``: the hologram's absolute efficiency is common to
    every input and is removed by the reference normalization. A perfectly
    matched unit-power input then gives modulus 1 with the Gaussian correction.
    """
    _check_same_grid(incident, filt.measured_structure)
    mode = filt.detection_mode()
    pitch2 = incident.pitch ** 2
    norm = math.sqrt(float(np.sum(np.abs(mode) ** 2)) * pitch2)
    return complex(np.sum(mode * incident.values) * pitch2 / norm)


def detection_probability(incident: ScalarField, filt: FilterSpec) -> float:
    return abs(measurement_overlap(incident, filt)) ** 2
