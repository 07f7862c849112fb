"""Single-qubit state tomography of an OAM pair by direct inversion.

The Bloch sphere of the pair ``{|l>, |-l>}`` has ``z = |+-l>``,
``x = (|l> +- |-l>)/sqrt2`` (the petal modes) and ``y = (|l> +- i|-l>)/sqrt2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InversionError
from ..photonic import dove_unitary

LABELS = ("z+", "z-", "x+", "x-", "y+", "y-")

_S = 1 / math.sqrt(2)
# projector kets in the (|l>, |-l>) basis
_KETS = {
    "z+": np.array([1, 0], complex),
    "z-": np.array([0, 1], complex),
    "x+": np.array([_S, _S], complex),
    "x-": np.array([_S, -_S], complex),
    "y+": np.array([_S, 1j * _S], complex),
    "y-": np.array([_S, -1j * _S], complex),
}


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float
    sigma: tuple = (0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    @property
    def unphysical(self) -> bool:
        """Length exceeds 1 by more than three statistical standard deviations."""
        r = self.as_array()
        n = np.linalg.norm(r)
        if n == 0:
            return False
        s = math.sqrt(float(np.sum((r / n) ** 2 * np.asarray(self.sigma) ** 2)))
        return bool(n > 1 + 3 * s)


def _counts_tuple(counts):
    if isinstance(counts, dict):
        return tuple(float(counts[k]) for k in LABELS)
    c = tuple(float(v) for v in counts)
    if len(c) != 6:
        raise InversionError("need six counts ordered z+, z-, x+, x-, y+, y-")
    return c


def qst_direct_inversion(counts) -> BlochVector:
    """Bloch vector from six projective counts (dict or ``z+,z-,x+,x-,y+,y-``).

    Each component is ``(N+ - N-) / (N+ + N-)``; ``sigma`` is the binomial
    standard error ``sqrt((1 - r^2) / N)`` for the axis total ``N``.
    """
    zp, zm, xp, xm, yp, ym = _counts_tuple(counts)
    if min(zp, zm, xp, xm, yp, ym) < 0:
        raise InversionError("counts must be non-negative")
    comps, sig = [], []
    for name, plus, minus in (("x", xp, xm), ("y", yp, ym), ("z", zp, zm)):
        total = plus + minus
        if total <= 0:
            raise InversionError(f"{name} axis has no counts")
        r = (plus - minus) / total
        comps.append(r)
        sig.append(math.sqrt(max(0.0, 1 - r * r) / total))
    return BlochVector(*comps, sigma=tuple(sig))


def accept_prob_from_bloch(r: BlochVector, r_ref: BlochVector) -> float:
    """``(1 + r . r_ref) / 2``: overlap with the accepting pure state."""
    ref = r_ref.as_array()
    if np.linalg.norm(ref) > 1 + 1e-12:
        raise InversionError("reference Bloch vector longer than 1")
    return float((1 + r.as_array() @ ref) / 2)


def petal_to_oam(state) -> np.ndarray:
    """Petal-basis amplitudes ``(p+, p-)`` to ``(|l>, |-l>)`` amplitudes."""
    a, b = np.asarray(state, complex)
    return np.array([(a + b) * _S, (a - b) * _S])


def born_probabilities(state_oam) -> dict:
    """Exact probabilities of the six projections for a pure state."""
    psi = np.asarray(state_oam, complex)
    psi = psi / np.linalg.norm(psi)
    return {k: float(abs(np.vdot(v, psi)) ** 2) for k, v in _KETS.items()}


def dove_trajectory(ell: int, phi: float, n_max: int) -> list:
    """States ``U^n |p+>`` (OAM basis) for ``n = 0..n_max``."""
    u = dove_unitary(ell, phi)
    v = np.array([1, 0], complex)
    out = []
    for _ in range(n_max + 1):
        out.append(petal_to_oam(v))
        v = u @ v
    return out


def analytic_bloch(ell: int, phi: float, n: int) -> BlochVector:
    """The positive petal state after ``n`` Dove passes: a rotation by
    ``4 l phi`` per pass about ``z`` starting from ``+x``."""
    a = 4 * ell * phi * n
    return BlochVector(math.cos(a), math.sin(a), 0.0)


PETAL_PLUS = BlochVector(1.0, 0.0, 0.0)
