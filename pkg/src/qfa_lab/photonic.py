"""OAM petal-mode realization of the ``2d``-state QFA.

Basis index ``2j`` is the positive petal mode ``(|l_j> + |-l_j>)/sqrt(2)`` and
``2j+1`` the negative one. A Dove prism tilted by ``phi`` rotates the
transverse structure by ``2 phi``, which acts on each petal pair as
``dove_unitary(l_j, phi)``. Angles are radians throughout.

After ``p`` passes with ``phi = pi/(2p)`` every sub-automaton returns to its
start with the common phase ``-1``; probabilities do not see it, so nothing
corrects for it.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .automata import QfaSpec, block_diag, superposition_unitary
from .errors import InvalidParameter, InvalidSpec

SUM_TOL = 1e-12


@dataclass(frozen=True)
class PetalBasis:
    ells: tuple

    def __post_init__(self):
        ells = tuple(int(l) for l in self.ells)
        if not ells:
            raise InvalidParameter("at least one OAM value is required")
        if any(l < 1 for l in ells):
            raise InvalidParameter(f"OAM values must be positive, got {ells}")
        if len(set(ells)) != len(ells):
            raise InvalidParameter(f"OAM values must be distinct, got {ells}")
        object.__setattr__(self, "ells", ells)

    @property
    def d(self) -> int:
        return len(self.ells)

    @property
    def dim(self) -> int:
        return 2 * len(self.ells)

    def index(self, ell: int, sign: int) -> int:
        """Basis index of ``p^+_ell`` (``sign=+1``) or ``p^-_ell`` (``sign=-1``)."""
        j = self.ells.index(ell)
        return 2 * j + (0 if sign > 0 else 1)

    @property
    def labels(self) -> dict:
        return {(l, s): self.index(l, s) for l in self.ells for s in (+1, -1)}


@dataclass(frozen=True)
class DoveConfig:
    phi: float

    def __post_init__(self):
        if not 0 <= self.phi < math.pi:
            raise InvalidParameter("Dove angle must lie in [0, pi)")

    @property
    def structure_rotation(self) -> float:
        return 2 * self.phi


@dataclass(frozen=True)
class LoopConfig:
    """Beamsplitter loop: ``R`` keeps the photon in the loop, ``T`` lets it out."""

    R: float
    T: float
    eta_loop: float = 1.0
    delta_t: float = 2.26e-9
    dove: DoveConfig = field(default_factory=lambda: DoveConfig(0.0))

    def __post_init__(self):
        if abs(self.R + self.T - 1) > SUM_TOL:
            raise InvalidParameter(f"R + T must equal 1, got {self.R + self.T!r}")
        if not 0 < self.T < 1:
            raise InvalidParameter("T must lie strictly between 0 and 1")
        if not 0 < self.eta_loop <= 1:
            raise InvalidParameter("eta_loop must lie in (0, 1]")
        if self.delta_t <= 0:
            raise InvalidParameter("delta_t must be positive")

    @classmethod
    def from_ratio(cls, ratio: str, **kw) -> "LoopConfig":
        """Parse an ``"R:T"`` splitting ratio such as ``"70:30"``."""
        try:
            r, t = (float(x) for x in ratio.split(":"))
        except ValueError as exc:
            raise InvalidParameter(f"bad splitting ratio {ratio!r}") from exc
        total = r + t
        if total <= 0:
            raise InvalidParameter(f"bad splitting ratio {ratio!r}")
        return cls(R=r / total, T=1 - r / total, **kw)


def dove_unitary(ell: int, phi: float) -> np.ndarray:
    if ell < 1:
        raise InvalidParameter("ell must be >= 1")
    a = 2 * ell * phi
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def va_block(basis: PetalBasis, phi: float) -> np.ndarray:
    return block_diag(dove_unitary(l, phi) for l in basis.ells)


def accept_prob_closed_form(ells, phi: float, n: int) -> float:
    """``(1/d^2) (sum_j cos(2 n l_j phi))^2``."""
    ells = PetalBasis(tuple(ells)).ells
    s = math.fsum(math.cos(2 * n * l * phi) for l in ells)
    return (s / len(ells)) ** 2


def photonic_qfa(ells, phi: float) -> QfaSpec:
    """QfaSpec for the petal encoding; ``V_¢`` is the deterministic completion
    used for the abstract machine."""
    basis = ells if isinstance(ells, PetalBasis) else PetalBasis(tuple(ells))
    v_cent = superposition_unitary(basis.dim)
    v0 = np.zeros(basis.dim, dtype=complex)
    v0[0] = 1.0
    return QfaSpec(basis.dim, v0, v_cent, va_block(basis, phi), v_cent.conj().T)


def matrix_vs_closed_form(basis, phi: float, n: int) -> float:
    """``|<v0|V_$ V_a^n V_¢|v0>|^2`` from explicit matrices minus the closed form."""
    basis = basis if isinstance(basis, PetalBasis) else PetalBasis(tuple(basis))
    spec = photonic_qfa(basis, phi)
    v = spec.V_cent @ spec.v0
    for _ in range(n):
        v = spec.V_a @ v
    amp = spec.v0.conj() @ (spec.V_dollar @ v)
    return abs(abs(amp) ** 2 - accept_prob_closed_form(basis.ells, phi, n))


def dove_angle_for_p(p: int, ells) -> float:
    """``pi/(2p)`` when all OAM values share parity, otherwise ``pi/p``."""
    if p < 2:
        raise InvalidParameter("p must be >= 2")
    ells = list(ells)
    if not ells:
        raise InvalidParameter("OAM set must be non-empty")
    parities = {l % 2 for l in ells}
    return math.pi / (2 * p) if len(parities) == 1 else math.pi / p


def exit_probability(loop: LoopConfig, n: int) -> float:
    """Probability that a photon leaves after exactly ``n`` round trips.

    ``T^2 R^(n-1) eta^n`` for ``n >= 1``. ``n = 0`` is the direct reflection
    that never enters the loop, with probability ``R``.
    """
    if n < 0:
        raise InvalidParameter("n must be non-negative")
    if n == 0:
        return loop.R
    return loop.T ** 2 * loop.R ** (n - 1) * loop.eta_loop ** n


# --------------------------------------------------------------------------- JSON


def photonic_to_dict(ells, phi: float, loop: LoopConfig | None = None) -> dict:
    basis = PetalBasis(tuple(ells))
    doc = photonic_qfa(basis, phi).to_dict()
    loop = loop or LoopConfig(0.5, 0.5, dove=DoveConfig(phi))
    doc["photonic"] = {
        "ells": list(basis.ells),
        "phi_rad": phi,
        "R": loop.R,
        "T": loop.T,
        "eta_loop": loop.eta_loop,
        "delta_t_s": loop.delta_t,
    }
    return doc


def photonic_from_dict(doc: dict):
    """Return ``(QfaSpec, ells, phi, LoopConfig)`` from a photonic document."""
    try:
        ph = doc["photonic"]
        ells = tuple(int(l) for l in ph["ells"])
        phi = float(ph["phi_rad"])
        loop = LoopConfig(
            R=float(ph["R"]),
            T=float(ph["T"]),
            eta_loop=float(ph.get("eta_loop", 1.0)),
            delta_t=float(ph.get("delta_t_s", 2.26e-9)),
            dove=DoveConfig(phi),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"malformed photonic section: {exc}") from exc
    return QfaSpec.from_dict(doc), ells, phi, loop


def photonic_to_json(ells, phi, loop=None, **kw) -> str:
    return json.dumps(photonic_to_dict(ells, phi, loop), **kw)
