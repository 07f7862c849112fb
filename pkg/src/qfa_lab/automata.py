"""Deterministic, probabilistic and quantum finite automata over a unary alphabet.

All machines read an input ``a^len`` framed by the end-markers ``¢`` and ``$``.
Quantum machines use complex double precision; run functions are pure and
specs are immutable, so everything here is safe to call from many threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, InvalidSpec

UNITARY_TOL = 1e-10
NORM_TOL = 1e-12
STOCHASTIC_TOL = 1e-12

SYMBOL = "a"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    return all(n % f for f in range(3, math.isqrt(n) + 1, 2))


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def unitarity_error(u: np.ndarray) -> float:
    """Return ``max |U^dagger U - I|``."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


# --------------------------------------------------------------------------- DFA


@dataclass(frozen=True)
class DfaSpec:
    n_states: int
    initial: int
    accepting: frozenset
    transition: dict

    def __post_init__(self):
        if self.n_states < 1:
            raise InvalidSpec("n_states must be positive")
        if not 0 <= self.initial < self.n_states:
            raise InvalidSpec("initial state out of range")
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        if any(not 0 <= s < self.n_states for s in self.accepting):
            raise InvalidSpec("accepting set not within state range")
        for s in range(self.n_states):
            t = self.transition.get((s, SYMBOL))
            if t is None or not 0 <= t < self.n_states:
                raise InvalidSpec(f"transition from state {s} on {SYMBOL!r} is undefined")


def dfa_build_modn(n: int) -> DfaSpec:
    """Cyclic ``n``-state DFA accepting exactly the lengths divisible by ``n``."""
    if n < 2:
        raise InvalidParameter(f"invalid modulus {n}: need n >= 2")
    return DfaSpec(
        n_states=n,
        initial=0,
        accepting=frozenset({0}),
        transition={(s, SYMBOL): (s + 1) % n for s in range(n)},
    )


def dfa_run(spec: DfaSpec, length: int) -> bool:
    if length < 0:
        raise InvalidParameter("input length must be non-negative")
    state = spec.initial
    for _ in range(length):
        state = spec.transition[(state, SYMBOL)]
    return state in spec.accepting


# --------------------------------------------------------------------------- PFA


@dataclass(frozen=True)
class RunResult:
    accept_prob: float
    final_state: np.ndarray
    trace: tuple | None = None


@dataclass(frozen=True)
class PfaSpec:
    """Probabilistic automaton with column (left) stochastic matrices."""

    n_states: int
    v0: np.ndarray
    A_cent: np.ndarray
    A_a: np.ndarray
    A_dollar: np.ndarray
    accepting: frozenset

    def __post_init__(self):
        m = self.n_states
        if m < 1:
            raise InvalidSpec("n_states must be positive")
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        if any(not 0 <= s < m for s in self.accepting):
            raise InvalidSpec("accepting set not within state range")
        v0 = _frozen(self.v0, float)
        if v0.shape != (m,) or np.any(v0 < 0) or abs(v0.sum() - 1) > STOCHASTIC_TOL:
            raise InvalidSpec("v0 must be a probability vector of length n_states")
        object.__setattr__(self, "v0", v0)
        for name in ("A_cent", "A_a", "A_dollar"):
            a = _frozen(getattr(self, name), float)
            if a.shape != (m, m):
                raise InvalidSpec(f"{name} must be {m}x{m}")
            if np.any(a < 0) or np.any(a > 1):
                raise InvalidSpec(f"{name} has entries outside [0, 1]")
            if np.max(np.abs(a.sum(axis=0) - 1)) > STOCHASTIC_TOL:
                raise InvalidSpec(f"{name} is not column stochastic")
            object.__setattr__(self, name, a)


def pfa_run(spec: PfaSpec, length: int) -> RunResult:
    if length < 0:
        raise InvalidParameter("input length must be non-negative")
    v = spec.A_cent @ spec.v0
    for _ in range(length):
        v = spec.A_a @ v
    v = spec.A_dollar @ v
    prob = float(sum(v[j] for j in sorted(spec.accepting)))
    return RunResult(accept_prob=prob, final_state=v)


def dfa_to_pfa(dfa: DfaSpec) -> PfaSpec:
    """Embed a DFA as a PFA with 0/1 transition matrices."""
    m = dfa.n_states
    a = np.zeros((m, m))
    for s in range(m):
        a[dfa.transition[(s, SYMBOL)], s] = 1.0
    v0 = np.zeros(m)
    v0[dfa.initial] = 1.0
    return PfaSpec(m, v0, np.eye(m), a, np.eye(m), dfa.accepting)


# --------------------------------------------------------------------------- QFA


@dataclass(frozen=True)
class QfaSpec:
    """Measure-once QFA: ``v_f = V_$ V_a^len V_¢ v0`` followed by projection
    onto the accepting basis states."""

    dim: int
    v0: np.ndarray
    V_cent: np.ndarray
    V_a: np.ndarray
    V_dollar: np.ndarray
    accepting: frozenset = field(default_factory=lambda: frozenset({0}))

    def __post_init__(self):
        m = self.dim
        if m < 1:
            raise InvalidSpec("dim must be positive")
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        if any(not 0 <= s < m for s in self.accepting):
            raise InvalidSpec("accepting set not within basis range")
        v0 = _frozen(self.v0, complex)
        if v0.shape != (m,) or abs(np.linalg.norm(v0) - 1) > NORM_TOL:
            raise InvalidSpec("v0 must be a unit vector of length dim")
        object.__setattr__(self, "v0", v0)
        for name in ("V_cent", "V_a", "V_dollar"):
            u = _frozen(getattr(self, name), complex)
            if u.shape != (m, m):
                raise InvalidSpec(f"{name} must be {m}x{m}")
            err = unitarity_error(u)
            if err > UNITARY_TOL:
                raise InvalidSpec(f"{name} is not unitary (error {err:.3g})")
            object.__setattr__(self, name, u)

    def accept_prob_of(self, state: np.ndarray) -> float:
        return float(sum(abs(state[j]) ** 2 for j in sorted(self.accepting)))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "v0": _complex_to_pairs(self.v0),
            "V_cent": _complex_to_pairs(self.V_cent),
            "V_a": _complex_to_pairs(self.V_a),
            "V_dollar": _complex_to_pairs(self.V_dollar),
            "accepting": sorted(self.accepting),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "QfaSpec":
        try:
            return cls(
                dim=int(doc["dim"]),
                v0=_pairs_to_complex(doc["v0"]),
                V_cent=_pairs_to_complex(doc["V_cent"]),
                V_a=_pairs_to_complex(doc["V_a"]),
                V_dollar=_pairs_to_complex(doc["V_dollar"]),
                accepting=frozenset(int(j) for j in doc["accepting"]),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidSpec(f"malformed QFA document: {exc}") from exc

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "QfaSpec":
        return cls.from_dict(json.loads(text))


def _complex_to_pairs(arr: np.ndarray):
    arr = np.asarray(arr, dtype=complex)
    pairs = np.stack([arr.real, arr.imag], axis=-1)
    return pairs.tolist()


def _pairs_to_complex(pairs) -> np.ndarray:
    a = np.asarray(pairs, dtype=float)
    if a.shape[-1] != 2:
        raise InvalidSpec("complex entries must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def qfa_run(spec: QfaSpec, length: int, trace: bool = False) -> RunResult:
    """Run ``spec`` on ``a^length``, multiplying by ``V_a`` once per symbol.

    With ``trace=True`` the state after ``¢`` and after every symbol is kept
    in ``RunResult.trace`` (``length + 1`` entries).
    """
    if length < 0:
        raise InvalidParameter("input length must be non-negative")
    v = spec.V_cent @ spec.v0
    states = [v] if trace else None
    for _ in range(length):
        v = spec.V_a @ v
        if trace:
            states.append(v)
    v = spec.V_dollar @ v
    return RunResult(
        accept_prob=spec.accept_prob_of(v),
        final_state=v,
        trace=tuple(states) if trace else None,
    )


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def qfa2_build(p: int, k: int = 1) -> QfaSpec:
    """Two-state QFA rotating by ``2 k pi / p`` per symbol."""
    _check_prime(p)
    if not 1 <= k <= p - 1:
        raise InvalidParameter(f"k={k} outside 1..{p - 1}")
    eye = np.eye(2, dtype=complex)
    v0 = np.array([1, 0], dtype=complex)
    return QfaSpec(2, v0, eye, rotation(2 * k * math.pi / p), eye, frozenset({0}))


def complete_unitary(first_column: np.ndarray) -> np.ndarray:
    """Unitary whose first column is ``first_column``.

    The remaining columns come from Gram-Schmidt over the standard basis
    ``e_0, e_1, ...`` in order, skipping vectors that are (numerically)
    dependent, so the result is deterministic.
    """
    c = np.asarray(first_column, dtype=complex)
    m = c.shape[0]
    cols = [c / np.linalg.norm(c)]
    for j in range(m):
        if len(cols) == m:
            break
        v = np.zeros(m, dtype=complex)
        v[j] = 1.0
        # two passes of modified Gram-Schmidt keep the basis orthonormal to ~1e-16
        for _ in range(2):
            for q in cols:
                v = v - (q.conj() @ v) * q
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            cols.append(v / nrm)
    return np.column_stack(cols)


def superposition_unitary(dim: int) -> np.ndarray:
    """``V_¢`` sending ``e_0`` to the uniform superposition of even basis states."""
    if dim < 2 or dim % 2:
        raise InvalidParameter("dimension must be even and at least 2")
    d = dim // 2
    target = np.zeros(dim, dtype=complex)
    target[0::2] = 1 / math.sqrt(d)
    return complete_unitary(target)


def block_diag(blocks) -> np.ndarray:
    blocks = [np.asarray(b, dtype=complex) for b in blocks]
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size), dtype=complex)
    i = 0
    for b in blocks:
        n = b.shape[0]
        out[i:i + n, i:i + n] = b
        i += n
    return out


def qfa2d_build(p: int, ks) -> QfaSpec:
    """``2d``-state QFA running ``d`` two-state sub-automata in parallel.

    Sub-automaton ``j`` lives on basis states ``2j, 2j+1`` and rotates by
    ``2 k_j pi / p`` per symbol. ``V_$`` is the adjoint of ``V_¢``.
    """
    _check_prime(p)
    ks = list(ks)
    if not ks:
        raise InvalidParameter("K must be non-empty")
    if len(set(ks)) != len(ks):
        raise InvalidParameter(f"duplicate values in K={ks}")
    for k in ks:
        if not 1 <= k <= p - 1:
            raise InvalidParameter(f"k={k} outside 1..{p - 1}")
    dim = 2 * len(ks)
    v_cent = superposition_unitary(dim)
    v_a = block_diag(rotation(2 * k * math.pi / p) for k in ks)
    v0 = np.zeros(dim, dtype=complex)
    v0[0] = 1.0
    return QfaSpec(dim, v0, v_cent, v_a, v_cent.conj().T, frozenset({0}))


def _check_prime(p):
    if not is_prime(p):
        raise InvalidParameter(f"p={p} is not prime")


# --------------------------------------------------------------------------- decisions


def decide(accept_prob: float, cutpoint: float = 0.5) -> bool:
    """Unbounded-error decision: accept iff the probability exceeds ``cutpoint``."""
    if not 0 <= cutpoint < 1:
        raise InvalidParameter("cutpoint must lie in [0, 1)")
    return accept_prob > cutpoint


def recognizes_with_bounded_error(spec, p: int, epsilon: float, max_len: int) -> bool:
    """Check members are accepted with probability ``> 1 - epsilon`` and
    non-members with at most ``epsilon`` for every length up to ``max_len``."""
    if not 0 <= epsilon < 0.5:
        raise InvalidParameter("epsilon must lie in [0, 1/2)")
    run = qfa_run if isinstance(spec, QfaSpec) else pfa_run
    for n in range(max_len + 1):
        prob = run(spec, n).accept_prob
        if n % p == 0:
            if prob <= 1 - epsilon:
                return False
        elif prob > epsilon:
            return False
    return True
