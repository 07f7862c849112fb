"""Search for rotation sets ``K`` that minimize the worst false acceptance.

A set ``K`` with angle ``phi`` accepts ``a^n`` with probability
``(1/d^2) (sum_k cos(2 n k phi))^2``. With the default ``phi = pi/p`` this is
the abstract ``2 k pi / p`` construction. Non-members are the lengths
``1..p-1``; periodicity makes that range exhaustive.

Ties between equally good sets go to the lexicographically smallest ``K``.
Values are compared after rounding to ``TIE_QUANTUM`` so the choice does not
depend on summation noise or on how the search was chunked across threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .automata import is_prime, qfa2d_build, qfa_run
from .errors import BudgetExceeded, InvalidParameter

TIE_QUANTUM = 1e-12
MAX_CANDIDATES = 10 ** 8
PARALLEL_THRESHOLD = 200_000


@dataclass(frozen=True)
class KSetResult:
    p: int
    K: tuple
    worst_n: int
    worst_prob: float
    epsilon_target: float | None = None
    phi: float | None = None
    n_candidates: int = 0

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "K": list(self.K),
            "d": len(self.K),
            "worst_n": self.worst_n,
            "worst_prob": self.worst_prob,
            "epsilon_target": self.epsilon_target,
            "phi_rad": self.phi,
            "n_candidates": self.n_candidates,
        }


@dataclass(frozen=True)
class LogBoundResult:
    p: int
    epsilon: float
    bound: int
    d_used: int | None
    K: tuple | None
    worst_prob: float | None

    @property
    def success(self) -> bool:
        return self.d_used is not None and self.d_used <= self.bound


def _check_p(p):
    if not is_prime(p):
        raise InvalidParameter(f"p={p} is not prime")


def _default_phi(p, phi):
    return math.pi / p if phi is None else phi


def candidate_values(p: int, dedup: bool = True) -> list:
    """Rotation indices ``1..p-1``; with ``dedup`` only ``k <= p - k`` is kept,
    since ``k`` and ``p - k`` give identical probabilities."""
    ks = range(1, p)
    return [k for k in ks if k <= p - k] if dedup else list(ks)


def acceptance_table(ks, p: int, phi: float) -> np.ndarray:
    """``table[i, n-1] = cos(2 n k_i phi)`` for ``n = 1..p-1``."""
    k = np.asarray(ks, dtype=np.float64)[:, None]
    n = np.arange(1, p, dtype=np.float64)[None, :]
    return np.ascontiguousarray(np.cos(2.0 * n * k * phi))


def worst_false_accept(p: int, K, phi: float | None = None):
    """Exact ``(worst_n, worst_prob)`` over non-member lengths ``1..p-1``.

    The smallest ``n`` attaining the maximum (to within ``TIE_QUANTUM``) is
    reported.
    """
    _check_p(p)
    K = tuple(K)
    if not K:
        raise InvalidParameter("K must be non-empty")
    phi = _default_phi(p, phi)
    d = len(K)
    probs = []
    for n in range(1, p):
        s = math.fsum(math.cos(2 * n * k * phi) for k in K)
        probs.append((s / d) ** 2)
    if not probs:
        return 0, 0.0
    top = max(probs)
    worst_n = next(n for n, v in enumerate(probs, 1) if v >= top - TIE_QUANTUM)
    return worst_n, top


def worst_false_accept_matrix(p: int, K) -> tuple:
    """Matrix-product oracle: run the explicit ``2d``-state machine for every
    non-member length and return ``(worst_n, worst_prob)``."""
    spec = qfa2d_build(p, K)
    probs = [qfa_run(spec, n).accept_prob for n in range(1, p)]
    top = max(probs)
    worst_n = next(n for n, v in enumerate(probs, 1) if v >= top - TIE_QUANTUM)
    return worst_n, top


def _threads() -> int:
    env = os.environ.get("QFA_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _result(p, K, phi, n_candidates, epsilon=None):
    worst_n, worst = worst_false_accept(p, K, phi)
    return KSetResult(p, tuple(sorted(K)), worst_n, worst, epsilon, phi, n_candidates)


def exhaustive_best_kset(
    p: int,
    d: int,
    *,
    dedup: bool = True,
    phi: float | None = None,
    candidates=None,
    backend: str | None = None,
    threads: int | None = None,
) -> KSetResult:
    """Global minimizer of the worst false acceptance over all ``d``-subsets.

    ``candidates`` overrides the rotation indices searched (default:
    :func:`candidate_values`). The enumeration is split by first element into
    independent chunks which may run on a thread pool; the reduction keeps the
    first chunk that strictly improves, so the result equals a serial scan.
    """
    _check_p(p)
    phi = _default_phi(p, phi)
    ks = sorted(candidates) if candidates is not None else candidate_values(p, dedup)
    m = len(ks)
    if not 1 <= d <= m:
        raise InvalidParameter(f"d={d} not in 1..{m} for p={p} (dedup={dedup})")
    total = math.comb(m, d)
    if total > MAX_CANDIDATES:
        raise BudgetExceeded(
            f"C({m},{d}) = {total} candidates exceeds budget {MAX_CANDIDATES}; "
            "use randomized_best_kset"
        )
    kern = _kernels.get_backend(backend)
    table = acceptance_table(ks, p, phi)
    firsts = range(0, m - d + 1)
    nthreads = threads or _threads()

    def run(first):
        return kern.exhaustive_min(table, d, first, first + 1, TIE_QUANTUM)

    if nthreads > 1 and total >= PARALLEL_THRESHOLD:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            parts = list(pool.map(run, firsts))
    else:
        parts = [kern.exhaustive_min(table, d, 0, m, TIE_QUANTUM)]

    best = None
    count = 0
    for key, _val, combo, n in parts:
        count += n
        if combo is not None and (best is None or key < best[0]):
            best = (key, combo)
    K = tuple(ks[i] for i in best[1])
    return _result(p, K, phi, count)


def randomized_best_kset(
    p: int,
    d: int,
    trials: int,
    seed: int,
    *,
    dedup: bool = True,
    phi: float | None = None,
    backend: str | None = None,
) -> KSetResult:
    """Best of ``trials`` uniformly sampled ``d``-subsets; deterministic in ``seed``."""
    _check_p(p)
    if trials < 1:
        raise InvalidParameter("trials must be >= 1")
    phi = _default_phi(p, phi)
    ks = candidate_values(p, dedup)
    m = len(ks)
    if not 1 <= d <= m:
        raise InvalidParameter(f"d={d} not in 1..{m} for p={p} (dedup={dedup})")
    rng = np.random.default_rng(seed)
    combos = np.empty((trials, d), dtype=np.int64)
    for t in range(trials):
        combos[t] = np.sort(rng.choice(m, size=d, replace=False))
    table = acceptance_table(ks, p, phi)
    vals = _kernels.get_backend(backend).evaluate_sets(table, combos)
    keys = np.rint(np.asarray(vals) / TIE_QUANTUM).astype(np.int64)
    # lexicographic tie-break among the best sampled sets
    best_rows = combos[keys == keys.min()]
    best = min(tuple(int(x) for x in row) for row in best_rows)
    K = tuple(ks[i] for i in best)
    return _result(p, K, phi, trials)


def log_bound(p: int, epsilon: float) -> int:
    """``ceil((4/epsilon) ln(2p))``; natural logarithm."""
    return math.ceil(4.0 / epsilon * math.log(2 * p))


def verify_log_bound(
    p: int,
    epsilon: float,
    *,
    exhaustive_limit: int = 2_000_000,
    trials: int = 20_000,
    seed: int = 0,
) -> LogBoundResult:
    """Smallest ``d`` (up to the logarithmic bound) whose best ``K`` keeps every
    non-member at acceptance ``<= epsilon``.

    Each ``d`` is searched exhaustively when ``C(m, d) <= exhaustive_limit``
    and by random sampling otherwise. For ``p = 2`` every abstract rotation is
    by ``pi``, so the half-angle encoding (``phi = pi/4`` with odd indices) is
    searched instead.
    """
    _check_p(p)
    if not 0 < epsilon < 0.5:
        raise InvalidParameter("epsilon must lie in (0, 1/2)")
    bound = log_bound(p, epsilon)
    if p == 2:
        phi, ks = math.pi / (2 * p), [1, 3]
    else:
        phi, ks = math.pi / p, candidate_values(p, dedup=True)
    for d in range(1, min(bound, len(ks)) + 1):
        if math.comb(len(ks), d) <= exhaustive_limit:
            res = exhaustive_best_kset(p, d, phi=phi, candidates=ks)
        else:
            res = randomized_best_kset(p, d, trials, seed + d, phi=phi)
        if res.worst_prob <= epsilon:
            return LogBoundResult(p, epsilon, bound, d, res.K, res.worst_prob)
    return LogBoundResult(p, epsilon, bound, None, None, None)
