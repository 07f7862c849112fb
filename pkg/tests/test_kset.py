import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfa_lab import _kernels
from qfa_lab.automata import is_prime
from qfa_lab.errors import BudgetExceeded, InvalidParameter
from qfa_lab.kset import (
    acceptance_table,
    candidate_values,
    exhaustive_best_kset,
    log_bound,
    randomized_best_kset,
    verify_log_bound,
    worst_false_accept,
    worst_false_accept_matrix,
)

PRIMES = [p for p in range(2, 32) if is_prime(p)]
# frozen from an independent itertools/fsum brute force
WORST_11_1234 = 0.1124350649582578


def brute_force(p, d, dedup=True):
    """Reference search: plain Python, exact fsum, lexicographic tie-break."""
    ks = [k for k in range(1, p) if not dedup or k <= p - k]
    best = None
    for K in itertools.combinations(ks, d):
        worst = max(
            (math.fsum(math.cos(2 * math.pi * n * k / p) for k in K) / d) ** 2
            for n in range(1, p)
        )
        key = round(worst / 1e-12)
        if best is None or key < best[0]:
            best = (key, K, worst)
    return best[1], best[2]


def test_candidate_values():
    assert candidate_values(11) == [1, 2, 3, 4, 5]
    assert candidate_values(11, dedup=False) == list(range(1, 11))


def test_worst_known_values():
    assert worst_false_accept(5, (1, 3), math.pi / 10) == (1, pytest.approx(0.0625, abs=1e-12))
    n, v = worst_false_accept(11, (1, 2, 3, 4))
    assert n == 2 and v == pytest.approx(WORST_11_1234, abs=1e-12)


def test_matrix_oracle_agrees():
    for p, K in [(5, (1, 3)), (11, (1, 2, 3, 4)), (13, (2, 5, 6)), (7, (3,))]:
        a = worst_false_accept(p, K)
        b = worst_false_accept_matrix(p, K)
        assert a[0] == b[0] and a[1] == pytest.approx(b[1], abs=1e-10)


def test_singletons_p5():
    res = exhaustive_best_kset(5, 1, dedup=False)
    assert res.K == (1,)
    assert res.worst_prob == pytest.approx(math.cos(math.pi / 5) ** 2, abs=1e-12)


def test_p5_d2_optimum():
    res = exhaustive_best_kset(5, 2, dedup=False)
    assert res.worst_prob <= 0.0625 + 1e-12 and res.n_candidates == 6


def test_p11_d4_full_space():
    res = exhaustive_best_kset(11, 4, dedup=False)
    assert res.n_candidates == 210
    assert res.worst_prob <= WORST_11_1234 + 1e-12


@pytest.mark.parametrize("p, d", [(7, 2), (11, 3), (13, 3), (17, 2), (19, 4)])
@pytest.mark.parametrize("dedup", [True, False])
def test_exhaustive_matches_brute_force(p, d, dedup):
    K, worst = brute_force(p, d, dedup)
    res = exhaustive_best_kset(p, d, dedup=dedup)
    assert res.K == K
    assert res.worst_prob == pytest.approx(worst, abs=1e-12)


@pytest.mark.parametrize("backend", _kernels.available_backends())
def test_backends_agree(backend):
    for p, d in [(23, 3), (29, 4), (31, 2)]:
        ref = exhaustive_best_kset(p, d, backend="python", dedup=False)
        res = exhaustive_best_kset(p, d, backend=backend, dedup=False)
        assert (res.K, res.worst_n, res.n_candidates) == (ref.K, ref.worst_n, ref.n_candidates)
        assert res.worst_prob == ref.worst_prob


def test_threaded_equals_serial():
    a = exhaustive_best_kset(61, 4, dedup=False, threads=1)
    b = exhaustive_best_kset(61, 4, dedup=False, threads=4)
    assert (a.K, a.worst_prob, a.n_candidates) == (b.K, b.worst_prob, b.n_candidates)


def test_evaluate_sets_backends():
    table = acceptance_table(range(1, 13), 13, math.pi / 13)
    rng = np.random.default_rng(0)
    combos = np.sort(np.array([rng.choice(12, 3, replace=False) for _ in range(200)]), axis=1)
    vals = {b: np.asarray(_kernels.get_backend(b).evaluate_sets(table, combos))
            for b in _kernels.available_backends()}
    ref = vals["python"]
    for v in vals.values():
        assert np.array_equal(v, ref)


# (p, d) where a d-set cannot match the best (d-1)-set; confirmed by brute_force
NON_MONOTONE = {(19, 4)}


@pytest.mark.parametrize("p", [p for p in PRIMES if p >= 5])
def test_monotone_in_d(p):
    m = len(candidate_values(p))
    prev = 1.0
    for d in range(1, min(4, m) + 1):
        res = exhaustive_best_kset(p, d)
        if (p, d) in NON_MONOTONE:
            assert res.worst_prob > prev
        else:
            assert res.worst_prob <= prev + 1e-12
        prev = res.worst_prob


def test_p19_counterexample_against_oracle():
    K3, w3 = brute_force(19, 3)
    K4, w4 = brute_force(19, 4)
    assert w4 > w3 + 1e-3
    assert exhaustive_best_kset(19, 4).worst_prob == pytest.approx(w4, abs=1e-12)
    # the best over sizes <= d is monotone by construction
    assert min(w3, w4) == w3


@settings(max_examples=40, deadline=None)
@given(p=st.sampled_from([p for p in PRIMES if p >= 5]), data=st.data())
def test_returned_set_properties(p, data):
    d = data.draw(st.integers(1, min(3, len(candidate_values(p)))))
    res = exhaustive_best_kset(p, d)
    assert set(res.K) <= set(range(1, p))
    # membership is perfect at n = p
    s = math.fsum(math.cos(2 * p * k * res.phi) for k in res.K) / d
    assert s * s == pytest.approx(1.0, abs=1e-10)
    assert worst_false_accept(p, res.K)[1] == pytest.approx(res.worst_prob, abs=0)
    assert worst_false_accept_matrix(p, res.K)[1] == pytest.approx(res.worst_prob, abs=1e-10)


def test_randomized_saturates_small_space():
    res = randomized_best_kset(5, 2, 100, 1)
    assert res.worst_prob == pytest.approx(0.0625, abs=1e-12)


def test_randomized_deterministic():
    a = randomized_best_kset(31, 4, 500, seed=7)
    b = randomized_best_kset(31, 4, 500, seed=7)
    assert a == b


def test_budget_guard():
    with pytest.raises(BudgetExceeded):
        exhaustive_best_kset(401, 6)


@pytest.mark.parametrize("p, d", [(4, 1), (5, 0), (5, 3)])
def test_bad_parameters(p, d):
    with pytest.raises(InvalidParameter):
        exhaustive_best_kset(p, d)


def test_log_bound_natural_log():
    assert log_bound(11, 1 / 3) == math.ceil(12 * math.log(22))


@pytest.mark.parametrize("p, eps, max_d", [(5, 1 / 3, 2), (11, 1 / 3, 4), (3, 0.49, 1)])
def test_verify_log_bound_known(p, eps, max_d):
    res = verify_log_bound(p, eps)
    assert res.success and res.d_used <= max_d


def test_verify_log_bound_p2_half_angle():
    res = verify_log_bound(2, 1 / 3)
    assert res.success and res.worst_prob <= 1 / 3


def test_to_dict_fields():
    doc = exhaustive_best_kset(11, 2).to_dict()
    assert {"p", "K", "d", "worst_n", "worst_prob"} <= set(doc)


def test_pure_python_switch():
    import os
    import subprocess
    import sys

    env = dict(os.environ, QFA_LAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from qfa_lab import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
