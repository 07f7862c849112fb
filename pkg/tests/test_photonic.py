import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfa_lab.automata import is_prime, unitarity_error
from qfa_lab.errors import InvalidParameter, InvalidSpec
from qfa_lab.photonic import (
    DoveConfig,
    LoopConfig,
    PetalBasis,
    accept_prob_closed_form,
    dove_angle_for_p,
    dove_unitary,
    exit_probability,
    matrix_vs_closed_form,
    photonic_from_dict,
    photonic_to_dict,
    photonic_to_json,
    va_block,
)

PRIMES = [p for p in range(2, 32) if is_prime(p)]
DEG18 = math.radians(18)


def test_petal_basis_indices_bijective():
    b = PetalBasis((1, 3, 4))
    idx = sorted(b.index(l, s) for l in b.ells for s in (+1, -1))
    assert idx == list(range(6))
    assert b.dim == 6 and b.d == 3


@pytest.mark.parametrize("ells", [(), (0,), (1, 1), (-2,)])
def test_petal_basis_rejects(ells):
    with pytest.raises(InvalidParameter):
        PetalBasis(ells)


def test_dove_config_range():
    with pytest.raises(InvalidParameter):
        DoveConfig(math.pi)
    DoveConfig(0.0)


@pytest.mark.parametrize("ratio, R", [("70:30", 0.7), ("50:50", 0.5), ("1:3", 0.25)])
def test_loop_from_ratio(ratio, R):
    loop = LoopConfig.from_ratio(ratio)
    assert loop.R == pytest.approx(R) and loop.R + loop.T == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("ratio", ["70-30", "0:100", "abc", "100:0"])
def test_loop_from_ratio_rejects(ratio):
    with pytest.raises(InvalidParameter):
        LoopConfig.from_ratio(ratio)


def test_dove_unitary_is_unitary():
    for ell in range(1, 6):
        assert unitarity_error(dove_unitary(ell, 0.37)) < 1e-14
    assert unitarity_error(va_block(PetalBasis((1, 2, 5)), 0.2)) < 1e-14


def test_closed_form_single_pair():
    for n in (1, 4):
        assert accept_prob_closed_form([1], DEG18, n) == pytest.approx(math.cos(math.pi / 5) ** 2, abs=1e-12)
    assert accept_prob_closed_form([1], DEG18, 5) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_closed_form_plateau(n):
    assert accept_prob_closed_form([1, 3], DEG18, n) == pytest.approx(0.0625, abs=1e-12)


@pytest.mark.parametrize("ells, p, expected", [
    ((1,), 5, math.pi / 10), ((1, 3), 5, math.pi / 10), ((2, 4), 7, math.pi / 14),
    ((1, 2), 11, math.pi / 11), ((1, 2, 3, 4), 11, math.pi / 11),
])
def test_dove_angle_rule(ells, p, expected):
    assert dove_angle_for_p(p, ells) == pytest.approx(expected)


@pytest.mark.parametrize("p", PRIMES)
def test_equivalence_with_abstract_machine(p):
    for ells in ((1,), (2,), (1, 3), (1, 2), (2, 3, 5)):
        phi = dove_angle_for_p(p, ells)
        for n in range(3 * p + 1):
            member = abs(accept_prob_closed_form(ells, phi, n) - 1) <= 1e-10
            # all-equal-parity ells with phi=pi/(2p) and mixed with phi=pi/p
            # only fail when an ell is a multiple of p
            if any(l % p == 0 for l in ells):
                continue
            assert member == (n % p == 0), (p, ells, n)


@settings(max_examples=80, deadline=None)
@given(ells=st.lists(st.integers(1, 8), min_size=1, max_size=4, unique=True),
       phi=st.floats(0, math.pi, exclude_max=True), n=st.integers(0, 40))
def test_matrix_agrees_with_closed_form(ells, phi, n):
    assert matrix_vs_closed_form(ells, phi, n) <= 1e-10


def test_symmetry_n_to_p_minus_n():
    p = 11
    phi = math.pi / p
    for ells in ((1, 2), (1, 2, 3, 4), (3,)):
        for n in range(1, p):
            a = accept_prob_closed_form(ells, phi, n)
            b = accept_prob_closed_form(ells, phi, p - n)
            assert a == pytest.approx(b, abs=1e-12)


def test_exit_probability_values():
    loop = LoopConfig(0.7, 0.3)
    assert exit_probability(loop, 5) == pytest.approx(0.021609, abs=1e-15)
    assert exit_probability(loop, 0) == 0.7
    with pytest.raises(InvalidParameter):
        exit_probability(loop, -1)


@pytest.mark.parametrize("R", [0.3, 0.5, 0.7, 0.9])
def test_exit_probability_series_sums_to_T(R):
    loop = LoopConfig(R, 1 - R)
    total = math.fsum(exit_probability(loop, n) for n in range(1, 10_001))
    assert total == pytest.approx(loop.T, abs=1e-9)
    # with the direct reflection the distribution is complete
    assert total + exit_probability(loop, 0) == pytest.approx(1.0, abs=1e-9)


def test_photonic_json_round_trip():
    loop = LoopConfig.from_ratio("70:30", eta_loop=0.9, dove=DoveConfig(DEG18))
    doc = json.loads(photonic_to_json((1, 3), DEG18, loop))
    spec, ells, phi, back = photonic_from_dict(doc)
    assert ells == (1, 3) and phi == DEG18
    assert (back.R, back.T, back.eta_loop) == (loop.R, loop.T, 0.9)
    assert spec.dim == 4
    assert doc["photonic"]["delta_t_s"] == pytest.approx(2.26e-9)


def test_photonic_from_dict_malformed():
    doc = photonic_to_dict((1,), 0.1)
    del doc["photonic"]["phi_rad"]
    with pytest.raises(InvalidSpec):
        photonic_from_dict(doc)
