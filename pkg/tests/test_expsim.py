import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfa_lab.errors import ConfigError, NormalizationError, RangeError
from qfa_lab.expsim import (
    ExperimentConfig,
    TimeHistogram,
    accept_probabilities,
    estimate_accidentals,
    locate_center,
    loop_counts_corrected,
    simulate_repeats,
    simulate_run,
    window_counts,
)
from qfa_lab.expsim.analysis import LoopProbabilities, poisson_sigma_scaling, window_bounds, within_sigmas
from qfa_lab.expsim.io import read_histogram, read_histogram_dir, write_histogram
from qfa_lab.expsim.simulate import detection_probabilities, jitter_pmf, merge, mode_acceptance
from qfa_lab.photonic import DoveConfig, LoopConfig, accept_prob_closed_form

PHI18 = math.radians(18)


def cfg(**kw):
    base = dict(loop=LoopConfig.from_ratio("70:30", dove=DoveConfig(PHI18)), n_max=10,
                ells=(1, 3), phi=PHI18, budget=200_000, seed=11)
    base.update(kw)
    return ExperimentConfig(**base)


def test_bin_geometry():
    c = cfg()
    assert c.t0_bin == 769 and c.lead_bins == 308
    assert c.span == 769 + 11 * 174 and c.span >= c.required_span
    lo, hi = window_bounds(TimeHistogram.empty_like(c), 2)
    assert hi - lo == 77 and lo == 769 + 2 * 174 - 38


@pytest.mark.parametrize("bad", [
    dict(n_max=-1), dict(repeats=0), dict(window_bins=200), dict(budget=-5),
    dict(depolarization=1.5), dict(encoding_efficiency=0), dict(span_bins=100),
    dict(accidental_lead_time=20e-9),
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        cfg(**bad)


def test_config_dict_round_trip():
    c = cfg(r1=1e6, r2=1e4, label="x")
    assert ExperimentConfig.from_dict(c.to_dict()) == c
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**c.to_dict(), "bogus": 1})


def test_reference_twin():
    ref = cfg(depolarization=0.1).reference()
    assert ref.is_reference and ref.depolarization == 0 and ref.seed == 11


def test_jitter_mostly_inside_window():
    pmf = jitter_pmf(cfg())
    assert pmf.size == 77 and pmf.sum() == pytest.approx(1.0)
    # the untruncated Gaussian would keep >= 99% inside +-38 bins
    assert 1 - math.erf(38 / (5 * math.sqrt(2))) < 0.01


def test_determinism_bit_identical():
    a = simulate_run(cfg(r1=1e6, r2=1e4), repeat=3)
    b = simulate_run(cfg(r1=1e6, r2=1e4), repeat=3)
    assert np.array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, simulate_run(cfg(r1=1e6, r2=1e4), repeat=4).counts)


def test_repeats_independent_of_scheduling():
    c = cfg(repeats=6, budget=10_000)
    serial = simulate_repeats(c, threads=1)
    threaded = simulate_repeats(c, threads=4)
    assert all(np.array_equal(a.counts, b.counts) for a, b in zip(serial, threaded))


def test_accidentals_do_not_disturb_signal_stream():
    clean = simulate_run(cfg())
    noisy = simulate_run(cfg(r1=1e6, r2=1e4))
    diff = noisy.counts - clean.counts
    assert np.all(diff >= 0) and diff.sum() > 0


def test_gaussian_expected_counts_within_4_sigma():
    c = cfg(loop=LoopConfig(0.5, 0.5), ells=None, budget=10 ** 6)
    h = simulate_run(c)
    for n in range(1, 9):
        expected = 0.25 * 0.5 ** (n - 1) * c.budget
        got = window_counts(h, n)
        assert abs(got - expected) <= 4 * math.sqrt(expected)


def test_detection_probabilities_follow_exit_law():
    c = cfg(loop=LoopConfig(0.7, 0.3, eta_loop=0.9), ells=None)
    det = detection_probabilities(c)
    assert det[0] == pytest.approx(0.7)
    assert det[5] == pytest.approx(0.09 * 0.7 ** 4 * 0.9 ** 5)


def test_depolarization_knob():
    c = cfg(depolarization=0.1)
    assert mode_acceptance(c, 0) == pytest.approx(1.0)
    keep = 0.9 ** 5
    assert mode_acceptance(c, 5) == pytest.approx(keep + (1 - keep) / 4)
    assert mode_acceptance(cfg(), 3) == accept_prob_closed_form((1, 3), PHI18, 3)


def test_uniform_accidentals_window_sum():
    rng = np.random.default_rng(5)
    a = 0.01
    c = cfg(budget=0)
    sums = [window_counts(TimeHistogram.empty_like(c).with_counts(rng.poisson(a, c.span)), 3)
            for _ in range(400)]
    mean = np.mean(sums)
    assert abs(mean - 77 * a) <= 4 * math.sqrt(77 * a / 400)


def test_accidental_estimate():
    rng = np.random.default_rng(6)
    c = cfg(budget=0)
    # 10^6 lead bins worth of statistics, split over repeats
    reps = int(1e6 // c.lead_bins)
    est = np.mean([estimate_accidentals(TimeHistogram.empty_like(c).with_counts(rng.poisson(0.01, c.span)))
                   for _ in range(reps)])
    assert abs(est - 0.01) <= 3 * math.sqrt(0.01 / (reps * c.lead_bins))


def test_subtraction_unbiased():
    # signal S in one window plus a flat floor: expectation of corrected counts is S
    c = cfg(budget=0)
    rng = np.random.default_rng(8)
    S = 500
    vals = []
    for _ in range(300):
        counts = rng.poisson(0.2, c.span)
        lo, hi = window_bounds(TimeHistogram.empty_like(c), 4)
        counts[lo + 38] += S
        vals.append(loop_counts_corrected(TimeHistogram.empty_like(c).with_counts(counts), 4))
    assert abs(np.mean(vals) - S) <= 4 * np.std(vals) / math.sqrt(len(vals))


def test_negative_corrections_not_clamped():
    c = cfg(budget=0)
    counts = np.zeros(c.span, dtype=int)
    counts[:c.lead_bins] = 1
    h = TimeHistogram.empty_like(c).with_counts(counts)
    assert loop_counts_corrected(h, 2) == pytest.approx(-77.0)


def test_window_out_of_span():
    h = TimeHistogram.empty_like(cfg(n_max=3))
    with pytest.raises(RangeError):
        window_counts(h, 5)


def test_locate_center_finds_peak():
    c = cfg(ells=None, budget=100_000)
    assert abs(locate_center(simulate_repeats(c.replace(repeats=3))) - c.t0_bin) <= 2


def test_gaussian_self_normalization_exact():
    g = simulate_repeats(cfg(ells=None, repeats=3))
    probs = accept_probabilities(g, g, 10)
    assert np.all(probs.p == 1.0)


def test_closed_loop_recovers_theory():
    c = cfg(repeats=10, budget=10 ** 6)
    probs = accept_probabilities(simulate_repeats(c), simulate_repeats(c.reference()), 10)
    expected = [accept_prob_closed_form((1, 3), PHI18, n) for n in range(11)]
    assert np.all(within_sigmas(probs, expected, 3.0)[1:])


def test_normalization_error_without_zeroth_loop():
    c = cfg(budget=0)
    h = TimeHistogram.empty_like(c)
    with pytest.raises(NormalizationError):
        accept_probabilities(h, h, 3)


def test_geometry_mismatch_rejected():
    a = simulate_run(cfg(n_max=4, budget=1000))
    b = simulate_run(cfg(n_max=5, budget=1000))
    with pytest.raises(ConfigError):
        accept_probabilities(a, b, 3)
    with pytest.raises(ConfigError):
        a + b


def test_poisson_sigma_scaling():
    c = cfg(budget=10 ** 6)
    small = accept_probabilities(simulate_run(c), simulate_run(c.reference()), 10)
    big = c.replace(budget=4 * 10 ** 6)
    large = accept_probabilities(simulate_run(big), simulate_run(big.reference()), 10)
    ratio = poisson_sigma_scaling(small.sigma[1:], large.sigma[1:], 4.0)
    assert np.all(np.abs(ratio - 1) < 0.1)


def test_merge_is_sum():
    hs = simulate_repeats(cfg(repeats=3, budget=5000))
    total = merge(hs)
    assert np.array_equal(total.counts, sum(h.counts for h in hs))
    assert np.array_equal(merge(hs[::-1]).counts, total.counts)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=5, max_size=5), st.lists(st.integers(0, 50), min_size=5, max_size=5))
def test_histogram_addition_commutes(a, b):
    ha, hb = TimeHistogram(a), TimeHistogram(b)
    assert np.array_equal((ha + hb).counts, (hb + ha).counts)


def test_histogram_rejects_negative():
    with pytest.raises(ConfigError):
        TimeHistogram([1, -1, 2])


def test_histogram_io_round_trip(tmp_path):
    c = cfg(budget=5000, r1=1e6, r2=1e4)
    h = simulate_run(c)
    path = write_histogram(h, tmp_path / "h.csv", c)
    back = read_histogram(path)
    assert np.array_equal(back.counts, h.counts)
    assert (back.t0_bin, back.lead_bins, back.window_bins) == (h.t0_bin, h.lead_bins, h.window_bins)
    assert read_histogram_dir(tmp_path)[0].meta["seed"] == 11


def test_histogram_io_missing_sidecar(tmp_path):
    (tmp_path / "h.csv").write_text("bin_index,count\n0,1\n")
    with pytest.raises(ConfigError):
        read_histogram(tmp_path / "h.csv")


def test_loop_probabilities_csv(tmp_path):
    lp = LoopProbabilities(np.arange(3), np.array([1.0, 0.2, 1.1]), np.array([0.0, 0.01, 0.02]))
    lp.to_csv(tmp_path / "p.csv")
    back = LoopProbabilities.from_csv(tmp_path / "p.csv")
    assert back.rows() == lp.rows()


def test_doubling_accidentals_leaves_probabilities_within_3_sigma():
    c = cfg(repeats=10, budget=10 ** 6, r1=1e6, r2=1e4)
    runs = {}
    for r2 in (1e4, 2e4):
        x = c.replace(r2=r2)
        runs[r2] = accept_probabilities(simulate_repeats(x), simulate_repeats(x.reference()), 10)
    a, b = runs[1e4], runs[2e4]
    assert np.all(np.abs(a.p - b.p)[1:] <= 3 * np.hypot(a.sigma, b.sigma)[1:])
