import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfa_lab.errors import FitError
from qfa_lab.expsim.calibration import calibration_fit, synthetic_scan


@pytest.mark.parametrize("ell", [1, 2, 5, 10])
@pytest.mark.parametrize("offset", [-0.25, -0.1, 0.0, 0.07, 0.25])
def test_noiseless_offsets(ell, offset):
    fit = calibration_fit(synthetic_scan(ell, offset, stop=max(34.0, 180.0 / ell)), ell)
    assert fit.offset_deg == pytest.approx(offset, abs=1e-9)
    assert fit.amplitude == pytest.approx(1.0) and fit.rms_residual < 1e-12


def test_amplitude_and_baseline():
    fit = calibration_fit(synthetic_scan(3, 1.0, stop=60.0, amplitude=5.0, baseline=0.4), 3)
    assert (fit.amplitude, fit.baseline) == pytest.approx((5.0, 0.4))
    assert fit.prism_error_deg == pytest.approx(0.5) and fit.period_deg == 60.0


def test_offset_folded_into_period():
    fit = calibration_fit(synthetic_scan(10, 17.0), 10)
    assert fit.offset_deg == pytest.approx(-1.0, abs=1e-9)


def test_split_arrays_input():
    scan = synthetic_scan(4, 0.2, stop=45.0)
    fit = calibration_fit(scan[:, 0], 4, powers=scan[:, 1])
    assert fit.offset_deg == pytest.approx(0.2, abs=1e-9)


def test_noise_monte_carlo():
    # 1% noise, 340 samples at 0.1 deg steps, 100 seeds
    errs = []
    for seed in range(100):
        scan = synthetic_scan(10, 0.13, stop=33.9, noise=0.01, rng=np.random.default_rng(seed))
        assert len(scan) == 340
        errs.append(calibration_fit(scan, 10).offset_deg - 0.13)
    assert np.max(np.abs(errs)) < 0.05


@settings(max_examples=60, deadline=None)
@given(ell=st.integers(1, 10), offset=st.floats(-0.25, 0.25))
def test_offset_recovered_property(ell, offset):
    scan = synthetic_scan(ell, offset, stop=max(34.0, 180.0 / ell))
    assert calibration_fit(scan, ell).offset_deg == pytest.approx(offset, abs=1e-9)


@pytest.mark.parametrize("ell", [1, 2, 5])
def test_short_span_rejected(ell):
    # 34 degrees is less than one period 180/l for l < 6
    with pytest.raises(FitError):
        calibration_fit(synthetic_scan(ell, 0.0, stop=34.0), ell)


def test_constant_power_rejected():
    scan = synthetic_scan(10, 0.0)
    scan[:, 1] = 3.0
    with pytest.raises(FitError):
        calibration_fit(scan, 10)


@pytest.mark.parametrize("bad", [np.zeros((3, 2)), np.zeros((10, 3))])
def test_malformed_samples(bad):
    with pytest.raises(FitError):
        calibration_fit(bad, 2)
