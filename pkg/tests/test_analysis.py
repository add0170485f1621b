import numpy as np
import pytest

from qcrank_dpqa import (
    Calibration,
    QCrankConfig,
    attach_noise,
    baseline_params,
    build_dpqa,
    compute_angles,
    decode,
    fit_calibration,
    lower,
    rmse,
    run_exact,
    scale_params,
    statistical_floor,
    two_run_protocol,
)
from qcrank_dpqa.analysis import HIST_BINS, DecodedSequence
from qcrank_dpqa.sim import ShotCounts


def seeded(seed):
    return np.random.Generator(np.random.Philox(seed))


def address_key(address, n_address, data_bits):
    addr_bits = "".join(str((address >> q) & 1) for q in range(n_address))
    return addr_bits + data_bits


def pipeline_counts(na, nd, shots, scale=1.0, data_seed=5, sim_seed=17):
    cfg = QCrankConfig(na, nd)
    data = seeded(data_seed).uniform(-1, 1, cfg.capacity)
    schedule = lower(build_dpqa(cfg, compute_angles(data, cfg)), cfg)
    program = attach_noise(schedule, scale_params(baseline_params(), scale))
    return cfg, data, run_exact(program, shots, sim_seed)


def fake_decoded(values, cfg, shots_per=1000.0):
    grid = np.asarray(values, dtype=float).reshape(cfg.n_addresses, cfg.n_data)
    return DecodedSequence(
        values=grid,
        address_shots=np.full(cfg.n_addresses, shots_per),
        cfg=cfg,
    )


def test_decode_hand_built_counts():
    cfg = QCrankConfig(2, 2)
    counts = {
        # address 0: 70/100 shots with both data bits 0, 30 with both 1
        address_key(0, 2, "00"): 70,
        address_key(0, 2, "11"): 30,
        # address 1: an even split on the first data qubit, all zeros on the second
        address_key(1, 2, "00"): 50,
        address_key(1, 2, "10"): 50,
        # address 2: all ones on both
        address_key(2, 2, "11"): 80,
        # address 3: all zeros
        address_key(3, 2, "00"): 60,
    }
    shots = sum(counts.values())
    dec = decode(ShotCounts(counts=counts, shots=shots), cfg)
    assert dec.address_shots.tolist() == [100, 100, 80, 60]
    expected = np.array([[0.4, 0.4], [0.0, 1.0], [-1.0, -1.0], [1.0, 1.0]])
    assert np.array_equal(dec.values, expected)


def test_decode_matches_truth_without_noise():
    cfg, data, counts = pipeline_counts(2, 4, shots=10_000, scale=0.0)
    dec = decode(counts, cfg)
    per_address = 10_000 / cfg.n_addresses
    bound = 5 * np.sqrt(1.0 / per_address)
    assert np.max(np.abs(dec.values - data.reshape(cfg.n_addresses, cfg.n_data))) < bound


def test_decode_flags_empty_addresses():
    cfg = QCrankConfig(2, 2)
    counts = {address_key(0, 2, "00"): 10, address_key(3, 2, "01"): 10}
    with pytest.warns(UserWarning, match="no shots"):
        dec = decode(ShotCounts(counts=counts, shots=20), cfg)
    assert np.isnan(dec.values[1]).all() and np.isnan(dec.values[2]).all()
    assert np.isfinite(dec.values[0]).all()
    assert dec.address_shots.tolist() == [10, 0, 0, 10]


def test_decode_key_validation():
    cfg = QCrankConfig(2, 2)
    with pytest.raises(ValueError, match="4-character"):
        decode(ShotCounts(counts={"001": 5}, shots=5), cfg)
    with pytest.raises(ValueError, match="only '0' and '1'"):
        decode(ShotCounts(counts={"00x1": 5}, shots=5), cfg)


def test_fit_calibration_trivial_gains():
    cfg = QCrankConfig(2, 2)
    truth = seeded(1).uniform(-1, 1, cfg.capacity)
    assert fit_calibration(fake_decoded(truth, cfg), truth).factor == pytest.approx(1.0)
    halved = fit_calibration(fake_decoded(truth / 2, cfg), truth)
    assert halved.factor == pytest.approx(2.0)
    assert halved.dynamic_range == pytest.approx(0.5)
    with pytest.raises(ValueError, match="identically zero"):
        fit_calibration(fake_decoded(np.zeros(cfg.capacity), cfg), truth)


def test_fit_skips_nan_entries():
    cfg = QCrankConfig(2, 2)
    truth = seeded(2).uniform(-1, 1, cfg.capacity)
    values = truth.reshape(cfg.n_addresses, cfg.n_data).copy()
    values[1] = np.nan
    cal = fit_calibration(fake_decoded(values, cfg), truth)
    assert cal.factor == pytest.approx(1.0)


@pytest.mark.parametrize("gain", [0.25, 0.67, 3.0])
def test_calibrated_error_is_gain_invariant(gain):
    cfg = QCrankConfig(2, 4)
    truth = seeded(3).uniform(-1, 1, cfg.capacity)
    noisy = truth + seeded(4).normal(0, 0.02, cfg.capacity)
    plain = rmse(fake_decoded(noisy, cfg), truth)
    shrunk = rmse(fake_decoded(noisy * gain, cfg), truth)
    assert shrunk.dynamic_range == pytest.approx(plain.dynamic_range * gain, rel=1e-12)
    assert shrunk.rmse_calibrated == pytest.approx(plain.rmse_calibrated, rel=1e-9)


def test_rmse_exact_reconstruction_scores_zero():
    cfg = QCrankConfig(2, 2)
    truth = seeded(5).uniform(-1, 1, cfg.capacity)
    report = rmse(fake_decoded(truth, cfg), truth)
    assert report.rmse_raw < 1e-15
    assert report.rmse_calibrated < 1e-15
    assert report.residual_mean == pytest.approx(0.0, abs=1e-15)
    assert report.residual_rms < 1e-15
    assert report.n_values == cfg.capacity
    assert report.hist_counts.sum() == cfg.capacity
    assert len(report.hist_counts) == HIST_BINS


def test_rmse_defaults_to_self_calibration():
    cfg, truth, counts = pipeline_counts(2, 4, shots=4000)
    dec = decode(counts, cfg)
    auto = rmse(dec, truth)
    manual = rmse(dec, truth, fit_calibration(dec, truth))
    assert auto.rmse_calibrated == manual.rmse_calibrated
    assert auto.dynamic_range == manual.dynamic_range


def test_histogram_clips_but_counts_everything():
    cfg = QCrankConfig(2, 2)
    truth = np.zeros(cfg.capacity)
    wild = np.full(cfg.capacity, 0.9)
    report = rmse(fake_decoded(wild, cfg), truth, Calibration(factor=1.0))
    assert report.hist_counts.sum() == cfg.capacity
    assert report.hist_counts[-1] == cfg.capacity


def test_two_run_protocol_close_to_self_calibration():
    cfg, calib_truth, calib_counts = pipeline_counts(2, 4, shots=20_000, data_seed=5, sim_seed=17)
    _, eval_truth, eval_counts = pipeline_counts(2, 4, shots=20_000, data_seed=6, sim_seed=18)
    calibration, report = two_run_protocol(calib_counts, eval_counts, calib_truth, eval_truth, cfg)
    assert report.dynamic_range == pytest.approx(calibration.dynamic_range)
    self_cal = rmse(decode(eval_counts, cfg), eval_truth)
    assert report.rmse_calibrated == pytest.approx(self_cal.rmse_calibrated, rel=0.2)


def test_statistical_floor_value():
    assert statistical_floor(3125) == pytest.approx(np.sqrt((2 / 3) / 3125))
    assert statistical_floor(3125) == pytest.approx(0.0146, abs=2e-4)
    with pytest.raises(ValueError, match="positive"):
        statistical_floor(0)


def test_truth_shape_validation():
    cfg = QCrankConfig(2, 2)
    truth = np.zeros(5)
    with pytest.raises(ValueError, match="must hold 8 values"):
        rmse(fake_decoded(np.ones(cfg.capacity), cfg), truth)
