"""End-to-end acceptance gate: nine checks, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s``. The heaviest check is the
50k-shot trajectory benchmark (several minutes); everything else is fast.
"""

import time

import numpy as np
import pytest

from qcrank_dpqa import (
    TABLE2_ROWS,
    ExperimentSpec,
    LocalU,
    MeasureAll,
    PauliChannel1Q,
    QCrankConfig,
    attach_noise,
    audit_schedule,
    baseline_params,
    build_dpqa,
    build_original,
    compute_angles,
    decode,
    exact_distribution,
    exact_expectations,
    fit_calibration,
    inject_z,
    lower,
    rmse,
    run_exact,
    run_experiment,
    run_trajectories,
    scale_params,
)
from qcrank_dpqa.noise import NoisyProgram, NoisyStep
from qcrank_dpqa.sim import probabilities_of, sample_pauli_indices


def verdict(number: int, description: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {number}: {description}: {'PASS' if ok else 'FAIL'} ({detail})")


def seeded(seed):
    return np.random.Generator(np.random.Philox(seed))


def baseline_program(na, nd, data_seed=7):
    cfg = QCrankConfig(na, nd)
    data = seeded(data_seed).uniform(-1.0, 1.0, cfg.capacity)
    schedule = lower(build_dpqa(cfg, compute_angles(data, cfg)), cfg)
    return cfg, data, attach_noise(schedule, baseline_params())


def test_acceptance_1_noiseless_round_trip():
    small = [(na, nd) for na, nd, _ in TABLE2_ROWS if na + nd <= 12]
    start = time.perf_counter()
    worst = 0.0
    for na, nd in small:
        cfg = QCrankConfig(na, nd)
        data = seeded(100 + na * 16 + nd).uniform(-1.0, 1.0, cfg.capacity)
        grid = exact_expectations(build_dpqa(cfg, compute_angles(data, cfg)), cfg)
        worst = max(worst, float(np.max(np.abs(grid - data.reshape(grid.shape)))))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-9 and elapsed < 60.0
    verdict(1, "noiseless round-trip on all small registers", ok,
            f"max abs error {worst:.3e} over {small}, {elapsed:.1f}s")
    assert ok


def test_acceptance_2_layout_equivalence():
    worst = 0.0
    for na, nd in ((2, 4), (3, 3)):
        cfg = QCrankConfig(na, nd)
        data = seeded(200 + na + nd).uniform(-1.0, 1.0, cfg.capacity)
        angles = compute_angles(data, cfg)
        p_orig = probabilities_of(build_original(cfg, angles))
        p_dpqa = probabilities_of(build_dpqa(cfg, angles))
        worst = max(worst, 0.5 * float(np.abs(p_orig - p_dpqa).sum()))
    ok = worst < 1e-10
    verdict(2, "reference and movable-atom layouts agree", ok,
            f"max total variation {worst:.3e}")
    assert ok


def test_acceptance_3_statistical_floor():
    start = time.perf_counter()
    spec = ExperimentSpec(
        cells=((3, 3, 25_000),),
        noise_scales=(0.0,),
        sequences=10,
        base_seed=2024,
        backend="exact",
    )
    rows = run_experiment(spec).rows
    mean_rmse = float(np.mean([r.rmse_calibrated for r in rows]))
    elapsed = time.perf_counter() - start
    ok = abs(mean_rmse - 0.015) <= 0.004 and elapsed < 300.0
    verdict(3, "ideal run sits on the shot-noise floor", ok,
            f"mean rmse_calibrated {mean_rmse:.4f} over {len(rows)} sequences, {elapsed:.1f}s")
    assert ok


def test_acceptance_4_dynamic_range_reduction():
    start = time.perf_counter()
    cfg, data, program = baseline_program(4, 8)
    counts = run_trajectories(program, shots=50_000, seed=123)
    calibration = fit_calibration(decode(counts, cfg), data)
    inv_c = calibration.dynamic_range
    elapsed = time.perf_counter() - start
    ok = abs(inv_c - 0.67) <= 0.05 and elapsed < 900.0
    verdict(4, "noise shrinks the dynamic range to about two thirds", ok,
            f"fitted 1/c {inv_c:.4f} at 50k shots, {elapsed:.1f}s")
    assert ok


def test_acceptance_5_noise_band_ordering():
    cfg = QCrankConfig(3, 6)
    scales = (0.7, 1.0, 1.3)
    sequences = 3
    per_scale = []
    for scale in scales:
        params = scale_params(baseline_params(), scale)
        values = []
        for seq in range(sequences):
            data = seeded(500 + seq).uniform(-1.0, 1.0, cfg.capacity)
            schedule = lower(build_dpqa(cfg, compute_angles(data, cfg)), cfg)
            counts = run_exact(attach_noise(schedule, params), 25_000, seed=900 + seq)
            values.append(rmse(decode(counts, cfg), data).rmse_calibrated)
        per_scale.append((float(np.mean(values)), float(np.std(values) / np.sqrt(sequences))))
    ok = True
    for (lo_mean, lo_se), (hi_mean, hi_se) in zip(per_scale, per_scale[1:]):
        ok = ok and hi_mean >= lo_mean - np.hypot(lo_se, hi_se)
    means = ", ".join(f"{s:g}: {m:.4f}+/-{e:.4f}" for s, (m, e) in zip(scales, per_scale))
    verdict(5, "accuracy degrades monotonically with the noise scale", ok, means)
    assert ok


def test_acceptance_6_address_z_immunity():
    cfg, _, program = baseline_program(2, 4)
    reference = exact_distribution(program)
    checked = 0
    ok = True
    for qubit in range(cfg.n_address):
        for position in range(len(program.steps) + 1):
            probe = exact_distribution(inject_z(program, qubit, position))
            ok = ok and np.array_equal(probe, reference)
            checked += 1
    verdict(6, "address-line Z faults are bit-exactly invisible", ok,
            f"{checked} injection points across {cfg.n_address} qubits")
    assert ok


def test_acceptance_7_backend_cross_validation():
    cfg, data, program = baseline_program(3, 3)
    shots = 25_000
    exact_dec = decode(run_exact(program, shots, seed=41), cfg)
    traj_dec = decode(run_trajectories(program, shots, seed=42), cfg)
    per_address = exact_dec.address_shots[:, None]
    se_exact = np.sqrt(np.maximum(1.0 - exact_dec.values**2, 1e-9) / per_address)
    se_traj = np.sqrt(
        np.maximum(1.0 - traj_dec.values**2, 1e-9) / traj_dec.address_shots[:, None]
    )
    combined = np.hypot(se_exact, se_traj)
    pulls = np.abs(exact_dec.values - traj_dec.values) / combined
    worst = float(pulls.max())
    ok = worst <= 3.0
    verdict(7, "exact and trajectory backends reconstruct alike", ok,
            f"worst entry at {worst:.2f} combined standard errors")
    assert ok


def test_acceptance_8_compiler_audit():
    expected_coverage = (24, 48, 72, 96, 128, 160, 192, 256, 320)
    ok = True
    details = []
    for (na, nd, _), capacity in zip(TABLE2_ROWS, expected_coverage):
        cfg = QCrankConfig(na, nd)
        data = seeded(800 + na * 16 + nd).uniform(-1.0, 1.0, cfg.capacity)
        schedule = lower(build_dpqa(cfg, compute_angles(data, cfg)), cfg)
        problems = audit_schedule(schedule)
        pulses = [ins for ins in schedule.instructions if hasattr(ins, "pairs")]
        coverage = sum(len(p.pairs) for p in pulses)
        spectators_ok = all(len(p.spectators) == nd - na for p in pulses)
        ok = ok and not problems and coverage == capacity and spectators_ok
        details.append(f"{na}a{nd}d:{coverage}")
    verdict(8, "every compiled schedule passes the movement audit", ok, ", ".join(details))
    assert ok


def test_acceptance_9_channel_sampling_math():
    channel = PauliChannel1Q(0.1, 0.2, 0.3)
    samples = 100_000
    # direct sampling of the channel's outcome distribution
    u = seeded(9).random(samples)
    idx = sample_pauli_indices(channel.full_probs(), u)
    counts = np.bincount(idx, minlength=4)
    expected = channel.full_probs() * samples
    sigma = np.sqrt(channel.full_probs() * (1 - channel.full_probs()) * samples)
    sampling_ok = bool(np.all(np.abs(counts - expected) <= 5 * sigma))
    # the same channel inside a program: trajectory average vs exact Kraus sum
    steps = (
        NoisyStep(instruction=LocalU(qubit=0, kind="h"), channels=()),
        NoisyStep(instruction=LocalU(qubit=0, kind="ry", angle=0.8), channels=((channel, (0,)),)),
        NoisyStep(instruction=MeasureAll(), channels=()),
    )
    program = NoisyProgram(steps=steps, n_qubits=1)
    probs = exact_distribution(program)
    traj = run_trajectories(program, shots=samples, seed=10)
    freq = np.array([traj.counts.get("0", 0), traj.counts.get("1", 0)], dtype=float)
    sigma_p = np.sqrt(probs * (1 - probs) * samples)
    kraus_ok = bool(np.all(np.abs(freq - probs * samples) <= 5 * sigma_p))
    ok = sampling_ok and kraus_ok
    verdict(9, "trajectory sampling reproduces the exact channel", ok,
            f"outcome pulls max {float(np.max(np.abs(counts - expected) / sigma)):.2f} sigma, "
            f"readout pulls max {float(np.max(np.abs(freq - probs * samples) / sigma_p)):.2f} sigma")
    assert ok
