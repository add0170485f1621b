import numpy as np
import pytest

from qcrank_dpqa import (
    MeasureAll,
    PauliChannel1Q,
    QCrankConfig,
    attach_noise,
    baseline_params,
    build_dpqa,
    compute_angles,
    exact_distribution,
    exact_expectations,
    inject_z,
    lower,
    run_exact,
    run_trajectories,
    scale_params,
)
from qcrank_dpqa.noise import NoisyProgram, NoisyStep
from qcrank_dpqa.sim import bitstring, sample_pauli_indices


def seeded(seed):
    return np.random.Generator(np.random.Philox(seed))


def noisy_program(na, nd, scale=1.0, seed=5):
    cfg = QCrankConfig(na, nd)
    data = seeded(seed).uniform(-1, 1, cfg.capacity)
    schedule = lower(build_dpqa(cfg, compute_angles(data, cfg)), cfg)
    params = scale_params(baseline_params(), scale)
    return cfg, data, attach_noise(schedule, params)


def spam_only_program(px=6e-3):
    step = NoisyStep(
        instruction=MeasureAll(),
        channels=((PauliChannel1Q(px, 0.0, 0.0), (0,)),),
    )
    return NoisyProgram(steps=(step,), n_qubits=1)


def test_bitstring_uses_qubit0_as_leading_character():
    assert bitstring(0, 3) == "000"
    assert bitstring(5, 3) == "101"
    assert bitstring(1, 4) == "0001"


def test_sample_pauli_indices():
    full = np.array([0.4, 0.1, 0.2, 0.3])
    u = np.array([0.0, 0.39, 0.41, 0.55, 0.999, 1.0 - 1e-16])
    idx = sample_pauli_indices(full, u)
    assert idx.tolist() == [0, 0, 1, 2, 3, 3]


def test_spam_only_distribution_is_exact():
    probs = exact_distribution(spam_only_program())
    assert abs(probs[0] - (1 - 6e-3)) < 1e-15
    assert abs(probs[1] - 6e-3) < 1e-15


def test_spam_only_trajectory_frequency():
    shots = 100_000
    counts = run_trajectories(spam_only_program(), shots=shots, seed=11)
    rate = counts.counts.get("1", 0) / shots
    sigma = np.sqrt(6e-3 * (1 - 6e-3) / shots)
    assert abs(rate - 6e-3) < 5 * sigma


@pytest.mark.parametrize("runner", [run_exact, run_trajectories])
def test_seed_forms_are_equivalent(runner):
    _, _, program = noisy_program(2, 4)
    a = runner(program, 500, 42)
    b = runner(program, 500, np.random.SeedSequence(42))
    assert a.counts == b.counts
    assert sum(a.counts.values()) == a.shots == 500


@pytest.mark.parametrize("runner", [run_exact, run_trajectories])
def test_same_seed_reproduces_counts(runner):
    _, _, program = noisy_program(2, 4)
    assert runner(program, 400, 7).counts == runner(program, 400, 7).counts


def test_trajectory_counts_are_batch_size_independent():
    _, _, program = noisy_program(2, 4)
    reference = run_trajectories(program, 2000, seed=9, batch_size=512)
    for batch in (64, 500, 5000):
        assert run_trajectories(program, 2000, seed=9, batch_size=batch).counts == reference.counts


def test_zero_noise_trajectories_match_exact_distribution():
    shots = 20_000
    _, _, program = noisy_program(3, 3, scale=0.0)
    probs = exact_distribution(program)
    counts = run_trajectories(program, shots, seed=21)
    n = program.n_qubits
    empirical = np.zeros_like(probs)
    for key, c in counts.counts.items():
        empirical[int(key, 2)] = c / shots
    tv = 0.5 * np.abs(empirical - probs).sum()
    assert tv < 5 / np.sqrt(shots)


@pytest.mark.parametrize("na,nd", [(2, 4), (3, 3)])
def test_noiseless_program_round_trips_data(na, nd):
    cfg, data, program = noisy_program(na, nd, scale=0.0)
    grid = exact_expectations(program, cfg)
    assert np.max(np.abs(grid - data.reshape(cfg.n_addresses, cfg.n_data))) < 1e-9


def test_exact_expectations_rejects_noisy_program():
    cfg, _, program = noisy_program(2, 4)
    with pytest.raises(ValueError, match="noiseless"):
        exact_expectations(program, cfg)


def test_exact_expectations_rejects_register_mismatch():
    _, _, program = noisy_program(2, 4, scale=0.0)
    with pytest.raises(ValueError, match="register"):
        exact_expectations(program, QCrankConfig(3, 6))


def test_injected_address_z_never_changes_the_distribution():
    # deterministic Z faults on address qubits commute through the encoding
    # bit for bit, at every instruction boundary and under full noise
    cfg, _, program = noisy_program(2, 4)
    reference = exact_distribution(program)
    for qubit in range(cfg.n_address):
        for position in range(len(program.steps) + 1):
            probe = exact_distribution(inject_z(program, qubit, position))
            assert np.array_equal(probe, reference), (qubit, position)


def test_inject_z_validation():
    _, _, program = noisy_program(2, 4)
    with pytest.raises(ValueError, match="qubit"):
        inject_z(program, 99, 0)
    with pytest.raises(ValueError, match="position"):
        inject_z(program, 0, len(program.steps) + 1)


def test_backend_qubit_caps():
    with pytest.raises(ValueError, match="capped at 13"):
        exact_distribution(NoisyProgram(steps=(), n_qubits=14))
    with pytest.raises(ValueError, match="capped at 26"):
        run_trajectories(NoisyProgram(steps=(), n_qubits=27), shots=1, seed=0)


def test_exact_distribution_is_normalized():
    _, _, program = noisy_program(2, 4)
    probs = exact_distribution(program)
    assert probs.min() >= 0.0
    assert abs(probs.sum() - 1.0) < 1e-9


@pytest.mark.parametrize("runner", [run_exact, run_trajectories])
def test_shot_validation(runner):
    _, _, program = noisy_program(2, 4, scale=0.0)
    with pytest.raises(ValueError, match="shots"):
        runner(program, 0, 1)
