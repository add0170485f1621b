"""Backends that execute encoding circuits and noisy instruction streams.

Two engines consume the same flattened operation list:

* an exact density-matrix engine for small registers that applies every
  channel as a full Kraus sum and samples readout from the final diagonal;
* a Pauli-trajectory engine that propagates batches of statevectors,
  sampling one concrete fault per channel per shot.

Each trajectory shot owns an independent stream of the counter-based Philox
generator, spawned from one seed sequence in shot order, so sampled counts
are reproducible and independent of the batch size.

Conventions: qubit ``q`` is tensor axis ``q``, so the flat index of a basis
state carries qubit 0 as its most significant bit. Outcome strings put
qubit ``q`` at character ``q``, address register first. Channels with zero
total probability are dropped during flattening, which makes a fully
silenced program bit-identical to the bare circuit run.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernels import H_MATRIX, Z_MATRIX, apply_cx_inplace, apply_cz_inplace, apply_pauli, apply_u1, ry_matrix
from .circuits import Circuit, QCrankConfig, gate_matrix
from .compiler import GlobalCZ, GlobalU, LocalU, MeasureAll
from .noise import PAULI2_LABELS, NoisyProgram, NoisyStep

EXACT_MAX_QUBITS = 13
TRAJ_MAX_QUBITS = 26
_DEFAULT_BATCH = 512
_TRACE_TOL = 1e-10


@dataclass(frozen=True)
class ShotCounts:
    """Readout histogram; key character ``q`` holds qubit ``q``'s outcome."""

    counts: dict[str, int]
    shots: int


def bitstring(index: int, n_qubits: int) -> str:
    """Outcome string of a flat state index (qubit 0 first)."""
    return format(index, f"0{n_qubits}b")


def _seed_seq(seed: int | np.random.SeedSequence) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _u_matrix(kind: str, angle: float | None) -> np.ndarray:
    if kind == "h":
        return H_MATRIX
    if kind == "z":
        return Z_MATRIX
    if kind == "ry":
        return ry_matrix(angle)
    raise ValueError(f"no matrix for pulse kind {kind!r}")


_PAULIS_1Q = ("i", "x", "y", "z")
_PAULIS_2Q = ("ii", *PAULI2_LABELS)


def _flatten(program: NoisyProgram) -> list[tuple]:
    """Serialize a program into u1 / cz / chan / measure operations.

    SPAM channels are emitted before their measurement, all other channels
    after their instruction, preserving the attachment order. Channels with
    zero total error are omitted.
    """
    ops: list[tuple] = []
    for step in program.steps:
        ins = step.instruction
        chan_ops: list[tuple] = []
        for channel, qubits in step.channels:
            if channel.total <= 0.0:
                continue
            paulis = _PAULIS_1Q if len(qubits) == 1 else _PAULIS_2Q
            chan_ops.append(("chan", qubits, channel.full_probs(), paulis))
        if isinstance(ins, MeasureAll):
            ops.extend(chan_ops)
            ops.append(("measure",))
            continue
        if isinstance(ins, GlobalU):
            ops.extend(("u1", q, _u_matrix(ins.kind, ins.angle)) for q in range(program.n_qubits))
        elif isinstance(ins, LocalU):
            ops.append(("u1", ins.qubit, _u_matrix(ins.kind, ins.angle)))
        elif isinstance(ins, GlobalCZ):
            ops.append(("cz", ins.pairs))
        ops.extend(chan_ops)
    return ops


def _diag_letters(n_qubits: int) -> str:
    return "abcdefghijklm"[:n_qubits]


def _apply_channel_dm(rho: np.ndarray, n: int, qubits: tuple[int, ...], full_probs: np.ndarray, paulis: tuple[str, ...]) -> np.ndarray:
    out = full_probs[0] * rho
    for prob, label in zip(full_probs[1:], paulis[1:]):
        if prob == 0.0:
            continue
        term = rho
        for q, letter in zip(qubits, label):
            if letter == "i":
                continue
            term = apply_pauli(term, letter, q)
            term = apply_pauli(term, letter, n + q, conjugate=True)
        out += prob * term
    return out


def exact_distribution(program: NoisyProgram) -> np.ndarray:
    """Exact outcome probabilities via density-matrix evolution.

    Every channel enters as its full Kraus sum. The trace is checked after
    each operation; drift beyond 1e-10 aborts the run.
    """
    n = program.n_qubits
    if n > EXACT_MAX_QUBITS:
        raise ValueError(f"exact backend is capped at {EXACT_MAX_QUBITS} qubits, got {n}")
    letters = _diag_letters(n)
    trace_sub = letters + letters + "->"
    diag_sub = letters + letters + "->" + letters
    rho = np.zeros((2,) * (2 * n), dtype=complex)
    rho[(0,) * (2 * n)] = 1.0
    for op in _flatten(program):
        kind = op[0]
        if kind == "u1":
            _, q, mat = op
            rho = apply_u1(rho, mat, q)
            rho = apply_u1(rho, mat.conj(), n + q)
        elif kind == "cz":
            for a, b in op[1]:
                apply_cz_inplace(rho, a, b)
                apply_cz_inplace(rho, n + a, n + b)
        elif kind == "chan":
            _, qubits, full_probs, paulis = op
            rho = _apply_channel_dm(rho, n, qubits, full_probs, paulis)
        else:
            continue
        trace = complex(np.einsum(trace_sub, rho))
        if abs(trace - 1.0) > _TRACE_TOL:
            raise RuntimeError(f"density matrix trace drifted to {trace}")
    diag = np.einsum(diag_sub, rho).reshape(-1)
    return np.clip(diag.real, 0.0, None)


def run_exact(program: NoisyProgram, shots: int, seed: int | np.random.SeedSequence) -> ShotCounts:
    """Sample a multinomial readout from the exact outcome distribution."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    probs = exact_distribution(program)
    rng = np.random.Generator(np.random.Philox(_seed_seq(seed)))
    draws = rng.multinomial(shots, probs / probs.sum())
    n = program.n_qubits
    counts = {bitstring(i, n): int(c) for i, c in enumerate(draws) if c > 0}
    return ShotCounts(counts=counts, shots=shots)


def sample_pauli_indices(full_probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Map uniform draws in [0, 1) to outcome indices of a Pauli channel."""
    cum = np.cumsum(full_probs)
    idx = np.searchsorted(cum, np.asarray(u) * cum[-1], side="right")
    return np.minimum(idx, len(cum) - 1)


@lru_cache(maxsize=None)
def _cz_diag(pairs: tuple[tuple[int, int], ...], n: int) -> np.ndarray:
    """Signature +-1 of a parallel CZ pulse over flat state indices."""
    idx = np.arange(1 << n)
    diag = np.ones(1 << n)
    for a, b in pairs:
        both = ((idx >> (n - 1 - a)) & (idx >> (n - 1 - b)) & 1).astype(bool)
        diag[both] = -diag[both]
    diag.setflags(write=False)
    return diag


def _apply_u1_batch(state: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> None:
    view = state.reshape(state.shape[0], 1 << qubit, 2, -1)
    a0 = view[:, :, 0, :]
    a1 = view[:, :, 1, :]
    new0 = mat[0, 0] * a0 + mat[0, 1] * a1
    new1 = mat[1, 0] * a0 + mat[1, 1] * a1
    view[:, :, 0, :] = new0
    view[:, :, 1, :] = new1


def _apply_pauli_batch(block: np.ndarray, letter: str, qubit: int) -> None:
    view = block.reshape(block.shape[0], 1 << qubit, 2, -1)
    if letter == "x":
        swap = view[:, :, 0, :].copy()
        view[:, :, 0, :] = view[:, :, 1, :]
        view[:, :, 1, :] = swap
    elif letter == "y":
        new0 = view[:, :, 1, :] * (-1j)
        new1 = view[:, :, 0, :] * 1j
        view[:, :, 0, :] = new0
        view[:, :, 1, :] = new1
    else:
        view[:, :, 1, :] *= -1.0


def run_trajectories(
    program: NoisyProgram,
    shots: int,
    seed: int | np.random.SeedSequence,
    batch_size: int = _DEFAULT_BATCH,
) -> ShotCounts:
    """Sample readouts by propagating per-shot Pauli-fault trajectories."""
    n = program.n_qubits
    if n > TRAJ_MAX_QUBITS:
        raise ValueError(f"trajectory backend is capped at {TRAJ_MAX_QUBITS} qubits, got {n}")
    if shots <= 0:
        raise ValueError("shots must be positive")
    if batch_size <= 0:
        raise ValueError("batch size must be positive")
    ops = _flatten(program)
    n_draws = sum(1 for op in ops if op[0] == "chan") + 1
    children = _seed_seq(seed).spawn(shots)
    dim = 1 << n
    outcome_chunks: list[np.ndarray] = []
    for start in range(0, shots, batch_size):
        stop = min(start + batch_size, shots)
        size = stop - start
        u = np.empty((size, n_draws))
        for i, child in enumerate(children[start:stop]):
            u[i] = np.random.Generator(np.random.Philox(child)).random(n_draws)
        state = np.zeros((size, dim), dtype=complex)
        state[:, 0] = 1.0
        draw = 0
        for op in ops:
            kind = op[0]
            if kind == "u1":
                _apply_u1_batch(state, op[2], op[1], n)
            elif kind == "cz":
                state *= _cz_diag(op[1], n)[None, :]
            elif kind == "chan":
                _, qubits, full_probs, paulis = op
                idx = sample_pauli_indices(full_probs, u[:, draw])
                draw += 1
                hit = np.nonzero(idx)[0]
                for value in np.unique(idx[hit]):
                    rows = hit[idx[hit] == value]
                    block = state[rows]
                    for q, letter in zip(qubits, paulis[value]):
                        if letter != "i":
                            _apply_pauli_batch(block, letter, q)
                    state[rows] = block
        probs = state.real**2 + state.imag**2
        cum = np.cumsum(probs, axis=1)
        target = u[:, -1] * cum[:, -1]
        outcomes = np.minimum((cum < target[:, None]).sum(axis=1), dim - 1)
        outcome_chunks.append(outcomes)
    values, freq = np.unique(np.concatenate(outcome_chunks), return_counts=True)
    counts = {bitstring(int(v), n): int(c) for v, c in zip(values, freq)}
    return ShotCounts(counts=counts, shots=shots)


def statevector_of(circuit: Circuit) -> np.ndarray:
    """Final statevector of a circuit's unitary part (flat, qubit 0 = MSB)."""
    n = circuit.n_qubits
    if n > TRAJ_MAX_QUBITS:
        raise ValueError(f"statevector is capped at {TRAJ_MAX_QUBITS} qubits, got {n}")
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    for layer in circuit.layers:
        for gate in layer:
            if gate.kind in ("barrier", "measure"):
                continue
            if gate.kind == "cx":
                apply_cx_inplace(psi, gate.qubits[0], gate.qubits[1])
            elif gate.kind == "cz":
                apply_cz_inplace(psi, gate.qubits[0], gate.qubits[1])
            else:
                psi = apply_u1(psi, gate_matrix(gate), gate.qubits[0])
    return psi.reshape(-1)


def probabilities_of(circuit: Circuit) -> np.ndarray:
    vec = statevector_of(circuit)
    return vec.real**2 + vec.imag**2


def exact_expectations(source: Circuit | NoisyProgram, cfg: QCrankConfig) -> np.ndarray:
    """Per-address Z expectations of every data qubit, shape (2**k, n_data).

    Accepts an encoding circuit or a noiseless program (any remaining error
    channel raises, since expectations would no longer be exact). Address
    values read qubit 0 as the least significant bit.
    """
    n = cfg.n_qubits
    if isinstance(source, NoisyProgram):
        if source.n_qubits != n:
            raise ValueError("program register does not match the configuration")
        ops = _flatten(source)
        if any(op[0] == "chan" for op in ops):
            raise ValueError("exact expectations require a noiseless program")
        psi = np.zeros((2,) * n, dtype=complex)
        psi[(0,) * n] = 1.0
        for op in ops:
            if op[0] == "u1":
                psi = apply_u1(psi, op[2], op[1])
            elif op[0] == "cz":
                for a, b in op[1]:
                    apply_cz_inplace(psi, a, b)
        # Flatten to C order first so the marginal sums below reduce in the
        # same memory order as the circuit path and stay bit-identical to it.
        flat = psi.reshape(-1)
        probs = (flat.real**2 + flat.imag**2).reshape((2,) * n)
    else:
        if source.n_qubits != n:
            raise ValueError("circuit register does not match the configuration")
        probs = probabilities_of(source).reshape((2,) * n)
    k = cfg.n_address
    out = np.empty((cfg.n_addresses, cfg.n_data))
    for j in range(cfg.n_data):
        dq = cfg.data_qubit(j)
        other = tuple(q for q in range(k, n) if q != dq)
        marg = probs.sum(axis=other)
        # Reverse the address axes so the flat address reads qubit 0 as LSB.
        marg = marg.transpose(tuple(range(k - 1, -1, -1)) + (k,)).reshape(cfg.n_addresses, 2)
        out[:, j] = (marg[:, 0] - marg[:, 1]) / (marg[:, 0] + marg[:, 1])
    return out


def inject_z(program: NoisyProgram, qubit: int, position: int) -> NoisyProgram:
    """Insert a bare Z pulse between program steps (no channel attached)."""
    if not 0 <= qubit < program.n_qubits:
        raise ValueError(f"qubit {qubit} outside register of {program.n_qubits}")
    if not 0 <= position <= len(program.steps):
        raise ValueError(f"position {position} outside 0..{len(program.steps)}")
    steps = list(program.steps)
    steps.insert(position, NoisyStep(instruction=LocalU(qubit=qubit, kind="z"), channels=()))
    return NoisyProgram(
        steps=tuple(steps),
        n_qubits=program.n_qubits,
        schedule=program.schedule,
        params=program.params,
    )
