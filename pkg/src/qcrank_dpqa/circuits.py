"""Gate-level circuits for the QCrank sequence-encoding protocol.

A QCrank register splits into address qubits, which enumerate positions in
the stored sequence, and data qubits, each holding one rotation-encoded real
per address. Reading a data qubit's Z expectation conditioned on the
measured address bits recovers the stored value.

Two builds of the same encoding are provided. ``build_original`` is the
textbook layout: Hadamards on the address register, then per data qubit an
interleaved train of Ry rotations and CX entanglers whose control wires walk
a Gray-code order. ``build_dpqa`` is the movable-atom-friendly rewrite: one
global Hadamard pulse, Ry/CZ trains with the CX conjugation absorbed into
negated rotation angles, and the CZ gates grouped into layers of exactly
``n_address`` parallel gates so each layer is realizable as a single
entangling pulse on one row of data atoms.

Conventions used throughout the package:

* qubits 0..n_address-1 are address qubits, the rest are data qubits;
* address values read qubit 0 as the least-significant bit;
* data qubit ``j`` belongs to row ``j // n_address`` at row position
  ``j % n_address``;
* the flat value index ``k`` maps to address ``k // n_data`` and data qubit
  ``k % n_data``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import H_MATRIX, Z_MATRIX, apply_cx_inplace, apply_cz_inplace, apply_u1, ry_matrix

GATE_KINDS = frozenset({"ry", "h", "z", "cx", "cz", "barrier", "measure"})
_SINGLE_QUBIT_KINDS = frozenset({"ry", "h", "z"})
_TWO_QUBIT_KINDS = frozenset({"cx", "cz"})

UNITARY_MAX_QUBITS = 10


@dataclass(frozen=True)
class QCrankConfig:
    """Register shape: ``n_address`` address qubits plus ``n_data`` data qubits.

    ``n_data`` must divide into groups of ``n_address`` so every entangling
    layer can pair each address qubit with a distinct data qubit of one row.
    """

    n_address: int
    n_data: int

    def __post_init__(self) -> None:
        if self.n_address < 1 or self.n_data < 1:
            raise ValueError("register sizes must be positive")
        if self.n_data % self.n_address:
            raise ValueError(
                f"n_data={self.n_data} must be divisible by n_address={self.n_address}"
            )

    @property
    def n_qubits(self) -> int:
        return self.n_address + self.n_data

    @property
    def n_addresses(self) -> int:
        """Number of sequence positions, 2**n_address."""
        return 1 << self.n_address

    @property
    def capacity(self) -> int:
        """Stored reals per circuit; also the total entangling-gate count."""
        return self.n_data * self.n_addresses

    @property
    def cz_depth(self) -> int:
        """Entangling layers in the grouped build: rows times Gray steps."""
        return self.n_rows * self.n_addresses

    @property
    def n_rows(self) -> int:
        """Data-qubit rows of size n_address."""
        return self.n_data // self.n_address

    def data_qubit(self, j: int) -> int:
        """Register index of data qubit ``j``."""
        if not 0 <= j < self.n_data:
            raise ValueError(f"data qubit index {j} out of range")
        return self.n_address + j


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    scope: str = "local"

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.scope not in ("local", "global"):
            raise ValueError(f"unknown gate scope {self.scope!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("gate qubits must be distinct")
        if self.kind in _SINGLE_QUBIT_KINDS and len(self.qubits) != 1:
            raise ValueError(f"{self.kind} acts on exactly one qubit")
        if self.kind in _TWO_QUBIT_KINDS and len(self.qubits) != 2:
            raise ValueError(f"{self.kind} acts on exactly two distinct qubits")
        if (self.angle is not None) != (self.kind == "ry"):
            raise ValueError("exactly the ry kind carries an angle")


Layer = tuple[Gate, ...]


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    layers: tuple[Layer, ...]

    def __post_init__(self) -> None:
        for layer in self.layers:
            seen: set[int] = set()
            for gate in layer:
                for q in gate.qubits:
                    if not 0 <= q < self.n_qubits:
                        raise ValueError(f"qubit {q} outside register of {self.n_qubits}")
                    if q in seen:
                        raise ValueError("gates within a layer must act on disjoint qubits")
                    seen.add(q)
            if any(g.scope == "global" for g in layer if g.kind in _SINGLE_QUBIT_KINDS):
                kinds = {(g.kind, g.angle) for g in layer}
                if len(kinds) != 1 or len(seen) != self.n_qubits or any(
                    g.scope != "global" for g in layer
                ):
                    raise ValueError(
                        "a global layer must apply the identical gate to every qubit"
                    )

    def two_qubit_count(self) -> int:
        return sum(1 for layer in self.layers for g in layer if g.kind in _TWO_QUBIT_KINDS)

    def barrier_indices(self) -> tuple[int, ...]:
        return tuple(
            i for i, layer in enumerate(self.layers) if any(g.kind == "barrier" for g in layer)
        )


@dataclass(frozen=True, eq=False)
class AngleTable:
    """Per-address target half-angles and Gray-ordered circuit rotations.

    ``targets[i, j]`` is the half-angle whose doubled value rotates data
    qubit ``j`` when the address register reads ``i``; ``rotations[t, j]`` is
    the angle of data qubit ``j``'s rotation before entangling step ``t``.
    Shapes are ``(2**n_address, n_data)``.
    """

    cfg: QCrankConfig
    targets: np.ndarray
    rotations: np.ndarray


def gray_code(step: int) -> int:
    """Reflected binary code of ``step``."""
    return step ^ (step >> 1)


def _trailing_zeros(value: int) -> int:
    return (value & -value).bit_length() - 1


def base_gray_controls(n_address: int) -> tuple[int, ...]:
    """Control-wire order of the Gray-code rotation decomposition.

    Entangling step ``t`` uses the wire where Gray codes ``t`` and ``t+1``
    differ; the final step closes the cycle on the top wire.
    """
    steps = 1 << n_address
    return tuple(
        _trailing_zeros(t + 1) if t + 1 < steps else n_address - 1 for t in range(steps)
    )


def control_schedule(cfg: QCrankConfig) -> np.ndarray:
    """Address qubit paired with each row position, per entangling step.

    Returns an ``(2**n_address, n_address)`` int array: entry ``[t, p]`` is
    the address qubit entangled with the data qubit at row position ``p``
    during step ``t``. Row position ``p`` runs the base Gray control order
    with its wires cyclically relabeled by ``+p``, so the ``n_address``
    controls of any step are distinct and one pulse can drive them all.
    """
    base = base_gray_controls(cfg.n_address)
    table = np.empty((cfg.n_addresses, cfg.n_address), dtype=int)
    for t, c in enumerate(base):
        for p in range(cfg.n_address):
            table[t, p] = (c + p) % cfg.n_address
    return table


def _fwht(values: np.ndarray) -> np.ndarray:
    """Walsh-Hadamard transform in natural (Hadamard) ordering, unnormalized."""
    out = np.array(values, dtype=float, copy=True)
    half = 1
    while half < out.size:
        for start in range(0, out.size, 2 * half):
            a = out[start : start + half].copy()
            b = out[start + half : start + 2 * half].copy()
            out[start : start + half] = a + b
            out[start + half : start + 2 * half] = a - b
        half *= 2
    return out


def _rotate_bits(value: int, shift: int, width: int) -> int:
    """Cyclically move bit ``q`` of ``value`` to position ``(q + shift) % width``."""
    out = 0
    for q in range(width):
        if (value >> ((q - shift) % width)) & 1:
            out |= 1 << q
    return out


def compute_angles(data: np.ndarray, cfg: QCrankConfig) -> AngleTable:
    """Turn a sequence of reals in [-1, 1] into target and circuit angles.

    Value ``x`` is stored as the Z expectation ``x = cos(2*alpha)`` with
    target half-angle ``alpha = arccos(x)/2``. The circuit rotations are the
    Gray-code-ordered Walsh-Hadamard transform of the doubled targets scaled
    by ``2**-n_address``, computed per data qubit with the address bits
    rotated to match that qubit's relabeled control wires.
    """
    data = np.asarray(data, dtype=float)
    if data.shape != (cfg.capacity,):
        raise ValueError(f"expected {cfg.capacity} values, got shape {data.shape}")
    if np.any(np.abs(data) > 1.0):
        raise ValueError("data entries must lie in [-1, 1]")
    targets = np.arccos(data.reshape(cfg.n_addresses, cfg.n_data)) / 2.0
    rotations = np.empty_like(targets)
    gray_order = [gray_code(t) for t in range(cfg.n_addresses)]
    for j in range(cfg.n_data):
        p = j % cfg.n_address
        perm = [_rotate_bits(m, p, cfg.n_address) for m in range(cfg.n_addresses)]
        natural = _fwht(2.0 * targets[perm, j]) / cfg.n_addresses
        rotations[:, j] = natural[gray_order]
    return AngleTable(cfg=cfg, targets=targets, rotations=rotations)


def rotations_to_targets(rotations: np.ndarray, cfg: QCrankConfig) -> np.ndarray:
    """Invert the rotation transform back to per-address target half-angles."""
    rotations = np.asarray(rotations, dtype=float)
    if rotations.shape != (cfg.n_addresses, cfg.n_data):
        raise ValueError("rotation table has the wrong shape")
    targets = np.empty_like(rotations)
    gray_order = [gray_code(t) for t in range(cfg.n_addresses)]
    for j in range(cfg.n_data):
        p = j % cfg.n_address
        natural = np.empty(cfg.n_addresses)
        natural[gray_order] = rotations[:, j]
        doubled = _fwht(natural)
        perm = [_rotate_bits(m, p, cfg.n_address) for m in range(cfg.n_addresses)]
        targets[perm, j] = doubled / 2.0
    return targets


def _check_angles(cfg: QCrankConfig, angles: AngleTable) -> None:
    if angles.cfg != cfg:
        raise ValueError("angle table was computed for a different register shape")
    if angles.rotations.shape != (cfg.n_addresses, cfg.n_data):
        raise ValueError("angle table has the wrong shape")


def build_original(cfg: QCrankConfig, angles: AngleTable) -> Circuit:
    """Textbook encoding circuit: address Hadamards plus Ry/CX trains."""
    _check_angles(cfg, angles)
    schedule = control_schedule(cfg)
    layers: list[Layer] = [tuple(Gate("h", (q,)) for q in range(cfg.n_address))]
    for t in range(cfg.n_addresses):
        layers.append(
            tuple(
                Gate("ry", (cfg.data_qubit(j),), angle=float(angles.rotations[t, j]))
                for j in range(cfg.n_data)
            )
        )
        # CX gates sharing a control wire cannot sit in one layer, so the
        # entanglers are laid down one row at a time.
        for row in range(cfg.n_rows):
            layers.append(
                tuple(
                    Gate(
                        "cx",
                        (int(schedule[t, p]), cfg.data_qubit(row * cfg.n_address + p)),
                    )
                    for p in range(cfg.n_address)
                )
            )
    layers.append((Gate("measure", tuple(range(cfg.n_qubits))),))
    return Circuit(cfg.n_qubits, tuple(layers))


def build_dpqa(cfg: QCrankConfig, angles: AngleTable) -> Circuit:
    """Movable-atom layout: global H, Ry/CZ trains, closing data Hadamards.

    Conjugating each CX by data-side Hadamards and commuting them through
    the rotation train negates every rotation angle, leaving one global
    Hadamard layer up front and a local Hadamard per data qubit at the end.
    Entangling layers carry ``n_address`` parallel CZ gates and visit the
    data rows boustrophedon: each step starts on the row where the previous
    one ended, so only single-row hops occur between pulses.
    """
    _check_angles(cfg, angles)
    schedule = control_schedule(cfg)
    layers: list[Layer] = [
        tuple(Gate("h", (q,), scope="global") for q in range(cfg.n_qubits))
    ]
    layers.append((Gate("barrier", tuple(range(cfg.n_qubits))),))
    row = 0
    for t in range(cfg.n_addresses):
        layers.append(
            tuple(
                Gate("ry", (cfg.data_qubit(j),), angle=float(-angles.rotations[t, j]))
                for j in range(cfg.n_data)
            )
        )
        row_order = range(cfg.n_rows) if row == 0 else range(cfg.n_rows - 1, -1, -1)
        for row in row_order:
            layers.append(
                tuple(
                    Gate(
                        "cz",
                        (int(schedule[t, p]), cfg.data_qubit(row * cfg.n_address + p)),
                    )
                    for p in range(cfg.n_address)
                )
            )
        layers.append((Gate("barrier", tuple(range(cfg.n_qubits))),))
    layers.append(tuple(Gate("h", (cfg.data_qubit(j),)) for j in range(cfg.n_data)))
    layers.append((Gate("measure", tuple(range(cfg.n_qubits))),))
    return Circuit(cfg.n_qubits, tuple(layers))


def insert_z_after_barrier(circuit: Circuit, qubit: int, barrier_index: int) -> Circuit:
    """Return a copy with a Z gate layer inserted after the given barrier."""
    barriers = circuit.barrier_indices()
    if not 0 <= barrier_index < len(barriers):
        raise ValueError(f"circuit has {len(barriers)} barriers")
    at = barriers[barrier_index] + 1
    layers = list(circuit.layers)
    layers.insert(at, (Gate("z", (qubit,)),))
    return Circuit(circuit.n_qubits, tuple(layers))


def gate_matrix(gate: Gate) -> np.ndarray:
    """Dense matrix of a unitary gate kind (2x2, or 4x4 for entanglers)."""
    if gate.kind == "h":
        return H_MATRIX
    if gate.kind == "z":
        return Z_MATRIX
    if gate.kind == "ry":
        return ry_matrix(gate.angle)
    if gate.kind == "cx":
        m = np.eye(4, dtype=complex)
        m[[2, 3]] = m[[3, 2]]
        return m
    if gate.kind == "cz":
        return np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
    raise ValueError(f"{gate.kind} has no matrix")


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Dense unitary of all non-measurement gates, for small registers.

    The returned matrix maps column index = input basis state with qubit 0
    as the most-significant bit, matching the simulator's state layout.
    """
    n = circuit.n_qubits
    if n > UNITARY_MAX_QUBITS:
        raise ValueError(f"register too large for a dense unitary ({n} qubits)")
    dim = 1 << n
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for layer in circuit.layers:
        for gate in layer:
            if gate.kind in ("barrier", "measure"):
                continue
            if gate.kind == "cx":
                apply_cx_inplace(u, gate.qubits[0], gate.qubits[1])
            elif gate.kind == "cz":
                apply_cz_inplace(u, gate.qubits[0], gate.qubits[1])
            else:
                u = apply_u1(u, gate_matrix(gate), gate.qubits[0])
    return u.reshape(dim, dim)
