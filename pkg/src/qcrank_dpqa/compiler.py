"""Lowering of grouped encoding circuits onto a single-zone movable-atom array.

The array is a rectangular grid of trap sites: ``n_address`` columns, one
data row per data-qubit group, and mobile address atoms that shuttle between
rows. Data atoms never move. Grid coordinates are integer ``(x, y)`` pairs
with data row ``r`` at ``y = 2*r + 1`` and the address row occupying the even
row ``y = 2*r`` directly above the data row it is currently paired with; the
address row starts at ``y = 0``, adjacent to data row 0. Staging columns for
wrap-around moves extend past both vertical edges of the array.

Re-pairing the address atoms with the next set of data columns is a cyclic
shift realized in at most two horizontal move steps. Step one displaces the
whole row one direction, parking the wrapping atoms in staging columns and
placing everyone else directly on target; step two carries only the wrapping
atoms to their wrapped columns. The shift direction is chosen to wrap
``min(delta, n_address - delta)`` atoms, breaking ties leftward. Moves obey
the acousto-optic deflector constraint: atoms moved by the same step must
preserve their relative order along both axes. Paths may pass over parked
atoms (realized with a small transverse offset), so only destinations are
checked for occupancy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from .circuits import Circuit, QCrankConfig, control_schedule

Site = tuple[int, int]


@dataclass(frozen=True)
class AtomMove:
    """One atom's displacement within a move step."""

    atom: int
    src: Site
    dst: Site


@dataclass(frozen=True)
class MoveStep:
    """Simultaneous displacements executed by one deflector sweep."""

    moves: tuple[AtomMove, ...]

    def __post_init__(self) -> None:
        atoms = [m.atom for m in self.moves]
        if len(set(atoms)) != len(atoms):
            raise ValueError("an atom may appear only once per move step")

    @property
    def atoms(self) -> tuple[int, ...]:
        return tuple(m.atom for m in self.moves)


@dataclass(frozen=True)
class Move:
    step: MoveStep


@dataclass(frozen=True)
class GlobalU:
    """One global single-qubit pulse applied to every atom."""

    kind: str
    angle: float | None = None


@dataclass(frozen=True)
class LocalU:
    """One locally addressed single-qubit gate."""

    qubit: int
    kind: str
    angle: float | None = None


@dataclass(frozen=True)
class GlobalCZ:
    """One entangling pulse: CZ on each co-located pair, spectators idle.

    ``pairs`` holds ``(address_qubit, data_qubit)`` tuples; ``spectators``
    are the in-zone data qubits not under any pair. ``gray_step`` and ``row``
    record which entangling step and data row the pulse realizes.
    """

    pairs: tuple[tuple[int, int], ...]
    spectators: tuple[int, ...]
    gray_step: int
    row: int


@dataclass(frozen=True)
class MeasureAll:
    pass


Instruction = Union[Move, GlobalU, LocalU, GlobalCZ, MeasureAll]


@dataclass(frozen=True)
class Geometry:
    """Static site map for one register shape."""

    cfg: QCrankConfig

    @property
    def columns(self) -> int:
        return self.cfg.n_address

    @property
    def n_rows(self) -> int:
        return self.cfg.n_rows

    def data_site(self, j: int) -> Site:
        """Fixed trap of data qubit ``j``: column ``j % n_address`` in its row."""
        return (j % self.cfg.n_address, 2 * (j // self.cfg.n_address) + 1)

    def address_row_y(self, row: int) -> int:
        """Grid row the address atoms occupy when paired with data row ``row``."""
        return 2 * row

    def initial_positions(self) -> dict[int, Site]:
        """Start sites: address atom ``q`` in column ``q`` of grid row 0."""
        positions: dict[int, Site] = {q: (q, 0) for q in range(self.cfg.n_address)}
        for j in range(self.cfg.n_data):
            positions[self.cfg.data_qubit(j)] = self.data_site(j)
        return positions


@dataclass(frozen=True, eq=False)
class Schedule:
    """Ordered instruction stream plus the geometry it runs on."""

    cfg: QCrankConfig
    geometry: Geometry
    instructions: tuple[Instruction, ...]

    @property
    def n_qubits(self) -> int:
        return self.cfg.n_qubits


def plan_layout(cfg: QCrankConfig) -> Geometry:
    """Place data atoms on the rectangular grid and reserve the start row."""
    return Geometry(cfg=cfg)


def _sign(a: int, b: int) -> int:
    return (a > b) - (a < b)


def check_aod(step: MoveStep, occupancy: Mapping[int, Site]) -> str | None:
    """Validate one move step against the current atom positions.

    Returns a violation description, or None if the step is legal: every
    mover starts where the occupancy says it is, destinations are distinct
    and free of parked atoms, and the movers preserve their relative order
    along both axes.
    """
    movers = set(step.atoms)
    for m in step.moves:
        if m.atom not in occupancy:
            return f"atom {m.atom} is not in the zone"
        if occupancy[m.atom] != m.src:
            return f"atom {m.atom} recorded at {m.src} but sits at {occupancy[m.atom]}"
    dests = [m.dst for m in step.moves]
    if len(set(dests)) != len(dests):
        return "two atoms share a destination site"
    parked = {site for atom, site in occupancy.items() if atom not in movers}
    for m in step.moves:
        if m.dst in parked:
            return f"destination {m.dst} of atom {m.atom} is occupied"
    for i, a in enumerate(step.moves):
        for b in step.moves[i + 1 :]:
            if _sign(a.src[0], b.src[0]) != _sign(a.dst[0], b.dst[0]) or _sign(
                a.src[1], b.src[1]
            ) != _sign(a.dst[1], b.dst[1]):
                return f"atoms {a.atom} and {b.atom} would cross"
    return None


def _shift_steps(
    cfg: QCrankConfig, columns: dict[int, int], delta: int, y: int
) -> list[MoveStep]:
    """Cyclic shift of the address row by ``delta`` columns, two steps at most."""
    n = cfg.n_address
    leftward = delta <= n - delta
    amount = delta if leftward else n - delta
    direction = -1 if leftward else 1
    first: list[AtomMove] = []
    second: list[AtomMove] = []
    new_columns: dict[int, int] = {}
    for q in sorted(columns):
        x = columns[q]
        landed = x + direction * amount
        final = landed % n
        first.append(AtomMove(q, (x, y), (landed, y)))
        if landed != final:
            second.append(AtomMove(q, (landed, y), (final, y)))
        new_columns[q] = final
    columns.update(new_columns)
    steps = [MoveStep(tuple(first))]
    if second:
        steps.append(MoveStep(tuple(second)))
    return steps


def schedule_moves(cfg: QCrankConfig, pairing: np.ndarray) -> Schedule:
    """Plan the move and entangling-pulse skeleton for a pairing table.

    ``pairing`` is the ``control_schedule`` output: per entangling step, the
    address qubit paired with each row position. Each step is realizable as
    a cyclic shift of the address row; the row then visits every data row
    (starting from where it already sits, reversing direction each step) and
    fires one global CZ pulse per visit.
    """
    pairing = np.asarray(pairing, dtype=int)
    n = cfg.n_address
    if pairing.shape != (cfg.n_addresses, n):
        raise ValueError("pairing table has the wrong shape")
    for t in range(pairing.shape[0]):
        base = int(pairing[t, 0])
        if any(int(pairing[t, p]) != (base + p) % n for p in range(n)):
            raise ValueError(f"pairing at step {t} is not a cyclic shift across positions")
    geometry = plan_layout(cfg)
    instructions: list[Instruction] = []
    columns = {q: q for q in range(n)}
    offset = 0
    row = 0
    all_data = tuple(cfg.data_qubit(j) for j in range(cfg.n_data))
    for t in range(pairing.shape[0]):
        target = int(pairing[t, 0])
        delta = (target - offset) % n
        if delta:
            for step in _shift_steps(cfg, columns, delta, geometry.address_row_y(row)):
                instructions.append(Move(step))
            offset = target
        row_order = range(cfg.n_rows) if row == 0 else range(cfg.n_rows - 1, -1, -1)
        for next_row in row_order:
            if next_row != row:
                y_from = geometry.address_row_y(row)
                y_to = geometry.address_row_y(next_row)
                instructions.append(
                    Move(
                        MoveStep(
                            tuple(
                                AtomMove(q, (columns[q], y_from), (columns[q], y_to))
                                for q in sorted(columns)
                            )
                        )
                    )
                )
                row = next_row
            base = row * n
            pairs = tuple(
                (int(pairing[t, p]), cfg.data_qubit(base + p)) for p in range(n)
            )
            in_row = {d for _, d in pairs}
            spectators = tuple(d for d in all_data if d not in in_row)
            instructions.append(
                GlobalCZ(pairs=pairs, spectators=spectators, gray_step=t, row=row)
            )
    return Schedule(cfg=cfg, geometry=geometry, instructions=tuple(instructions))


def lower(circuit: Circuit, cfg: QCrankConfig) -> Schedule:
    """Translate a grouped encoding circuit into the instruction stream.

    Single-qubit layers become global or locally addressed pulses, each CZ
    layer consumes the next entangling pulse of the move skeleton (after its
    pending move steps), barriers vanish, and measurement closes the stream.
    Raises if the circuit's entangling layers do not match the skeleton.
    """
    if circuit.n_qubits != cfg.n_qubits:
        raise ValueError("circuit register does not match the configuration")
    skeleton = schedule_moves(cfg, control_schedule(cfg))
    pending = list(skeleton.instructions)
    instructions: list[Instruction] = []
    for layer in circuit.layers:
        kinds = {g.kind for g in layer}
        if kinds == {"barrier"}:
            continue
        if kinds == {"measure"}:
            instructions.append(MeasureAll())
            continue
        if kinds == {"cz"}:
            while pending and isinstance(pending[0], Move):
                instructions.append(pending.pop(0))
            if not pending:
                raise ValueError("circuit has more CZ layers than the move plan")
            pulse = pending.pop(0)
            assert isinstance(pulse, GlobalCZ)
            wanted = {(min(g.qubits), max(g.qubits)) for g in layer}
            got = {(min(a, d), max(a, d)) for a, d in pulse.pairs}
            if wanted != got:
                raise ValueError(
                    "circuit is not in the grouped form: CZ layer does not match "
                    "the scheduled pulse pairing"
                )
            instructions.append(pulse)
            continue
        if kinds <= {"ry", "h", "z"}:
            if layer[0].scope == "global":
                instructions.append(GlobalU(kind=layer[0].kind, angle=layer[0].angle))
            else:
                for gate in layer:
                    instructions.append(
                        LocalU(qubit=gate.qubits[0], kind=gate.kind, angle=gate.angle)
                    )
            continue
        raise ValueError(f"circuit is not in the grouped form: layer kinds {kinds}")
    leftover = [ins for ins in pending if isinstance(ins, GlobalCZ)]
    if leftover:
        raise ValueError("circuit has fewer CZ layers than the move plan")
    return Schedule(cfg=cfg, geometry=skeleton.geometry, instructions=tuple(instructions))


def move_touch_counts(schedule: Schedule) -> np.ndarray:
    """Per-qubit count of move-step memberships across the schedule."""
    counts = np.zeros(schedule.n_qubits, dtype=int)
    for ins in schedule.instructions:
        if isinstance(ins, Move):
            for atom in ins.step.atoms:
                counts[atom] += 1
    return counts


def audit_schedule(schedule: Schedule) -> list[str]:
    """Replay the schedule and collect every invariant violation.

    Checks each move step with ``check_aod``, verifies data atoms stay
    parked, and confirms each entangling pulse pairs atoms that are actually
    co-located (same column, address row directly above the data row).
    """
    cfg = schedule.cfg
    geometry = schedule.geometry
    positions = geometry.initial_positions()
    data_qubits = set(range(cfg.n_address, cfg.n_qubits))
    violations: list[str] = []
    for index, ins in enumerate(schedule.instructions):
        if isinstance(ins, Move):
            problem = check_aod(ins.step, positions)
            if problem:
                violations.append(f"instruction {index}: {problem}")
            moved_data = data_qubits & set(ins.step.atoms)
            if moved_data:
                violations.append(f"instruction {index}: data atoms {sorted(moved_data)} moved")
            for m in ins.step.moves:
                positions[m.atom] = m.dst
        elif isinstance(ins, GlobalCZ):
            for a, d in ins.pairs:
                ax, ay = positions[a]
                dx, dy = positions[d]
                if ax != dx or dy != ay + 1:
                    violations.append(
                        f"instruction {index}: pair ({a},{d}) not co-located "
                        f"(address at {(ax, ay)}, data at {(dx, dy)})"
                    )
    return violations


def _atom_name(qubit: int, cfg: QCrankConfig) -> str:
    if qubit < cfg.n_address:
        return f"a{qubit}"
    return f"d{qubit - cfg.n_address}"


def format_schedule(schedule: Schedule) -> str:
    """Render one instruction per line; grammar documented in the harness."""
    cfg = schedule.cfg
    lines: list[str] = []
    for ins in schedule.instructions:
        if isinstance(ins, GlobalU):
            lines.append(f"gu {ins.kind}" + (f" {ins.angle!r}" if ins.angle is not None else ""))
        elif isinstance(ins, LocalU):
            name = _atom_name(ins.qubit, cfg)
            lines.append(
                f"lu {name} {ins.kind}" + (f" {ins.angle!r}" if ins.angle is not None else "")
            )
        elif isinstance(ins, Move):
            parts = " ".join(
                f"{_atom_name(m.atom, cfg)}:({m.src[0]},{m.src[1]})->({m.dst[0]},{m.dst[1]})"
                for m in ins.step.moves
            )
            lines.append(f"move {parts}")
        elif isinstance(ins, GlobalCZ):
            pairs = " ".join(
                f"{_atom_name(a, cfg)}-{_atom_name(d, cfg)}" for a, d in ins.pairs
            )
            line = f"cz {pairs}"
            if ins.spectators:
                line += " | spect " + " ".join(_atom_name(d, cfg) for d in ins.spectators)
            lines.append(line)
        elif isinstance(ins, MeasureAll):
            lines.append("measure")
    return "\n".join(lines) + "\n"
