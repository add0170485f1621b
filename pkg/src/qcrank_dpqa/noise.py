"""Pauli error channels attached to the instruction stream.

Every operation class carries its own channel: local single-qubit pulses and
the closing data Hadamards draw a depolarizing error, global pulses a weaker
depolarizing error on every atom, each move step a Z-dominated Pauli error
on every atom it displaces, and an entangling pulse applies a two-qubit
Pauli channel on each driven pair plus a residual-light-shift channel on
each spectator. State preparation and measurement error is a single
bit-flip channel on every qubit immediately before readout. Depolarizing
strength ``p`` is the gate's average infidelity; for a single-qubit
depolarizing channel that corresponds to a total Pauli error probability of
``3p/2``, so the triplet is ``(p/2, p/2, p/2)``.

All strengths can be rescaled by a common factor to probe how reconstruction
accuracy degrades with hardware quality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .compiler import GlobalCZ, GlobalU, Instruction, LocalU, MeasureAll, Move, Schedule

_PROB_TOL = 1e-12

# Two-qubit Pauli labels in row-major (first, second) order, identity excluded.
PAULI2_LABELS = tuple(
    a + b for a in "ixyz" for b in "ixyz" if not (a == "i" and b == "i")
)
_PAULI2_INDEX = {label: k for k, label in enumerate(PAULI2_LABELS)}


def _check_probs(probs: tuple[float, ...]) -> None:
    if any(p < 0 for p in probs):
        raise ValueError("channel probabilities must be nonnegative")
    if sum(probs) > 1.0 + _PROB_TOL:
        raise ValueError(f"channel probabilities sum to {sum(probs)} > 1")


@dataclass(frozen=True)
class PauliChannel1Q:
    """Single-qubit Pauli channel with error probabilities (px, py, pz)."""

    px: float
    py: float
    pz: float

    def __post_init__(self) -> None:
        _check_probs(self.probs)

    @property
    def probs(self) -> tuple[float, float, float]:
        return (self.px, self.py, self.pz)

    @property
    def total(self) -> float:
        return self.px + self.py + self.pz

    def full_probs(self) -> np.ndarray:
        """Probabilities including the leading identity outcome; sums to 1."""
        return np.array([1.0 - self.total, self.px, self.py, self.pz])

    def scaled(self, factor: float) -> "PauliChannel1Q":
        return PauliChannel1Q(self.px * factor, self.py * factor, self.pz * factor)


@dataclass(frozen=True)
class PauliChannel2Q:
    """Two-qubit Pauli channel: 15 error probabilities in PAULI2_LABELS order."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.probs) != 15:
            raise ValueError("expected 15 two-qubit Pauli probabilities")
        _check_probs(self.probs)

    @classmethod
    def from_classes(cls, pz_class: float, other_class: float) -> "PauliChannel2Q":
        """Two-class channel: IZ, ZI, ZZ at one strength, the other 12 uniform."""
        probs = [other_class] * 15
        for label in ("iz", "zi", "zz"):
            probs[_PAULI2_INDEX[label]] = pz_class
        return cls(tuple(probs))

    @property
    def total(self) -> float:
        return float(sum(self.probs))

    def full_probs(self) -> np.ndarray:
        return np.array([1.0 - self.total, *self.probs])

    def two_class_values(self) -> tuple[float, float]:
        """Recover (pz_class, other_class); raises if not two-class structured."""
        z_ids = {_PAULI2_INDEX[l] for l in ("iz", "zi", "zz")}
        z_vals = {self.probs[k] for k in z_ids}
        o_vals = {self.probs[k] for k in range(15) if k not in z_ids}
        if len(z_vals) != 1 or len(o_vals) != 1:
            raise ValueError("channel does not have the two-class structure")
        return (z_vals.pop(), o_vals.pop())

    def scaled(self, factor: float) -> "PauliChannel2Q":
        return PauliChannel2Q(tuple(p * factor for p in self.probs))


Channel = Union[PauliChannel1Q, PauliChannel2Q]


def depolarizing(p: float) -> PauliChannel1Q:
    """Depolarizing channel whose average gate infidelity is ``p``.

    A uniform Pauli channel (q, q, q) has average fidelity 1 - 2q, so the
    quoted error rate p maps to q = p/2: total Pauli probability 3p/2.
    """
    return PauliChannel1Q(p / 2.0, p / 2.0, p / 2.0)


@dataclass(frozen=True)
class NoiseParams:
    """Per-operation channel strengths plus the record of applied rescaling."""

    lue: float
    gue: float
    mve: PauliChannel1Q
    spe: PauliChannel1Q
    cz: PauliChannel2Q
    spam: PauliChannel1Q
    scale: float = 1.0

    def __post_init__(self) -> None:
        _check_probs((self.lue,))
        _check_probs((self.gue,))
        if self.scale < 0:
            raise ValueError("scale must be nonnegative")


def baseline_params() -> NoiseParams:
    """Baseline hardware error budget."""
    return NoiseParams(
        lue=4e-3,
        gue=4e-4,
        mve=PauliChannel1Q(3e-5, 3e-5, 3e-3),
        spe=PauliChannel1Q(5e-4, 5e-4, 2.5e-3),
        cz=PauliChannel2Q.from_classes(1.5e-3, 1.5e-4),
        spam=PauliChannel1Q(6e-3, 0.0, 0.0),
        scale=1.0,
    )


def scale_params(params: NoiseParams, factor: float) -> NoiseParams:
    """Multiply every channel probability by ``factor`` (0 silences all noise)."""
    if factor < 0:
        raise ValueError("scale factor must be nonnegative")
    return NoiseParams(
        lue=params.lue * factor,
        gue=params.gue * factor,
        mve=params.mve.scaled(factor),
        spe=params.spe.scaled(factor),
        cz=params.cz.scaled(factor),
        spam=params.spam.scaled(factor),
        scale=params.scale * factor,
    )


ChannelApp = tuple[Channel, tuple[int, ...]]


@dataclass(frozen=True)
class NoisyStep:
    instruction: Instruction
    channels: tuple[ChannelApp, ...]


@dataclass(frozen=True, eq=False)
class NoisyProgram:
    """Instruction stream with channels attached at fixed positions.

    SPAM channels precede their measurement; every other channel follows its
    instruction. ``schedule`` and ``params`` are provenance and may be absent
    on hand-built programs.
    """

    steps: tuple[NoisyStep, ...]
    n_qubits: int
    schedule: Schedule | None = None
    params: NoiseParams | None = None


def attach_noise(schedule: Schedule, params: NoiseParams) -> NoisyProgram:
    """Pair every instruction with its channel applications.

    Channel order within an instruction is fixed for determinism: qubit order
    for global pulses and measurement, move order within a step, pair order
    then spectator order for entangling pulses.
    """
    n = schedule.n_qubits
    lue = depolarizing(params.lue)
    gue = depolarizing(params.gue)
    steps: list[NoisyStep] = []
    for ins in schedule.instructions:
        channels: list[ChannelApp] = []
        if isinstance(ins, GlobalU):
            channels = [(gue, (q,)) for q in range(n)]
        elif isinstance(ins, LocalU):
            channels = [(lue, (ins.qubit,))]
        elif isinstance(ins, Move):
            channels = [(params.mve, (atom,)) for atom in ins.step.atoms]
        elif isinstance(ins, GlobalCZ):
            channels = [(params.cz, (a, d)) for a, d in ins.pairs]
            channels += [(params.spe, (d,)) for d in ins.spectators]
        elif isinstance(ins, MeasureAll):
            channels = [(params.spam, (q,)) for q in range(n)]
        steps.append(NoisyStep(instruction=ins, channels=tuple(channels)))
    return NoisyProgram(steps=tuple(steps), n_qubits=n, schedule=schedule, params=params)


_CONFIG_KEYS = (
    "lue.p",
    "gue.p",
    "mve.px",
    "mve.py",
    "mve.pz",
    "spe.px",
    "spe.py",
    "spe.pz",
    "cz.pz_class",
    "cz.other_class",
    "spam.px",
    "scale",
)


def _params_to_dict(params: NoiseParams) -> dict[str, float]:
    pz_class, other_class = params.cz.two_class_values()
    return {
        "lue.p": params.lue,
        "gue.p": params.gue,
        "mve.px": params.mve.px,
        "mve.py": params.mve.py,
        "mve.pz": params.mve.pz,
        "spe.px": params.spe.px,
        "spe.py": params.spe.py,
        "spe.pz": params.spe.pz,
        "cz.pz_class": pz_class,
        "cz.other_class": other_class,
        "spam.px": params.spam.px,
        "scale": params.scale,
    }


def _params_from_dict(values: dict[str, float]) -> NoiseParams:
    return NoiseParams(
        lue=values["lue.p"],
        gue=values["gue.p"],
        mve=PauliChannel1Q(values["mve.px"], values["mve.py"], values["mve.pz"]),
        spe=PauliChannel1Q(values["spe.px"], values["spe.py"], values["spe.pz"]),
        cz=PauliChannel2Q.from_classes(values["cz.pz_class"], values["cz.other_class"]),
        spam=PauliChannel1Q(values["spam.px"], 0.0, 0.0),
        scale=values["scale"],
    )


def save_noise_config(params: NoiseParams, path: str | Path) -> None:
    """Write the flat key-value form; ``scale`` records applied rescaling."""
    values = _params_to_dict(params)
    lines = [f"{key} = {values[key]!r}" for key in _CONFIG_KEYS]
    Path(path).write_text("\n".join(lines) + "\n")


def load_noise_config(path: str | Path, base: NoiseParams | None = None) -> NoiseParams:
    """Read a key-value config; keys missing from the file keep ``base`` values."""
    values = _params_to_dict(base if base is not None else baseline_params())
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {line_no}: expected 'key = value'")
        key, _, text = (part.strip() for part in line.partition("="))
        if key not in values:
            raise ValueError(f"line {line_no}: unknown noise key {key!r}")
        values[key] = float(text)
    return _params_from_dict(values)
