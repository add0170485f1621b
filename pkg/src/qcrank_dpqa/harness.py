"""Experiment driver: register-shape sweeps across noise scales and seeds.

Each experiment cell is one (register shape, shot budget) pair; every
(cell, noise scale, sequence) combination draws fresh uniform data in
[-1, 1], builds and lowers the encoding circuit, attaches scaled noise,
simulates a calibration run and an evaluation run, and scores the blind
reconstruction. All randomness derives from the counter-based Philox
generator keyed by numpy SeedSequence spawn keys
``(cell_index, scale_index, sequence, role)`` with roles 0/1 for the
calibration/evaluation data draws and 2/3 for the matching simulator
streams, so any cell can be reproduced in isolation from the base seed.

Schedule dumps render one instruction per line in execution order:

    gu <kind> [<angle>]                    global pulse on every atom
    lu <atom> <kind> [<angle>]             locally addressed pulse
    move <atom>:(x,y)->(x,y) ...           one step of simultaneous moves
    cz <a>-<d> ... | spect <d> ...         entangling pulse with spectators
    measure                                readout of all atoms

Atoms are named ``a<i>`` (address) and ``d<j>`` (data); angles print in
full ``repr`` precision. The dumped stream is the one compiled for the
first sequence's calibration data.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analysis import Calibration, RmseReport, decode, two_run_protocol
from .circuits import QCrankConfig, build_dpqa, compute_angles
from .compiler import format_schedule, lower
from .noise import NoiseParams, _params_to_dict, attach_noise, baseline_params, scale_params
from .sim import ShotCounts, run_exact, run_trajectories

# (n_address, n_data, shots) rows of the reference sweep, ordered by capacity.
TABLE2_ROWS = (
    (3, 3, 25_000),
    (3, 6, 25_000),
    (3, 9, 25_000),
    (3, 12, 25_000),
    (4, 8, 50_000),
    (5, 5, 100_000),
    (4, 12, 50_000),
    (4, 16, 50_000),
    (5, 10, 100_000),
)

BACKENDS = ("auto", "exact", "traj")
EXACT_QUBIT_LIMIT = 12

CSV_HEADER = "cfg_id,n_a,n_d,capacity,backend,noise_scale,shots,sequence,c,rmse_raw,rmse_calibrated,wall_time_s"


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: cells are (n_address, n_data, shots) triples."""

    cells: tuple[tuple[int, int, int], ...]
    noise_scales: tuple[float, ...] = (1.0,)
    backend: str = "auto"
    sequences: int = 10
    base_seed: int = 12345
    noise: NoiseParams = field(default_factory=baseline_params)
    out_dir: str | None = None
    dump_schedules: bool = False

    def __post_init__(self) -> None:
        if not self.cells:
            raise ValueError("spec needs at least one cell")
        for na, nd, shots in self.cells:
            QCrankConfig(na, nd)
            if shots <= 0:
                raise ValueError("shots must be positive")
        if not self.noise_scales or any(s < 0 for s in self.noise_scales):
            raise ValueError("noise scales must be nonnegative")
        if self.sequences < 1:
            raise ValueError("sequences must be at least 1")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")


@dataclass(frozen=True)
class ResultRow:
    cfg_id: str
    n_address: int
    n_data: int
    capacity: int
    backend: str
    noise_scale: float
    shots: int
    sequence: int
    calibration: float
    rmse_raw: float
    rmse_calibrated: float
    wall_time_s: float


@dataclass(frozen=True, eq=False)
class SequenceDetail:
    """First-sequence artifacts kept for reporting: truth grid, estimates, fit."""

    truth: np.ndarray
    decoded: np.ndarray
    calibration: Calibration
    report: RmseReport


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    rows: tuple[ResultRow, ...]
    details: dict[tuple[str, float], SequenceDetail]
    schedule_texts: dict[str, str]


def cfg_label(cfg: QCrankConfig) -> str:
    return f"{cfg.n_address}a{cfg.n_data}d"


def select_backend(requested: str, cfg: QCrankConfig) -> str:
    """Resolve the backend; large registers always route to trajectories."""
    if requested not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}")
    if cfg.n_qubits > EXACT_QUBIT_LIMIT:
        return "traj"
    return "exact" if requested == "auto" else requested


def default_table2_spec() -> ExperimentSpec:
    """The nine-cell reference sweep at published shot budgets."""
    return ExperimentSpec(cells=TABLE2_ROWS)


def _spawned_seed(base_seed: int, key: tuple[int, int, int, int]) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=base_seed, spawn_key=key)


def _draw_data(base_seed: int, key: tuple[int, int, int, int], cfg: QCrankConfig) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(_spawned_seed(base_seed, key)))
    return rng.uniform(-1.0, 1.0, cfg.capacity)


def _simulate(program, shots: int, seed: np.random.SeedSequence, backend: str) -> ShotCounts:
    if backend == "exact":
        return run_exact(program, shots, seed)
    return run_trajectories(program, shots, seed)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run every (cell, scale, sequence) combination of the spec.

    Returns all result rows in deterministic sweep order plus, per
    (cell, scale), the first sequence's reconstruction detail for reports.
    Cells are independent; identical specs reproduce identical rows apart
    from wall-clock timings.
    """
    rows: list[ResultRow] = []
    details: dict[tuple[str, float], SequenceDetail] = {}
    schedule_texts: dict[str, str] = {}
    for cfg_idx, (na, nd, shots) in enumerate(spec.cells):
        cfg = QCrankConfig(na, nd)
        cfg_id = cfg_label(cfg)
        backend = select_backend(spec.backend, cfg)
        for scale_idx, scale in enumerate(spec.noise_scales):
            params = scale_params(spec.noise, scale)
            for seq in range(spec.sequences):
                start = time.perf_counter()
                calib_data = _draw_data(spec.base_seed, (cfg_idx, scale_idx, seq, 0), cfg)
                eval_data = _draw_data(spec.base_seed, (cfg_idx, scale_idx, seq, 1), cfg)
                calib_schedule = lower(build_dpqa(cfg, compute_angles(calib_data, cfg)), cfg)
                eval_schedule = lower(build_dpqa(cfg, compute_angles(eval_data, cfg)), cfg)
                if spec.dump_schedules and cfg_id not in schedule_texts:
                    schedule_texts[cfg_id] = format_schedule(calib_schedule)
                calib_counts = _simulate(
                    attach_noise(calib_schedule, params),
                    shots,
                    _spawned_seed(spec.base_seed, (cfg_idx, scale_idx, seq, 2)),
                    backend,
                )
                eval_counts = _simulate(
                    attach_noise(eval_schedule, params),
                    shots,
                    _spawned_seed(spec.base_seed, (cfg_idx, scale_idx, seq, 3)),
                    backend,
                )
                calibration, report = two_run_protocol(
                    calib_counts, eval_counts, calib_data, eval_data, cfg
                )
                rows.append(
                    ResultRow(
                        cfg_id=cfg_id,
                        n_address=na,
                        n_data=nd,
                        capacity=cfg.capacity,
                        backend=backend,
                        noise_scale=scale,
                        shots=shots,
                        sequence=seq,
                        calibration=calibration.factor,
                        rmse_raw=report.rmse_raw,
                        rmse_calibrated=report.rmse_calibrated,
                        wall_time_s=time.perf_counter() - start,
                    )
                )
                if seq == 0:
                    details[(cfg_id, scale)] = SequenceDetail(
                        truth=eval_data.reshape(cfg.n_addresses, cfg.n_data),
                        decoded=decode(eval_counts, cfg).values,
                        calibration=calibration,
                        report=report,
                    )
    return ExperimentResult(rows=tuple(rows), details=details, schedule_texts=schedule_texts)


def _format_row(row: ResultRow) -> str:
    return ",".join(
        (
            row.cfg_id,
            str(row.n_address),
            str(row.n_data),
            str(row.capacity),
            row.backend,
            repr(row.noise_scale),
            str(row.shots),
            str(row.sequence),
            repr(row.calibration),
            repr(row.rmse_raw),
            repr(row.rmse_calibrated),
            f"{row.wall_time_s:.3f}",
        )
    )


def write_results(result: ExperimentResult, spec: ExperimentSpec, out_dir: str | Path) -> Path:
    """Write results.csv, a provenance sidecar and any schedule dumps.

    Output is deterministic for a fixed spec and seed except for the
    wall_time_s column. Returns the CSV path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    lines = [CSV_HEADER] + [_format_row(row) for row in result.rows]
    csv_path.write_text("\n".join(lines) + "\n")
    meta = {
        "cells": [list(cell) for cell in spec.cells],
        "noise_scales": list(spec.noise_scales),
        "backend": spec.backend,
        "sequences": spec.sequences,
        "base_seed": spec.base_seed,
        "noise": _params_to_dict(spec.noise),
        "rng": "numpy Philox via SeedSequence(base_seed, spawn_key=(cell, scale, sequence, role))",
    }
    (out / "results.meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    for cfg_id, text in result.schedule_texts.items():
        (out / f"schedule_{cfg_id}.txt").write_text(text)
    return csv_path
