"""Amplitude encoding of real sequences on a simulated movable-atom array.

The pipeline: ``compute_angles`` turns a sequence in [-1, 1] into rotation
angles, ``build_dpqa`` emits the entangler-grouped encoding circuit,
``lower`` schedules it onto the atom grid as an instruction stream with
explicit moves, ``attach_noise`` decorates the stream with Pauli channels,
the ``sim`` backends sample readouts, and ``analysis`` reconstructs the
sequence and scores its accuracy. ``harness`` sweeps whole experiment
grids; ``cli`` exposes them as a command-line tool.
"""

from .analysis import (
    Calibration,
    DecodedSequence,
    RmseReport,
    decode,
    fit_calibration,
    rmse,
    statistical_floor,
    two_run_protocol,
)
from .circuits import (
    AngleTable,
    Circuit,
    Gate,
    QCrankConfig,
    build_dpqa,
    build_original,
    compute_angles,
    control_schedule,
    gray_code,
    insert_z_after_barrier,
    rotations_to_targets,
    unitary_of,
)
from .compiler import (
    AtomMove,
    Geometry,
    GlobalCZ,
    GlobalU,
    LocalU,
    MeasureAll,
    Move,
    MoveStep,
    Schedule,
    audit_schedule,
    check_aod,
    format_schedule,
    lower,
    move_touch_counts,
    plan_layout,
    schedule_moves,
)
from .harness import (
    TABLE2_ROWS,
    ExperimentResult,
    ExperimentSpec,
    ResultRow,
    cfg_label,
    default_table2_spec,
    run_experiment,
    select_backend,
    write_results,
)
from .noise import (
    PAULI2_LABELS,
    NoiseParams,
    NoisyProgram,
    NoisyStep,
    PauliChannel1Q,
    PauliChannel2Q,
    attach_noise,
    baseline_params,
    depolarizing,
    load_noise_config,
    save_noise_config,
    scale_params,
)
from .sim import (
    EXACT_MAX_QUBITS,
    TRAJ_MAX_QUBITS,
    ShotCounts,
    bitstring,
    exact_distribution,
    exact_expectations,
    inject_z,
    probabilities_of,
    run_exact,
    run_trajectories,
    sample_pauli_indices,
    statevector_of,
)

__version__ = "0.1.0"
