"""Readout decoding, gain calibration and reconstruction error metrics.

Decoding inverts the encoding convention: each measured string is split
into an address value (qubit 0 as least significant bit) and one bit per
data qubit, and every stored value is estimated from the Z expectation of
its data qubit conditioned on its address. Noise shrinks the estimates
toward zero, so a single least-squares gain is fitted against known truth
and reported alongside raw and calibrated error figures.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .circuits import QCrankConfig
from .sim import ShotCounts

HIST_RANGE = (-0.5, 0.5)
HIST_BINS = 100


@dataclass(frozen=True, eq=False)
class DecodedSequence:
    """Estimated values by (address, data qubit), plus shots per address."""

    values: np.ndarray
    address_shots: np.ndarray
    cfg: QCrankConfig


@dataclass(frozen=True)
class Calibration:
    """Multiplicative gain mapping raw estimates onto stored values."""

    factor: float

    @property
    def dynamic_range(self) -> float:
        """Fraction of the ideal signal amplitude that survives the noise."""
        return 1.0 / self.factor


@dataclass(frozen=True, eq=False)
class RmseReport:
    rmse_raw: float
    rmse_calibrated: float
    residual_mean: float
    residual_rms: float
    dynamic_range: float
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    n_values: int


def _truth_grid(truth: np.ndarray, cfg: QCrankConfig) -> np.ndarray:
    arr = np.asarray(truth, dtype=float)
    if arr.shape == (cfg.n_addresses, cfg.n_data):
        return arr
    if arr.ndim == 1 and arr.size == cfg.capacity:
        return arr.reshape(cfg.n_addresses, cfg.n_data)
    raise ValueError(f"truth must hold {cfg.capacity} values for this configuration")


def decode(counts: ShotCounts, cfg: QCrankConfig) -> DecodedSequence:
    """Estimate every stored value from conditional readout statistics.

    Addresses that received no shots decode to NaN and trigger a warning;
    downstream fits and error metrics skip them.
    """
    n = cfg.n_qubits
    keys = list(counts.counts.keys())
    weights = np.fromiter((counts.counts[k] for k in keys), dtype=float, count=len(keys))
    ones = np.zeros((cfg.n_addresses, cfg.n_data))
    shots_per = np.zeros(cfg.n_addresses)
    if keys:
        if any(len(key) != n for key in keys):
            raise ValueError(f"outcome keys must be {n}-character bitstrings")
        flat = np.frombuffer("".join(keys).encode("ascii"), dtype=np.uint8)
        bits = flat.reshape(len(keys), n) - ord("0")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("outcome keys may contain only '0' and '1'")
        address = bits[:, : cfg.n_address] @ (1 << np.arange(cfg.n_address))
        np.add.at(shots_per, address, weights)
        np.add.at(ones, address, weights[:, None] * bits[:, cfg.n_address :])
    with np.errstate(invalid="ignore"):
        values = (shots_per[:, None] - 2.0 * ones) / shots_per[:, None]
    if (shots_per == 0).any():
        empty = int((shots_per == 0).sum())
        warnings.warn(f"{empty} address(es) received no shots; decoding them to NaN")
    return DecodedSequence(values=values, address_shots=shots_per, cfg=cfg)


def fit_calibration(decoded: DecodedSequence, truth: np.ndarray) -> Calibration:
    """Least-squares gain from raw estimates to the known stored values."""
    grid = _truth_grid(truth, decoded.cfg)
    mask = np.isfinite(decoded.values)
    raw = decoded.values[mask]
    denom = float(np.sum(raw * raw))
    if denom == 0.0:
        raise ValueError("cannot calibrate against identically zero estimates")
    return Calibration(factor=float(np.sum(raw * grid[mask])) / denom)


def rmse(
    decoded: DecodedSequence,
    truth: np.ndarray,
    calibration: Calibration | None = None,
) -> RmseReport:
    """Reconstruction error metrics; fits a self-calibration when none given.

    The headline figure is the standard deviation of calibrated residuals,
    with their mean and plain root-mean-square reported separately. The
    residual histogram uses 100 fixed-width bins spanning [-0.5, 0.5], with
    residuals clipped into that range first so the counts total n_values.
    """
    grid = _truth_grid(truth, decoded.cfg)
    if calibration is None:
        calibration = fit_calibration(decoded, truth)
    mask = np.isfinite(decoded.values)
    raw = decoded.values[mask]
    residuals = calibration.factor * raw - grid[mask]
    edges = np.linspace(*HIST_RANGE, HIST_BINS + 1)
    hist, _ = np.histogram(np.clip(residuals, *HIST_RANGE), bins=edges)
    return RmseReport(
        rmse_raw=float(np.std(raw - grid[mask])),
        rmse_calibrated=float(np.std(residuals)),
        residual_mean=float(np.mean(residuals)),
        residual_rms=float(np.sqrt(np.mean(residuals**2))),
        dynamic_range=calibration.dynamic_range,
        hist_edges=edges,
        hist_counts=hist,
        n_values=int(mask.sum()),
    )


def two_run_protocol(
    calib_counts: ShotCounts,
    eval_counts: ShotCounts,
    calib_truth: np.ndarray,
    eval_truth: np.ndarray,
    cfg: QCrankConfig,
) -> tuple[Calibration, RmseReport]:
    """Fit the gain on one run, then score a second run blind with it."""
    calibration = fit_calibration(decode(calib_counts, cfg), calib_truth)
    report = rmse(decode(eval_counts, cfg), eval_truth, calibration)
    return calibration, report


def statistical_floor(shots_per_address: float) -> float:
    """Shot-noise limit of the calibrated error for uniform stored values.

    The Z-basis estimate of a value x has variance (1 - x^2)/S from S shots;
    averaging over x uniform in [-1, 1] gives 2/3 of a full shot's variance.
    """
    if shots_per_address <= 0:
        raise ValueError("shots per address must be positive")
    return float(np.sqrt((2.0 / 3.0) / shots_per_address))
