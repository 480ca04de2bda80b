"""Monte Carlo simulation harness.

Every trial is keyed by (base_seed, SNR point, trial index) so results are
reproducible run to run and, within one trial, every estimator is evaluated
against the identical received frame. NMSE is averaged in the linear domain
across trials and converted to dB at the end.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .baselines import CovarianceModel, fit_covariance, fs_lmmse, st_lmmse, st_ls, tf_lasso
from .channel import ChannelStats, Pulse, effective_tf_channel, sample_channel, time_channel_matrix, apply_channel
from .estimator import LassoConfig, cdce_estimate
from .grids import Dims, remove_cp, tf_to_time, time_to_tf
from .pilots import FrameSpec, assemble_frame

__all__ = [
    "ESTIMATOR_NAMES",
    "SimConfig",
    "ResultRow",
    "nmse_db",
    "run_trial",
    "run_sweep",
    "emit",
]

ESTIMATOR_NAMES = ("cdce", "fs_lmmse", "st_ls", "st_lmmse", "tf_lasso")

NMSE_FLOOR_DB = -200.0

_COV_SEED_TAG = 0x636F76


@dataclass(frozen=True)
class SimConfig:
    dims: Dims
    stats: ChannelStats
    frame: FrameSpec
    snr_grid_db: tuple[float, ...]
    trials: int = 500
    mode: str = "pilot_only"
    estimators: tuple[str, ...] = ESTIMATOR_NAMES
    lasso: LassoConfig = field(default_factory=LassoConfig)
    cov_samples: int = 1000
    base_seed: int = 0
    pulse: Pulse = field(default_factory=lambda: Pulse("ideal"))

    def __post_init__(self) -> None:
        if not self.snr_grid_db:
            raise ValueError("snr_grid_db must not be empty")
        if self.trials < 1:
            raise ValueError(f"trials must be positive, got {self.trials}")
        if self.mode not in ("pilot_only", "with_data"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.estimators:
            raise ValueError("estimators must not be empty")
        unknown = [e for e in self.estimators if e not in ESTIMATOR_NAMES]
        if unknown:
            raise ValueError(f"unknown estimators {unknown}, choose from {ESTIMATOR_NAMES}")
        if self.cov_samples < 2:
            raise ValueError(f"cov_samples must be at least 2, got {self.cov_samples}")
        if self.base_seed < 0:
            raise ValueError(f"base_seed must be non-negative, got {self.base_seed}")
        if self.mode == "pilot_only" and self.frame.data_mode != "none":
            raise ValueError("pilot_only mode requires a frame without data")
        if self.mode == "with_data" and self.frame.data_mode == "none":
            raise ValueError("with_data mode requires a frame with data symbols")


@dataclass(frozen=True)
class ResultRow:
    estimator: str
    snr_db: float
    trials: int
    nmse_db: float
    stderr_db: float


def nmse_db(h_hat: np.ndarray, h_true: np.ndarray) -> float:
    """Normalized squared error in dB, floored at -200 dB."""
    denom = float(np.sum(np.abs(h_true) ** 2))
    if denom == 0:
        raise ValueError("the true channel is identically zero")
    ratio = float(np.sum(np.abs(np.asarray(h_hat) - h_true) ** 2)) / denom
    if ratio == 0:
        return NMSE_FLOOR_DB
    return max(10.0 * math.log10(ratio), NMSE_FLOOR_DB)


def _snr_key(snr_db: float) -> int:
    if math.isinf(snr_db):
        return 2**62
    return int(round(snr_db * 1e6)) % 2**63


def _trial_rngs(cfg: SimConfig, snr_db: float, trial_index: int):
    ss = np.random.SeedSequence([cfg.base_seed, _snr_key(snr_db), trial_index])
    return tuple(np.random.default_rng(child) for child in ss.spawn(3))


def fit_config_covariance(cfg: SimConfig) -> CovarianceModel:
    """Fit the channel statistics model with the config's dedicated seed."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.base_seed, _COV_SEED_TAG]))
    return fit_covariance(cfg.stats, cfg.dims, cfg.cov_samples, rng, pulse=cfg.pulse)


def run_trial(
    cfg: SimConfig,
    snr_db: float,
    trial_index: int,
    cov: CovarianceModel | None = None,
) -> dict[str, float]:
    """One paired trial: returns the linear NMSE of every configured
    estimator against the same received frame."""
    if trial_index < 0:
        raise ValueError(f"trial_index must be non-negative, got {trial_index}")
    channel_rng, frame_rng, noise_rng = _trial_rngs(cfg, snr_db, trial_index)
    if cov is None and "fs_lmmse" in cfg.estimators:
        cov = fit_config_covariance(cfg)
    ch = sample_channel(cfg.stats, cfg.dims, channel_rng)
    g = time_channel_matrix(ch, cfg.pulse)
    frame = assemble_frame(cfg.frame, frame_rng)
    n0 = 0.0 if math.isinf(snr_db) else 10.0 ** (-snr_db / 10.0)
    s = tf_to_time(frame.tf, cfg.dims, with_cp=True)
    r = apply_channel(s, g, n0, noise_rng)
    y_tf = time_to_tf(remove_cp(r, cfg.dims), cfg.dims)
    h_true = effective_tf_channel(g, cfg.dims)
    denom = float(np.sum(np.abs(h_true) ** 2))
    out: dict[str, float] = {}
    for name in cfg.estimators:
        if name == "cdce":
            h_hat = cdce_estimate(
                y_tf, frame, cfg.stats, n0,
                mode=cfg.mode, lasso=cfg.lasso, pulse=cfg.pulse,
            ).h_tf_hat
        elif name == "fs_lmmse":
            h_hat = fs_lmmse(y_tf, frame, cov, n0)
        elif name == "st_ls":
            h_hat = st_ls(y_tf, frame)
        elif name == "st_lmmse":
            h_hat = st_lmmse(y_tf, frame, math.inf if n0 == 0 else 1.0 / n0)
        else:
            h_hat = tf_lasso(y_tf, frame, cfg.stats, cfg.lasso, cfg.pulse)
        out[name] = float(np.sum(np.abs(h_hat - h_true) ** 2)) / denom
    return out


def run_sweep(cfg: SimConfig, cov: CovarianceModel | None = None) -> list[ResultRow]:
    """Sweep the SNR grid, averaging linear NMSE over trials per estimator.

    The covariance model is fitted once up front when any estimator needs it.
    The standard error is propagated to dB with the delta method.
    """
    if cov is None and "fs_lmmse" in cfg.estimators:
        cov = fit_config_covariance(cfg)
    rows: list[ResultRow] = []
    for snr_db in cfg.snr_grid_db:
        ratios = {name: np.empty(cfg.trials) for name in cfg.estimators}
        for t in range(cfg.trials):
            result = run_trial(cfg, snr_db, t, cov=cov)
            for name, value in result.items():
                ratios[name][t] = value
        for name in cfg.estimators:
            samples = ratios[name]
            mean_lin = float(samples.mean())
            if cfg.trials > 1 and mean_lin > 0:
                se_lin = float(samples.std(ddof=1)) / math.sqrt(cfg.trials)
                stderr = (10.0 / math.log(10.0)) * se_lin / mean_lin
            else:
                stderr = 0.0
            value_db = NMSE_FLOOR_DB if mean_lin == 0 else max(
                10.0 * math.log10(mean_lin), NMSE_FLOOR_DB
            )
            rows.append(ResultRow(
                estimator=name,
                snr_db=float(snr_db),
                trials=cfg.trials,
                nmse_db=value_db,
                stderr_db=stderr,
            ))
    rows.sort(key=lambda r: (r.estimator, r.snr_db))
    return rows


def emit(rows: list[ResultRow], path: str, fmt: str = "csv") -> None:
    """Write sweep rows to disk as CSV or JSON.

    An empty row list still produces a valid file (header only for CSV, an
    empty array for JSON).
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}, choose csv or json")
    try:
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["estimator", "snr_db", "trials", "nmse_db", "stderr_db"])
                for row in rows:
                    writer.writerow([
                        row.estimator,
                        f"{row.snr_db:g}",
                        row.trials,
                        f"{row.nmse_db:.6f}",
                        f"{row.stderr_db:.6f}",
                    ])
        else:
            with open(path, "w") as fh:
                json.dump([asdict(row) for row in rows], fh, indent=2)
                fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
