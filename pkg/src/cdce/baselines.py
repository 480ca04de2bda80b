"""Reference estimators: single-tap interpolators, the full-size statistical
LMMSE, and a TF-domain sparse recovery without coarse support detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelStats, Pulse, sample_channel, time_channel_matrix, effective_tf_channel, unit_path_tf_channel
from .estimator import Dictionary, LassoConfig, signed_doppler, solve_lasso
from .grids import Dims, vec, unvec
from .pilots import Frame

__all__ = [
    "st_ls",
    "st_lmmse",
    "CovarianceModel",
    "fit_covariance",
    "fs_lmmse",
    "tf_lasso",
]


def _interpolate_grid(values: np.ndarray, frame: Frame) -> np.ndarray:
    """Fill a full M x N grid from samples on the pilot mask, interpolating
    along frequency first and then along time, linearly with constant end
    extension, real and imaginary parts separately."""
    d = frame.dims
    mask = frame.pilot_mask
    grid = np.zeros((d.m, d.n), dtype=complex)
    pilot_cols = [n for n in range(d.n) if mask[:, n].any()]
    for n in pilot_cols:
        rows = np.flatnonzero(mask[:, n])
        col = values[rows, n]
        all_rows = np.arange(d.m)
        grid[:, n] = (
            np.interp(all_rows, rows, col.real)
            + 1j * np.interp(all_rows, rows, col.imag)
        )
    all_cols = np.arange(d.n)
    pc = np.asarray(pilot_cols)
    for m in range(d.m):
        row = grid[m, pc]
        grid[m, :] = (
            np.interp(all_cols, pc, row.real)
            + 1j * np.interp(all_cols, pc, row.imag)
        )
    return grid


def st_ls(y_tf: np.ndarray, frame: Frame) -> np.ndarray:
    """Single-tap least squares: divide by the pilots on the lattice,
    interpolate bilinearly, return the diagonal TF channel estimate."""
    mask = frame.pilot_mask
    if not mask.any():
        raise ValueError("the frame carries no pilots")
    if np.any(frame.pilot_only_tf[mask] == 0):
        raise ValueError("a pilot position holds a zero symbol, cannot divide")
    ratios = np.zeros_like(y_tf)
    ratios[mask] = y_tf[mask] / frame.pilot_only_tf[mask]
    full = _interpolate_grid(ratios, frame)
    return np.diag(vec(full))


def st_lmmse(y_tf: np.ndarray, frame: Frame, snr: float) -> np.ndarray:
    """Single-tap LMMSE: the ST-LS estimate shrunk by SNR / (SNR + 1)."""
    if snr <= 0:
        raise ValueError(f"snr must be positive, got {snr}")
    return st_ls(y_tf, frame) / (1.0 + 1.0 / snr)


@dataclass(frozen=True)
class CovarianceModel:
    """Sample mean and a low-rank factor U with cov = U U^H, fitted over
    vectorized effective TF channel matrices."""

    mean: np.ndarray
    factor: np.ndarray
    n_samples: int

    @property
    def rank(self) -> int:
        return self.factor.shape[1]


def fit_covariance(
    stats: ChannelStats,
    d: Dims,
    k_samples: int,
    rng: np.random.Generator,
    pulse: Pulse = Pulse("ideal"),
    fractional: bool = False,
) -> CovarianceModel:
    """Monte Carlo estimate of the mean and covariance factor of vec(H_TF).

    The factor keeps only singular directions above a 1e-12 relative cutoff;
    for the integer-grid path ensemble the rank equals the region size.
    """
    if k_samples < 2:
        raise ValueError(f"need at least 2 samples, got {k_samples}")
    mn = d.grid_size
    samples = np.empty((mn * mn, k_samples), dtype=complex)
    for j in range(k_samples):
        ch = sample_channel(stats, d, rng, fractional=fractional)
        g = time_channel_matrix(ch, pulse)
        samples[:, j] = vec(effective_tf_channel(g, d))
    mean = samples.mean(axis=1)
    centered = (samples - mean[:, None]) / np.sqrt(k_samples)
    u, sv, _ = np.linalg.svd(centered, full_matrices=False)
    # rounding in the sample mean leaves scatter near machine epsilon even
    # when every sample is the same matrix, so gate on the sample scale too
    scale = np.linalg.norm(samples) / np.sqrt(k_samples)
    if sv.size and sv[0] > max(scale, 1.0) * 1e-12:
        r = int(np.sum(sv > sv[0] * 1e-12))
    else:
        r = 0
    return CovarianceModel(mean=mean, factor=u[:, :r] * sv[:r], n_samples=k_samples)


def fs_lmmse(
    y_tf: np.ndarray,
    frame: Frame,
    cov: CovarianceModel,
    n0: float,
    use_full_frame: bool = False,
) -> np.ndarray:
    """Full-size LMMSE estimate of the effective TF channel matrix.

    Solves in the rank-r factor domain: with X the linear map h -> H x for
    the reference transmit grid, the estimate is
        hbar + U (XU)^H ((XU)(XU)^H + N0 I)^{-1} (y - X hbar).
    The reference grid is the pilot-only frame unless use_full_frame is set.
    """
    if n0 < 0:
        raise ValueError(f"n0 must be non-negative, got {n0}")
    d = frame.dims
    mn = d.grid_size
    x_tf = frame.tf if use_full_frame else frame.pilot_only_tf
    x = vec(x_tf)
    y = vec(y_tf)
    if cov.rank == 0:
        return unvec(cov.mean, d.m * d.n, d.m * d.n)
    # X h = unvec(h) @ x where h is vec of an (MN x MN) matrix, so the action
    # on a factor column u is unvec(u) @ x, batched over columns.
    xu = np.einsum(
        "ijr,j->ir",
        cov.factor.reshape(mn, mn, cov.rank, order="F"),
        x,
    )
    resid = y - unvec(cov.mean, mn, mn) @ x
    gram = xu @ xu.conj().T
    if n0 == 0:
        z, *_ = np.linalg.lstsq(gram, resid, rcond=None)
    else:
        z = np.linalg.solve(gram + n0 * np.eye(mn), resid)
    h = cov.mean + cov.factor @ (xu.conj().T @ z)
    return unvec(h, mn, mn)


def tf_lasso(
    y_tf: np.ndarray,
    frame: Frame,
    stats: ChannelStats | None = None,
    cfg: LassoConfig = LassoConfig(),
    pulse: Pulse = Pulse("ideal"),
) -> np.ndarray:
    """Sparse recovery over the full M x N delay-Doppler dictionary, the
    search region extended to the whole grid in place of coarse detection."""
    del stats
    d = frame.dims
    x = vec(frame.pilot_only_tf)
    pairs = []
    columns = []
    for kc in range(d.n):
        for l in range(d.m):
            k = signed_doppler(kc, d.n)
            pairs.append((l, k))
            columns.append(unit_path_tf_channel(d, pulse, l, k) @ x)
    dictionary = Dictionary(matrix=np.column_stack(columns), pairs=tuple(pairs))
    h = solve_lasso(vec(y_tf), dictionary, cfg)
    mn = d.grid_size
    h_tf = np.zeros((mn, mn), dtype=complex)
    for gain, (l, k) in zip(h, pairs):
        if gain != 0:
            h_tf += gain * unit_path_tf_channel(d, pulse, l, k)
    return h_tf
