"""Transforms between the time-frequency, time, and delay-Doppler signal domains.

All grids are M x N complex matrices. TF grids index subcarriers along rows
and OFDM symbols along columns; DD grids index delay bins along rows and
Doppler bins along columns. Vectorization is column-major everywhere
(subcarrier or delay index fastest), so ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``
holds for every identity used below. DFT matrices are unitary.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Dims",
    "dft_matrix",
    "vec",
    "unvec",
    "tf_to_time",
    "time_to_tf",
    "add_cp",
    "remove_cp",
    "tf_to_dd",
    "dd_to_tf",
]


@dataclass(frozen=True)
class Dims:
    """OFDM grid geometry.

    Attributes:
        m: number of subcarriers per symbol.
        n: number of OFDM symbols per frame.
        cp_len: cyclic prefix length in samples, smaller than ``m``.
    """

    m: int
    n: int
    cp_len: int

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ValueError(f"grid needs m >= 1 and n >= 1, got {self.m}x{self.n}")
        if not 0 <= self.cp_len < self.m:
            raise ValueError(f"cp_len must lie in [0, m), got {self.cp_len}")

    @property
    def grid_size(self) -> int:
        """Number of resource elements, M*N."""
        return self.m * self.n

    @property
    def frame_len(self) -> int:
        """Sample count of the CP-extended frame, (M + cp_len)*N."""
        return (self.m + self.cp_len) * self.n


@lru_cache(maxsize=None)
def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix F[k, l] = exp(-2j pi k l / n) / sqrt(n)."""
    if n < 1:
        raise ValueError(f"DFT size must be positive, got {n}")
    k = np.arange(n)
    f = np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    f.setflags(write=False)
    return f


def vec(x: np.ndarray) -> np.ndarray:
    """Column-major vectorization."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(x: np.ndarray, m: int, n: int) -> np.ndarray:
    """Inverse of :func:`vec` for an m x n matrix."""
    return np.asarray(x).reshape(m, n, order="F")


def _check_grid(x: np.ndarray, d: Dims, name: str) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (d.m, d.n):
        raise ValueError(f"{name} must have shape {(d.m, d.n)}, got {x.shape}")
    return x.astype(complex, copy=False)


def tf_to_time(x: np.ndarray, d: Dims, with_cp: bool = False) -> np.ndarray:
    """Per-symbol unitary inverse DFT of a TF grid, optionally CP-extended.

    Returns the stacked time-domain vector of length M*N, or (M+cp_len)*N
    when ``with_cp`` is set (each symbol block is prefixed by a copy of its
    last ``cp_len`` samples).
    """
    x = _check_grid(x, d, "TF grid")
    s = dft_matrix(d.m).conj().T @ x
    if with_cp:
        return add_cp(vec(s), d)
    return vec(s)


def add_cp(s: np.ndarray, d: Dims) -> np.ndarray:
    """Prefix each M-sample symbol block with its last cp_len samples."""
    s = np.asarray(s)
    if s.shape != (d.grid_size,):
        raise ValueError(
            f"CP-free signal must have length {d.grid_size}, got {s.shape}"
        )
    blocks = unvec(s, d.m, d.n)
    if d.cp_len == 0:
        return vec(blocks)
    return vec(np.vstack([blocks[d.m - d.cp_len:], blocks]))


def remove_cp(r: np.ndarray, d: Dims) -> np.ndarray:
    """Drop the first cp_len samples of each (M+cp_len)-sample block."""
    r = np.asarray(r)
    if r.shape != (d.frame_len,):
        raise ValueError(
            f"CP-extended signal must have length {d.frame_len}, got {r.shape}"
        )
    blocks = unvec(r, d.m + d.cp_len, d.n)
    return vec(blocks[d.cp_len:])


def time_to_tf(r: np.ndarray, d: Dims) -> np.ndarray:
    """Per-symbol unitary DFT, the exact inverse of CP-free tf_to_time."""
    r = np.asarray(r)
    if d.cp_len > 0 and r.shape == (d.frame_len,):
        raise ValueError("signal still carries a CP, call remove_cp first")
    if r.shape != (d.grid_size,):
        raise ValueError(
            f"CP-free signal must have length {d.grid_size}, got {r.shape}"
        )
    return dft_matrix(d.m) @ unvec(r, d.m, d.n)


def tf_to_dd(x: np.ndarray, d: Dims) -> np.ndarray:
    """Map a TF grid to its DD image, vec form kron(F_N, F_M^H) @ vec(x).

    The DFT matrix is symmetric, so the matrix form is F_M^H @ X @ F_N.
    """
    x = _check_grid(x, d, "TF grid")
    return dft_matrix(d.m).conj().T @ x @ dft_matrix(d.n)


def dd_to_tf(x: np.ndarray, d: Dims) -> np.ndarray:
    """Exact inverse of :func:`tf_to_dd`."""
    x = _check_grid(x, d, "DD grid")
    return dft_matrix(d.m) @ x @ dft_matrix(d.n).conj().T
