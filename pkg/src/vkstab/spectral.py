"""Dense spectral differentiation matrices and even-subspace helpers."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .core import Grid


@lru_cache(maxsize=32)
def _diff_matrices(kind: str, extent: float, n: int):
    from .core import make_grid

    g = make_grid(kind, extent, n)
    eye = np.eye(n)
    spec = np.fft.fft(eye, axis=0)
    d1 = np.real(np.fft.ifft(1j * g.deriv_wavenumbers()[:, None] * spec, axis=0))
    d2 = np.real(np.fft.ifft(-(g.wavenumbers[:, None] ** 2) * spec, axis=0))
    # Exact symmetry keeps the assembled Hessians self-adjoint to roundoff.
    d1 = 0.5 * (d1 - d1.T)
    d2 = 0.5 * (d2 + d2.T)
    d1.setflags(write=False)
    d2.setflags(write=False)
    return d1, d2


def first_derivative_matrix(grid: Grid) -> np.ndarray:
    return _diff_matrices(grid.kind, grid.extent, grid.n)[0]


def second_derivative_matrix(grid: Grid) -> np.ndarray:
    return _diff_matrices(grid.kind, grid.extent, grid.n)[1]


def even_indices(n: int) -> np.ndarray:
    """Representative indices of the even subspace u_j = u_{n-j}."""
    return np.arange(n // 2 + 1)


def even_expansion(n: int) -> np.ndarray:
    """Matrix mapping half-grid values to an even full-grid vector."""
    half = n // 2 + 1
    s = np.zeros((n, half))
    for j in range(n):
        s[j, min(j, n - j)] = 1.0
    return s


def fold_operator(op: np.ndarray) -> np.ndarray:
    """Restrict an n x n operator to the even subspace."""
    n = op.shape[0]
    return op[np.ix_(even_indices(n), np.arange(n))] @ even_expansion(n)
