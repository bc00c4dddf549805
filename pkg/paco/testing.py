"""Dense reference implementations for tiny problems, used by the test suite.

Patch matrices are vectorized column by column (``Y.ravel(order="F")``) so
that vec(D A) = (I ⊗ D) vec(A).
"""
from functools import reduce

import numpy as np
import scipy.linalg
import scipy.optimize

from .exceptions import GridError
from .metrics import SSIM_K1, SSIM_K2, gaussian_window
from .patch_grid import PatchGrid

MAX_DENSE = 10_000


def _guard(grid: PatchGrid):
    if grid.m * grid.n > MAX_DENSE:
        raise GridError(f"dense oracle refused for {grid.m}x{grid.n} patches")


def vec(Y: np.ndarray) -> np.ndarray:
    return np.asarray(Y).ravel(order="F")


def unvec(v: np.ndarray, m: int) -> np.ndarray:
    return np.asarray(v).reshape((m, -1), order="F")


def extraction_matrix(grid: PatchGrid) -> np.ndarray:
    _guard(grid)
    R = np.zeros((grid.m * grid.n, grid.size))
    R[np.arange(grid.m * grid.n), vec(grid.index)] = 1.0
    return R


def dense_projection_oracle(grid: PatchGrid) -> np.ndarray:
    """R (RᵀR)⁻¹ Rᵀ built explicitly."""
    R = extraction_matrix(grid)
    return R @ np.linalg.solve(R.T @ R, R.T)


def dct_matrix(k: int) -> np.ndarray:
    """Orthonormal DCT-II matrix written out from the cosine definition."""
    i = np.arange(k)[:, None]
    j = np.arange(k)[None, :]
    C = np.sqrt(2.0 / k) * np.cos(np.pi * (2 * j + 1) * i / (2 * k))
    C[0, :] /= np.sqrt(2.0)
    return C


def dense_dct(patch_shape) -> np.ndarray:
    """Separable DCT of a row-major vectorized patch."""
    return reduce(np.kron, [dct_matrix(int(k)) for k in patch_shape])


def coefficient_projector(grid: PatchGrid, atoms: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto {A : D A is in consensus}, of size pn x pn."""
    _guard(grid)
    synthesis = np.kron(np.eye(grid.n), atoms)
    P = dense_projection_oracle(grid)
    basis = scipy.linalg.null_space((np.eye(P.shape[0]) - P) @ synthesis)
    return basis @ basis.T


def weighted_l1_oracle(grid: PatchGrid, transform: np.ndarray, weights: np.ndarray, known: np.ndarray,
                       known_values: np.ndarray):
    """min_z Σ_j Σ_i w_i |(T R_j z)_i| with z fixed on the known samples, as a linear program.

    Returns (z, cost).
    """
    known = np.asarray(known, dtype=bool).ravel()
    free = np.flatnonzero(~known)
    R = extraction_matrix(grid)
    G = np.kron(np.eye(grid.n), transform) @ R
    W = np.tile(np.asarray(weights, dtype=np.float64), grid.n)
    offset = G[:, known] @ np.asarray(known_values, dtype=np.float64).ravel()[known]
    G_free = G[:, free]
    k, f = G_free.shape
    # variables (z_free, t): minimize Σ W t subject to |G_free z + offset| <= t
    c = np.concatenate([np.zeros(f), W])
    A_ub = np.block([[G_free, -np.eye(k)], [-G_free, -np.eye(k)]])
    b_ub = np.concatenate([-offset, offset])
    bounds = [(None, None)] * f + [(0, None)] * k
    result = scipy.optimize.linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    z = np.asarray(known_values, dtype=np.float64).ravel().copy()
    z[free] = result.x[:f]
    return z.reshape(grid.signal_shape), float(result.fun)


def box_consensus_qp(grid: PatchGrid, Y: np.ndarray, lo: float, hi: float, iters: int = 20000,
                     tol: float = 1e-14) -> np.ndarray:
    """min ‖R z − Y‖² over z in [lo, hi]^N by projected gradient; returns R z as a patch matrix."""
    R = extraction_matrix(grid)
    y = vec(Y)
    step = 1.0 / np.linalg.norm(R.T @ R, 2)
    z = np.clip(np.zeros(grid.size), lo, hi)
    for _ in range(iters):
        z_next = np.clip(z - step * (R.T @ (R @ z - y)), lo, hi)
        if np.linalg.norm(z_next - z) < tol:
            z = z_next
            break
        z = z_next
    return unvec(R @ z, grid.m)


def direct_ssim(x: np.ndarray, y: np.ndarray, peak: float) -> float:
    """SSIM evaluated window by window from the defining formula."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    g = gaussian_window()
    k = g.shape[0]
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    values = []
    for i in range(x.shape[0] - k + 1):
        for j in range(x.shape[1] - k + 1):
            a = x[i:i + k, j:j + k]
            b = y[i:i + k, j:j + k]
            mu_a = np.sum(g * a)
            mu_b = np.sum(g * b)
            var_a = np.sum(g * (a - mu_a) ** 2)
            var_b = np.sum(g * (b - mu_b) ** 2)
            cov = np.sum(g * (a - mu_a) * (b - mu_b))
            values.append(((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                          / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)))
    return float(np.mean(values))
