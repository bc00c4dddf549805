"""Transforms applied to patch columns.

OrthoDct is the orthonormal separable DCT-II over the patch axes
(coefficients A = D Y, synthesis Y = Dᵀ A). Dictionary is a dense m x p
synthesis matrix for the linearized solver.
"""
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import scipy.fft

from .exceptions import DictionaryError, ShapeMismatchError

logger = logging.getLogger(__name__)

NORM_SAFETY = 1.01


@dataclass(frozen=True)
class OrthoDct:
    patch_shape: Tuple[int, ...]
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "patch_shape", tuple(int(p) for p in self.patch_shape))

    @property
    def m(self) -> int:
        return int(np.prod(self.patch_shape))

    @property
    def axes(self) -> Tuple[int, ...]:
        return tuple(range(len(self.patch_shape)))

    def _as_patches(self, Y: np.ndarray) -> np.ndarray:
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim != 2 or Y.shape[0] != self.m:
            raise ShapeMismatchError(f"columns of length {self.m} expected, got {Y.shape}", module="transforms")
        return Y.reshape(self.patch_shape + (Y.shape[1],))

    def forward(self, Y: np.ndarray) -> np.ndarray:
        coefficients = scipy.fft.dctn(self._as_patches(Y), type=2, axes=self.axes, norm="ortho", workers=self.workers)
        return coefficients.reshape(self.m, -1)

    def inverse(self, A: np.ndarray) -> np.ndarray:
        patches = scipy.fft.idctn(self._as_patches(A), type=2, axes=self.axes, norm="ortho", workers=self.workers)
        return patches.reshape(self.m, -1)

    def dictionary(self) -> "Dictionary":
        """The synthesis matrix Dᵀ as a Dictionary with its exact norm."""
        return Dictionary(self.inverse(np.eye(self.m)), spectral_norm_bound=1.0)


def dct_forward(transform: OrthoDct, Y: np.ndarray) -> np.ndarray:
    return transform.forward(Y)


def dct_inverse(transform: OrthoDct, A: np.ndarray) -> np.ndarray:
    return transform.inverse(A)


@dataclass
class Dictionary:
    atoms: np.ndarray
    spectral_norm_bound: Optional[float] = field(default=None)

    def __post_init__(self):
        self.atoms = np.asarray(self.atoms, dtype=np.float64)
        if self.atoms.ndim != 2 or min(self.atoms.shape) < 1:
            raise DictionaryError(f"dictionary must be a non-empty m x p matrix, got {self.atoms.shape}")

    @property
    def m(self) -> int:
        return self.atoms.shape[0]

    @property
    def p(self) -> int:
        return self.atoms.shape[1]

    @property
    def norm_bound(self) -> float:
        if self.spectral_norm_bound is None:
            self.spectral_norm_bound = spectral_norm(self)
        return self.spectral_norm_bound


def dict_apply(dictionary: Dictionary, A: np.ndarray) -> np.ndarray:
    if A.shape[0] != dictionary.p:
        raise ShapeMismatchError(f"coefficients have {A.shape[0]} rows, dictionary has {dictionary.p} atoms",
                                 module="transforms")
    return dictionary.atoms @ A


def dict_adjoint(dictionary: Dictionary, Y: np.ndarray) -> np.ndarray:
    if Y.shape[0] != dictionary.m:
        raise ShapeMismatchError(f"patches have {Y.shape[0]} rows, dictionary atoms have {dictionary.m}",
                                 module="transforms")
    return dictionary.atoms.T @ Y


def spectral_norm(dictionary: Dictionary, iters: int = 500, tol: float = 1e-12) -> float:
    """Power iteration on DᵀD; the estimate is inflated by 1% to stay an upper bound."""
    atoms = dictionary.atoms
    if not np.any(atoms):
        raise DictionaryError("spectral norm of a zero dictionary is undefined")
    v = np.random.default_rng(0).standard_normal(atoms.shape[1])
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(iters):
        w = atoms.T @ (atoms @ v)
        norm = np.linalg.norm(w)
        if norm == 0:
            break
        v = w / norm
        if abs(norm - estimate) <= tol * norm:
            estimate = norm
            break
        estimate = norm
    return NORM_SAFETY * float(np.sqrt(estimate))


def load_dictionary(path) -> Dictionary:
    """Header of two little-endian int64 (m, p), then m*p float64 in column-major order."""
    raw = Path(path).read_bytes()
    if len(raw) < 16:
        raise DictionaryError(f"{path}: truncated dictionary header")
    m, p = struct.unpack("<qq", raw[:16])
    if m < 1 or p < 1:
        raise DictionaryError(f"{path}: invalid dictionary size {m} x {p}")
    payload = raw[16:]
    if len(payload) != 8 * m * p:
        raise DictionaryError(f"{path}: expected {m * p} coefficients, found {len(payload) // 8}")
    atoms = np.frombuffer(payload, dtype="<f8").reshape((m, p), order="F")
    logger.info(f"Loaded {m}x{p} dictionary from {path}")
    return Dictionary(atoms.copy())


def save_dictionary(dictionary: Dictionary, path):
    with open(path, "wb") as fh:
        fh.write(struct.pack("<qq", dictionary.m, dictionary.p))
        fh.write(np.asarray(dictionary.atoms, dtype="<f8").tobytes(order="F"))
