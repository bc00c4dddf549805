"""Patch extraction, average stitching and the consensus projections.

A grid stores, for every patch column, the linear signal index of each of
its entries. Extraction is a gather through that table and stitching is a
scatter-add followed by a division by the per-sample multiplicity, so the
consensus projection R(S(Y)) never needs the matrix R.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .exceptions import ConstraintError, GridError, ShapeMismatchError
from .ndsignal import Mask, Signal

logger = logging.getLogger(__name__)


def _axis_origins(extent: int, patch: int, stride: int) -> list:
    last = extent - patch
    origins = list(range(0, last + 1, stride))
    if origins[-1] != last:
        origins.append(last)
    return origins


@dataclass(frozen=True)
class PatchGrid:
    signal_shape: Tuple[int, ...]
    patch_shape: Tuple[int, ...]
    strides: Tuple[int, ...]
    origins: np.ndarray
    index: np.ndarray = field(repr=False)
    multiplicity: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.index.shape[0]

    @property
    def n(self) -> int:
        return self.index.shape[1]

    @property
    def size(self) -> int:
        return int(np.prod(self.signal_shape))

    @property
    def overlap_free(self) -> bool:
        return bool(np.all(self.multiplicity == 1))

    @classmethod
    def from_origins(cls, signal_shape, patch_shape, origins, strides=None) -> "PatchGrid":
        """Grid over an arbitrary list of origins; every sample must stay covered."""
        signal_shape = tuple(int(s) for s in signal_shape)
        patch_shape = tuple(int(p) for p in patch_shape)
        origins = np.asarray(origins, dtype=np.int64).reshape(-1, len(signal_shape))
        if len(patch_shape) != len(signal_shape):
            raise GridError(f"patch has {len(patch_shape)} axes, signal has {len(signal_shape)}")
        if np.any(origins < 0) or np.any(origins + np.array(patch_shape) > np.array(signal_shape)):
            raise GridError("every patch must lie fully inside the signal")
        order = np.lexsort(origins.T[::-1])
        origins = origins[order]
        if len(origins) > 1 and np.any(np.all(np.diff(origins, axis=0) == 0, axis=1)):
            raise GridError("patch origins must be unique")

        size = int(np.prod(signal_shape))
        dtype = np.int32 if size < 2 ** 31 else np.int64
        offsets = np.ravel_multi_index(np.indices(patch_shape).reshape(len(patch_shape), -1), signal_shape)
        starts = np.ravel_multi_index(origins.T, signal_shape)
        index = (offsets[:, None] + starts[None, :]).astype(dtype)
        multiplicity = np.bincount(index.ravel(), minlength=size)
        if np.any(multiplicity == 0):
            raise GridError(f"{int(np.sum(multiplicity == 0))} samples are not covered by any patch")
        index.setflags(write=False)
        multiplicity.setflags(write=False)
        origins.setflags(write=False)
        return cls(signal_shape, patch_shape, tuple(strides or ()), origins, index, multiplicity)

    def check_signal(self, shape: Sequence[int]):
        if tuple(shape) != self.signal_shape:
            raise ShapeMismatchError(
                f"signal shape {tuple(shape)} does not match grid shape {self.signal_shape}", module="patch_grid"
            )

    def check_patches(self, Y: np.ndarray, columns: Optional[np.ndarray] = None):
        n = self.n if columns is None else len(columns)
        if Y.shape != (self.m, n):
            raise ShapeMismatchError(f"patch matrix is {Y.shape}, grid expects {(self.m, n)}", module="patch_grid")


def build_grid(signal_shape, patch_shape, strides) -> PatchGrid:
    signal_shape = tuple(int(s) for s in signal_shape)
    patch_shape = tuple(int(p) for p in patch_shape)
    strides = tuple(int(s) for s in strides)
    if not len(signal_shape) == len(patch_shape) == len(strides):
        raise GridError(f"axis count mismatch: signal {signal_shape}, patch {patch_shape}, strides {strides}")
    if any(p < 1 for p in patch_shape) or any(s < 1 for s in strides):
        raise GridError(f"patch extents and strides must be positive, got {patch_shape} / {strides}")
    if any(p > e for p, e in zip(patch_shape, signal_shape)):
        raise GridError(f"patch {patch_shape} larger than signal {signal_shape}")
    per_axis = [_axis_origins(e, p, s) for e, p, s in zip(signal_shape, patch_shape, strides)]
    origins = np.array(list(itertools.product(*per_axis)), dtype=np.int64)
    grid = PatchGrid.from_origins(signal_shape, patch_shape, origins, strides)
    logger.debug(f"Built grid: signal {signal_shape}, patch {patch_shape}, strides {strides}, {grid.n} patches")
    return grid


def _signal_values(signal) -> np.ndarray:
    return signal.samples if isinstance(signal, Signal) else np.asarray(signal, dtype=np.float64)


def extract(grid: PatchGrid, signal, columns: Optional[np.ndarray] = None) -> np.ndarray:
    """m x n patch matrix; column j is the patch at origin j in row-major order."""
    values = _signal_values(signal)
    grid.check_signal(values.shape)
    index = grid.index if columns is None else grid.index[:, columns]
    return values.ravel()[index]


def stitch_values(grid: PatchGrid, Y: np.ndarray, columns: Optional[np.ndarray] = None) -> np.ndarray:
    """Average stitching as an array of signal shape.

    With ``columns`` only those patches are accumulated, which is exact on
    samples covered by no other patch.
    """
    Y = np.asarray(Y, dtype=np.float64)
    grid.check_patches(Y, columns)
    index = grid.index if columns is None else grid.index[:, columns]
    if grid.overlap_free and columns is None:
        out = np.empty(grid.size)
        out[index.ravel()] = Y.ravel()
    else:
        # bincount sums in index order
        out = np.bincount(index.ravel(), weights=Y.ravel(), minlength=grid.size) / grid.multiplicity
    return out.reshape(grid.signal_shape)


def stitch(grid: PatchGrid, Y: np.ndarray, peak: float = 1.0) -> Signal:
    return Signal(stitch_values(grid, Y), peak)


def project_consensus(grid: PatchGrid, Y: np.ndarray) -> np.ndarray:
    return extract(grid, stitch_values(grid, Y))


def overwrite_known(values: np.ndarray, mask: Mask, known_values) -> np.ndarray:
    known_values = _signal_values(known_values)
    mask.check_shape(values.shape)
    if known_values.shape != values.shape:
        raise ShapeMismatchError(
            f"known signal shape {known_values.shape} does not match {values.shape}", module="patch_grid"
        )
    values = values.copy()
    values[mask.known] = known_values[mask.known]
    return values


def check_clip_range(lo: float, hi: float, mask: Optional[Mask] = None, known_values=None):
    if not lo < hi:
        raise ConstraintError(f"clip range requires lo < hi, got [{lo}, {hi}]", module="patch_grid")
    if mask is not None and known_values is not None:
        known = _signal_values(known_values)[mask.known]
        if known.size and (known.min() < lo or known.max() > hi):
            raise ConstraintError(f"known samples fall outside the clip range [{lo}, {hi}]", module="patch_grid")


def project_consensus_omega(grid: PatchGrid, Y: np.ndarray, mask: Mask, known_values) -> np.ndarray:
    """Projection onto C ∩ Ω, Ω being the signals that agree with the known samples."""
    return extract(grid, overwrite_known(stitch_values(grid, Y), mask, known_values))


def clip_project(grid: PatchGrid, Y: np.ndarray, lo: float, hi: float,
                 mask: Optional[Mask] = None, known_values=None) -> np.ndarray:
    """Consensus projection with the stitched samples clamped to [lo, hi].

    When a mask is given the known samples are written back first; they must
    already lie in range.
    """
    check_clip_range(lo, hi, mask, known_values)
    values = stitch_values(grid, Y)
    if mask is not None:
        values = overwrite_known(values, mask, known_values)
    return extract(grid, np.clip(values, lo, hi))


def active_patches(grid: PatchGrid, mask: Mask) -> np.ndarray:
    """Indices of the patches that touch at least one missing sample."""
    mask.check_shape(grid.signal_shape)
    missing = mask.missing.ravel()
    return np.flatnonzero(missing[grid.index].any(axis=0))


def complete_patches(grid: PatchGrid, mask: Mask) -> np.ndarray:
    mask.check_shape(grid.signal_shape)
    missing = mask.missing.ravel()
    return np.flatnonzero(~missing[grid.index].any(axis=0))
