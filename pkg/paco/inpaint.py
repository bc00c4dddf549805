"""PACO-DCT inpainting.

Minimizes the weighted ℓ1 norm of the DCT coefficients of every patch
under the consensus constraint and agreement with the known samples. The
dual variable lives in coefficient space and the consensus projection is
pulled through the orthonormal DCT: Z = D R(x̂).

Cost, residuals and the λ schedule are measured over the patches that
contain missing samples. Complete patches are fixed by the known samples and
only add a constant to the objective, so full and partial updates follow the
same λ sequence.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .exceptions import WeightEstimationError
from .ndsignal import Mask, Signal
from .patch_grid import (PatchGrid, active_patches, build_grid, check_clip_range, complete_patches, extract,
                         stitch_values)
from .solver import (PenaltySchedule, SolverTrace, StopCriteria, TraceRecord, _check_finite, _finish, check_stop,
                     penalty_update)
from .transforms import OrthoDct

logger = logging.getLogger(__name__)

EPSILON_FACTOR = 1e-3
AUDIO_WINDOW = 4096

SignalMonitor = Callable[[np.ndarray], Optional[Dict[str, float]]]


@dataclass(frozen=True)
class LaplacianWeights:
    w: np.ndarray
    epsilon: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise WeightEstimationError("weights must be a finite, nonnegative vector")
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class InpaintConfig:
    patch_shape: Tuple[int, ...]
    strides: Tuple[int, ...]
    kappa: float = 10.0
    shrink: float = 0.5
    max_iter: int = 256
    tol: float = 1e-8
    clip: Optional[Tuple[float, float]] = None
    partial_updates: bool = True
    workers: int = 1

    @classmethod
    def image(cls, **overrides) -> "InpaintConfig":
        return cls(**{"patch_shape": (16, 16), "strides": (2, 2), **overrides})

    @classmethod
    def audio(cls, window: int = AUDIO_WINDOW, overlap: float = 1 / 32, **overrides) -> "InpaintConfig":
        stride = window - int(round(window * overlap))
        return cls(**{"patch_shape": (window,), "strides": (max(stride, 1),), "max_iter": 1024, **overrides})

    @classmethod
    def video(cls, **overrides) -> "InpaintConfig":
        return cls(**{"patch_shape": (4, 8, 8), "strides": (1, 2, 2), "max_iter": 64, **overrides})

    @property
    def stop(self) -> StopCriteria:
        return StopCriteria(self.max_iter, self.tol)


def _weight_vector(weights) -> np.ndarray:
    return weights.w if isinstance(weights, LaplacianWeights) else np.asarray(weights, dtype=np.float64)


def estimate_weights(grid: PatchGrid, transform: OrthoDct, signal: Signal, mask: Mask) -> LaplacianWeights:
    """w_i = 1 / (mean |a_ij| over complete patches + ε), ε = 1e-3·α/√m."""
    complete = complete_patches(grid, mask)
    if complete.size == 0:
        raise WeightEstimationError("every patch contains missing samples; weights cannot be estimated")
    coefficients = transform.forward(extract(grid, signal, complete))
    epsilon = EPSILON_FACTOR * signal.peak / np.sqrt(grid.m)
    mean_abs = np.mean(np.abs(coefficients), axis=1)
    logger.debug(f"Estimated weights from {complete.size} complete patches (epsilon {epsilon:.3g})")
    return LaplacianWeights(1.0 / (mean_abs + epsilon), epsilon)


def soft_threshold(A: np.ndarray, weights, lam: float) -> np.ndarray:
    """Row i is shrunk towards zero by λ·w_i."""
    t = lam * _weight_vector(weights)[:, None]
    return np.minimum(A + t, np.maximum(0.0, A - t))


def weighted_l1(A: np.ndarray, weights) -> float:
    return float(np.sum(_weight_vector(weights)[:, None] * np.abs(A)))


def dct_cost(signal, grid: PatchGrid, transform: OrthoDct, weights) -> float:
    """Σ w_i|a_ij| over the DCT coefficients of all the patches of a signal."""
    return weighted_l1(transform.forward(extract(grid, signal)), weights)


def initial_fill(signal: Signal, mask: Mask) -> np.ndarray:
    """Known samples as given, missing ones set to the mean of the known ones."""
    values = signal.samples.copy()
    if mask.missing.any():
        values[mask.missing] = signal.samples[mask.known].mean() if mask.known.any() else 0.0
    return values


@dataclass
class PacoDctInpainter:
    signal: Signal
    mask: Mask
    config: InpaintConfig
    weights: Optional[LaplacianWeights] = None
    monitor: Optional[SignalMonitor] = None
    grid: PatchGrid = field(init=False)
    transform: OrthoDct = field(init=False)

    def __post_init__(self):
        self.mask.check_shape(self.signal.shape)
        self.grid = build_grid(self.signal.shape, self.config.patch_shape, self.config.strides)
        self.transform = OrthoDct(self.config.patch_shape, workers=self.config.workers)
        if self.config.clip is not None:
            check_clip_range(*self.config.clip, mask=self.mask, known_values=self.signal)
        self.active = active_patches(self.grid, self.mask)
        if self.weights is None:
            self.weights = estimate_weights(self.grid, self.transform, self.signal, self.mask)

    def _blocks(self, partial: bool):
        if partial:
            return [np.arange(self.active.size)]
        inactive = np.setdiff1d(np.arange(self.grid.n), self.active, assume_unique=True)
        return [b for b in (self.active, inactive) if b.size]

    def _apply(self, fn, M: np.ndarray, blocks) -> np.ndarray:
        # the active block is transformed on its own so both modes round identically
        if len(blocks) == 1:
            return fn(M)
        out = np.empty_like(M)
        for block in blocks:
            out[:, block] = fn(M[:, block])
        return out

    def run(self, partial: bool) -> Tuple[Signal, SolverTrace]:
        x = self.signal.samples
        known = self.mask.known
        missing = self.mask.missing
        trace = SolverTrace(count=self.active.size, m=self.grid.m, peak=self.signal.peak)
        if partial and self.active.size == 0:
            logger.info("No missing samples, nothing to inpaint")
            trace.converged = True
            return self.signal, trace

        columns = self.active if partial else None
        selected = slice(None) if partial else self.active
        blocks = self._blocks(partial)
        w = self.weights.w
        stop = self.config.stop
        schedule = PenaltySchedule(self.config.kappa, self.config.shrink)
        lam = schedule.start(self.signal.peak)

        x_hat = initial_fill(self.signal, self.mask)
        Z = self._apply(self.transform.forward, extract(self.grid, x_hat, columns), blocks)
        A = Z.copy()
        U = np.zeros_like(Z)
        previous_cost = weighted_l1(A[:, selected], w)
        logger.info(f"PACO-DCT start: {self.grid.n} patches ({self.active.size} active), m={self.grid.m}, "
                    f"lambda {lam:.6g}, {'partial' if partial else 'full'} updates")

        t = 0
        while True:
            t += 1
            A_next = soft_threshold(Z - U, w, lam)
            Y_hat = self._apply(self.transform.inverse, A_next + U, blocks)
            x_hat = stitch_values(self.grid, Y_hat, columns)
            x_hat[known] = x[known]
            if self.config.clip is not None:
                x_hat[missing] = np.clip(x_hat[missing], *self.config.clip)
            Z = self._apply(self.transform.forward, extract(self.grid, x_hat, columns), blocks)
            U = U + A_next - Z
            _check_finite(t, A_next, Z, U)

            current = A_next[:, selected]
            current_cost = weighted_l1(current, w)
            record = TraceRecord(
                iter=t,
                lam=lam,
                cost=current_cost,
                constraint_violation=float(np.linalg.norm(current - Z[:, selected])),
                cost_change=current_cost - previous_cost,
                arg_change=float(np.linalg.norm(current - A[:, selected])),
            )
            A = A_next
            if self.monitor is not None:
                record.metrics = self.monitor(x_hat) or {}
            trace.append(record)
            logger.debug(f"PACO-DCT iter {t}: lambda {lam:.6g} cost {current_cost:.6g} "
                         f"violation {record.constraint_violation:.3e} change {record.arg_change:.3e}")
            if check_stop(trace, stop):
                break
            previous_cost = current_cost
            lam = penalty_update(schedule, current_cost)

        _finish(trace, stop, "PACO-DCT")
        # final iterates restricted to the active patches, the columns the trace is computed over
        self.A, self.Z, self.U = A[:, selected], Z[:, selected], U[:, selected]
        return self.signal.with_samples(x_hat), trace


def inpaint(signal: Signal, mask: Mask, config: InpaintConfig, weights=None,
            monitor: Optional[SignalMonitor] = None) -> Tuple[Signal, SolverTrace]:
    return PacoDctInpainter(signal, mask, config, weights, monitor).run(partial=False)


def inpaint_partial(signal: Signal, mask: Mask, config: InpaintConfig, weights=None,
                    monitor: Optional[SignalMonitor] = None) -> Tuple[Signal, SolverTrace]:
    return PacoDctInpainter(signal, mask, config, weights, monitor).run(partial=True)


def restore(signal: Signal, mask: Mask, config: InpaintConfig, weights=None,
            monitor: Optional[SignalMonitor] = None) -> Tuple[Signal, SolverTrace]:
    """Dispatch on ``config.partial_updates``."""
    runner = inpaint_partial if config.partial_updates else inpaint
    return runner(signal, mask, config, weights, monitor)


def one_shot(signal: Signal, mask: Mask, config: InpaintConfig, weights=None) -> Signal:
    """A single thresholding step followed by plain patch averaging (no consensus)."""
    restored, _ = inpaint(signal, mask, replace(config, max_iter=1), weights)
    return restored
