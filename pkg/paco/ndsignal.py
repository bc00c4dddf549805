"""N-dimensional signals and sample masks.

Samples are held as float64 arrays in row-major order regardless of the
media bit depth; quantization only happens when a signal is written out.
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .exceptions import ConstraintError, ShapeMismatchError


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Signal:
    samples: np.ndarray
    peak: float
    sample_rate: Optional[int] = None

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64, copy=True)
        if samples.ndim == 0 or samples.size == 0:
            raise ShapeMismatchError("signal must have at least one sample", module="ndsignal")
        if not self.peak > 0:
            raise ConstraintError(f"peak must be positive, got {self.peak}", module="ndsignal")
        object.__setattr__(self, "samples", _frozen(samples))

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.samples.shape

    @property
    def size(self) -> int:
        return self.samples.size

    def with_samples(self, samples) -> "Signal":
        return Signal(np.reshape(samples, self.shape), self.peak, self.sample_rate)


@dataclass(frozen=True)
class Mask:
    """known[i] is True when sample i was observed (the set O)."""
    known: np.ndarray = field()

    def __post_init__(self):
        known = np.array(self.known, dtype=bool, copy=True)
        object.__setattr__(self, "known", _frozen(known))

    @classmethod
    def from_missing(cls, missing) -> "Mask":
        return cls(~np.asarray(missing, dtype=bool))

    @classmethod
    def all_known(cls, shape) -> "Mask":
        return cls(np.ones(shape, dtype=bool))

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.known.shape

    @property
    def missing(self) -> np.ndarray:
        return ~self.known

    @property
    def observed_indices(self) -> np.ndarray:
        return np.flatnonzero(self.known)

    @property
    def missing_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.known)

    def check_shape(self, shape: Sequence[int]):
        if tuple(shape) != self.shape:
            raise ShapeMismatchError(
                f"mask shape {self.shape} does not match signal shape {tuple(shape)}", module="ndsignal"
            )


def vectorize(signal: Signal) -> np.ndarray:
    return signal.samples.ravel().copy()


def devectorize(values, shape, peak: float = 1.0, sample_rate: Optional[int] = None) -> Signal:
    values = np.asarray(values, dtype=np.float64)
    expected = int(np.prod(shape))
    if values.ndim != 1 or values.size != expected:
        raise ShapeMismatchError(
            f"cannot reshape {values.size} samples into shape {tuple(shape)}", module="ndsignal"
        )
    return Signal(values.reshape(tuple(shape)), peak, sample_rate)


def round_half_away(values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return np.where(values >= 0, np.floor(values + 0.5), np.ceil(values - 0.5))


def quantize(signal: Signal, lo: float, hi: float) -> np.ndarray:
    """Integer samples clamped to [lo, hi], ready to be written."""
    return np.clip(round_half_away(signal.samples), lo, hi)
