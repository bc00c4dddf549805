"""Seeded generators for synthetic erasure masks."""
import logging
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ConstraintError
from .ndsignal import Mask

logger = logging.getLogger(__name__)

GAP_RATE = 1e-4
GAP_MEAN_LENGTH = 1000


def _rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.default_rng(seed)


def _check_shape(shape: Sequence[int], ndim: int, kind: str) -> Tuple[int, ...]:
    shape = tuple(int(s) for s in shape)
    if len(shape) != ndim or any(s < 1 for s in shape):
        raise ConstraintError(f"{kind} masks need a positive {ndim}-D shape, got {shape}", module="mask_gen")
    return shape


def gaps(shape, rate: float = GAP_RATE, mean_length: float = GAP_MEAN_LENGTH, seed: Optional[int] = None) -> Mask:
    """Erasures placed by a Poisson process with geometric lengths (1-D)."""
    (length,) = _check_shape(shape, 1, "gaps")
    if not rate > 0 or not mean_length >= 1:
        raise ConstraintError(f"gaps need rate > 0 and mean length >= 1, got {rate}, {mean_length}",
                              module="mask_gen")
    rng = _rng(seed)
    count = rng.poisson(rate * length)
    starts = rng.integers(0, length, size=count)
    lengths = rng.geometric(1.0 / mean_length, size=count)
    missing = np.zeros(length, dtype=bool)
    for start, size in zip(starts, lengths):
        missing[start:start + size] = True
    logger.debug(f"gaps: {count} erasures, {int(missing.sum())} missing samples")
    return Mask.from_missing(missing)


def rect(shape, origin: Sequence[int], size: Sequence[int]) -> Mask:
    shape = tuple(int(s) for s in shape)
    if len(origin) != len(shape) or len(size) != len(shape):
        raise ConstraintError(f"rectangle {tuple(origin)}+{tuple(size)} does not match shape {shape}",
                              module="mask_gen")
    missing = np.zeros(shape, dtype=bool)
    missing[tuple(slice(int(o), int(o) + int(s)) for o, s in zip(origin, size))] = True
    return Mask.from_missing(missing)


def blocks(shape, count: int = 10, size: Sequence[int] = (8, 8), seed: Optional[int] = None) -> Mask:
    """``count`` rectangles of the given size at uniform random positions (2-D)."""
    shape = _check_shape(shape, 2, "blocks")
    rng = _rng(seed)
    missing = np.zeros(shape, dtype=bool)
    h, w = (min(int(s), e) for s, e in zip(size, shape))
    for _ in range(int(count)):
        i = rng.integers(0, shape[0] - h + 1)
        j = rng.integers(0, shape[1] - w + 1)
        missing[i:i + h, j:j + w] = True
    return Mask.from_missing(missing)


def scratches(shape, count: int = 5, max_width: int = 2, seed: Optional[int] = None) -> Mask:
    """Vertical lines running the full height, 1 to ``max_width`` columns wide (2-D)."""
    shape = _check_shape(shape, 2, "scratches")
    rng = _rng(seed)
    missing = np.zeros(shape, dtype=bool)
    for _ in range(int(count)):
        column = rng.integers(0, shape[1])
        width = rng.integers(1, max_width + 1)
        missing[:, column:column + width] = True
    return Mask.from_missing(missing)


def film(shape, count: int = 3, max_width: int = 2, drift: int = 1, seed: Optional[int] = None) -> Mask:
    """Vertical film scratches whose column wanders by up to ``drift`` per frame (3-D, time first)."""
    frames, height, width = _check_shape(shape, 3, "film")
    rng = _rng(seed)
    missing = np.zeros((frames, height, width), dtype=bool)
    for _ in range(int(count)):
        column = int(rng.integers(0, width))
        size = int(rng.integers(1, max_width + 1))
        for t in range(frames):
            missing[t, :, column:column + size] = True
            column = int(np.clip(column + rng.integers(-drift, drift + 1), 0, width - 1))
    return Mask.from_missing(missing)


GENERATORS: Dict[str, Callable[..., Mask]] = {
    "gaps": gaps,
    "rect": rect,
    "blocks": blocks,
    "scratches": scratches,
    "film": film,
}


def mask_gen(kind: str, shape, params: Optional[dict] = None, seed: Optional[int] = None) -> Mask:
    """Build a mask of the given kind; masks that erase every sample are rejected."""
    if kind not in GENERATORS:
        raise ConstraintError(f"unknown mask kind {kind!r}, choose from {sorted(GENERATORS)}", module="mask_gen")
    params = dict(params or {})
    if kind != "rect":
        params["seed"] = seed
    mask = GENERATORS[kind](shape, **params)
    if not mask.known.any():
        raise ConstraintError(f"{kind} parameters erase every sample", module="mask_gen")
    logger.info(f"Generated {kind} mask {mask.shape}: {int(mask.missing.sum())} of {mask.known.size} missing")
    return mask
