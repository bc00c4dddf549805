"""Media I/O for signals and masks: binary PGM/PPM, PCM16 mono WAV,
numbered frame directories and raw byte masks."""
import logging
import os
import re
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
from PIL import Image
from scipy.io import wavfile

from .exceptions import MaskError, MediaFormatError
from .ndsignal import Mask, Signal, quantize

logger = logging.getLogger(__name__)

IMAGE_PEAK = 255
AUDIO_PEAK = 32768
DEFAULT_SAMPLE_RATE = 11025
PNM_EXTENSIONS = (".pgm", ".ppm")
FRAME_PATTERN = re.compile(r"^(?P<prefix>.*?)(?P<number>\d+)\.(?P<ext>pgm|ppm)$", re.IGNORECASE)

PathLike = Union[str, os.PathLike]


def _read_pnm(path: PathLike) -> np.ndarray:
    """Decode a P5/P6 file with maxval 255 into an (H, W) or (H, W, 3) uint8 array."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic not in (b"P5", b"P6"):
        raise MediaFormatError(f"{path}: not a binary PGM/PPM file (magic {magic!r})")
    try:
        with Image.open(path) as im:
            if im.format != "PPM" or im.mode not in ("L", "RGB"):
                raise MediaFormatError(f"{path}: unsupported pixel format {im.mode}")
            # Pillow only picks the raw decoder for 8-bit data with maxval 255.
            if not im.tile or im.tile[0][0] != "raw":
                raise MediaFormatError(f"{path}: only maxval 255 is supported")
            im.load()
            return np.array(im, dtype=np.uint8)
    except MediaFormatError:
        raise
    except (OSError, SyntaxError, ValueError) as e:
        raise MediaFormatError(f"{path}: malformed or truncated image ({e})")


def _write_pnm(channels: Sequence[np.ndarray], path: PathLike):
    if len(channels) == 1:
        image = Image.fromarray(channels[0].astype(np.uint8), mode="L")
    elif len(channels) == 3:
        image = Image.fromarray(np.stack(channels, axis=-1).astype(np.uint8), mode="RGB")
    else:
        raise MediaFormatError(f"{path}: expected 1 or 3 channels, got {len(channels)}")
    image.save(path, format="PPM")


def load_image(path: PathLike) -> List[Signal]:
    """One 2-D signal per channel (one for PGM, three for PPM)."""
    pixels = _read_pnm(path)
    if pixels.ndim == 2:
        return [Signal(pixels, IMAGE_PEAK)]
    return [Signal(pixels[..., c], IMAGE_PEAK) for c in range(pixels.shape[-1])]


def save_image(signals: Union[Signal, Sequence[Signal]], path: PathLike):
    if isinstance(signals, Signal):
        signals = [signals]
    shapes = {s.shape for s in signals}
    if len(shapes) != 1 or len(next(iter(shapes))) != 2:
        raise MediaFormatError(f"{path}: channels must be 2-D signals of equal shape, got {sorted(shapes)}")
    _write_pnm([quantize(s, 0, IMAGE_PEAK) for s in signals], path)
    logger.debug(f"Wrote {len(signals)}-channel image to {path}")


def load_audio(path: PathLike) -> Signal:
    try:
        rate, data = wavfile.read(path)
    except ValueError as e:
        raise MediaFormatError(f"{path}: unsupported WAV file ({e})")
    if data.ndim != 1:
        raise MediaFormatError(f"{path}: expected mono audio, got {data.shape[1]} channels")
    if data.dtype != np.int16:
        raise MediaFormatError(f"{path}: expected PCM16 samples, got {data.dtype}")
    return Signal(data, AUDIO_PEAK, sample_rate=int(rate))


def save_audio(signal: Signal, path: PathLike):
    if len(signal.shape) != 1:
        raise MediaFormatError(f"{path}: audio signals must be 1-D, got shape {signal.shape}")
    data = quantize(signal, -AUDIO_PEAK, AUDIO_PEAK - 1).astype(np.int16)
    wavfile.write(path, signal.sample_rate or DEFAULT_SAMPLE_RATE, data)
    logger.debug(f"Wrote {data.size} audio samples to {path}")


def list_frames(directory: PathLike) -> List[Path]:
    """Frame files sorted by their numeric suffix; gaps are rejected."""
    numbered = {}
    for entry in Path(directory).iterdir():
        match = FRAME_PATTERN.match(entry.name)
        if not match or not entry.is_file():
            continue
        number = int(match.group("number"))
        if number in numbered:
            raise MediaFormatError(f"{directory}: frame number {number} appears twice")
        numbered[number] = entry
    if not numbered:
        raise MediaFormatError(f"{directory}: no numbered PGM/PPM frames found")
    numbers = sorted(numbered)
    expected = list(range(numbers[0], numbers[0] + len(numbers)))
    if numbers != expected:
        missing = sorted(set(expected) - set(numbers))
        raise MediaFormatError(f"{directory}: gap in frame numbering (missing {missing[:5]})")
    return [numbered[n] for n in numbers]


def load_frames(directory: PathLike) -> List[Signal]:
    """One 3-D signal (time first) per channel."""
    frames = [_read_pnm(path) for path in list_frames(directory)]
    if len({f.shape for f in frames}) != 1:
        raise MediaFormatError(f"{directory}: frames have inconsistent sizes")
    video = np.stack(frames, axis=0)
    if video.ndim == 3:
        return [Signal(video, IMAGE_PEAK)]
    return [Signal(video[..., c], IMAGE_PEAK) for c in range(video.shape[-1])]


def save_frames(signals: Union[Signal, Sequence[Signal]], directory: PathLike, prefix: str = "frame"):
    if isinstance(signals, Signal):
        signals = [signals]
    if len({s.shape for s in signals}) != 1 or len(signals[0].shape) != 3:
        raise MediaFormatError(f"{directory}: channels must be 3-D signals of equal shape")
    Path(directory).mkdir(parents=True, exist_ok=True)
    ext = "pgm" if len(signals) == 1 else "ppm"
    channels = [quantize(s, 0, IMAGE_PEAK) for s in signals]
    for t in range(signals[0].shape[0]):
        _write_pnm([c[t] for c in channels], Path(directory) / f"{prefix}{t:04d}.{ext}")
    logger.debug(f"Wrote {signals[0].shape[0]} frames to {directory}")


def _decode_mask_bytes(values: np.ndarray) -> Mask:
    return Mask(values == 0)


def load_mask(path: PathLike, shape: Sequence[int]) -> Mask:
    """Byte 0 marks a known sample, anything else a missing one."""
    shape = tuple(int(s) for s in shape)
    path = Path(path)
    try:
        if path.is_dir():
            values = np.stack([_read_pnm(p) for p in list_frames(path)], axis=0)
        elif path.suffix.lower() in PNM_EXTENSIONS:
            values = _read_pnm(path)
        else:
            values = np.fromfile(path, dtype=np.uint8)
            if values.size != int(np.prod(shape)):
                raise MaskError(f"{path}: raw mask has {values.size} bytes, expected {int(np.prod(shape))}")
            values = values.reshape(shape)
    except MediaFormatError as e:
        raise MaskError(str(e).split(": ", 1)[-1])
    # colour masks: a sample is missing if any channel marks it
    if values.ndim == len(shape) + 1:
        values = values.max(axis=-1)
    # one 2-D mask applies to every frame of a video
    if len(shape) == 3 and values.ndim == 2:
        values = np.broadcast_to(values, shape)
    if values.shape != shape:
        raise MaskError(f"{path}: mask shape {values.shape} does not match signal shape {shape}")
    return _decode_mask_bytes(values)


def save_mask(mask: Mask, path: PathLike):
    """PGM for 2-D masks, a frame directory for 3-D masks, raw bytes otherwise."""
    values = np.where(mask.known, 0, 255).astype(np.uint8)
    path = Path(path)
    if values.ndim == 2 and path.suffix.lower() == ".pgm":
        _write_pnm([values], path)
    elif values.ndim == 3 and not path.suffix:
        path.mkdir(parents=True, exist_ok=True)
        for t in range(values.shape[0]):
            _write_pnm([values[t]], path / f"mask{t:04d}.pgm")
    else:
        values.tofile(path)
    logger.debug(f"Wrote mask with {int(mask.missing.sum())} missing samples to {path}")
