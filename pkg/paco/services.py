import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from . import media
from .exceptions import EXIT_IO, ConstraintError, MediaFormatError, PacoError
from .inpaint import InpaintConfig, restore
from .masks import mask_gen
from .metrics import MetricReport, report, report_row, ssim, supports_ssim
from .ndsignal import Mask, Signal
from .solver import SolverTrace

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("inpaint-image", "inpaint-audio", "inpaint-video", "metrics", "mask-gen", "benchmark-corpus")
CLIP_AUTO = "auto"


@dataclass
class RunConfig:
    subcommand: str
    input: Optional[Path] = None
    mask: Optional[Path] = None
    output: Optional[Path] = None
    patch_shape: Optional[Tuple[int, ...]] = None
    strides: Optional[Tuple[int, ...]] = None
    kappa: Optional[float] = None
    shrink: Optional[float] = None
    max_iter: Optional[int] = None
    tol: Optional[float] = None
    clip: Optional[object] = None
    partial: Optional[bool] = None
    trace: Optional[Path] = None
    scaled_trace: bool = False
    reference: Optional[Path] = None
    seed: Optional[int] = None
    overlap: float = 1 / 32
    workers: Optional[int] = None
    kind: Optional[str] = None
    shape: Optional[Tuple[int, ...]] = None
    params: Dict[str, object] = field(default_factory=dict)


def parse_ints(value: str, name: str) -> Tuple[int, ...]:
    try:
        values = tuple(int(v) for v in str(value).split(","))
    except ValueError:
        raise ConstraintError(f"{name} must be comma-separated integers, got {value!r}", module="cli")
    if any(v < 1 for v in values):
        raise ConstraintError(f"{name} entries must be positive, got {value!r}", module="cli")
    return values


def parse_clip(value: Optional[str]):
    """``None``, ``auto`` (the media range) or ``lo,hi``."""
    if value is None or value == CLIP_AUTO:
        return value
    try:
        lo, hi = (float(v) for v in value.split(","))
    except ValueError:
        raise ConstraintError(f"--clip expects lo,hi, got {value!r}", module="cli")
    return lo, hi


def parse_param(value: str) -> Tuple[str, object]:
    """``key=value`` where value is a number or a comma-separated list of numbers."""
    key, sep, raw = value.partition("=")
    if not sep or not key:
        raise ConstraintError(f"mask parameters are key=value, got {value!r}", module="cli")
    try:
        numbers = [float(v) if any(c in v for c in ".eE") else int(v) for v in raw.split(",")]
    except ValueError:
        raise ConstraintError(f"mask parameter {key} must be numeric, got {raw!r}", module="cli")
    return key, numbers[0] if len(numbers) == 1 else tuple(numbers)


def _channels_of(signals):
    return [signals] if isinstance(signals, Signal) else list(signals)


class RestorationService:
    """Binds media I/O, configuration and the inpainting solver for one command."""

    def __init__(self, config: RunConfig):
        self.config = config

    # configuration

    def _inpaint_config(self, preset: InpaintConfig, peak_range: Tuple[float, float]) -> InpaintConfig:
        c = self.config
        overrides = {
            "kappa": c.kappa if c.kappa is not None else settings.PACO_KAPPA,
            "shrink": c.shrink if c.shrink is not None else settings.PACO_SHRINK,
            "tol": c.tol if c.tol is not None else settings.PACO_TOL,
            "partial_updates": c.partial if c.partial is not None else settings.PACO_PARTIAL_UPDATES,
            "workers": c.workers if c.workers is not None else settings.PACO_WORKERS,
        }
        if c.patch_shape is not None:
            overrides["patch_shape"] = tuple(c.patch_shape)
        if c.strides is not None:
            overrides["strides"] = tuple(c.strides)
        if c.max_iter is not None:
            overrides["max_iter"] = c.max_iter
        if c.clip == CLIP_AUTO:
            overrides["clip"] = peak_range
        elif c.clip is not None:
            overrides["clip"] = tuple(c.clip)
        return replace(preset, **overrides)

    def image_config(self) -> InpaintConfig:
        preset = InpaintConfig.image(max_iter=settings.PACO_IMAGE_MAX_ITER)
        return self._inpaint_config(preset, (0.0, float(media.IMAGE_PEAK)))

    def audio_config(self) -> InpaintConfig:
        preset = InpaintConfig.audio(overlap=self.config.overlap, max_iter=settings.PACO_AUDIO_MAX_ITER)
        if self.config.patch_shape is not None and self.config.strides is None:
            (window,) = self.config.patch_shape
            preset = InpaintConfig.audio(window, self.config.overlap, max_iter=settings.PACO_AUDIO_MAX_ITER)
        return self._inpaint_config(preset, (-float(media.AUDIO_PEAK), float(media.AUDIO_PEAK - 1)))

    def video_config(self) -> InpaintConfig:
        preset = InpaintConfig.video(max_iter=settings.PACO_VIDEO_MAX_ITER)
        return self._inpaint_config(preset, (0.0, float(media.IMAGE_PEAK)))

    # restoration

    def _require(self, *names):
        for name in names:
            if getattr(self.config, name) is None:
                raise ConstraintError(f"{self.config.subcommand} needs --{name}", module="cli")

    def restore_channels(self, signals: Sequence[Signal], mask: Mask, config: InpaintConfig,
                         references: Optional[Sequence[Signal]] = None) -> Tuple[List[Signal], SolverTrace]:
        if references is not None and len(references) != len(signals):
            raise MediaFormatError(f"reference has {len(references)} channels, input has {len(signals)}")
        restored, traces = [], []
        for c, signal in enumerate(signals):
            monitor = None
            if references is not None:
                reference = references[c]
                with_ssim = supports_ssim(signal.shape)

                def monitor(x_hat, reference=reference, with_ssim=with_ssim):
                    return report(reference, x_hat, reference.peak, with_ssim).as_trace_metrics()

            if len(signals) > 1:
                logger.info(f"Channel {c + 1}/{len(signals)}")
            result, trace = restore(signal, mask, config, monitor=monitor)
            restored.append(result)
            traces.append(trace)
        return restored, SolverTrace.merge(traces)

    def _write_trace(self, trace: SolverTrace):
        if self.config.trace is not None:
            trace.write_csv(self.config.trace, scaled=self.config.scaled_trace)
            logger.info(f"Wrote {len(trace)} trace rows to {self.config.trace}")

    def inpaint_image(self) -> SolverTrace:
        self._require("input", "mask", "output")
        signals = media.load_image(self.config.input)
        mask = media.load_mask(self.config.mask, signals[0].shape)
        references = media.load_image(self.config.reference) if self.config.reference else None
        restored, trace = self.restore_channels(signals, mask, self.image_config(), references)
        media.save_image(restored, self.config.output)
        self._write_trace(trace)
        return trace

    def inpaint_audio(self) -> SolverTrace:
        self._require("input", "mask", "output")
        signal = media.load_audio(self.config.input)
        mask = media.load_mask(self.config.mask, signal.shape)
        references = [media.load_audio(self.config.reference)] if self.config.reference else None
        restored, trace = self.restore_channels([signal], mask, self.audio_config(), references)
        media.save_audio(restored[0], self.config.output)
        self._write_trace(trace)
        return trace

    def inpaint_video(self) -> SolverTrace:
        self._require("input", "mask", "output")
        signals = media.load_frames(self.config.input)
        mask = media.load_mask(self.config.mask, signals[0].shape)
        references = media.load_frames(self.config.reference) if self.config.reference else None
        restored, trace = self.restore_channels(signals, mask, self.video_config(), references)
        media.save_frames(restored, self.config.output)
        self._write_trace(trace)
        return trace

    # metrics and masks

    def metrics(self) -> str:
        self._require("reference", "input")
        row = report_row(media_report(load_media(self.config.reference), load_media(self.config.input)))
        logger.debug(f"metrics {self.config.reference} vs {self.config.input}: {row}")
        return row

    def mask_gen(self) -> Mask:
        self._require("kind", "shape", "output")
        mask = mask_gen(self.config.kind, self.config.shape, self.config.params, self.config.seed)
        media.save_mask(mask, self.config.output)
        return mask

    def benchmark_corpus(self) -> List[str]:
        """Inpaint every image of a directory with one mask and summarize RMSE and SSIM."""
        self._require("input", "mask")
        paths = sorted(p for p in Path(self.config.input).iterdir() if p.suffix.lower() in media.PNM_EXTENSIONS)
        if not paths:
            raise MediaFormatError(f"{self.config.input}: no PGM/PPM images found")
        if self.config.output is not None:
            Path(self.config.output).mkdir(parents=True, exist_ok=True)
        config = self.image_config()
        lines, scores = ["image,rmse,psnr,mad,bias,ssim"], []
        for path in paths:
            originals = media.load_image(path)
            mask = media.load_mask(self.config.mask, originals[0].shape)
            restored, _ = self.restore_channels(originals, mask, config)
            metric_report = media_report(originals, restored)
            scores.append((metric_report.rmse, metric_report.ssim))
            lines.append(f"{path.name},{report_row(metric_report)}")
            if self.config.output is not None:
                media.save_image(restored, Path(self.config.output) / path.name)
            logger.info(f"{path.name}: rmse {metric_report.rmse:.4f} ssim {metric_report.ssim}")
        for q in (25, 50, 75):
            rmse_q = float(np.percentile([s[0] for s in scores], q))
            ssim_values = [s[1] for s in scores if s[1] is not None]
            ssim_q = float(np.percentile(ssim_values, q)) if ssim_values else float("nan")
            lines.append(f"p{q},{rmse_q!r},,,,{ssim_q!r}")
        return lines

    def dispatch(self):
        handlers = {
            "inpaint-image": self.inpaint_image,
            "inpaint-audio": self.inpaint_audio,
            "inpaint-video": self.inpaint_video,
            "metrics": self.metrics,
            "mask-gen": self.mask_gen,
            "benchmark-corpus": self.benchmark_corpus,
        }
        if self.config.subcommand not in handlers:
            raise ConstraintError(f"unknown subcommand {self.config.subcommand!r}", module="cli")
        return handlers[self.config.subcommand]()


def load_media(path) -> List[Signal]:
    path = Path(path)
    if path.is_dir():
        return media.load_frames(path)
    if path.suffix.lower() == ".wav":
        return [media.load_audio(path)]
    return media.load_image(path)


def media_report(references: Sequence[Signal], restored: Sequence[Signal]) -> MetricReport:
    """Metrics over all channels; SSIM is the mean of the per-channel values."""
    references, restored = _channels_of(references), _channels_of(restored)
    if len(references) != len(restored):
        raise MediaFormatError(f"channel count differs: {len(references)} vs {len(restored)}")
    x = np.stack([s.samples for s in references])
    x_hat = np.stack([s.samples for s in restored])
    peak = references[0].peak
    base = report(x, x_hat, peak, with_ssim=False)
    if supports_ssim(references[0].shape):
        base = replace(base, ssim=float(np.mean([ssim(r, o, peak) for r, o in zip(references, restored)])))
    return base


def exit_code_for(error: Exception) -> int:
    if isinstance(error, PacoError):
        return error.exit_code
    return EXIT_IO


def run(config: RunConfig) -> int:
    """Run one subcommand; errors are logged as a single line and turned into an exit code."""
    try:
        RestorationService(config).dispatch()
    except (PacoError, OSError) as e:
        logger.error(str(e))
        return exit_code_for(e)
    return 0
