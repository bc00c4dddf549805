"""Restoration quality metrics: RMSE, PSNR, MAD, BIAS and SSIM."""
import logging
import math
from dataclasses import astuple, dataclass
from typing import Optional

import numpy as np
from scipy.signal import convolve2d

from .exceptions import ShapeMismatchError

logger = logging.getLogger(__name__)

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _values(x) -> np.ndarray:
    return np.asarray(getattr(x, "samples", x), dtype=np.float64)


def _pair(x, x_hat):
    x, x_hat = _values(x), _values(x_hat)
    if x.shape != x_hat.shape:
        raise ShapeMismatchError(f"cannot compare shapes {x.shape} and {x_hat.shape}", module="metrics")
    return x, x_hat


def rmse(x, x_hat) -> float:
    x, x_hat = _pair(x, x_hat)
    return float(np.sqrt(np.mean((x - x_hat) ** 2)))


def psnr(rmse_value: float, peak: float) -> float:
    """Returns +inf for a perfect reconstruction."""
    if rmse_value == 0:
        return math.inf
    return 20.0 * math.log10(peak / rmse_value)


def mad(x, x_hat) -> float:
    x, x_hat = _pair(x, x_hat)
    return float(np.mean(np.abs(x - x_hat)))


def bias(x, x_hat) -> float:
    x, x_hat = _pair(x, x_hat)
    return float(np.sum(x - x_hat))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    r = np.arange(size) - (size - 1) / 2
    g = np.exp(-(r ** 2) / (2 * sigma ** 2))
    window = np.outer(g, g)
    return window / window.sum()


def _ssim_2d(x: np.ndarray, y: np.ndarray, peak: float, window: np.ndarray) -> float:
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2

    def blur(a):
        return convolve2d(a, window, mode="valid")

    mu_x, mu_y = blur(x), blur(y)
    var_x = blur(x * x) - mu_x ** 2
    var_y = blur(y * y) - mu_y ** 2
    cov = blur(x * y) - mu_x * mu_y
    ssim_map = ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / ((mu_x ** 2 + mu_y ** 2 + c1) * (var_x + var_y + c2))
    return float(ssim_map.mean())


def ssim(x, x_hat, peak: float) -> float:
    """Single-scale SSIM; 3-D inputs are averaged over the frames of the first axis."""
    x, x_hat = _pair(x, x_hat)
    if x.ndim not in (2, 3):
        raise ShapeMismatchError(f"SSIM needs 2-D images or 3-D frame stacks, got shape {x.shape}", module="metrics")
    if x.shape[-1] < SSIM_WINDOW or x.shape[-2] < SSIM_WINDOW:
        raise ShapeMismatchError(f"SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} samples, got {x.shape}",
                                 module="metrics")
    window = gaussian_window()
    if x.ndim == 2:
        return _ssim_2d(x, x_hat, peak, window)
    return float(np.mean([_ssim_2d(a, b, peak, window) for a, b in zip(x, x_hat)]))


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    psnr_db: float
    mad: float
    bias: float
    ssim: Optional[float] = None

    def as_row(self) -> tuple:
        return astuple(self)

    def as_trace_metrics(self) -> dict:
        metrics = {"rmse": self.rmse, "mad": self.mad, "bias": self.bias, "psnr": self.psnr_db}
        if self.ssim is not None:
            metrics["ssim"] = self.ssim
        return metrics


def supports_ssim(shape) -> bool:
    return len(shape) in (2, 3) and min(shape[-2:]) >= SSIM_WINDOW


def report(x, x_hat, peak: float, with_ssim: Optional[bool] = None) -> MetricReport:
    """All metrics for one pair; SSIM is left out for audio and tiny images unless forced."""
    x, x_hat = _pair(x, x_hat)
    if with_ssim is None:
        with_ssim = supports_ssim(x.shape)
    error = rmse(x, x_hat)
    return MetricReport(
        rmse=error,
        psnr_db=psnr(error, peak),
        mad=mad(x, x_hat),
        bias=bias(x, x_hat),
        ssim=ssim(x, x_hat, peak) if with_ssim else None,
    )


def format_number(value: float) -> str:
    """CSV form: integral values without a fraction, +inf as ``inf``."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def report_row(metric_report: MetricReport) -> str:
    """rmse,psnr,mad,bias[,ssim]; SSIM keeps its decimal point."""
    fields = [format_number(v) for v in metric_report.as_row()[:4]]
    if metric_report.ssim is not None:
        fields.append(repr(float(metric_report.ssim)))
    return ",".join(fields)
