"""Image deblurring test problems with zero boundary conditions."""

from __future__ import annotations

import math

import numpy as np

from ..operators import SeparableBlur, StencilBlur
from .base import InverseProblem, add_noise
from .images import peaks

__all__ = ["MIN_SIZE", "gaussian_kernel", "motion_psf", "parse_psf", "make_blur_operator", "make_blur_problem"]

MIN_SIZE = 8


def gaussian_kernel(std: float) -> np.ndarray:
    """1-d Gaussian truncated at three standard deviations, summing to one."""
    if not (np.isfinite(std) and std > 0):
        raise ValueError(f"Gaussian PSF needs a positive std, got {std}")
    radius = max(1, math.ceil(3.0 * std))
    t = np.arange(-radius, radius + 1, dtype=float)
    k = np.exp(-0.5 * (t / std) ** 2)
    return k / k.sum()


def motion_psf(length: float, angle: float) -> np.ndarray:
    """Line of ``length`` pixels at ``angle`` degrees, rasterized and normalized."""
    if not (np.isfinite(length) and length >= 1):
        raise ValueError(f"motion PSF length must be >= 1, got {length}")
    if not np.isfinite(angle):
        raise ValueError(f"motion PSF angle must be finite, got {angle}")
    half = math.ceil(length / 2)
    size = 2 * half + 1
    t = np.linspace(-length / 2, length / 2, 8 * size)
    theta = np.deg2rad(angle)
    cols = np.rint(half + t * np.cos(theta)).astype(int)
    rows = np.rint(half - t * np.sin(theta)).astype(int)
    psf = np.zeros((size, size))
    np.add.at(psf, (rows, cols), 1.0)
    return psf / psf.sum()


def parse_psf(text: str) -> tuple[str, tuple[float, ...]]:
    """Parse ``gaussian:STD`` or ``motion:LENGTH,ANGLE``."""
    kind, _, params = text.partition(":")
    kind = kind.strip().lower()
    try:
        values = tuple(float(p) for p in params.split(",")) if params else ()
    except ValueError:
        raise ValueError(f"cannot parse PSF parameters in {text!r}") from None
    if kind == "gaussian":
        if len(values) != 1:
            raise ValueError("gaussian PSF takes one parameter: gaussian:STD")
        gaussian_kernel(values[0])
    elif kind == "motion":
        if len(values) != 2:
            raise ValueError("motion PSF takes two parameters: motion:LENGTH,ANGLE")
        motion_psf(*values)
    else:
        raise ValueError(f"unknown PSF kind {kind!r} (expected gaussian or motion)")
    return kind, values


def make_blur_operator(size: int, psf: str = "gaussian:2"):
    kind, values = parse_psf(psf)
    if kind == "gaussian":
        return SeparableBlur((size, size), gaussian_kernel(values[0]))
    return StencilBlur((size, size), motion_psf(*values))


def make_blur_problem(size=64, psf="gaussian:2", level=0.1, seed=0, eta=1.0, image=None) -> InverseProblem:
    """Blur a smooth test image (or ``image``) and add relative noise ``level``."""
    size = int(size)
    if size < MIN_SIZE:
        raise ValueError(f"blur problems need size >= {MIN_SIZE}, got {size}")
    op = make_blur_operator(size, psf)
    if image is None:
        image = peaks(size)
    image = np.asarray(image, dtype=float)
    if image.shape != (size, size):
        raise ValueError(f"image has shape {image.shape}, expected {(size, size)}")
    x_exact = image.ravel()
    b_exact = op._matvec(x_exact)
    b, epsilon = add_noise(b_exact, level, seed)
    spec = {"generator": "blur", "size": size, "psf": psf, "level": level, "seed": seed, "eta": eta}
    return InverseProblem(
        op=op, b=b, epsilon=epsilon, eta=eta, b_exact=b_exact, x_exact=x_exact, seed=seed, spec=spec
    )
