"""Procedural test images."""

from __future__ import annotations

import numpy as np

__all__ = ["peaks", "shepp_logan"]

# (intensity, semi-axis x, semi-axis y, centre x, centre y, rotation in degrees)
_SHEPP_LOGAN = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.605, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)


def peaks(size: int) -> np.ndarray:
    """Smooth field on ``[-3, 3]^2`` rescaled to ``[0, 1]``."""
    t = np.linspace(-3.0, 3.0, size)
    X, Y = np.meshgrid(t, t)
    Z = (
        3 * (1 - X) ** 2 * np.exp(-(X**2) - (Y + 1) ** 2)
        - 10 * (X / 5 - X**3 - Y**5) * np.exp(-(X**2) - Y**2)
        - np.exp(-((X + 1) ** 2) - Y**2) / 3
    )
    return (Z - Z.min()) / (Z.max() - Z.min())


def shepp_logan(size: int) -> np.ndarray:
    """Modified Shepp-Logan head phantom with values in ``[0, 1]``.

    Row 0 is the top of the image (``y = +1``).
    """
    t = (np.arange(size) + 0.5) / size * 2.0 - 1.0
    X, Y = np.meshgrid(t, -t)
    img = np.zeros((size, size))
    for value, a, b, x0, y0, phi in _SHEPP_LOGAN:
        c, s = np.cos(np.deg2rad(phi)), np.sin(np.deg2rad(phi))
        xr = (X - x0) * c + (Y - y0) * s
        yr = -(X - x0) * s + (Y - y0) * c
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += value
    return np.clip(img, 0.0, 1.0)
