"""Parallel-beam tomography with an exact line-length (Siddon) projector."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..operators import RayProjector
from .base import InverseProblem, add_noise
from .images import shepp_logan

__all__ = ["MIN_SIZE", "ray_intersections", "parallel_beam_matrix", "make_tomo_problem"]

MIN_SIZE = 16
_PARALLEL = 1e-12


def ray_intersections(size, pixel_width, theta, offset):
    """Pixels crossed by one ray and the length of each crossing.

    The image covers ``[-W/2, W/2]^2`` with ``W = size * pixel_width``; row 0
    is the top. The ray is ``{offset * n + t * d}`` with normal
    ``n = (cos theta, sin theta)`` and direction ``d = (-sin theta, cos theta)``.
    Returns flat C-order pixel indices and lengths.
    """
    half = 0.5 * size * pixel_width
    c, s = np.cos(theta), np.sin(theta)
    px, py = offset * c, offset * s
    dx, dy = -s, c
    planes = np.linspace(-half, half, size + 1)

    t_lo, t_hi = -np.inf, np.inf
    ts = []
    for p, d in ((px, dx), (py, dy)):
        if abs(d) > _PARALLEL:
            t = (planes - p) / d
            t_lo, t_hi = max(t_lo, t.min()), min(t_hi, t.max())
            ts.append(t)
        elif not -half < p < half:
            return np.empty(0, dtype=np.int64), np.empty(0)
    if not t_hi > t_lo:
        return np.empty(0, dtype=np.int64), np.empty(0)
    t = np.unique(np.clip(np.concatenate(ts), t_lo, t_hi))
    lengths = np.diff(t)
    mid = 0.5 * (t[1:] + t[:-1])
    col = np.floor((px + mid * dx + half) / pixel_width).astype(np.int64)
    row = np.floor((half - (py + mid * dy)) / pixel_width).astype(np.int64)
    keep = (lengths > 0) & (col >= 0) & (col < size) & (row >= 0) & (row < size)
    return row[keep] * size + col[keep], lengths[keep]


def parallel_beam_matrix(size, angles, n_detectors=None, pixel_width=1.0) -> RayProjector:
    """Projection matrix for ``angles`` (radians) and evenly spaced detectors.

    Detector spacing equals ``pixel_width`` and the detector row is centred
    on the image; rows are angle-major.
    """
    size = int(size)
    n_detectors = size if n_detectors is None else int(n_detectors)
    angles = np.asarray(angles, dtype=float)
    offsets = (np.arange(n_detectors) - 0.5 * (n_detectors - 1)) * pixel_width
    indptr = [0]
    indices, data = [], []
    for theta in angles:
        for s in offsets:
            idx, w = ray_intersections(size, pixel_width, theta, s)
            indices.append(idx)
            data.append(w)
            indptr.append(indptr[-1] + idx.size)
    matrix = sp.csr_matrix(
        (np.concatenate(data), np.concatenate(indices), np.asarray(indptr)),
        shape=(angles.size * n_detectors, size * size),
    )
    matrix.sum_duplicates()
    return RayProjector(matrix, (size, size), angles, n_detectors, pixel_width)


def make_tomo_problem(size=32, n_angles=48, level=0.1, seed=0, eta=1.0) -> InverseProblem:
    """Shepp-Logan sinogram over ``n_angles`` equispaced angles in ``[0, pi)``."""
    size, n_angles = int(size), int(n_angles)
    if size < MIN_SIZE:
        raise ValueError(f"tomography problems need size >= {MIN_SIZE}, got {size}")
    if n_angles < 2:
        raise ValueError(f"need at least 2 projection angles, got {n_angles}")
    angles = np.arange(n_angles) * np.pi / n_angles
    op = parallel_beam_matrix(size, angles)
    x_exact = shepp_logan(size).ravel()
    b_exact = op._matvec(x_exact)
    b, epsilon = add_noise(b_exact, level, seed)
    spec = {
        "generator": "tomo",
        "size": size,
        "angles": n_angles,
        "level": level,
        "seed": seed,
        "eta": eta,
    }
    return InverseProblem(
        op=op, b=b, epsilon=epsilon, eta=eta, b_exact=b_exact, x_exact=x_exact, seed=seed, spec=spec
    )
