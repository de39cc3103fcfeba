"""Matrix-free linear operators with matvec accounting.

Every solver in the package talks to the system matrix exclusively through
:meth:`LinearOperator.apply` and :meth:`LinearOperator.apply_transpose`.
Both calls are counted on the operator's :class:`OpStats`, which is the single
source of truth for the matrix-vector product totals reported in traces.
"""

from __future__ import annotations

import copy
import threading
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy import ndimage

from .errors import (
    DegenerateOperatorError,
    DimensionError,
    FormatError,
    NumericError,
    UnsupportedError,
)

__all__ = [
    "OpStats",
    "LinearOperator",
    "DenseOperator",
    "SparseOperator",
    "IdentityOperator",
    "SeparableBlur",
    "StencilBlur",
    "RayProjector",
    "ScaledOperator",
    "aslinearoperator",
    "load_matrix_market",
    "write_matrix_market",
    "estimate_norm",
    "scale_to_unit_norm",
    "NORM_SEED",
]

NORM_SEED = 0x5EED


class OpStats:
    """Thread-safe counters of forward and transpose applications."""

    def __init__(self):
        self._lock = threading.Lock()
        self.matvec_count = 0
        self.rmatvec_count = 0

    def _bump(self, transpose: bool) -> None:
        with self._lock:
            if transpose:
                self.rmatvec_count += 1
            else:
                self.matvec_count += 1

    @property
    def total(self) -> int:
        return self.matvec_count + self.rmatvec_count

    def reset(self) -> None:
        with self._lock:
            self.matvec_count = 0
            self.rmatvec_count = 0

    def __repr__(self):
        return f"OpStats(matvec={self.matvec_count}, rmatvec={self.rmatvec_count})"


class LinearOperator:
    """Abstract real ``m x n`` operator.

    Subclasses implement ``_matvec`` and ``_rmatvec``; the public
    :meth:`apply` / :meth:`apply_transpose` wrappers validate input and bump
    the counters.
    """

    backend = "abstract"

    def __init__(self, shape):
        m, n = (int(s) for s in shape)
        if m <= 0 or n <= 0:
            raise DimensionError(f"operator shape must be positive, got {shape}")
        self.shape = (m, n)
        self.stats = OpStats()

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    def _matvec(self, v):
        raise NotImplementedError

    def _rmatvec(self, u):
        raise NotImplementedError

    def _check(self, v, expected):
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.shape[0] != expected:
            raise DimensionError(
                f"{type(self).__name__} with shape {self.shape} expected a vector"
                f" of length {expected}, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise NumericError("input vector contains non-finite entries")
        return v

    def apply(self, v):
        """Return ``A @ v`` and count one matvec."""
        v = self._check(v, self.cols)
        self.stats._bump(False)
        return self._matvec(v)

    def apply_transpose(self, u):
        """Return ``A.T @ u`` and count one rmatvec."""
        u = self._check(u, self.rows)
        self.stats._bump(True)
        return self._rmatvec(u)

    def to_dense(self) -> np.ndarray:
        """Assemble the matrix column by column. Does not touch the counters."""
        m, n = self.shape
        out = np.empty((m, n))
        e = np.zeros(n)
        for j in range(n):
            e[j] = 1.0
            out[:, j] = self._matvec(e)
            e[j] = 0.0
        return out

    def with_fresh_stats(self) -> "LinearOperator":
        """Shallow copy sharing all data but with zeroed counters."""
        clone = copy.copy(self)
        clone.stats = OpStats()
        return clone

    def __repr__(self):
        return f"<{type(self).__name__} {self.rows}x{self.cols} backend={self.backend}>"


class DenseOperator(LinearOperator):
    backend = "dense"

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise DimensionError("dense operator needs a 2-d array")
        super().__init__(matrix.shape)
        self.matrix = matrix

    def _matvec(self, v):
        return self.matrix @ v

    def _rmatvec(self, u):
        return self.matrix.T @ u

    def to_dense(self):
        return self.matrix.copy()


class SparseOperator(LinearOperator):
    backend = "sparse-CSR"

    def __init__(self, matrix):
        matrix = sp.csr_matrix(matrix, dtype=float)
        super().__init__(matrix.shape)
        self.matrix = matrix
        self._matrix_t = matrix.T.tocsr()

    def _matvec(self, v):
        return self.matrix @ v

    def _rmatvec(self, u):
        return self._matrix_t @ u

    def to_dense(self):
        return self.matrix.toarray()


class IdentityOperator(LinearOperator):
    backend = "dense"

    def __init__(self, n):
        super().__init__((n, n))

    def _matvec(self, v):
        return v.copy()

    def _rmatvec(self, u):
        return u.copy()


class SeparableBlur(LinearOperator):
    """2-d convolution with a separable PSF ``outer(kernel_rows, kernel_cols)``.

    Images are flattened in C order. Zero boundary conditions.
    """

    backend = "separable-blur"

    def __init__(self, image_shape, kernel_rows, kernel_cols=None):
        kernel_rows = np.asarray(kernel_rows, dtype=float)
        kernel_cols = kernel_rows if kernel_cols is None else np.asarray(kernel_cols, dtype=float)
        for k in (kernel_rows, kernel_cols):
            if k.ndim != 1 or k.size % 2 == 0:
                raise DimensionError("blur kernels must be 1-d with odd length")
        self.image_shape = tuple(int(s) for s in image_shape)
        n = self.image_shape[0] * self.image_shape[1]
        super().__init__((n, n))
        self.kernel_rows = kernel_rows
        self.kernel_cols = kernel_cols

    def _matvec(self, v):
        img = v.reshape(self.image_shape)
        img = ndimage.convolve1d(img, self.kernel_rows, axis=0, mode="constant")
        img = ndimage.convolve1d(img, self.kernel_cols, axis=1, mode="constant")
        return img.ravel()

    def _rmatvec(self, u):
        img = u.reshape(self.image_shape)
        img = ndimage.correlate1d(img, self.kernel_rows, axis=0, mode="constant")
        img = ndimage.correlate1d(img, self.kernel_cols, axis=1, mode="constant")
        return img.ravel()

    @property
    def psf(self):
        return np.outer(self.kernel_rows, self.kernel_cols)


class StencilBlur(LinearOperator):
    """2-d convolution with an arbitrary odd-sized PSF, zero boundaries."""

    backend = "stencil-blur"

    def __init__(self, image_shape, psf):
        psf = np.asarray(psf, dtype=float)
        if psf.ndim != 2 or psf.shape[0] % 2 == 0 or psf.shape[1] % 2 == 0:
            raise DimensionError("PSF must be a 2-d array with odd side lengths")
        self.image_shape = tuple(int(s) for s in image_shape)
        n = self.image_shape[0] * self.image_shape[1]
        super().__init__((n, n))
        self.psf = psf

    def _matvec(self, v):
        img = v.reshape(self.image_shape)
        return ndimage.convolve(img, self.psf, mode="constant").ravel()

    def _rmatvec(self, u):
        img = u.reshape(self.image_shape)
        return ndimage.correlate(img, self.psf, mode="constant").ravel()


class RayProjector(SparseOperator):
    """Sparse projection matrix of a parallel-beam geometry.

    Built by :func:`regkrylov.problems.tomo.parallel_beam_matrix`; rows are
    ordered angle-major, detector-minor.
    """

    backend = "ray-projector"

    def __init__(self, matrix, image_shape, angles, n_detectors, pixel_width=1.0):
        super().__init__(matrix)
        self.image_shape = tuple(image_shape)
        self.angles = np.asarray(angles, dtype=float)
        self.n_detectors = int(n_detectors)
        self.pixel_width = float(pixel_width)


class ScaledOperator(LinearOperator):
    """``inner / scale``; counts only on the wrapper."""

    backend = "scaled-wrapper"

    def __init__(self, inner: LinearOperator, scale: float):
        if not np.isfinite(scale) or scale <= 0:
            raise DegenerateOperatorError(f"scale must be positive and finite, got {scale}")
        super().__init__(inner.shape)
        self.inner = inner
        self.scale = float(scale)

    def _matvec(self, v):
        return self.inner._matvec(v) / self.scale

    def _rmatvec(self, u):
        return self.inner._rmatvec(u) / self.scale

    def to_dense(self):
        return self.inner.to_dense() / self.scale


def aslinearoperator(a) -> LinearOperator:
    """Wrap a dense array or scipy sparse matrix; pass operators through."""
    if isinstance(a, LinearOperator):
        return a
    if sp.issparse(a):
        return SparseOperator(a)
    return DenseOperator(a)


def load_matrix_market(path) -> LinearOperator:
    """Read a real Matrix Market file.

    Coordinate files become :class:`SparseOperator`, array files
    :class:`DenseOperator`. Wide matrices (rows < cols) are transposed so the
    returned operator always has ``rows >= cols``.

    Raises
    ------
    FormatError
        The file is not valid Matrix Market.
    UnsupportedError
        The field is ``complex`` or ``pattern``.
    """
    path = Path(path)
    try:
        with open(path, "r") as fh:
            header = fh.readline()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    tokens = header.lower().split()
    if len(tokens) < 5 or tokens[0] != "%%matrixmarket" or tokens[1] != "matrix":
        raise FormatError(f"{path}: missing '%%MatrixMarket matrix' header")
    fmt, field = tokens[2], tokens[3]
    if fmt not in ("coordinate", "array"):
        raise FormatError(f"{path}: unknown format {fmt!r}")
    if field in ("complex", "pattern"):
        raise UnsupportedError(f"{path}: field {field!r} is not supported")
    if field not in ("real", "integer", "double"):
        raise FormatError(f"{path}: unknown field {field!r}")
    try:
        data = scipy.io.mmread(str(path))
    except Exception as exc:  # scipy raises ValueError, IndexError, ...
        raise FormatError(f"{path}: {exc}") from exc

    if sp.issparse(data):
        mat = sp.csr_matrix(data, dtype=float)
        if mat.shape[0] < mat.shape[1]:
            mat = mat.T.tocsr()
        return SparseOperator(mat)
    mat = np.asarray(data, dtype=float)
    if mat.shape[0] < mat.shape[1]:
        mat = np.ascontiguousarray(mat.T)
    return DenseOperator(mat)


def write_matrix_market(path, matrix, comment: str = "") -> None:
    """Write a dense array (array format) or sparse matrix (coordinate format).

    17 significant digits, so every float64 entry reads back bit-exact.
    """
    if isinstance(matrix, LinearOperator):
        matrix = matrix.matrix if hasattr(matrix, "matrix") else matrix.to_dense()
    if sp.issparse(matrix):
        matrix = sp.coo_matrix(matrix)
    else:
        matrix = np.asarray(matrix, dtype=float)
    scipy.io.mmwrite(str(path), matrix, comment=comment, field="real", precision=17)


def estimate_norm(op: LinearOperator, iterations: int = 30, seed: int = NORM_SEED) -> float:
    """Power iteration on ``A.T A``; returns an estimate of ``||A||_2`` from below.

    Uses the operator's counted ``apply`` / ``apply_transpose``.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.cols)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iterations):
        w = op.apply_transpose(op.apply(v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        est = np.sqrt(nw)
        v = w / nw
    return float(est)


def scale_to_unit_norm(op: LinearOperator, iterations: int = 30, seed: int = NORM_SEED) -> ScaledOperator:
    """Return ``op / s`` with ``s`` a power-iteration estimate of ``||op||_2``.

    Raises
    ------
    DegenerateOperatorError
        If the estimate is zero.
    """
    s = estimate_norm(op, iterations=iterations, seed=seed)
    if s <= np.finfo(float).tiny:
        raise DegenerateOperatorError("cannot normalize a zero operator")
    return ScaledOperator(op, s)
