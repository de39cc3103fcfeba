"""Directory bundles for :class:`InverseProblem`.

Layout::

    problem.json        metadata, operator description, vector list
    <name>.bin          little-endian float64 vector
    <name>.json         {"name": ..., "length": ...}
    operator.mtx        explicit matrices only

Generated blur and tomography operators are stored as their generator
parameters and rebuilt on load.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import FormatError, UnsupportedError
from ..operators import DenseOperator, ScaledOperator, SparseOperator, load_matrix_market, write_matrix_market
from .base import InverseProblem
from .blur import make_blur_operator
from .tomo import parallel_beam_matrix

__all__ = ["write_vector", "read_vector", "save_bundle", "load_bundle"]

_VECTORS = ("b", "b_exact", "x_exact")
_LE_F64 = np.dtype("<f8")


def write_vector(directory, name, values) -> None:
    directory = Path(directory)
    values = np.ascontiguousarray(values, dtype=_LE_F64)
    (directory / f"{name}.bin").write_bytes(values.tobytes())
    (directory / f"{name}.json").write_text(json.dumps({"name": name, "length": int(values.size)}))


def read_vector(directory, name) -> np.ndarray:
    directory = Path(directory)
    try:
        meta = json.loads((directory / f"{name}.json").read_text())
        raw = (directory / f"{name}.bin").read_bytes()
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read vector {name!r} from {directory}: {exc}") from exc
    values = np.frombuffer(raw, dtype=_LE_F64).astype(float)
    if values.size != meta.get("length"):
        raise FormatError(f"{name}.bin holds {values.size} values, sidecar says {meta.get('length')}")
    return values


def _describe_operator(op, directory):
    if op.backend in ("separable-blur", "stencil-blur", "ray-projector"):
        return {"kind": "generator"}
    scale = 1.0
    if isinstance(op, ScaledOperator):
        scale, op = op.scale, op.inner
    if not isinstance(op, (DenseOperator, SparseOperator)):
        raise UnsupportedError(f"cannot serialize operator with backend {op.backend!r}")
    write_matrix_market(directory / "operator.mtx", op.matrix)
    return {"kind": "matrix", "file": "operator.mtx", "scale": scale}


def save_bundle(problem: InverseProblem, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    operator = _describe_operator(problem.op, directory)
    if operator["kind"] == "generator" and problem.spec.get("generator") not in ("blur", "tomo"):
        raise UnsupportedError("generated operator without a generator spec")
    vectors = []
    for name in _VECTORS:
        values = getattr(problem, name)
        if values is not None:
            write_vector(directory, name, values)
            vectors.append(name)
    meta = {
        "shape": list(problem.op.shape),
        "epsilon": problem.epsilon,
        "eta": problem.eta,
        "sigma": problem.sigma,
        "seed": problem.seed,
        "spec": problem.spec,
        "operator": operator,
        "vectors": vectors,
    }
    (directory / "problem.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    return directory


def _rebuild_generated(spec):
    if spec["generator"] == "blur":
        return make_blur_operator(int(spec["size"]), spec["psf"])
    n_angles = int(spec["angles"])
    return parallel_beam_matrix(int(spec["size"]), np.arange(n_angles) * np.pi / n_angles)


def load_bundle(directory) -> InverseProblem:
    directory = Path(directory)
    try:
        meta = json.loads((directory / "problem.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {directory / 'problem.json'}: {exc}") from exc
    operator = meta["operator"]
    if operator["kind"] == "generator":
        op = _rebuild_generated(meta["spec"])
    elif operator["kind"] == "matrix":
        op = load_matrix_market(directory / operator["file"])
        if operator.get("scale", 1.0) != 1.0:
            op = ScaledOperator(op, operator["scale"])
    else:
        raise FormatError(f"unknown operator kind {operator['kind']!r}")
    if list(op.shape) != meta["shape"]:
        raise FormatError(f"operator shape {op.shape} does not match recorded {meta['shape']}")
    vectors = {name: read_vector(directory, name) for name in meta["vectors"]}
    return InverseProblem(
        op=op,
        b=vectors["b"],
        epsilon=meta["epsilon"],
        eta=meta["eta"],
        b_exact=vectors.get("b_exact"),
        x_exact=vectors.get("x_exact"),
        seed=meta["seed"],
        spec=meta["spec"],
    )
