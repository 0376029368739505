"""Versioned, lossless model serialization.

Models are stored as JSON documents with every float written via
float.hex(), so round trips reproduce values bit for bit. The layout is

    {"format": "gaussrobust-model", "version": 1, "kind": ...}

with kind-specific payloads:

  linear      w (hex list), sigma
  multiclass  weights (list of hex lists), sigma
  kernel      kernel spec, sigma, alphas/scale/nu, plus the training samples
              (labels and hex features) and a SHA-256 content hash so a
              model can be checked against the data it was trained on.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .kernels import KernelKind, KernelModel, KernelSpec, _GramRows
from .robust import LinearModel, MulticlassModel

__all__ = ["save_model", "load_model", "ModelFormatError", "dataset_hash"]

FORMAT_NAME = "gaussrobust-model"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised when a model file cannot be understood."""


def _hex_vec(v: np.ndarray) -> list[str]:
    return [float(x).hex() for x in v]


def _unhex_vec(v) -> np.ndarray:
    return np.array([float.fromhex(x) for x in v])


def dataset_hash(X: np.ndarray, y: np.ndarray) -> str:
    """Content hash of a sample matrix + labels (shape-prefixed SHA-256)."""
    h = hashlib.sha256()
    h.update(repr(X.shape).encode())
    h.update(np.ascontiguousarray(X, dtype=np.float64).tobytes())
    h.update(np.ascontiguousarray(y, dtype=np.int64).tobytes())
    return h.hexdigest()


def _kernel_spec_doc(spec: KernelSpec) -> dict:
    doc = {"kind": spec.kind.value}
    if spec.kind is KernelKind.POLYNOMIAL:
        doc["degree"] = spec.degree
        doc["offset"] = float(spec.offset).hex()
    elif spec.kind is KernelKind.RBF:
        doc["gamma"] = float(spec.gamma).hex()
    return doc


def _kernel_spec_from(doc) -> KernelSpec:
    kind = KernelKind(doc["kind"])
    if kind is KernelKind.POLYNOMIAL:
        return KernelSpec(kind, degree=int(doc["degree"]), offset=float.fromhex(doc["offset"]))
    if kind is KernelKind.RBF:
        return KernelSpec(kind, gamma=float.fromhex(doc["gamma"]))
    return KernelSpec(kind)


def save_model(model, path) -> None:
    """Write a linear, kernel or multiclass model to `path`."""
    doc: dict = {"format": FORMAT_NAME, "version": FORMAT_VERSION}
    if isinstance(model, LinearModel):
        doc["kind"] = "linear"
        doc["sigma"] = float(model.sigma).hex()
        doc["w"] = _hex_vec(model.w)
    elif isinstance(model, MulticlassModel):
        doc["kind"] = "multiclass"
        doc["sigma"] = float(model.sigma).hex()
        doc["weights"] = [_hex_vec(row) for row in model.weights]
    elif isinstance(model, KernelModel):
        doc["kind"] = "kernel"
        doc["sigma"] = float(model.sigma).hex()
        doc["kernel"] = _kernel_spec_doc(model.kernel)
        doc["alphas"] = _hex_vec(model.alphas)
        doc["scale"] = float(model.scale).hex()
        doc["nu"] = float(model.nu).hex()
        doc["train"] = {
            "hash": dataset_hash(model.X, model.labels.astype(np.int64)),
            "labels": [int(v) for v in model.labels],
            "X": [_hex_vec(row) for row in model.X],
        }
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path):
    """Read a model written by save_model; returns the matching model type."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not a model file ({exc})") from None
    if doc.get("format") != FORMAT_NAME:
        raise ModelFormatError(f"{path}: not a {FORMAT_NAME} file")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported version {doc.get('version')!r}")
    kind = doc.get("kind")
    sigma = float.fromhex(doc["sigma"])
    if kind == "linear":
        return LinearModel(_unhex_vec(doc["w"]), sigma)
    if kind == "multiclass":
        return MulticlassModel(np.vstack([_unhex_vec(r) for r in doc["weights"]]), sigma)
    if kind == "kernel":
        spec = _kernel_spec_from(doc["kernel"])
        X = np.vstack([_unhex_vec(r) for r in doc["train"]["X"]])
        labels = np.asarray(doc["train"]["labels"], dtype=np.float64)
        stored = doc["train"]["hash"]
        actual = dataset_hash(X, labels.astype(np.int64))
        if stored != actual:
            raise ModelFormatError(f"{path}: embedded training data does not match its hash")
        return KernelModel(
            alphas=_unhex_vec(doc["alphas"]),
            scale=float.fromhex(doc["scale"]),
            labels=labels,
            X=X,
            nu=float.fromhex(doc["nu"]),
            kernel=spec,
            sigma=sigma,
            gram=_GramRows(X, spec),
        )
    raise ModelFormatError(f"{path}: unknown model kind {kind!r}")
