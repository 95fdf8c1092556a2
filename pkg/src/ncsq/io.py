"""Instance files: a grid, a weight and a PSD matrix field in one JSON document.

Layout::

    {"grid": {"d": 1, "J": 4, "m": 3},
     "weight": [w_0, w_1, ...],
     "field": [[[re, im], ...], ...],      # per cell, m*m entries row-major
     "lambda": 1.5,                        # optional
     "seed": 7,                            # optional
     "weight_kind": "random-A1"}           # optional

Floats are written with their shortest round-trip representation, so
``load(dump(x))`` reproduces every bit.
"""
from dataclasses import dataclass
import json
import math
import os
import tempfile

import numpy as np

from .field import MatrixField
from .grid import GridSpec
from .weights import Weight


class InstanceFormatError(ValueError):
    """An instance document is malformed."""


@dataclass
class Instance:
    field: MatrixField
    weight: Weight
    lam: float = None
    seed: int = None

    @property
    def grid(self):
        return self.field.grid


def to_document(inst):
    grid = inst.grid
    entries = inst.field.values.reshape(grid.ncells, grid.m * grid.m)
    doc = {
        "grid": {"d": grid.d, "J": grid.J, "m": grid.m},
        "weight": [float(x) for x in inst.weight.values],
        "field": [[[float(z.real), float(z.imag)] for z in row] for row in entries],
    }
    if inst.lam is not None:
        doc["lambda"] = float(inst.lam)
    if inst.seed is not None:
        doc["seed"] = int(inst.seed)
    doc["weight_kind"] = inst.weight.kind
    return doc


def dumps(inst):
    return json.dumps(to_document(inst), separators=(",", ":"), allow_nan=False) + "\n"


def _require(doc, key, kind):
    if key not in doc:
        raise InstanceFormatError(f"missing key {key!r}")
    if not isinstance(doc[key], kind):
        raise InstanceFormatError(f"key {key!r} has the wrong type")
    return doc[key]


def from_document(doc):
    if not isinstance(doc, dict):
        raise InstanceFormatError("instance document must be a JSON object")
    g = _require(doc, "grid", dict)
    try:
        grid = GridSpec(int(g["d"]), int(g["J"]), int(g["m"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"bad grid section: {exc}") from exc
    try:
        weight_values = np.array(_require(doc, "weight", list), dtype=float)
        raw = np.array(_require(doc, "field", list), dtype=float)
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"non-numeric weight or field entries: {exc}") from exc
    if raw.shape != (grid.ncells, grid.m * grid.m, 2):
        raise InstanceFormatError(
            f"field has shape {raw.shape}, expected {(grid.ncells, grid.m * grid.m, 2)}"
        )
    values = (raw[..., 0] + 1j * raw[..., 1]).reshape(grid.ncells, grid.m, grid.m)
    try:
        weight = Weight(grid, weight_values, doc.get("weight_kind", "custom"))
        field = MatrixField(grid, values)
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from exc
    lam = doc.get("lambda")
    if lam is not None and not (isinstance(lam, (int, float)) and math.isfinite(lam) and lam > 0):
        raise InstanceFormatError("lambda must be a positive number")
    seed = doc.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise InstanceFormatError("seed must be an integer")
    return Instance(field, weight, None if lam is None else float(lam), seed)


def loads(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from exc
    return from_document(doc)


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def atomic_write(path, text):
    """Write ``text`` to a temporary sibling file and rename it over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump(inst, path):
    atomic_write(path, dumps(inst))
