"""Sampled transform tables and their CSV serialization."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["TransformTable", "write_atomic", "format_real", "table_to_csv"]

KINDS = ("G", "F", "psi", "eta", "h", "M", "T", "S", "density")


@dataclass(frozen=True)
class TransformTable:
    """Values of one transform sampled on a declared grid.

    Parameters
    ----------
    kind : str
        One of ``G, F, psi, eta, h, M, T, S, density``.
    inputs : ndarray
        Sample points, real or complex. Real inputs must be strictly
        increasing.
    outputs : ndarray
        Transform values, same length as `inputs`.
    descriptor : str
        Free text naming the measure.
    metadata : dict
        Grid description and per-point flags (arrays of the same length
        as `inputs` are allowed).
    """

    kind: str
    inputs: np.ndarray
    outputs: np.ndarray
    descriptor: str = ""
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        inputs = np.asarray(self.inputs)
        outputs = np.asarray(self.outputs)
        if inputs.ndim != 1 or inputs.size == 0:
            raise ValueError("a transform table needs a nonempty 1-d grid")
        if outputs.shape != inputs.shape:
            raise ValueError("inputs and outputs differ in length")
        if not np.iscomplexobj(inputs) and np.any(np.diff(inputs) <= 0):
            raise ValueError("real table inputs must be strictly increasing")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)

    def __len__(self):
        return self.inputs.size


def format_real(x: float) -> str:
    """Format a float with 17 significant digits."""
    return format(float(x), ".17g")


def _columns(values, name):
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return [f"{name}_re", f"{name}_im"], [values.real, values.imag]
    return [name], [values]


def table_to_csv(table: TransformTable, extra: dict[str, np.ndarray] | None = None) -> str:
    """Render a table as CSV text.

    Complex columns become paired ``_re``/``_im`` columns. A density table
    renders as ``x,density``.
    """
    in_name = {"T": "u", "S": "u", "density": "x"}.get(table.kind, "z")
    names, cols = _columns(table.inputs, in_name)
    out_names, out_cols = _columns(table.outputs, table.kind)
    names += out_names
    cols += out_cols
    for key, val in (extra or {}).items():
        n, c = _columns(val, key)
        names += n
        cols += c
    lines = [",".join(names)]
    for row in zip(*cols):
        lines.append(",".join(v if isinstance(v, str) else format_real(v) for v in row))
    return "\n".join(lines) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write `text` to `path` through a temporary file and a rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise OSError(f"cannot write {path}: {exc}") from exc
