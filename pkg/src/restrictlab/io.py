"""Measure CSV and measure-spec JSON serialization."""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from restrictlab.constants import DEFAULT_ATOM_BUDGET
from restrictlab.errors import PreconditionError
from restrictlab.measures import (
    AtomicMeasure,
    CantorSpec,
    SharpExampleSpec,
    build_cantor_measure,
    build_sharp_example,
)

HEADER = "# atomic-measure v1, alpha={alpha!r}, provenance={provenance}"
_HEADER_RE = re.compile(r"^# atomic-measure v1, alpha=([^,]+), provenance=(\w+)\s*$")
SPEC_KINDS = {"cantor": CantorSpec, "sharp_example": SharpExampleSpec}


def _num(x: float) -> str:
    # 17 significant digits: always at least 15 and round-trips exactly
    return f"{float(x):.16e}"


def write_measure_csv(measure: AtomicMeasure, path) -> None:
    """Header line, then one ``x,y,re_w,im_w`` row per atom (17 significant digits)."""
    pos, w = measure.positions, measure.weights
    with open(path, "w", newline="") as fh:
        fh.write(HEADER.format(alpha=float(measure.declared_alpha), provenance=measure.provenance) + "\n")
        fh.write("x,y,re_w,im_w\n")
        writer = csv.writer(fh, lineterminator="\n")
        for (x, y), wj in zip(pos, w):
            writer.writerow([_num(x), _num(y), _num(wj.real), _num(wj.imag)])


def read_measure_csv(path, atom_budget: int = DEFAULT_ATOM_BUDGET) -> AtomicMeasure:
    path = Path(path)
    with open(path, newline="") as fh:
        first = fh.readline()
        match = _HEADER_RE.match(first)
        if not match:
            raise PreconditionError(f"{path}: missing '# atomic-measure v1' header")
        alpha = float(match.group(1))
        provenance = match.group(2)
        rows = [r for r in csv.reader(fh) if r]
    # the column-name line is optional on input
    if rows and rows[0] == ["x", "y", "re_w", "im_w"]:
        rows = rows[1:]
    if any(len(r) != 4 for r in rows):
        raise PreconditionError(f"{path}: every row needs 4 fields x,y,re_w,im_w")
    if not rows:
        raise PreconditionError(f"{path}: no atoms")
    data = np.array(rows, dtype=float)
    return AtomicMeasure(
        data[:, :2],
        data[:, 2] + 1j * data[:, 3],
        declared_alpha=alpha,
        provenance=provenance,
        atom_budget=atom_budget,
        metadata={"source": str(path)},
    )


def spec_to_json(spec) -> dict:
    for kind, cls in SPEC_KINDS.items():
        if isinstance(spec, cls):
            return {"kind": kind, **spec.to_json()}
    raise PreconditionError(f"cannot serialize {type(spec).__name__}")


def spec_from_json(obj: dict):
    obj = dict(obj)
    kind = obj.pop("kind", None)
    if kind not in SPEC_KINDS:
        raise PreconditionError(f"spec kind must be one of {sorted(SPEC_KINDS)}, got {kind!r}")
    cls = SPEC_KINDS[kind]
    try:
        return cls(**obj)
    except TypeError as exc:
        raise PreconditionError(f"bad {kind} spec: {exc}") from None


def load_spec(path):
    with open(path) as fh:
        return spec_from_json(json.load(fh))


def save_spec(spec, path) -> None:
    with open(path, "w") as fh:
        json.dump(spec_to_json(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")


def measure_from_spec(spec, atom_budget: int = DEFAULT_ATOM_BUDGET) -> AtomicMeasure:
    if isinstance(spec, CantorSpec):
        return build_cantor_measure(spec, atom_budget)
    if isinstance(spec, SharpExampleSpec):
        return build_sharp_example(spec, atom_budget)[0]
    raise PreconditionError(f"unsupported spec {type(spec).__name__}")


def write_ft_csv(points, values, path) -> None:
    """Frequencies and transform values as ``xi1,xi2,re,im``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["xi1", "xi2", "re", "im"])
        for (a, b), v in zip(np.asarray(points, dtype=float), np.asarray(values, dtype=complex)):
            writer.writerow([_num(a), _num(b), _num(v.real), _num(v.imag)])
