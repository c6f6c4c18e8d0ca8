"""JSON and CSV round trips for grids, signals, planes, and masks.

JSON stores complex values as [re, im] pairs.  CSV files carry one
metadata line (key=value pairs after a leading '#'), one column header
line, and then the data rows.  Boolean masks are run-length encoded as
alternating false/true run lengths over the row-major flattening,
starting with the false run.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np
import numpy.typing as npt

from .grid import GridSpec, PlaneArray, SampledSignal


def grid_to_dict(grid: GridSpec) -> dict:
    return {"dt": grid.dt, "n_per_T": grid.n_per_T, "periods": grid.periods, "ell": grid.ell}


def grid_from_dict(d: dict) -> GridSpec:
    return GridSpec(float(d["dt"]), int(d["n_per_T"]), int(d["periods"]), int(d.get("ell", 1)))


def _complex_pairs(values: npt.NDArray[np.complex128]) -> list:
    stacked = np.stack([values.real, values.imag], axis=-1)
    return stacked.tolist()


def _from_pairs(pairs) -> npt.NDArray[np.complex128]:
    arr = np.asarray(pairs, dtype=np.float64)
    return arr[..., 0] + 1j * arr[..., 1]


def signal_to_json(signal: SampledSignal) -> str:
    doc = {
        "grid": grid_to_dict(signal.grid),
        "origin_index": signal.origin_index,
        "domain": signal.domain,
        "values": _complex_pairs(signal.values),
    }
    return json.dumps(doc)


def signal_from_json(text: str) -> SampledSignal:
    doc = json.loads(text)
    return SampledSignal(
        grid_from_dict(doc["grid"]),
        _from_pairs(doc["values"]),
        int(doc.get("origin_index", 0)),
        doc.get("domain", "time"),
    )


def _meta_line(pairs: dict) -> str:
    return "# " + " ".join(f"{k}={v!r}" for k, v in pairs.items())


def _parse_meta(line: str) -> dict:
    out = {}
    for tok in line.lstrip("# ").split():
        key, _, val = tok.partition("=")
        out[key] = val.strip("'\"")
    return out


def signal_to_csv(signal: SampledSignal) -> str:
    grid = signal.grid
    buf = io.StringIO()
    meta = grid_to_dict(grid)
    meta.update(origin_index=signal.origin_index, domain=signal.domain)
    buf.write(_meta_line(meta) + "\n")
    writer = csv.writer(buf)
    writer.writerow(["index", "re", "im"])
    for i, v in enumerate(signal.values):
        writer.writerow([i, repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def signal_from_csv(text: str) -> SampledSignal:
    lines = text.splitlines()
    meta = _parse_meta(lines[0])
    grid = GridSpec(float(meta["dt"]), int(meta["n_per_T"]), int(meta["periods"]), int(meta["ell"]))
    values = np.zeros(grid.n, dtype=np.complex128)
    for row in csv.reader(lines[2:]):
        if not row:
            continue
        values[int(row[0])] = float(row[1]) + 1j * float(row[2])
    return SampledSignal(grid, values, int(meta["origin_index"]), meta["domain"])


def plane_to_json(plane: PlaneArray) -> str:
    doc = {
        "grid": grid_to_dict(plane.grid),
        "axis_semantics": plane.axis_semantics,
        "shape": list(plane.values.shape),
        "values": _complex_pairs(plane.values),
    }
    return json.dumps(doc)


def plane_from_json(text: str) -> PlaneArray:
    doc = json.loads(text)
    values = _from_pairs(doc["values"])
    if list(values.shape) != doc["shape"]:
        raise ValueError("plane shape does not match its values")
    return PlaneArray(grid_from_dict(doc["grid"]), values, doc["axis_semantics"])


def plane_to_csv(plane: PlaneArray) -> str:
    buf = io.StringIO()
    meta = grid_to_dict(plane.grid)
    meta.update(axis_semantics=plane.axis_semantics, nx=plane.values.shape[0], ny=plane.values.shape[1])
    buf.write(_meta_line(meta) + "\n")
    writer = csv.writer(buf)
    writer.writerow(["i", "k", "re", "im"])
    for i in range(plane.values.shape[0]):
        for k in range(plane.values.shape[1]):
            v = plane.values[i, k]
            writer.writerow([i, k, repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def plane_from_csv(text: str) -> PlaneArray:
    lines = text.splitlines()
    meta = _parse_meta(lines[0])
    grid = GridSpec(float(meta["dt"]), int(meta["n_per_T"]), int(meta["periods"]), int(meta["ell"]))
    values = np.zeros((int(meta["nx"]), int(meta["ny"])), dtype=np.complex128)
    for row in csv.reader(lines[2:]):
        if not row:
            continue
        values[int(row[0]), int(row[1])] = float(row[2]) + 1j * float(row[3])
    return PlaneArray(grid, values, meta["axis_semantics"])


def mask_to_rle(mask: npt.NDArray[np.bool_]) -> dict:
    """Run-length encode a boolean array (row major, false run first)."""
    mask = np.asarray(mask, dtype=bool)
    flat = mask.ravel()
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate([[0], changes, [flat.size]])
    runs = np.diff(bounds).tolist()
    if flat.size and flat[0]:
        runs = [0] + runs
    return {"shape": list(mask.shape), "runs": runs}


def mask_from_rle(doc: dict) -> npt.NDArray[np.bool_]:
    total = int(np.prod(doc["shape"]))
    flat = np.zeros(total, dtype=bool)
    pos, bit = 0, False
    for run in doc["runs"]:
        if bit:
            flat[pos : pos + run] = True
        pos += run
        bit = not bit
    if pos != total:
        raise ValueError("run lengths do not cover the mask")
    return flat.reshape(doc["shape"])
