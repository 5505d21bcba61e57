"""Plain-text file formats for matrices, designs, and measurement sets.

Matrix files are bit-exact: one matrix row per line, fields separated by
a single comma, numbers rendered with 17 significant decimal digits
(lossless for 64-bit floats), ``\\n`` terminated, no header.

A measurement set on disk is a directory containing ``b_row.csv``,
``b_col.csv``, ``design_a_row.csv``, ``design_a_col.csv``, and a
``manifest.json`` with the fields ``{kind, m, n, k1, k2, sigma,
design_seed, noise_seed, row_indices?, col_indices?}``.  A design-only
directory holds the two design files and a manifest without the noise
fields.  Manifests always suffice to re-derive the artifact from seeds.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .measurements import (
    DesignKind,
    MeasurementDesign,
    MeasurementSet,
    _freeze,
    _freeze_index,
)


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def write_matrix(path: str | Path, a: np.ndarray) -> None:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("only nonempty 2-d matrices can be written")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    lines = [",".join(format_float(v) for v in row) for row in a]
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def read_matrix(path: str | Path) -> np.ndarray:
    path = Path(path)
    rows = []
    width = None
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        try:
            row = [float(v) for v in line.split(",")]
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed matrix row: {exc}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValueError(f"{path}:{lineno}: ragged row ({len(row)} != {width})")
        rows.append(row)
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    a = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{path}: matrix entries must be finite")
    return _freeze(a)


def write_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", newline="\n"
    )


def read_json(path: str | Path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON: {exc}") from None


def _design_manifest(design: MeasurementDesign) -> dict:
    manifest = {
        "kind": design.kind.value,
        "m": design.m,
        "n": design.n,
        "k1": design.k1,
        "k2": design.k2,
        "design_seed": design.seed,
    }
    if design.row_indices is not None:
        manifest["row_indices"] = [int(i) for i in design.row_indices]
        manifest["col_indices"] = [int(i) for i in design.col_indices]
    return manifest


def write_design(dirpath: str | Path, design: MeasurementDesign) -> None:
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    write_matrix(dirpath / "design_a_row.csv", design.a_row)
    write_matrix(dirpath / "design_a_col.csv", design.a_col)
    write_json(dirpath / "manifest.json", _design_manifest(design))


def _design_from_dir(dirpath: Path, manifest: dict) -> MeasurementDesign:
    kind = DesignKind(manifest["kind"])
    a_row = read_matrix(dirpath / "design_a_row.csv")
    a_col = read_matrix(dirpath / "design_a_col.csv")
    if a_row.shape != (manifest["k1"], manifest["m"]):
        raise ValueError(f"{dirpath}: design_a_row.csv shape disagrees with manifest")
    if a_col.shape != (manifest["n"], manifest["k2"]):
        raise ValueError(f"{dirpath}: design_a_col.csv shape disagrees with manifest")
    row_indices = manifest.get("row_indices")
    col_indices = manifest.get("col_indices")
    return MeasurementDesign(
        kind=kind,
        a_row=a_row,
        a_col=a_col,
        row_indices=None if row_indices is None else _freeze_index(np.array(row_indices)),
        col_indices=None if col_indices is None else _freeze_index(np.array(col_indices)),
        seed=int(manifest["design_seed"]),
    )


def read_design(dirpath: str | Path) -> MeasurementDesign:
    dirpath = Path(dirpath)
    manifest = read_json(dirpath / "manifest.json")
    return _design_from_dir(dirpath, manifest)


def write_measurement_set(
    dirpath: str | Path, meas: MeasurementSet, design: MeasurementDesign
) -> None:
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    write_matrix(dirpath / "b_row.csv", meas.b_row)
    write_matrix(dirpath / "b_col.csv", meas.b_col)
    write_matrix(dirpath / "design_a_row.csv", design.a_row)
    write_matrix(dirpath / "design_a_col.csv", design.a_col)
    manifest = _design_manifest(design)
    manifest["sigma"] = meas.sigma
    manifest["noise_seed"] = meas.noise_seed
    write_json(dirpath / "manifest.json", manifest)


def read_measurement_set(
    dirpath: str | Path,
) -> tuple[MeasurementSet, MeasurementDesign]:
    dirpath = Path(dirpath)
    manifest = read_json(dirpath / "manifest.json")
    for field in ("kind", "m", "n", "k1", "k2", "sigma", "design_seed", "noise_seed"):
        if field not in manifest:
            raise ValueError(f"{dirpath}: manifest missing field {field!r}")
    design = _design_from_dir(dirpath, manifest)
    b_row = read_matrix(dirpath / "b_row.csv")
    b_col = read_matrix(dirpath / "b_col.csv")
    if b_row.shape != (design.k1, design.n):
        raise ValueError(f"{dirpath}: b_row.csv shape disagrees with manifest")
    if b_col.shape != (design.m, design.k2):
        raise ValueError(f"{dirpath}: b_col.csv shape disagrees with manifest")
    total = design.k1 * design.n + design.k2 * design.m
    distinct = None
    if design.kind is DesignKind.ROW_COL_SAMPLE:
        distinct = total - design.k1 * design.k2
    meas = MeasurementSet(
        b_row=b_row,
        b_col=b_col,
        sigma=float(manifest["sigma"]),
        design_seed=int(manifest["design_seed"]),
        noise_seed=int(manifest["noise_seed"]),
        total_measurements=total,
        distinct_measurements=distinct,
    )
    return meas, design
