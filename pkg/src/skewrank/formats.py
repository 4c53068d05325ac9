"""File formats: .formula, .pencil, .polymatrix, .cert.

All containers are self-describing (they carry the modulus).  Formula
files are grammar text with '#'-prefixed header lines; the other three are
JSON with sorted keys, so writes are byte-reproducible.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .field import PrimeField
from .formula import Formula, format_formula, parse_formula
from .higman import HigmanCertificate
from .pencil import LinearPencil, PolyMatrix

__all__ = [
    "write_formula_file",
    "read_formula_file",
    "write_pencil_file",
    "read_pencil_file",
    "write_polymatrix_file",
    "read_polymatrix_file",
    "write_certificate_file",
    "read_certificate_file",
]


def write_formula_file(path, phi: Formula, fld: PrimeField):
    text = f"# modulus: {fld.p}\n{format_formula(phi, fld)}\n"
    Path(path).write_text(text)


def read_formula_file(path) -> tuple[Formula, PrimeField]:
    fld = None
    body = []
    for line in Path(path).read_text().splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            key, _, value = stripped.lstrip("# ").partition(":")
            if key.strip() == "modulus":
                fld = PrimeField(int(value.strip()))
        elif stripped:
            body.append(stripped)
    if fld is None:
        raise ValueError(f"{path}: missing '# modulus:' header")
    return parse_formula(" ".join(body), fld), fld


def _dump(path, obj):
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


def _load(path):
    return json.loads(Path(path).read_text())


def _pencil_obj(pencil: LinearPencil) -> dict:
    return {
        "modulus": pencil.field.p,
        "rows": pencil.rows,
        "cols": pencil.cols,
        "variables": pencil.variables,
        "constant": [int(x) for x in pencil.constant.ravel()],
        "coefficients": {
            name: [int(x) for x in arr.ravel()] for name, arr in pencil.terms
        },
    }


def _pencil_from_obj(obj: dict) -> LinearPencil:
    fld = PrimeField(obj["modulus"])
    rows, cols = obj["rows"], obj["cols"]

    def arr(flat):
        return np.array(flat, dtype=np.uint64).reshape(rows, cols)

    return LinearPencil.build(
        fld,
        rows,
        cols,
        arr(obj["constant"]),
        {name: arr(flat) for name, flat in obj["coefficients"].items()},
    )


def write_pencil_file(path, pencil: LinearPencil):
    _dump(path, _pencil_obj(pencil))


def read_pencil_file(path) -> LinearPencil:
    return _pencil_from_obj(_load(path))


def _polymatrix_obj(m: PolyMatrix) -> dict:
    return {
        "modulus": m.field.p,
        "rows": m.rows,
        "cols": m.cols,
        "entries": [[format_formula(e, m.field) for e in row] for row in m.entries],
    }


def _polymatrix_from_obj(obj: dict) -> PolyMatrix:
    fld = PrimeField(obj["modulus"])
    return PolyMatrix(
        fld, [[parse_formula(s, fld) for s in row] for row in obj["entries"]]
    )


def write_polymatrix_file(path, m: PolyMatrix):
    _dump(path, _polymatrix_obj(m))


def read_polymatrix_file(path) -> PolyMatrix:
    return _polymatrix_from_obj(_load(path))


def write_certificate_file(path, cert: HigmanCertificate):
    _dump(
        path,
        {
            "modulus": cert.pencil.field.p,
            "original_rows": cert.original_dims[0],
            "original_cols": cert.original_dims[1],
            "padding": cert.padding,
            "P": _polymatrix_obj(cert.p_matrix)["entries"],
            "Q": _polymatrix_obj(cert.q_matrix)["entries"],
            "L": _pencil_obj(cert.pencil),
        },
    )


def read_certificate_file(path) -> HigmanCertificate:
    obj = _load(path)
    fld = PrimeField(obj["modulus"])
    p = PolyMatrix(fld, [[parse_formula(s, fld) for s in row] for row in obj["P"]])
    q = PolyMatrix(fld, [[parse_formula(s, fld) for s in row] for row in obj["Q"]])
    return HigmanCertificate(
        p_matrix=p,
        q_matrix=q,
        pencil=_pencil_from_obj(obj["L"]),
        padding=obj["padding"],
        original_dims=(obj["original_rows"], obj["original_cols"]),
    )
