"""Plain-text mesh and table writers with fixed float formatting."""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

OBJ_DIGITS = 9
CSV_DIGITS = 17


def _emit(text: str, target):
    if target is None:
        return text
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text, newline="")
    return text


def _check_faces(vertices, faces):
    faces = np.asarray(faces)
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise ValueError("faces must be an (n, 3) index array")
    if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
        raise ValueError("face index out of range")
    return faces


def obj_text(vertices, faces, comment: str | None = None) -> str:
    """Wavefront OBJ: 1-based triangles, coordinates to 9 significant digits."""
    V = np.asarray(vertices, dtype=float)
    F = _check_faces(V, faces)
    out = []
    if comment:
        out += [f"# {line}" for line in comment.splitlines()]
    out += [f"v {x:.{OBJ_DIGITS}g} {y:.{OBJ_DIGITS}g} {z:.{OBJ_DIGITS}g}" for x, y, z in V]
    out += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in F]
    return "\n".join(out) + "\n"


def write_obj(mesh, target=None, comment: str | None = None) -> str:
    return _emit(obj_text(mesh.vertices, mesh.faces, comment), target)


def ply_text(vertices, faces) -> str:
    """ASCII PLY with float vertices and triangle faces."""
    V = np.asarray(vertices, dtype=float)
    F = _check_faces(V, faces)
    head = ["ply", "format ascii 1.0", f"element vertex {len(V)}",
            "property double x", "property double y", "property double z",
            f"element face {len(F)}", "property list uchar int vertex_indices", "end_header"]
    body = [f"{x:.{OBJ_DIGITS}g} {y:.{OBJ_DIGITS}g} {z:.{OBJ_DIGITS}g}" for x, y, z in V]
    body += [f"3 {a} {b} {c}" for a, b, c in F]
    return "\n".join(head + body) + "\n"


def write_ply(mesh, target=None) -> str:
    return _emit(ply_text(mesh.vertices, mesh.faces), target)


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{CSV_DIGITS}g}"
    return str(x)


def csv_text(header, rows) -> str:
    """RFC 4180 CSV (CRLF line ends); floats carry 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def write_csv(header, rows, target=None) -> str:
    return _emit(csv_text(header, rows), target)


def read_obj(text: str):
    """(vertices, faces) from OBJ text written by :func:`obj_text`."""
    V, F = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            V.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            F.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return np.array(V, dtype=float).reshape(-1, 3), np.array(F, dtype=int).reshape(-1, 3)
