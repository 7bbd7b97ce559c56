"""ASCII OBJ / OFF triangle mesh files and JSON sidecars of vertex fields."""

from __future__ import annotations

import json

import numpy as np

from .mesh import MeshError, TriMesh

__all__ = ["read_obj", "read_off", "read_mesh", "write_obj", "write_sidecar", "read_sidecar"]


def read_obj(path) -> TriMesh:
    verts, faces = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) for p in parts[1:]]
                if len(idx) != 3:
                    raise MeshError(f"{path}:{lineno}: only triangles are supported")
                faces.append([i - 1 if i > 0 else len(verts) + i for i in idx])
    return TriMesh(np.array(verts), np.array(faces))


def read_off(path) -> TriMesh:
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0]
            tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise MeshError(f"{path}: missing OFF header")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = np.array(tokens[pos : pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        count = int(tokens[pos])
        if count != 3:
            raise MeshError(f"{path}: only triangles are supported")
        faces.append([int(t) for t in tokens[pos + 1 : pos + 4]])
        pos += 1 + count
    return TriMesh(verts, np.array(faces))


def read_mesh(path) -> TriMesh:
    path = str(path)
    if path.lower().endswith(".obj"):
        return read_obj(path)
    if path.lower().endswith(".off"):
        return read_off(path)
    raise MeshError(f"unsupported mesh format: {path}")


def write_obj(mesh: TriMesh, path):
    with open(path, "w") as fh:
        for x, y, z in mesh.positions:
            fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in mesh.triangles + 1:
            fh.write(f"f {a} {b} {c}\n")


def write_sidecar(path, fields: dict, meta: dict | None = None):
    """Write per-vertex fields as ``{"n_vertices", "fields": {name: [...]}, "meta"}``."""
    lengths = {len(np.asarray(v)) for v in fields.values()}
    if len(lengths) > 1:
        raise ValueError("all fields must have the same length")
    doc = {
        "n_vertices": lengths.pop() if lengths else 0,
        "fields": {k: np.asarray(v, dtype=float).tolist() for k, v in fields.items()},
        "meta": meta or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def read_sidecar(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    return {k: np.asarray(v, dtype=float) for k, v in doc["fields"].items()}
