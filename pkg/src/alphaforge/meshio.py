"""Mesh and point-cloud file I/O: OBJ, OFF, ASCII PLY, and XYZ.

Writers emit shortest round-trip decimal floats (Python repr), so files are
diff-stable and re-reading reproduces coordinates bit-for-bit. Parsers
reject non-finite coordinates and report 1-based line numbers on failure.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import IoError, ParseError, UnsupportedElement
from .mesh import Mesh, PointCloud

MESH_FORMATS = ("obj", "off", "ply")
POINT_FORMATS = ("xyz", "ply")
WELD_TOL = 1e-9


def _infer_format(path, fmt, allowed) -> str:
    if fmt is None:
        fmt = Path(path).suffix.lstrip(".").lower()
    fmt = fmt.lower()
    if fmt not in allowed:
        raise ValueError(f"format {fmt!r} not in {allowed}")
    return fmt


def _parse_floats(fields, lineno, count) -> list[float]:
    try:
        vals = [float(x) for x in fields[:count]]
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None
    if len(vals) < count:
        raise ParseError(f"expected {count} numeric fields, got {len(fields)}", lineno)
    if not all(math.isfinite(v) for v in vals):
        raise ParseError("non-finite coordinate", lineno)
    return vals


def _fan(indices, lineno, triangulate_polygons):
    if len(indices) < 3:
        raise ParseError("face with fewer than 3 indices", lineno)
    if len(indices) > 3 and not triangulate_polygons:
        raise UnsupportedElement(
            f"polygonal face with {len(indices)} vertices (triangulation disabled)",
            lineno)
    return [(indices[0], indices[k], indices[k + 1]) for k in range(1, len(indices) - 1)]


_CELL_OFFSETS = [(dx, dy, dz) for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                 for dz in (-1, 0, 1)]


def _weld(vertices: np.ndarray, faces: list, tol: float):
    """Merge vertices whose coordinates agree within tol; remaps faces.

    Hash-grid with neighbor-cell probing so near-boundary pairs still weld.
    """
    keep: list[int] = []
    remap = np.empty(len(vertices), dtype=np.int64)
    grid: dict[tuple, int] = {}
    inv = 1.0 / tol
    for i, v in enumerate(vertices):
        cx, cy, cz = (int(round(c)) for c in v * inv)
        hit = None
        for dx, dy, dz in _CELL_OFFSETS:
            j = grid.get((cx + dx, cy + dy, cz + dz))
            if j is not None and np.abs(vertices[keep[j]] - v).max() <= tol:
                hit = j
                break
        if hit is None:
            grid[(cx, cy, cz)] = len(keep)
            remap[i] = len(keep)
            keep.append(i)
        else:
            remap[i] = hit
    welded = vertices[keep]
    new_faces = [tuple(int(remap[i]) for i in f) for f in faces]
    return welded, new_faces


def _lines(path):
    try:
        with open(path, encoding="utf-8", errors="strict") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise UnsupportedElement(f"file is not ASCII/UTF-8 text ({exc})") from None


def read_mesh(path, format: str | None = None, *, weld: bool = False,
              triangulate_polygons: bool = True) -> Mesh:
    """Read a triangle mesh; polygonal faces are fan-triangulated.

    ``weld=True`` merges vertices closer than 1e-9 before face indexing
    (off by default: silent welding changes topology diagnostics).
    """
    fmt = _infer_format(path, format, MESH_FORMATS)
    return mesh_from_text("\n".join(_lines(path)), fmt, weld=weld,
                          triangulate_polygons=triangulate_polygons)


def mesh_from_text(text: str, format: str, *, weld: bool = False,
                   triangulate_polygons: bool = True) -> Mesh:
    """Parse a mesh from file contents already in memory."""
    fmt = _infer_format("", format, MESH_FORMATS)
    lines = text.splitlines()
    if fmt == "obj":
        verts, faces = _read_obj(lines, triangulate_polygons)
    elif fmt == "off":
        verts, faces = _read_off(lines, triangulate_polygons)
    else:
        verts, faces, _ = _read_ply(lines, triangulate_polygons)
    if weld and len(verts):
        verts, faces = _weld(verts, faces, WELD_TOL)
    return Mesh(verts, np.array(faces, dtype=np.int64).reshape(-1, 3))


def _read_obj(lines, triangulate_polygons):
    verts: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        tag = fields[0]
        if tag == "v":
            verts.append(_parse_floats(fields[1:], lineno, 3))
        elif tag == "f":
            idx = []
            for token in fields[1:]:
                head = token.split("/")[0]
                try:
                    k = int(head)
                except ValueError:
                    raise ParseError(f"bad face index {token!r}", lineno) from None
                if k == 0:
                    raise ParseError("OBJ indices are 1-based; got 0", lineno)
                idx.append(k - 1 if k > 0 else len(verts) + k)
            faces.extend(_fan(idx, lineno, triangulate_polygons))
        # vn/vt/usemtl and friends are ignored
    return np.array(verts, dtype=np.float64).reshape(-1, 3), faces


def _read_off(lines, triangulate_polygons):
    content = [(i + 1, ln.strip()) for i, ln in enumerate(lines)
               if ln.strip() and not ln.strip().startswith("#")]
    if not content or content[0][1] != "OFF":
        raise ParseError("missing OFF header", content[0][0] if content else 1)
    if len(content) < 2:
        raise ParseError("missing OFF counts line", content[0][0])
    lineno, counts = content[1]
    fields = counts.split()
    try:
        nv, nf = int(fields[0]), int(fields[1])
    except (ValueError, IndexError):
        raise ParseError("OFF counts line must be 'nv nf ne'", lineno) from None
    body = content[2:]
    if len(body) < nv + nf:
        raise ParseError(
            f"file truncated: expected {nv + nf} records, found {len(body)}",
            body[-1][0] if body else lineno)
    verts = [_parse_floats(body[i][1].split(), body[i][0], 3) for i in range(nv)]
    faces: list[tuple[int, int, int]] = []
    for i in range(nv, nv + nf):
        ln, text = body[i]
        fields = text.split()
        try:
            k = int(fields[0])
            idx = [int(x) for x in fields[1:1 + k]]
        except (ValueError, IndexError):
            raise ParseError("bad OFF face record", ln) from None
        if len(idx) != k:
            raise ParseError(f"face promises {k} indices, has {len(idx)}", ln)
        faces.extend(_fan(idx, ln, triangulate_polygons))
    return np.array(verts, dtype=np.float64).reshape(-1, 3), faces


def _read_ply(lines, triangulate_polygons):
    """ASCII PLY reader; returns (vertices, faces, normals-or-None)."""
    if not lines or lines[0].strip() != "ply":
        raise ParseError("missing 'ply' magic", 1)
    elements: list[tuple[str, int, list[str]]] = []
    lineno = 1
    fmt_seen = False
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("comment"):
            continue
        fields = line.split()
        if fields[0] == "format":
            if fields[1] != "ascii":
                raise UnsupportedElement(f"binary PLY ({fields[1]}) not supported",
                                         lineno)
            fmt_seen = True
        elif fields[0] == "element":
            elements.append((fields[1], int(fields[2]), []))
        elif fields[0] == "property":
            if not elements:
                raise ParseError("property before any element", lineno)
            elements[-1][2].append(fields[-1])
        elif fields[0] == "end_header":
            break
        else:
            raise ParseError(f"unexpected header line {fields[0]!r}", lineno)
    else:
        raise ParseError("missing end_header", lineno)
    if not fmt_seen:
        raise ParseError("missing format line", lineno)

    body = [(i, ln.strip()) for i, ln in enumerate(lines[lineno:], start=lineno + 1)
            if ln.strip()]
    cursor = 0
    verts: list[list[float]] = []
    normals: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    for name, count, props in elements:
        if cursor + count > len(body):
            raise ParseError(f"file truncated in element {name!r}",
                             body[-1][0] if body else lineno)
        rows = body[cursor:cursor + count]
        cursor += count
        if name == "vertex":
            want_normals = {"nx", "ny", "nz"}.issubset(props)
            if not {"x", "y", "z"}.issubset(props):
                raise ParseError("vertex element lacks x/y/z properties",
                                 rows[0][0] if rows else lineno)
            ix = [props.index(c) for c in ("x", "y", "z")]
            if want_normals:
                inrm = [props.index(c) for c in ("nx", "ny", "nz")]
            for ln, text in rows:
                vals = _parse_floats(text.split(), ln, len(props))
                verts.append([vals[i] for i in ix])
                if want_normals:
                    normals.append([vals[i] for i in inrm])
        elif name == "face":
            for ln, text in rows:
                fields = text.split()
                try:
                    k = int(fields[0])
                    idx = [int(x) for x in fields[1:1 + k]]
                except (ValueError, IndexError):
                    raise ParseError("bad PLY face record", ln) from None
                if len(idx) != k:
                    raise ParseError(f"face promises {k} indices, has {len(idx)}", ln)
                faces.extend(_fan(idx, ln, triangulate_polygons))
        else:
            raise UnsupportedElement(f"element {name!r} not supported",
                                     rows[0][0] if rows else lineno)
    return (np.array(verts, dtype=np.float64).reshape(-1, 3), faces,
            np.array(normals, dtype=np.float64) if normals else None)


def write_mesh(mesh: Mesh, path, format: str | None = None) -> None:
    """Write a mesh; re-reading reproduces vertices exactly and faces
    identically."""
    fmt = _infer_format(path, format, MESH_FORMATS)
    _write_text(path, mesh_to_text(mesh, fmt).splitlines())


def mesh_to_text(mesh: Mesh, format: str) -> str:
    """Serialize a mesh to file contents (same encoding as write_mesh)."""
    fmt = _infer_format("", format, MESH_FORMATS)
    v, f = mesh.vertices.tolist(), mesh.faces.tolist()
    out: list[str] = []
    if fmt == "obj":
        out.extend(f"v {x!r} {y!r} {z!r}" for x, y, z in v)
        out.extend(f"f {a + 1} {b + 1} {c + 1}" for a, b, c in f)
    elif fmt == "off":
        out.append("OFF")
        out.append(f"{len(v)} {len(f)} 0")
        out.extend(f"{x!r} {y!r} {z!r}" for x, y, z in v)
        out.extend(f"3 {a} {b} {c}" for a, b, c in f)
    else:
        out.extend(["ply", "format ascii 1.0", f"element vertex {len(v)}",
                    "property double x", "property double y", "property double z",
                    f"element face {len(f)}",
                    "property list uchar int vertex_indices", "end_header"])
        out.extend(f"{x!r} {y!r} {z!r}" for x, y, z in v)
        out.extend(f"3 {a} {b} {c}" for a, b, c in f)
    return "\n".join(out) + ("\n" if out else "")


def read_points(path, format: str | None = None) -> PointCloud:
    """Read a point cloud: XYZ ('x y z [nx ny nz]' per line) or ASCII PLY."""
    fmt = _infer_format(path, format, POINT_FORMATS)
    return points_from_text("\n".join(_lines(path)), fmt)


def points_from_text(text: str, format: str) -> PointCloud:
    """Parse a point cloud from file contents already in memory."""
    fmt = _infer_format("", format, POINT_FORMATS)
    lines = text.splitlines()
    if fmt == "ply":
        verts, _, normals = _read_ply(lines, triangulate_polygons=True)
        if normals is not None:
            normals = _normalize_normals(normals, lineno=None)
        return PointCloud(verts, normals)
    pts: list[list[float]] = []
    normals_list: list[list[float]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) not in (3, 6):
            raise ParseError(f"expected 3 or 6 fields, got {len(fields)}", lineno)
        vals = _parse_floats(fields, lineno, len(fields))
        pts.append(vals[:3])
        if len(fields) == 6:
            if normals_list and len(normals_list) != len(pts) - 1:
                raise ParseError("mixed lines with and without normals", lineno)
            n = np.array(vals[3:])
            norm = np.linalg.norm(n)
            if norm < 1e-12:
                raise ParseError("zero normal cannot be normalized", lineno)
            if abs(norm - 1.0) > 1e-10:  # keep already-unit normals bit-exact
                n = n / norm
            normals_list.append(list(n))
        elif normals_list:
            raise ParseError("mixed lines with and without normals", lineno)
    normals = np.array(normals_list) if normals_list else None
    return PointCloud(np.array(pts, dtype=np.float64).reshape(-1, 3), normals)


def _normalize_normals(normals: np.ndarray, lineno) -> np.ndarray:
    norms = np.linalg.norm(normals, axis=1)
    if len(norms) and norms.min() < 1e-12:
        raise ParseError("zero normal cannot be normalized", lineno)
    fix = np.abs(norms - 1.0) > 1e-10  # keep already-unit normals bit-exact
    normals[fix] = normals[fix] / norms[fix, None]
    return normals


def write_points(cloud: PointCloud, path, format: str | None = None) -> None:
    """Write a point cloud in XYZ or ASCII PLY form; exact round-trip."""
    fmt = _infer_format(path, format, POINT_FORMATS)
    _write_text(path, points_to_text(cloud, fmt).splitlines())


def points_to_text(cloud: PointCloud, format: str) -> str:
    """Serialize a point cloud to file contents (same encoding as
    write_points)."""
    fmt = _infer_format("", format, POINT_FORMATS)
    p = cloud.points.tolist()
    n = None if cloud.normals is None else cloud.normals.tolist()
    out: list[str] = []
    if fmt == "xyz":
        if n is None:
            out.extend(f"{x!r} {y!r} {z!r}" for x, y, z in p)
        else:
            out.extend(f"{x!r} {y!r} {z!r} {a!r} {b!r} {c!r}"
                       for (x, y, z), (a, b, c) in zip(p, n))
    else:
        props = ["property double x", "property double y", "property double z"]
        if n is not None:
            props += ["property double nx", "property double ny", "property double nz"]
        out.extend(["ply", "format ascii 1.0", f"element vertex {len(p)}", *props,
                    "element face 0",
                    "property list uchar int vertex_indices", "end_header"])
        if n is None:
            out.extend(f"{x!r} {y!r} {z!r}" for x, y, z in p)
        else:
            out.extend(f"{x!r} {y!r} {z!r} {a!r} {b!r} {c!r}"
                       for (x, y, z), (a, b, c) in zip(p, n))
    return "\n".join(out) + ("\n" if out else "")


def _write_text(path, lines: list[str]) -> None:
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines))
            if lines:
                fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
