"""Conforming hexahedral mesh topology, built-in box meshes, and mesh file I/O.

A mesh is a list of immutable ElementGeometry objects plus face-connectivity
records.  Every interior (or periodic) face is stored exactly once as a
``FaceLink``; the ``left`` element owns the face and its outward normal.
Orientation codes 0..7 (the symmetries of the square) map the owner's face
grid (a, b) onto the neighbour's grid so that mapped indices are physically
coincident points.

The mesh file format is line-based text (see ``write_mesh_file``): per
element the 8 corner points, optional curved-face point grids, then the
face-neighbour table with orientation codes and explicitly listed periodic
pairs.
"""

from dataclasses import dataclass

import numpy as np

from splitdg import geometry, spectral

N_FACES = 6


def orientation_indices(code, n1):
    """Index arrays (A, B) with neighbour node = (A[a, b], B[a, b])."""
    a, b = np.meshgrid(np.arange(n1), np.arange(n1), indexing="ij")
    r = n1 - 1
    table = {
        0: (a, b),
        1: (b, a),
        2: (r - a, b),
        3: (b, r - a),
        4: (r - a, r - b),
        5: (r - b, r - a),
        6: (a, r - b),
        7: (r - b, a),
    }
    try:
        return table[code]
    except KeyError:
        raise ValueError(f"orientation code must be 0..7, got {code}") from None


def orientation_inverse(code):
    """The code of the inverse grid map (pairwise: 3 <-> 7, rest involutive)."""
    return {0: 0, 1: 1, 2: 2, 3: 7, 4: 4, 5: 5, 6: 6, 7: 3}[code]


@dataclass(frozen=True)
class FaceLink:
    """One shared face: ``left`` owns it; ``orient`` maps left grid to right."""

    left: int
    left_face: int
    right: int
    right_face: int
    orient: int = 0
    periodic: bool = False


@dataclass(frozen=True)
class BoundaryFace:
    element: int
    face: int
    tag: str


class MeshTopology:
    """Conforming curvilinear hex mesh: geometries + face connectivity."""

    def __init__(self, basis, geoms, links, boundary=()):
        self.basis = basis
        self.geoms = list(geoms)
        self.links = list(links)
        self.boundary = list(boundary)
        self.num_elements = len(self.geoms)
        self._validate()

    def _validate(self):
        seen = set()

        def claim(elem, face):
            if not (0 <= elem < self.num_elements and 0 <= face < N_FACES):
                raise ValueError(f"face reference out of range: element {elem} face {face}")
            key = (elem, face)
            if key in seen:
                raise ValueError(f"element {elem} face {face} referenced more than once")
            seen.add(key)

        for link in self.links:
            claim(link.left, link.left_face)
            claim(link.right, link.right_face)
            orientation_inverse(link.orient)
        for bf in self.boundary:
            claim(bf.element, bf.face)
        missing = self.num_elements * N_FACES - len(seen)
        if missing:
            raise ValueError(f"{missing} element faces have no neighbour or boundary tag")

    def face_mismatch(self):
        """Largest surface-element and normal disagreement across all links.

        Periodic partners must carry matching face geometry; for a watertight
        conforming mesh this is at roundoff level.
        """
        n1 = self.basis.n + 1
        worst_s, worst_n = 0.0, 0.0
        for link in self.links:
            ia, ib = orientation_indices(link.orient, n1)
            gl, gr = self.geoms[link.left], self.geoms[link.right]
            s_l = gl.s_hat[link.left_face]
            s_r = gr.s_hat[link.right_face][ia, ib]
            worst_s = max(worst_s, np.abs(s_l - s_r).max())
            n_l = gl.normal[link.left_face]
            n_r = gr.normal[link.right_face][:, ia, ib]
            worst_n = max(worst_n, np.abs(n_l + n_r).max())
        return worst_s, worst_n


def _box_cell_map(lo, widths, cells, index, warp=None):
    """Element map: reference cube -> cell ``index`` of a (warped) box."""
    lo = np.asarray(lo, dtype=float)
    widths = np.asarray(widths, dtype=float)
    h = widths / np.asarray(cells, dtype=float)
    offset = lo + h * np.asarray(index, dtype=float)

    def mapping(xi):
        trail = (1,) * (np.ndim(xi) - 1)
        box = offset.reshape((3,) + trail) + 0.5 * h.reshape((3,) + trail) * (xi + 1.0)
        if warp is None:
            return box
        return warp(box)

    return mapping


def _box_links(cells, periodic_dirs, bc_tag):
    """Face connectivity of a structured box; identity orientation throughout."""
    mx, my, mz = cells
    eid = lambda ix, iy, iz: (ix * my + iy) * mz + iz
    links, boundary = [], []
    plus_face = {0: 1, 1: 3, 2: 5}
    minus_face = {0: 0, 1: 2, 2: 4}
    for ix in range(mx):
        for iy in range(my):
            for iz in range(mz):
                e = eid(ix, iy, iz)
                idx = (ix, iy, iz)
                for d, m in ((0, mx), (1, my), (2, mz)):
                    nxt = list(idx)
                    nxt[d] += 1
                    wraps = nxt[d] == m
                    if wraps and d not in periodic_dirs:
                        boundary.append(BoundaryFace(e, plus_face[d], bc_tag))
                        if idx[d] == 0:
                            boundary.append(BoundaryFace(e, minus_face[d], bc_tag))
                        continue
                    if idx[d] == 0 and d not in periodic_dirs:
                        boundary.append(BoundaryFace(e, minus_face[d], bc_tag))
                    nxt[d] %= m
                    links.append(FaceLink(e, plus_face[d], eid(*nxt), minus_face[d], 0, wraps))
    return links, boundary


def box_mesh(n, cells=(2, 2, 2), bounds=((0.0, 1.0),) * 3, warp=None,
             metric_form="curl", periodic=True, bc_tag="dirichlet"):
    """Structured hex mesh of a box, optionally warped by a global map.

    Args:
        n: polynomial degree of the isoparametric geometry.
        cells: elements per direction.
        bounds: ((x0,x1), (y0,y1), (z0,z1)).
        warp: optional vectorized map applied to box coordinates; sampled at
            the LGL nodes of every element (isoparametric).
        periodic: True for fully periodic, or a tuple of periodic directions.
        bc_tag: tag given to non-periodic boundary faces.
    """
    basis = spectral.build_basis(n)
    lo = np.array([b[0] for b in bounds])
    widths = np.array([b[1] - b[0] for b in bounds])
    geoms = []
    for ix in range(cells[0]):
        for iy in range(cells[1]):
            for iz in range(cells[2]):
                mapping = _box_cell_map(lo, widths, cells, (ix, iy, iz), warp)
                geoms.append(geometry.ElementGeometry.from_mapping(basis, mapping, metric_form))
    periodic_dirs = (0, 1, 2) if periodic is True else tuple(periodic) if periodic else ()
    links, boundary = _box_links(cells, periodic_dirs, bc_tag)
    return MeshTopology(basis, geoms, links, boundary)


def sine_warp(amplitude=0.05, periods=(1, 1, 1), bounds=((0.0, 1.0),) * 3):
    """The built-in displacement field for curved periodic box meshes.

    Each coordinate is displaced by ``amplitude`` times the product of sines
    of the two transverse box coordinates, so the displacement vanishes on
    the box boundary in its own direction and is continuous across every
    periodic wrap.
    """
    lo = np.array([b[0] for b in bounds])
    widths = np.array([b[1] - b[0] for b in bounds])
    k = np.asarray(periods, dtype=float)

    def warp(box):
        trail = (1,) * (np.ndim(box) - 1)
        t = (box - lo.reshape((3,) + trail)) / widths.reshape((3,) + trail)
        s = np.sin(k.reshape((3,) + trail) * np.pi * t)
        disp = amplitude * np.stack([s[1] * s[2], s[0] * s[2], s[0] * s[1]])
        return box + disp

    return warp


def warped_box_mesh(n, cells=(4, 4, 4), amplitude=0.05, periods=(1, 1, 1),
                    bounds=((0.0, 1.0),) * 3, metric_form="curl", periodic=True,
                    bc_tag="dirichlet"):
    """Sinusoidally warped, fully periodic box: the standard curved test mesh."""
    warp = sine_warp(amplitude, periods, bounds)
    return box_mesh(n, cells, bounds, warp, metric_form, periodic, bc_tag)


def self_periodic_cube(n, warp=None, bounds=((0.0, 1.0),) * 3, metric_form="curl"):
    """Single element periodically glued to itself in all three directions."""
    return box_mesh(n, (1, 1, 1), bounds, warp, metric_form, periodic=True)


# ----------------------------------------------------------------------------
# Mesh file I/O
# ----------------------------------------------------------------------------

MESH_MAGIC = "splitdg-mesh 1"


def write_mesh_file(path, mesh, corners_list=None, curved_faces=None):
    """Write a mesh in the text format.

    Args:
        mesh: a MeshTopology.
        corners_list: optional per-element (8, 3) corner arrays; defaults to
            the corners of each element's mapped geometry.
        curved_faces: optional dict (element, face) -> (3, N+1, N+1) grid.
            By default every face of every element is written as curved,
            which reproduces the geometry exactly.
    """
    n1 = mesh.basis.n + 1
    lines = [MESH_MAGIC, f"degree {mesh.basis.n}", f"elements {mesh.num_elements}"]
    corner_index = [(0, 0, 0), (-1, 0, 0), (-1, -1, 0), (0, -1, 0),
                    (0, 0, -1), (-1, 0, -1), (-1, -1, -1), (0, -1, -1)]
    fmt = lambda p: " ".join(repr(float(v)) for v in p)
    for e, geom in enumerate(mesh.geoms):
        for ci, (i, j, k) in enumerate(corner_index):
            x = geom.x[:, i, j, k] if corners_list is None else corners_list[e][ci]
            lines.append(f"corner {e} {ci} {fmt(x)}")
    if curved_faces is None:
        curved_faces = {}
        for e, geom in enumerate(mesh.geoms):
            for f in range(N_FACES):
                curved_faces[(e, f)] = geom.x[geometry.face_slice(f)]
    for (e, f), grid in sorted(curved_faces.items()):
        lines.append(f"curved {e} {f}")
        for a in range(n1):
            for b in range(n1):
                lines.append(fmt(grid[:, a, b]))
    for link in mesh.links:
        kind = "periodic" if link.periodic else "link"
        lines.append(f"{kind} {link.left} {link.left_face} {link.right} {link.right_face} {link.orient}")
    for bf in mesh.boundary:
        lines.append(f"dirichlet {bf.element} {bf.face} {bf.tag}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


class MeshFileError(ValueError):
    pass


def read_mesh_file(path, degree=None, metric_form="curl"):
    """Read a mesh file; optionally re-interpolate the geometry to ``degree``.

    Re-interpolation of the face grids is exact when the requested degree is
    at least the degree stored in the file.
    """
    with open(path) as fh:
        raw = [ln.strip() for ln in fh]
    lines = [ln for ln in raw if ln and not ln.startswith("#")]
    if not lines or lines[0] != MESH_MAGIC:
        raise MeshFileError(f"{path}: not a splitdg mesh file")
    pos = 1

    def expect(keyword):
        nonlocal pos
        parts = lines[pos].split()
        if parts[0] != keyword:
            raise MeshFileError(f"{path}: expected '{keyword}', got '{lines[pos]}'")
        pos += 1
        return parts[1:]

    file_n = int(expect("degree")[0])
    num_elements = int(expect("elements")[0])
    n1 = file_n + 1
    corners = np.zeros((num_elements, 8, 3))
    curved = {}
    links, boundary = [], []
    while pos < len(lines):
        parts = lines[pos].split()
        key = parts[0]
        pos += 1
        if key == "corner":
            e, ci = int(parts[1]), int(parts[2])
            corners[e, ci] = [float(v) for v in parts[3:6]]
        elif key == "curved":
            e, f = int(parts[1]), int(parts[2])
            grid = np.empty((3, n1, n1))
            for a in range(n1):
                for b in range(n1):
                    vals = lines[pos].split()
                    pos += 1
                    grid[:, a, b] = [float(v) for v in vals[:3]]
            curved[(e, f)] = grid
        elif key in ("link", "periodic"):
            e, f, e2, f2, orient = (int(v) for v in parts[1:6])
            links.append(FaceLink(e, f, e2, f2, orient, key == "periodic"))
        elif key == "dirichlet":
            boundary.append(BoundaryFace(int(parts[1]), int(parts[2]), parts[3]))
        else:
            raise MeshFileError(f"{path}: unknown record '{key}'")

    run_n = file_n if degree is None else degree
    basis = spectral.build_basis(run_n)
    file_basis = spectral.build_basis(file_n)
    resample = None
    if run_n != file_n:
        resample = spectral.interpolation_matrix(file_basis, basis.nodes)

    geoms = []
    for e in range(num_elements):
        fd = geometry.faces_from_corners(corners[e], file_n)
        grids = [curved.get((e, f), fd.faces[f]) for f in range(N_FACES)]
        if resample is not None:
            grids = [np.einsum("am,bn,cmn->cab", resample, resample, g) for g in grids]
        face_def = geometry.FaceDefinition(grids)
        geoms.append(geometry.ElementGeometry.from_faces(basis, face_def, metric_form))
    return MeshTopology(basis, geoms, links, boundary)


def audit(mesh):
    """Per-element Jacobian range and metric-identity residuals.

    Returns a list of dict rows plus a summary dict; used by the CLI
    ``mesh audit`` subcommand.
    """
    rows = []
    for e, geom in enumerate(mesh.geoms):
        cross_ja, _ = geometry.metrics_cross_product(geom.covariant)
        rows.append({
            "element": e,
            "j_min": float(geom.j.min()),
            "j_max": float(geom.j.max()),
            "metric_residual": float(geom.metric_residual()),
            "cross_residual": float(geometry.metric_identity_residual(mesh.basis, cross_ja)),
        })
    s_gap, n_gap = mesh.face_mismatch()
    summary = {
        "elements": mesh.num_elements,
        "links": len(mesh.links),
        "boundary_faces": len(mesh.boundary),
        "face_s_hat_mismatch": float(s_gap),
        "face_normal_mismatch": float(n_gap),
        "worst_metric_residual": max(r["metric_residual"] for r in rows),
    }
    return rows, summary
