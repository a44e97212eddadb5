"""Structured grid families on square domains with full edge topology.

Two families are supported: uniform right triangles (each cell split by
its SW-NE diagonal) and non-convex "zigzag" pentagons (each cell split by
the polyline (0,0)-(1/3,1/2)-(2/3,1/2)-(1,1) in cell-local coordinates).
Both tile the unit square (0,1)^2 or the bi-unit square (-1,1)^2 so that
the coordinate axes are always mesh lines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_ELEMENTS = 2_000_000

DOMAINS = {
    "unit_square": (0.0, 1.0),
    "biunit_square": (-1.0, 1.0),
}


class MeshError(Exception):
    """Raised for invalid mesh construction or I/O."""


class MeshCapacityError(MeshError):
    """Requested refinement level exceeds the element-count cap."""


@dataclass(frozen=True)
class Edge:
    """Mesh edge with incidence data.

    ``elements`` lists the one (boundary) or two (interior) incident
    element indices. ``normals[i]`` is the unit normal pointing out of
    ``elements[i]``.
    """

    endpoints: tuple[int, int]
    elements: tuple[int, ...]
    normals: tuple[tuple[float, float], ...]
    length: float
    is_boundary: bool

    def unit_normal_of(self, element: int) -> np.ndarray:
        """Unit outward normal of this edge as seen from ``element``."""
        for e, n in zip(self.elements, self.normals):
            if e == element:
                return np.asarray(n)
        raise MeshError(f"element {element} is not incident to edge {self.endpoints}")


@dataclass(frozen=True)
class Element:
    """Polygonal element: counterclockwise vertex loop plus metrics."""

    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    diameter: float
    area: float
    centroid: tuple[float, float]


@dataclass
class Mesh:
    """Conforming polygonal partition of a square domain.

    Immutable after construction; all topology (edges, incidence,
    boundary flags) is derived from the element vertex loops.
    """

    vertices: np.ndarray
    elements: list[Element]
    edges: list[Edge]
    h: float
    domain: str

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def boundary_edges(self) -> list[int]:
        return [i for i, e in enumerate(self.edges) if e.is_boundary]

    def element_coords(self, t: int) -> np.ndarray:
        """Vertex coordinates of element ``t``, shape (m, 2), CCW."""
        return self.vertices[list(self.elements[t].vertices)]


def _polygon_area_centroid(pts: np.ndarray) -> tuple[float, tuple[float, float]]:
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    if abs(area) < 1e-30:
        raise MeshError("degenerate polygon (zero area)")
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    return area, (cx, cy)


def _polygon_diameter(pts: np.ndarray) -> float:
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((d ** 2).sum(-1)).max())


def build_mesh(vertices: np.ndarray, element_vertices: list[list[int]], domain: str) -> Mesh:
    """Assemble a Mesh from vertex coordinates and CCW element loops.

    Edge topology, incidence, outward normals and boundary flags are
    derived here. Raises MeshError on degenerate elements or dangling
    vertex references.
    """
    vertices = np.asarray(vertices, dtype=float)
    nv = vertices.shape[0]
    elements: list[Element] = []
    edge_index: dict[tuple[int, int], int] = {}
    edge_endpoints: list[tuple[int, int]] = []
    edge_elems: list[list[int]] = []
    edge_normals: list[list[tuple[float, float]]] = []
    elem_edges: list[list[int]] = []

    for t, loop in enumerate(element_vertices):
        if any(v < 0 or v >= nv for v in loop):
            raise MeshError(f"element {t} references a missing vertex")
        pts = vertices[loop]
        area, centroid = _polygon_area_centroid(pts)
        diam = _polygon_diameter(pts)
        elements.append(Element(tuple(loop), (), diam, area, centroid))
        elem_edges.append([])
        m = len(loop)
        for i in range(m):
            a, b = loop[i], loop[(i + 1) % m]
            key = (min(a, b), max(a, b))
            dx, dy = vertices[b] - vertices[a]
            length = float(np.hypot(dx, dy))
            if length < 1e-30:
                raise MeshError(f"element {t} has a zero-length edge")
            normal = (dy / length, -dx / length)
            if key not in edge_index:
                edge_index[key] = len(edge_endpoints)
                edge_endpoints.append(key)
                edge_elems.append([])
                edge_normals.append([])
            ei = edge_index[key]
            if len(edge_elems[ei]) >= 2:
                raise MeshError(f"edge {key} is shared by more than two elements")
            edge_elems[ei].append(t)
            edge_normals[ei].append(normal)
            elem_edges[t].append(ei)

    edges = []
    for ep, elems, normals in zip(edge_endpoints, edge_elems, edge_normals):
        length = float(np.hypot(*(vertices[ep[1]] - vertices[ep[0]])))
        edges.append(Edge(ep, tuple(elems), tuple(normals), length, len(elems) == 1))

    elements = [
        Element(e.vertices, tuple(elem_edges[t]), e.diameter, e.area, e.centroid)
        for t, e in enumerate(elements)
    ]
    h = max(e.diameter for e in elements)
    return Mesh(vertices, elements, edges, h, domain)


def generate_grid(family: str, level: int, domain: str = "unit_square") -> Mesh:
    """Generate a structured grid.

    Parameters
    ----------
    family : {'triangular', 'polygonal'}
        Cell split: SW-NE diagonal, or the zigzag pentagon pair.
    level : int
        Refinement level (>= 1). The domain is divided into n x n
        square cells with n = 2**(level-1) on the unit square and
        n = 2**level on the bi-unit square, so refinement halves h and
        the coordinate axes are always mesh lines.
    domain : {'unit_square', 'biunit_square'}
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    if family not in ("triangular", "polygonal"):
        raise ValueError(f"unknown grid family {family!r}")
    if domain not in DOMAINS:
        raise ValueError(f"unknown domain {domain!r}")
    lo, hi = DOMAINS[domain]
    n = 2 ** (level - 1) if domain == "unit_square" else 2 ** level
    if 2 * n * n > MAX_ELEMENTS:
        raise MeshCapacityError(f"level {level} would create {2 * n * n} elements")

    size = (hi - lo) / n
    # grid corner (i, j) -> vertex index i*(n+1)+j, i along x
    xs = lo + size * np.arange(n + 1)
    verts = [(xs[i], xs[j]) for i in range(n + 1) for j in range(n + 1)]

    def corner(i: int, j: int) -> int:
        return i * (n + 1) + j

    elems: list[list[int]] = []
    if family == "triangular":
        for i in range(n):
            for j in range(n):
                sw, se = corner(i, j), corner(i + 1, j)
                nw, ne = corner(i, j + 1), corner(i + 1, j + 1)
                elems.append([sw, se, ne])
                elems.append([sw, ne, nw])
    else:
        for i in range(n):
            for j in range(n):
                x0, y0 = xs[i], xs[j]
                p = len(verts)
                verts.append((x0 + size / 3.0, y0 + size / 2.0))
                q = len(verts)
                verts.append((x0 + 2.0 * size / 3.0, y0 + size / 2.0))
                sw, se = corner(i, j), corner(i + 1, j)
                nw, ne = corner(i, j + 1), corner(i + 1, j + 1)
                elems.append([sw, p, q, ne, nw])
                elems.append([sw, se, ne, q, p])

    return build_mesh(np.array(verts), elems, domain)


@dataclass
class ValidationReport:
    """Outcome of mesh validation.

    ``issues`` holds (check, entity, message) triples for every violated
    invariant; ``chunkiness`` is (min, max) of inscribed-circle diameter
    over element diameter.
    """

    passed: bool
    issues: list[tuple[str, int, str]] = field(default_factory=list)
    chunkiness: tuple[float, float] = (0.0, 0.0)


def _inscribed_diameter(pts: np.ndarray) -> float:
    from shapely.geometry import Polygon
    from shapely.ops import polylabel

    poly = Polygon(pts)
    center = polylabel(poly, tolerance=1e-4 * np.sqrt(poly.area))
    return 2.0 * poly.exterior.distance(center)


def validate(mesh: Mesh) -> ValidationReport:
    """Check conformity, orientation, area tiling and normal consistency."""
    issues: list[tuple[str, int, str]] = []

    for t, el in enumerate(mesh.elements):
        pts = mesh.element_coords(t)
        area, _ = _polygon_area_centroid(pts)
        if area <= 0:
            issues.append(("orientation", t, f"element {t} is not counterclockwise"))
        diam = _polygon_diameter(pts)
        if abs(diam - el.diameter) > 1e-12 * max(diam, 1.0):
            issues.append(("diameter", t, f"stored diameter of element {t} is stale"))

    for i, e in enumerate(mesh.edges):
        if e.is_boundary and len(e.elements) != 1:
            issues.append(("incidence", i, f"boundary edge {i} has {len(e.elements)} elements"))
        if not e.is_boundary:
            if len(e.elements) != 2:
                issues.append(("incidence", i, f"interior edge {i} has {len(e.elements)} elements"))
            else:
                n0, n1 = (np.asarray(v) for v in e.normals)
                if np.abs(n0 + n1).max() > 1e-12:
                    issues.append(("normals", i, f"normals of interior edge {i} are not opposite"))
        for n in e.normals:
            if abs(np.hypot(*n) - 1.0) > 1e-12:
                issues.append(("normals", i, f"edge {i} normal is not unit"))

    # conformity: every element boundary segment must be a full mesh edge of
    # both neighbors; build_mesh guarantees matching endpoint pairs, so the
    # remaining hazard is a vertex of one element interior to an edge of
    # another (a hanging node).
    pts_all = mesh.vertices
    for i, e in enumerate(mesh.edges):
        a = mesh.vertices[e.endpoints[0]]
        b = mesh.vertices[e.endpoints[1]]
        ab = b - a
        ap = pts_all - a
        t = ap @ ab / (ab @ ab)
        dist = np.abs(ab[0] * ap[:, 1] - ab[1] * ap[:, 0]) / np.hypot(*ab)
        hanging = (t > 1e-10) & (t < 1 - 1e-10) & (dist < 1e-12 * max(1.0, e.length))
        for v in np.nonzero(hanging)[0]:
            issues.append(("conformity", i, f"vertex {v} hangs on edge {i}"))

    lo, hi = DOMAINS[mesh.domain]
    domain_area = (hi - lo) ** 2
    total = sum(el.area for el in mesh.elements)
    if abs(total - domain_area) > 1e-10 * domain_area:
        issues.append(("tiling", -1, f"element areas sum to {total}, expected {domain_area}"))

    for i in mesh.boundary_edges:
        a, b = (mesh.vertices[v] for v in mesh.edges[i].endpoints)
        on_boundary = all(
            min(abs(p[0] - lo), abs(p[0] - hi), abs(p[1] - lo), abs(p[1] - hi)) < 1e-12
            for p in (a, b)
        )
        if not on_boundary:
            issues.append(("boundary", i, f"boundary edge {i} does not lie on the domain boundary"))

    ratios = []
    for t in range(mesh.n_elements):
        pts = mesh.element_coords(t)
        area, _ = _polygon_area_centroid(pts)
        if area > 0:
            ratios.append(_inscribed_diameter(pts) / mesh.elements[t].diameter)
    chunk = (min(ratios), max(ratios)) if ratios else (0.0, 0.0)

    return ValidationReport(passed=not issues, issues=issues, chunkiness=chunk)


def write_mesh(mesh: Mesh, sink) -> None:
    """Write the plain-text mesh format (header ``wgmesh 1``)."""
    own = isinstance(sink, (str, bytes))
    f = open(sink, "w") if own else sink
    try:
        f.write("wgmesh 1\n")
        f.write(f"{mesh.n_vertices} {mesh.n_elements} {mesh.domain}\n")
        for x, y in mesh.vertices:
            f.write(f"{x:.17g} {y:.17g}\n")
        for el in mesh.elements:
            f.write(f"{len(el.vertices)} " + " ".join(str(v) for v in el.vertices) + "\n")
    finally:
        if own:
            f.close()


def read_mesh(source) -> Mesh:
    """Read the plain-text mesh format; topology is rebuilt on read."""
    own = isinstance(source, (str, bytes))
    f = open(source) if own else source
    try:
        lines = f.read().splitlines()
    finally:
        if own:
            f.close()

    def fail(lineno: int, msg: str):
        raise MeshError(f"line {lineno + 1}: {msg}")

    if not lines or lines[0].strip() != "wgmesh 1":
        fail(0, "expected header 'wgmesh 1'")
    try:
        parts = lines[1].split()
        nv, ne = int(parts[0]), int(parts[1])
        domain = parts[2] if len(parts) > 2 else "unit_square"
    except (IndexError, ValueError):
        fail(1, "expected 'nv ne [domain]'")
    if domain not in DOMAINS:
        fail(1, f"unknown domain {domain!r}")

    verts = np.empty((nv, 2))
    for i in range(nv):
        try:
            x, y = map(float, lines[2 + i].split())
        except (IndexError, ValueError):
            fail(2 + i, "expected vertex line 'x y'")
        verts[i] = (x, y)

    elems = []
    for j in range(ne):
        lineno = 2 + nv + j
        try:
            nums = list(map(int, lines[lineno].split()))
            m, loop = nums[0], nums[1:]
            if len(loop) != m:
                raise ValueError
        except (IndexError, ValueError):
            fail(lineno, "expected element line 'm v1 ... vm'")
        if any(v < 0 or v >= nv for v in loop):
            fail(lineno, f"element {j} references a missing vertex")
        elems.append(loop)

    return build_mesh(verts, elems, domain)
