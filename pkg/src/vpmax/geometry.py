"""Vertex-representation polytope kernel.

A polytope is stored by its extreme points in canonical (lexicographic)
order together with a facet complex: outward unit normals, offsets, the
exact facet-vertex incidence, and a deterministic triangulation of every
facet.  Volumes and centroids are evaluated from those triangulations, so
every number produced here is a deterministic function of the canonical
vertex array regardless of the order the input points arrived in.

Qhull (through scipy.spatial) supplies the hull combinatorics in dimension
two and above; coplanar output simplices are merged back into true facets
and all facet planes are re-derived from the canonical coordinates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull, Delaunay, QhullError

from .errors import (
    CenterNotInterior,
    DegenerateInput,
    DimensionMismatch,
    EmptyInput,
    GeometryError,
    IndexOutOfRange,
    SingularMatrix,
)

MAX_DIM = 6

# Rank decisions on stacks of unit normals (is this point a 0-face?).
_RANK_EPS = 1e-7


@dataclass(frozen=True)
class Tolerance:
    """Absolute plus relative tolerance used by all incidence tests."""

    rel_eps: float = 1e-9
    abs_eps: float = 1e-12

    def __post_init__(self):
        if not (self.rel_eps > 0.0 and self.abs_eps > 0.0):
            raise ValueError("tolerances must be strictly positive")

    def at(self, scale: float) -> float:
        """Tolerance for quantities of the given magnitude."""
        return self.abs_eps + self.rel_eps * float(abs(scale))


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True, eq=False)
class VPolytope:
    """Full-dimensional polytope given by its extreme points.

    ``vertices`` has shape (m, dim), rows sorted lexicographically, and is
    read-only.  Instances are produced by :func:`hull`; build them yourself
    only if you can guarantee the invariants.
    """

    dim: int
    vertices: np.ndarray

    def __post_init__(self):
        # +0.0 normalizes signed zeros so canonical rows are byte-comparable.
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=float) + 0.0)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @cached_property
    def diameter(self) -> float:
        """Largest pairwise vertex distance."""
        v = self.vertices
        diff = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((diff * diff).sum(-1).max()))

    @cached_property
    def scale(self) -> float:
        return float(np.max(np.abs(self.vertices)))

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"VPolytope(dim={self.dim}, m={self.num_vertices})"


@dataclass(frozen=True, eq=False)
class Facet:
    """One facet: outward unit normal, offset, and incident vertex ids.

    ``simplices`` is a deterministic triangulation of the facet into
    (dim-1)-simplices, each given by a sorted tuple of vertex ids.
    """

    normal: np.ndarray
    offset: float
    vertex_ids: tuple
    simplices: tuple

    def __post_init__(self):
        u = np.ascontiguousarray(np.asarray(self.normal, dtype=float))
        u.setflags(write=False)
        object.__setattr__(self, "normal", u)


@dataclass(frozen=True, eq=False)
class FacetComplex:
    """Facets of a VPolytope plus the vertex-to-facet adjacency."""

    facets: tuple
    adjacency: tuple

    @cached_property
    def normals(self) -> np.ndarray:
        return np.array([f.normal for f in self.facets])

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.array([f.offset for f in self.facets])

    @cached_property
    def all_simplices(self) -> np.ndarray:
        """All facet-triangulation simplices stacked, shape (N, dim)."""
        rows = [s for f in self.facets for s in f.simplices]
        return np.array(rows, dtype=np.intp)

    @cached_property
    def simplex_facet_ids(self) -> np.ndarray:
        ids = [i for i, f in enumerate(self.facets) for _ in f.simplices]
        return np.array(ids, dtype=np.intp)

    @property
    def num_facets(self) -> int:
        return len(self.facets)


# ---------------------------------------------------------------------------
# hull construction


def _fit_plane(points: np.ndarray, interior: np.ndarray):
    """Hyperplane through ``points`` oriented away from ``interior``.

    Returns (unit normal, offset, smallest tangential singular value).
    """
    mean = points.mean(axis=0)
    A = points - mean
    _, sing, vt = np.linalg.svd(A, full_matrices=True)
    u = vt[-1]
    d = float(u @ (mean - interior))
    if d < 0.0:
        u = -u
        d = -d
    n = points.shape[1]
    span = float(sing[n - 2]) if len(sing) >= n - 1 and n >= 2 else math.inf
    return u, float(u @ mean), span, d


def _triangulate_facet(ids, points, normal):
    """Triangulate a (possibly non-simplex) facet deterministically.

    Projects the facet onto an orthonormal basis of its hyperplane and
    triangulates there; vertex order is already canonical so the result is
    reproducible.
    """
    n = points.shape[1]
    if len(ids) == n:
        return (tuple(ids),)
    mean = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - mean, full_matrices=True)
    basis = vt[: n - 1]
    flat = (points - mean) @ basis.T
    try:
        tri = Delaunay(flat)
    except QhullError:
        tri = Delaunay(flat, qhull_options="QJ")
    simps = sorted({tuple(sorted(ids[j] for j in simp)) for simp in tri.simplices})
    return tuple(simps)


def _assemble(verts: np.ndarray, facet_sets, tol: Tolerance):
    """Build the canonical (VPolytope, FacetComplex) pair.

    ``verts`` must already contain extreme points only; ``facet_sets`` maps
    each facet to indices into ``verts``.  Planes and triangulations are
    re-derived here so the output does not depend on how the combinatorics
    were discovered.
    """
    verts = np.ascontiguousarray(np.asarray(verts, dtype=float))
    m, n = verts.shape
    order = np.lexsort(verts.T[::-1])
    V = verts[order]
    new_id = np.empty(m, dtype=np.intp)
    new_id[order] = np.arange(m)
    sets = sorted({tuple(sorted(int(new_id[i]) for i in s)) for s in facet_sets})

    scale = float(np.max(np.abs(V))) if V.size else 1.0
    c0 = V.mean(axis=0)
    vtol = 16.0 * tol.at(scale)

    facets = []
    for ids in sets:
        if len(ids) < n:
            raise GeometryError("facet with fewer than dim incident vertices")
        Vf = V[list(ids)]
        if n == 1:
            u = np.array([1.0 if Vf[0, 0] > c0[0] else -1.0])
            h = float(u[0] * Vf[0, 0])
            facets.append(Facet(u, h, ids, (tuple(ids),)))
            continue
        u, h, span, dist = _fit_plane(Vf, c0)
        if span <= tol.at(scale) * math.sqrt(len(ids)):
            raise GeometryError("facet vertices do not span a hyperplane")
        if dist <= tol.abs_eps:
            raise GeometryError("interior point lies on a facet plane")
        simplices = _triangulate_facet(ids, Vf, u)
        facets.append(Facet(u, h, ids, simplices))

    adjacency = [[] for _ in range(m)]
    for k, f in enumerate(facets):
        for i in f.vertex_ids:
            adjacency[i].append(k)
    if any(not a for a in adjacency):
        raise GeometryError("vertex incident to no facet")
    adjacency = tuple(tuple(a) for a in adjacency)

    P = VPolytope(n, V)
    C = FacetComplex(tuple(facets), adjacency)

    # Consistency: every vertex on or below each plane, incident ones on it.
    U, H = C.normals, C.offsets
    D = V @ U.T - H
    if D.max() > vtol:
        raise GeometryError("vertex outside a fitted facet plane")
    for k, f in enumerate(facets):
        if np.max(np.abs(D[list(f.vertex_ids), k])) > vtol:
            raise GeometryError("incident vertex off its facet plane")
    return P, C


def _merge_coplanar(pts, qh, tol, scale):
    """Union-find merge of adjacent coplanar qhull simplices.

    Returns a list of merged facets, each a set of input point indices.
    """
    tri = qh.simplices
    nb = qh.neighbors
    eqs = qh.equations
    n = pts.shape[1]
    T = len(tri)
    ptol = 8.0 * tol.at(scale)

    parent = list(range(T))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for t in range(T):
        for t2 in nb[t]:
            if t2 < 0 or t2 <= t:
                continue
            off1 = np.abs(pts[tri[t2]] @ eqs[t, :n] + eqs[t, n]).max()
            off2 = np.abs(pts[tri[t]] @ eqs[t2, :n] + eqs[t2, n]).max()
            if off1 <= ptol and off2 <= ptol:
                ra, rb = find(t), find(int(t2))
                if ra != rb:
                    parent[rb] = ra

    groups = {}
    for t in range(T):
        groups.setdefault(find(t), set()).update(int(i) for i in tri[t])
    return list(groups.values())


def _cluster_duplicates(cand_ids, pts, tol, scale):
    """Map near-identical candidate points to one representative id."""
    dtol = 2.0 * tol.at(scale)
    coords = pts[cand_ids]
    order = np.lexsort(coords.T[::-1])
    rep = {}
    kept = []
    for oi in order:
        pid = cand_ids[oi]
        p = pts[pid]
        matched = None
        for q in kept:
            if np.max(np.abs(pts[q] - p)) <= dtol:
                matched = q
                break
        if matched is None:
            kept.append(pid)
            rep[pid] = pid
        else:
            rep[pid] = matched
    return rep, kept


def hull(points, tol: Tolerance = DEFAULT_TOL):
    """Convex hull with facet incidence.

    Returns the canonical (VPolytope, FacetComplex) pair.  Interior and
    otherwise redundant points are dropped; the result is idempotent and
    independent of input point order.

    Raises EmptyInput for no points and DegenerateInput when the points do
    not affinely span the ambient space.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise EmptyInput("no input points")
    if pts.ndim != 2:
        raise DimensionMismatch("points must be a 2-d array of shape (m, dim)")
    m, n = pts.shape
    if not 1 <= n <= MAX_DIM:
        raise DimensionMismatch(f"dimension {n} outside supported range 1..{MAX_DIM}")
    if not np.isfinite(pts).all():
        raise DegenerateInput("non-finite coordinates")
    pts = np.unique(pts, axis=0)
    m = pts.shape[0]
    scale = float(np.max(np.abs(pts)))

    centered = pts - pts.mean(axis=0)
    sing = np.linalg.svd(centered, compute_uv=False)
    rank = int(np.sum(sing > tol.at(scale) * math.sqrt(max(m, 1))))
    if m < n + 1 or rank < n:
        raise DegenerateInput(
            f"points span an affine subspace of dimension {min(rank, m - 1)} < {n}"
        )

    if n == 1:
        verts = np.array([[pts.min()], [pts.max()]])
        return _assemble(verts, [(0,), (1,)], tol)

    try:
        qh = ConvexHull(pts, qhull_options="Qt")
    except QhullError as exc:
        raise DegenerateInput(f"qhull failed: {exc}") from exc

    merged = _merge_coplanar(pts, qh, tol, scale)
    cand_ids = sorted({i for g in merged for i in g})

    rep, kept = _cluster_duplicates(cand_ids, pts, tol, scale)
    merged = [{rep[i] for i in g} for g in merged]

    interior = pts[kept].mean(axis=0)
    planes = []
    for g in merged:
        u, h, _, _ = _fit_plane(pts[sorted(g)], interior)
        planes.append((u, h))
    U = np.array([p[0] for p in planes])
    H = np.array([p[1] for p in planes])

    # A kept point is a vertex iff its active facet normals span R^n.
    atol = 8.0 * tol.at(scale)
    P_c = pts[kept]
    active = np.abs(P_c @ U.T - H) <= atol
    extreme = []
    for row, pid in zip(active, kept):
        nact = U[row]
        if nact.shape[0] >= n and np.linalg.matrix_rank(nact, tol=_RANK_EPS) == n:
            extreme.append(pid)
    extreme_set = set(extreme)
    if len(extreme) < n + 1:
        raise DegenerateInput("hull has fewer than dim+1 extreme points at tolerance")

    local = {pid: k for k, pid in enumerate(extreme)}
    facet_sets = []
    for g in merged:
        ids = {local[i] for i in g if i in extreme_set}
        facet_sets.append(ids)
    return _assemble(pts[extreme], facet_sets, tol)


# ---------------------------------------------------------------------------
# measures


def cone_volumes(P: VPolytope, C: FacetComplex, apex) -> np.ndarray:
    """|conv(F, apex)| for every facet F, as an array over facet ids."""
    apex = np.asarray(apex, dtype=float)
    V = P.vertices
    n = P.dim
    S = C.all_simplices
    mats = V[S] - apex
    vols = np.abs(np.linalg.det(mats)) / math.factorial(n)
    out = np.zeros(C.num_facets)
    np.add.at(out, C.simplex_facet_ids, vols)
    return out


def volume(P: VPolytope, C: FacetComplex) -> float:
    """Volume by fan triangulation from the vertex-set centroid."""
    return float(cone_volumes(P, C, P.vertices.mean(axis=0)).sum())


def centroid(P: VPolytope, C: FacetComplex) -> np.ndarray:
    """Center of gravity of the solid polytope."""
    V = P.vertices
    n = P.dim
    c0 = V.mean(axis=0)
    S = C.all_simplices
    mats = V[S] - c0
    vols = np.abs(np.linalg.det(mats)) / math.factorial(n)
    cents = (c0 + V[S].sum(axis=1)) / (n + 1)
    total = vols.sum()
    return (vols[:, None] * cents).sum(axis=0) / total


def facet_measure(C: FacetComplex, f: int, P: VPolytope) -> float:
    """(dim-1)-dimensional measure of facet ``f``."""
    if not 0 <= f < C.num_facets:
        raise IndexOutOfRange(f"facet index {f} out of range")
    n = P.dim
    if n == 1:
        return 1.0
    V = P.vertices
    total = 0.0
    for s in C.facets[f].simplices:
        rows = V[list(s)]
        E = rows[1:] - rows[0]
        g = E @ E.T
        total += math.sqrt(max(float(np.linalg.det(g)), 0.0)) / math.factorial(n - 1)
    return total


def facet_centroid(C: FacetComplex, f: int, P: VPolytope) -> np.ndarray:
    """Center of gravity of facet ``f`` (lies on the facet plane)."""
    if not 0 <= f < C.num_facets:
        raise IndexOutOfRange(f"facet index {f} out of range")
    n = P.dim
    V = P.vertices
    facet = C.facets[f]
    if n == 1:
        return V[facet.vertex_ids[0]].copy()
    num = np.zeros(n)
    den = 0.0
    for s in facet.simplices:
        rows = V[list(s)]
        E = rows[1:] - rows[0]
        g = E @ E.T
        meas = math.sqrt(max(float(np.linalg.det(g)), 0.0))
        num += meas * rows.mean(axis=0)
        den += meas
    return num / den


def contains(C: FacetComplex, point, tol: Tolerance = DEFAULT_TOL, scale: float = 1.0) -> bool:
    """Membership test against the facet inequalities."""
    p = np.asarray(point, dtype=float)
    return bool(np.max(C.normals @ p - C.offsets) <= tol.at(scale))


# ---------------------------------------------------------------------------
# polarity and maps


def polar(P: VPolytope, C: FacetComplex, z, tol: Tolerance = DEFAULT_TOL):
    """Polar dual about interior center ``z``.

    The dual's vertices are z + u_F / (h_F - <u_F, z>), one per facet; the
    result is re-hulled so it carries its own canonical facet complex.
    Raises CenterNotInterior unless z is strictly inside.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (P.dim,):
        raise DimensionMismatch("center has wrong dimension")
    gaps = C.offsets - C.normals @ z
    if gaps.min() <= tol.at(P.scale):
        raise CenterNotInterior("polarity center is not strictly interior")
    W = z + C.normals / gaps[:, None]
    return hull(W, tol)


def affine_map(P: VPolytope, A, b=None, tol: Tolerance = DEFAULT_TOL) -> VPolytope:
    """Image of P under x -> A x + b, re-canonicalized."""
    A = np.asarray(A, dtype=float)
    n = P.dim
    if A.shape != (n, n):
        raise DimensionMismatch("matrix has wrong shape")
    if np.linalg.matrix_rank(A) < n:
        raise SingularMatrix("linear part is singular")
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float)
    W = P.vertices @ A.T + b
    return hull(W, tol)[0]


def translate_and_scale(P: VPolytope, C: FacetComplex, shift, factor: float):
    """Cheap exact transform x -> factor * (x + shift), factor > 0.

    Order-preserving, so the complex carries over with adjusted offsets and
    no re-hull.
    """
    if factor <= 0.0:
        raise SingularMatrix("scale factor must be positive")
    shift = np.asarray(shift, dtype=float)
    V = (P.vertices + shift) * factor
    facets = tuple(
        Facet(f.normal, (f.offset + float(f.normal @ shift)) * factor, f.vertex_ids, f.simplices)
        for f in C.facets
    )
    return VPolytope(P.dim, V), FacetComplex(facets, C.adjacency)


# ---------------------------------------------------------------------------
# distances


def _point_segment_distance(p, a, b):
    ab = b - a
    t = float(np.dot(p - a, ab) / np.dot(ab, ab))
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(p - (a + t * ab)))


def _point_polytope_distance(p, Q: VPolytope, CQ: FacetComplex) -> float:
    viol = float(np.max(CQ.normals @ p - CQ.offsets))
    if viol <= 0.0:
        return 0.0
    V = Q.vertices
    n = Q.dim
    if n == 1:
        return viol
    if n == 2:
        best = math.inf
        for f in CQ.facets:
            a, b = V[f.vertex_ids[0]], V[f.vertex_ids[1]]
            best = min(best, _point_segment_distance(p, a, b))
        return best
    # Projection onto conv(V) as a small simplex-constrained least squares.
    k = V.shape[0]

    def fun(lam):
        r = V.T @ lam - p
        return 0.5 * float(r @ r)

    def jac(lam):
        return V @ (V.T @ lam - p)

    x0 = np.zeros(k)
    x0[int(np.argmin(((V - p) ** 2).sum(axis=1)))] = 1.0
    res = minimize(
        fun,
        x0,
        jac=jac,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * k,
        constraints=[{"type": "eq", "fun": lambda lam: lam.sum() - 1.0, "jac": lambda lam: np.ones(k)}],
        options={"ftol": 1e-16, "maxiter": 400},
    )
    y = V.T @ res.x
    return max(float(np.linalg.norm(p - y)), viol)


def hausdorff_distance(P: VPolytope, Q: VPolytope, tol: Tolerance = DEFAULT_TOL) -> float:
    """Hausdorff distance between two polytopes of the same dimension.

    The farthest point of one body from the other is always a vertex, so
    this reduces to point-to-polytope projections.
    """
    if P.dim != Q.dim:
        raise DimensionMismatch("polytopes live in different dimensions")
    P1, C1 = hull(P.vertices, tol)
    Q1, C2 = hull(Q.vertices, tol)
    d = 0.0
    for v in P1.vertices:
        d = max(d, _point_polytope_distance(v, Q1, C2))
    for w in Q1.vertices:
        d = max(d, _point_polytope_distance(w, P1, C1))
    return d


# ---------------------------------------------------------------------------
# JSON interchange


def polytope_to_json(P: VPolytope) -> str:
    """Serialize to the interchange schema with 17 significant digits."""
    rows = ",\n    ".join(
        "[" + ", ".join(format(float(x), ".17g") for x in row) + "]"
        for row in P.vertices
    )
    return '{\n  "dim": %d,\n  "vertices": [\n    %s\n  ]\n}\n' % (P.dim, rows)


def polytope_from_json(text: str, tol: Tolerance = DEFAULT_TOL):
    """Parse the interchange schema; redundant points are legal and re-hulled."""
    data = json.loads(text)
    if not isinstance(data, dict) or "dim" not in data or "vertices" not in data:
        raise ValueError("polytope JSON must carry 'dim' and 'vertices'")
    n = int(data["dim"])
    verts = np.asarray(data["vertices"], dtype=float)
    if verts.ndim != 2 or verts.shape[1] != n:
        raise ValueError("vertex rows do not match 'dim'")
    return hull(verts, tol)


def write_polytope(P: VPolytope, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(polytope_to_json(P))


def read_polytope(path, tol: Tolerance = DEFAULT_TOL):
    with open(path, "r", encoding="utf-8") as fh:
        return polytope_from_json(fh.read(), tol)
