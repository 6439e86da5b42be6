"""First-order maximality diagnostics for volume-product candidates.

With the Santalo point at the origin, a maximizer among polytopes with a
fixed vertex count satisfies, at every vertex x (writing F(x) for the
facets through x, y_F = u_F/h_F for the polar vertex of facet F, and F_x
for the facet of the polar body supported by x):

    scalar balance:  |K^o| sum_{F in F(x)} |conv(F,0)|      =  n |K| |conv(F_x,0)|
    vector balance:  |K^o| sum_{F in F(x)} |conv(F,0)| y_F  =  n |K| |conv(F_x,0)| g_{F_x}

where g_{F_x} is the centroid of F_x.  A maximizer is additionally
simplicial, and in the plane every vertex is a multiple of the sum of its
two neighbors with one common ratio.  This module evaluates those
conditions and reports normalized residuals; the normalizer is the
right-hand magnitude n |K| |conv(F_x,0)|, which makes every residual
scale- and rotation-invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CenterNotInterior, DimensionMismatch, GeometryError
from .geometry import (
    DEFAULT_TOL,
    FacetComplex,
    Tolerance,
    VPolytope,
    cone_volumes,
    facet_centroid,
    hull,
    polar,
    volume,
)
from .santalo import SantaloOptions, recentered

_LAMBDA_DEGENERATE = 1e-4


def is_simplicial(P: VPolytope, C: FacetComplex) -> bool:
    """True iff every facet has exactly dim incident vertices."""
    return all(len(f.vertex_ids) == P.dim for f in C.facets)


@dataclass
class FirstOrderTerms:
    """Both sides of the balance conditions, per vertex of K.

    Arrays are indexed by canonical vertex id; ``nonsimplicial`` marks
    vertices incident to a facet with more than dim vertices, where the
    vector balance has no variational meaning.
    """

    lhs_scalar: np.ndarray
    rhs_scalar: np.ndarray
    lhs_vector: np.ndarray
    rhs_vector: np.ndarray
    nonsimplicial: np.ndarray
    volume: float
    polar_volume: float


def first_order_terms(P: VPolytope, C: FacetComplex, tol: Tolerance = DEFAULT_TOL) -> FirstOrderTerms:
    """Evaluate both sides of the balance conditions about the origin.

    The origin must be strictly interior; the conditions characterize
    maximizers only when it is also the Santalo point, which the public
    checkers arrange before calling this.
    """
    n = P.dim
    m = P.num_vertices
    if C.offsets.min() <= tol.at(P.scale):
        raise CenterNotInterior("origin is not strictly interior")

    vol = volume(P, C)
    origin = np.zeros(n)
    Ppol, Cpol = polar(P, C, origin, tol)
    pvol = volume(Ppol, Cpol)
    cones = cone_volumes(P, C, origin)
    cones_pol = cone_volumes(Ppol, Cpol, origin)
    y = C.normals / C.offsets[:, None] + 0.0  # kill signed zeros for row matching

    # Polar vertices come from facets of K; recover that map exactly.
    lookup = {row.tobytes(): fid for fid, row in enumerate(y)}
    polar_vid_of_facet = np.empty(C.num_facets, dtype=np.intp)
    for vid, row in enumerate(Ppol.vertices):
        key = row.tobytes()
        if key not in lookup:
            raise GeometryError("polar vertex does not correspond to a facet")
        polar_vid_of_facet[lookup[key]] = vid
    facet_by_vertex_set = {frozenset(f.vertex_ids): k for k, f in enumerate(Cpol.facets)}

    lhs_s = np.empty(m)
    rhs_s = np.empty(m)
    lhs_v = np.empty((m, n))
    rhs_v = np.empty((m, n))
    nonsimp = np.zeros(m, dtype=bool)
    for i in range(m):
        fids = list(C.adjacency[i])
        lhs_s[i] = pvol * cones[fids].sum()
        lhs_v[i] = pvol * (cones[fids] @ y[fids])
        key = frozenset(int(polar_vid_of_facet[f]) for f in fids)
        if key not in facet_by_vertex_set:
            raise GeometryError("dual facet of a vertex not found in the polar complex")
        pf = facet_by_vertex_set[key]
        rhs_s[i] = n * vol * cones_pol[pf]
        rhs_v[i] = rhs_s[i] * facet_centroid(Cpol, pf, Ppol)
        nonsimp[i] = any(len(C.facets[f].vertex_ids) > n for f in fids)
    return FirstOrderTerms(lhs_s, rhs_s, lhs_v, rhs_v, nonsimp, vol, pvol)


@dataclass
class PolygonLambdaTable:
    """Adjacent-vertex ratios of a Santalo-recentred polygon.

    ``lambdas[i]`` solves vertex_i ~ lambda * (prev + next) in least
    squares; ``degenerate`` marks vertices where prev + next is numerically
    zero (the square-symmetric case) and the ratio is reported as 0 and
    excluded from the spread.  ``collinearity`` is det(prev+next, x)
    normalized by the factor magnitudes.
    """

    lambdas: np.ndarray
    collinearity: np.ndarray
    degenerate: np.ndarray
    spread: float
    cyclic_order: tuple

    def to_dict(self):
        return {
            "lambdas": [float(x) for x in self.lambdas],
            "collinearity": [float(x) for x in self.collinearity],
            "degenerate": [bool(x) for x in self.degenerate],
            "spread": self.spread,
            "cyclic_order": list(self.cyclic_order),
        }


def _lambda_table(P: VPolytope) -> PolygonLambdaTable:
    """Ratio table for a polygon already recentred at its Santalo point."""
    V = P.vertices
    m = V.shape[0]
    center = V.mean(axis=0)
    angles = np.arctan2(V[:, 1] - center[1], V[:, 0] - center[0])
    order = np.argsort(angles, kind="stable")

    lam = np.zeros(m)
    col = np.zeros(m)
    degen = np.zeros(m, dtype=bool)
    for pos in range(m):
        i = order[pos]
        x = V[i]
        s = V[order[pos - 1]] + V[order[(pos + 1) % m]]
        ns = float(np.linalg.norm(s))
        nx = float(np.linalg.norm(x))
        col[i] = abs(s[0] * x[1] - s[1] * x[0]) / max(ns * nx, 1e-300)
        if ns <= _LAMBDA_DEGENERATE * nx:
            degen[i] = True
            lam[i] = 0.0
        else:
            lam[i] = float(x @ s) / (ns * ns)
    live = lam[~degen]
    spread = float(live.max() - live.min()) if live.size else 0.0
    return PolygonLambdaTable(lam, col, degen, spread, tuple(int(i) for i in order))


@dataclass
class CriticalityReport:
    """Normalized residuals of the maximality conditions, per vertex.

    ``inequality_slack`` is (rhs - lhs)/rhs of the scalar balance: negative
    entries rule out a maximizer.  ``worst`` is the largest scalar or
    vector residual; ``polygon_lambdas`` is present only in the plane.
    """

    simplicial: bool
    scalar_residuals: np.ndarray
    vector_residuals: np.ndarray
    inequality_slack: np.ndarray
    polygon_lambdas: PolygonLambdaTable | None
    worst: float
    nonsimplicial_warning: bool

    def to_dict(self):
        return {
            "simplicial": self.simplicial,
            "scalar_residuals": [float(x) for x in self.scalar_residuals],
            "vector_residuals": [float(x) for x in self.vector_residuals],
            "inequality_slack": [float(x) for x in self.inequality_slack],
            "polygon_lambdas": None
            if self.polygon_lambdas is None
            else self.polygon_lambdas.to_dict(),
            "worst": self.worst,
            "nonsimplicial_warning": self.nonsimplicial_warning,
        }


def vertex_residuals(
    P: VPolytope,
    C: FacetComplex | None = None,
    opts: SantaloOptions | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> CriticalityReport:
    """Evaluate the balance conditions after recentring the Santalo point.

    Recentring happens internally, so the report is meaningful for any
    full-dimensional input.
    """
    P2, C2, _ = recentered(P, C, opts, tol)
    t = first_order_terms(P2, C2, tol)
    denom = t.rhs_scalar
    if denom.min() <= 0.0:
        raise GeometryError("degenerate dual cone volume")
    scalar = np.abs(t.lhs_scalar - t.rhs_scalar) / denom
    vector = np.linalg.norm(t.lhs_vector - t.rhs_vector, axis=1) / denom
    slack = (t.rhs_scalar - t.lhs_scalar) / denom
    lam = _lambda_table(P2) if P2.dim == 2 else None
    return CriticalityReport(
        simplicial=is_simplicial(P2, C2),
        scalar_residuals=scalar,
        vector_residuals=vector,
        inequality_slack=slack,
        polygon_lambdas=lam,
        worst=float(max(scalar.max(), vector.max())),
        nonsimplicial_warning=bool(t.nonsimplicial.any()),
    )


def polygon_lambda_table(
    P: VPolytope,
    C: FacetComplex | None = None,
    opts: SantaloOptions | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> PolygonLambdaTable:
    """Adjacent-vertex ratio table of a polygon (recentred internally)."""
    if P.dim != 2:
        raise DimensionMismatch("ratio table is defined for polygons only")
    P2, _, _ = recentered(P, C, opts, tol)
    return _lambda_table(P2)


def minimizer_inequality_check(
    P: VPolytope,
    C: FacetComplex | None = None,
    opts: SantaloOptions | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> np.ndarray:
    """Per-vertex n|K||conv(F_x,0)| - |K^o| sum |conv(F,0)| after recentring.

    All entries <= tol is necessary for a volume-product minimizer; all
    entries >= -tol is necessary for a maximizer.
    """
    P2, C2, _ = recentered(P, C, opts, tol)
    t = first_order_terms(P2, C2, tol)
    return t.rhs_scalar - t.lhs_scalar
