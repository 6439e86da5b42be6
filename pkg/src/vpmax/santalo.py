"""Santalo point and volume product.

The Santalo point s(K) is the unique interior minimizer of z -> |K^z|; at
the minimum the centroid of (K - s)^polar sits at the origin, which serves
as the stationarity certificate.  The solver is a damped fixed-point walk
on that certificate: steps along minus the polar centroid with a
Barzilai-Borwein step length, Armijo backtracking on |K^z|, an interior
safeguard, and a coordinate-wise golden-section rescue on stagnation.

Polar volumes along the walk are evaluated from a fixed combinatorial
pattern (the dual face structure does not depend on z), which reduces each
evaluation to a batch of determinants.  The same batch yields the gradient
(n+1) |K^z| g and the Hessian (second moment of the polar body), so the
step direction is the Newton-preconditioned centroid, which keeps the
iteration count flat even for badly conditioned bodies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CenterNotInterior, GeometryError, NoConvergence
from .geometry import (
    DEFAULT_TOL,
    FacetComplex,
    Tolerance,
    VPolytope,
    centroid,
    hausdorff_distance,
    hull,
    polar,
    translate_and_scale,
    volume,
)


@dataclass(frozen=True)
class SantaloOptions:
    """Solver knobs; the residual tolerance is relative to the polar diameter."""

    max_iters: int = 200
    tol_residual: float = 1e-10
    damping: float = 1.0


@dataclass
class SantaloResult:
    """Santalo point with the polar volume and volume product at it.

    ``residual`` is the norm of the centroid of (K - s)^polar, the
    first-order certificate; ``vp`` is volume(K) * polar_volume.
    """

    s: np.ndarray
    polar_volume: float
    vp: float
    iterations: int
    residual: float

    def to_dict(self):
        return {
            "s": [float(x) for x in self.s],
            "polar_volume": self.polar_volume,
            "vp": self.vp,
            "iterations": self.iterations,
            "residual": self.residual,
        }


def _polar_pattern(P: VPolytope, C: FacetComplex, z0, tol: Tolerance) -> np.ndarray:
    """Triangulation pattern of the polar body in terms of facet ids.

    Row k lists the facets of K whose polar vertices span the k-th simplex
    of a triangulation of the boundary of (K - z)^polar.  The pattern is
    combinatorial, so one pattern serves every interior z.
    """
    n = P.dim
    if n == 1:
        return np.array([[0], [1]], dtype=np.intp)
    if n == 2:
        return np.array([list(pair) for pair in C.adjacency], dtype=np.intp)
    Ppol, Cpol = polar(P, C, z0, tol)
    gaps = C.offsets - C.normals @ np.asarray(z0, float)
    expected = np.asarray(z0, float) + C.normals / gaps[:, None] + 0.0
    lookup = {row.tobytes(): fid for fid, row in enumerate(expected)}
    facet_of = []
    for row in Ppol.vertices:
        key = row.tobytes()
        if key not in lookup:
            raise GeometryError("polar vertex does not match a facet of the primal")
        facet_of.append(lookup[key])
    facet_of = np.array(facet_of, dtype=np.intp)
    rows = []
    for f in Cpol.facets:
        for s in f.simplices:
            rows.append(tuple(int(facet_of[j]) for j in s))
    return np.array(sorted(rows), dtype=np.intp)


class _PolarEvaluator:
    """|(K - z)^polar|, its centroid, and the volume Hessian, from a fixed pattern."""

    def __init__(self, C: FacetComplex, pattern: np.ndarray, dim: int):
        self.U = C.normals
        self.H = C.offsets
        self.S = pattern
        self.n = dim
        self._nfact = math.factorial(dim)

    def __call__(self, z, with_hessian: bool = False):
        gaps = self.H - self.U @ z
        if gaps.min() <= 0.0:
            return math.inf, None, None, gaps
        Y = self.U / gaps[:, None]
        mats = Y[self.S]
        vols = np.abs(np.linalg.det(mats)) / self._nfact
        total = float(vols.sum())
        sums = mats.sum(axis=1)
        g = (vols[:, None] * sums).sum(axis=0) / ((self.n + 1) * total)
        hess = None
        if with_hessian:
            # Hessian of z -> |(K-z)^polar| from polar second moments:
            # per cone over a simplex with rows y_i the moment is
            # vol * (sum_i y_i y_i^T + s s^T) / ((n+1)(n+2)), and the
            # Hessian is (n+1)(n+2) times the total moment.
            hess = np.einsum("k,kij,kil->jl", vols, mats, mats)
            hess += np.einsum("k,kj,kl->jl", vols, sums, sums)
        return total, g, hess, gaps

    def polar_diameter(self, gaps) -> float:
        Y = self.U / gaps[:, None]
        diff = Y[:, None, :] - Y[None, :, :]
        return float(np.sqrt((diff * diff).sum(-1).max()))


def _golden_rescue(ev: _PolarEvaluator, z, value):
    """Coordinate-wise golden-section sweeps, used when backtracking stalls."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    n = ev.n
    for _ in range(2):
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            gaps = ev.H - ev.U @ z
            ue = ev.U @ e
            hi = min((0.95 * gaps[ue > 0] / ue[ue > 0]), default=math.inf)
            lo = -min((0.95 * gaps[ue < 0] / -ue[ue < 0]), default=math.inf)
            if not (math.isfinite(lo) and math.isfinite(hi)):
                continue
            a, b = lo, hi
            c, d = b - phi * (b - a), a + phi * (b - a)
            fc = ev(z + c * e)[0]
            fd = ev(z + d * e)[0]
            for _ in range(80):
                if fc < fd:
                    b, d, fd = d, c, fc
                    c = b - phi * (b - a)
                    fc = ev(z + c * e)[0]
                else:
                    a, c, fc = c, d, fd
                    d = a + phi * (b - a)
                    fd = ev(z + d * e)[0]
                if (b - a) < 1e-14 * (1.0 + abs(a) + abs(b)):
                    break
            t = 0.5 * (a + b)
            cand = z + t * e
            val = ev(cand)[0]
            if val < value:
                z, value = cand, val
    return z, value


def santalo_point(
    P: VPolytope,
    C: FacetComplex | None = None,
    opts: SantaloOptions | None = None,
    z0=None,
    tol: Tolerance = DEFAULT_TOL,
) -> SantaloResult:
    """Locate the Santalo point of a full-dimensional polytope.

    Starts at the body centroid (or ``z0``) and drives the polar-centroid
    certificate below ``opts.tol_residual`` times the polar diameter.
    Raises NoConvergence with the best iterate attached if the iteration
    cap is exceeded.
    """
    opts = opts or SantaloOptions()
    if C is None:
        P, C = hull(P.vertices, tol)
    n = P.dim

    z_init = centroid(P, C)
    pattern = _polar_pattern(P, C, z_init, tol)
    ev = _PolarEvaluator(C, pattern, n)

    z = np.asarray(z0, dtype=float) if z0 is not None else z_init
    val, g, hess, gaps = ev(z, with_hessian=True)
    if not math.isfinite(val):
        z = z_init
        val, g, hess, gaps = ev(z, with_hessian=True)
        if not math.isfinite(val):
            raise CenterNotInterior("no interior starting point for the solver")

    iterations = 0
    residual = float(np.linalg.norm(g))
    for it in range(1, opts.max_iters + 1):
        dpol = ev.polar_diameter(gaps)
        residual = float(np.linalg.norm(g))
        if residual <= opts.tol_residual * dpol:
            break
        iterations = it
        grad_val = (n + 1) * val * g
        try:
            d = -np.linalg.solve(hess, grad_val)
        except np.linalg.LinAlgError:
            d = -g
        if float(grad_val @ d) >= 0.0:
            d = -g

        ud = ev.U @ d
        pos = ud > 0
        cap = float(np.min(0.95 * gaps[pos] / ud[pos])) if pos.any() else math.inf
        tau = min(opts.damping, cap)

        slope = float(grad_val @ d)
        accepted = False
        for _ in range(60):
            cand = z + tau * d
            val1, g1, hess1, gaps1 = ev(cand, with_hessian=True)
            if math.isfinite(val1) and val1 <= val + 1e-4 * tau * slope:
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            z, val = _golden_rescue(ev, z, val)
            _, g, hess, gaps = ev(z, with_hessian=True)
            continue
        z, val, g, hess, gaps = cand, val1, g1, hess1, gaps1
    else:
        residual = float(np.linalg.norm(g))
        dpol = ev.polar_diameter(gaps)
        if residual > opts.tol_residual * dpol:
            best = SantaloResult(z, val, volume(P, C) * val, iterations, residual)
            raise NoConvergence(
                f"santalo solver did not reach residual {opts.tol_residual:g} "
                f"in {opts.max_iters} iterations",
                best=best,
            )

    # Confirm against an explicit polar hull; this also guards against a
    # stale triangulation pattern far from where it was built.
    pv_hull = volume(*polar(P, C, z, tol))
    if abs(pv_hull - val) > 1e-8 * pv_hull:
        pattern = _polar_pattern(P, C, z, tol)
        ev = _PolarEvaluator(C, pattern, n)
        val, g, _, gaps = ev(z)
        residual = float(np.linalg.norm(g))
        pv_hull = volume(*polar(P, C, z, tol))
        if abs(pv_hull - val) > 1e-8 * pv_hull:
            raise GeometryError("polar volume pattern disagrees with explicit hull")

    vol = volume(P, C)
    return SantaloResult(
        s=z,
        polar_volume=pv_hull,
        vp=vol * pv_hull,
        iterations=iterations,
        residual=residual,
    )


def polar_volume_at(P: VPolytope, C: FacetComplex, z, tol: Tolerance = DEFAULT_TOL) -> float:
    """|K^z| for interior z; the objective the Santalo point minimizes."""
    return volume(*polar(P, C, z, tol))


def volume_product(
    P: VPolytope,
    C: FacetComplex | None = None,
    opts: SantaloOptions | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> SantaloResult:
    """P(K) = |K| |K^{s(K)}| together with the Santalo point found."""
    if C is None:
        P, C = hull(P.vertices, tol)
    return santalo_point(P, C, opts, tol=tol)


def recentered(
    P: VPolytope,
    C: FacetComplex | None = None,
    opts: SantaloOptions | None = None,
    tol: Tolerance = DEFAULT_TOL,
):
    """Translate the Santalo point to the origin.

    Returns (P', C', result); result.s refers to the original coordinates.
    """
    if C is None:
        P, C = hull(P.vertices, tol)
    res = santalo_point(P, C, opts, tol=tol)
    P2, C2 = translate_and_scale(P, C, -res.s, 1.0)
    return P2, C2, res


@dataclass
class StabilityProbe:
    """Gap between re-optimized and frozen-center polar volumes of a perturbation.

    ``gaps[k]`` is |L^{s(L)}| - |L^{s(K)}| for the body L obtained by moving
    one vertex of the recentred K by ts[k] along a fixed unit direction;
    ``slope`` is the log-log fit of |gap| against Hausdorff distance.
    """

    ts: np.ndarray
    gaps: np.ndarray
    hausdorffs: np.ndarray
    slope: float
    direction: np.ndarray = field(default_factory=lambda: np.zeros(0))


def stability_probe(
    P: VPolytope,
    ts,
    vertex_id: int = 0,
    seed: int = 0,
    C: FacetComplex | None = None,
    opts: SantaloOptions | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> StabilityProbe:
    """Quadratic-decay probe for the Santalo recentring error.

    Recenters K, then displaces ``vertex_id`` by t*u for each t and records
    |L^{s(L)}| - |L^{s(K)}| (the frozen center is the origin) and d_H(K, L).
    """
    P, C, _ = recentered(P, C, opts, tol)
    n = P.dim
    rng = np.random.default_rng(seed)
    u = rng.normal(size=n)
    u /= np.linalg.norm(u)

    ts = np.asarray(ts, dtype=float)
    gaps = np.empty_like(ts)
    dhs = np.empty_like(ts)
    for k, t in enumerate(ts):
        if t == 0.0:
            gaps[k] = 0.0
            dhs[k] = 0.0
            continue
        W = P.vertices.copy()
        W[vertex_id] = W[vertex_id] + t * u
        L, CL = hull(W, tol)
        pv_frozen = polar_volume_at(L, CL, np.zeros(n), tol)
        pv_opt = santalo_point(L, CL, opts, tol=tol).polar_volume
        gaps[k] = pv_opt - pv_frozen
        dhs[k] = hausdorff_distance(P, L, tol)

    mask = (np.abs(gaps) > 0.0) & (dhs > 0.0)
    if mask.sum() >= 2:
        coeffs = np.polyfit(np.log(dhs[mask]), np.log(np.abs(gaps[mask])), 1)
        slope = float(coeffs[0])
    else:
        slope = math.nan
    return StabilityProbe(ts=ts, gaps=gaps, hausdorffs=dhs, slope=slope, direction=u)
