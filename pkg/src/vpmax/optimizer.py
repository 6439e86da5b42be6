"""Vertex-gradient search for maximal volume product at fixed vertex count.

The ascent moves every vertex along the analytic gradient of
z -> |K(z)| |K(z)^o| (K(z) = hull with one vertex displaced to z, polar
taken about the Santalo point of the current iterate), which per vertex is

    grad_x = |K^o| sum_{F in F(x)} |conv(F,0)| y_F  -  n |K| |conv(F_x,0)| g_{F_x},

exactly the imbalance of the first-order maximality conditions.  Each
iteration recenters the Santalo point at the origin and rescales to unit
volume, then backtracks the step until the hull keeps its vertex count and
the volume product strictly increases.  Multistart with per-restart seeds
mitigates the lack of global concavity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constructions import closed_form_Pm, closed_form_simplex_vp, f_n_k
from .criticality import first_order_terms, is_simplicial
from .errors import (
    BadArity,
    BadFacet,
    DegenerateAlongPath,
    DegenerateInput,
    NoConvergence,
    StalledBelowTolerance,
    StartGenerationFailed,
    SubgradientWarning,
    TGridOutsideRegion,
)
from .geometry import (
    DEFAULT_TOL,
    FacetComplex,
    Tolerance,
    VPolytope,
    contains,
    facet_centroid,
    facet_measure,
    hull,
    polar,
    translate_and_scale,
    volume,
)
from .santalo import SantaloOptions, santalo_point, volume_product


@dataclass(frozen=True)
class AscendOptions:
    """Ascent knobs; defaults match the acceptance thresholds."""

    max_iters: int = 500
    tol_residual: float = 1e-6
    step_init: float = 0.1
    step_min: float = 1e-8
    step_max: float = 1.0
    step_growth: float = 1.6
    santalo: SantaloOptions = field(default_factory=SantaloOptions)


@dataclass
class OptimizeTrace:
    """Accepted-iterate history of one ascent (or the best restart).

    ``iterates`` rows are (vp, worst_residual, step); vp is nondecreasing.
    ``seed`` is the sub-seed of the restart that produced ``final``.
    """

    iterates: list
    final: VPolytope
    restarts_used: int
    seed: int
    converged: bool
    subgradient_fallbacks: int = 0

    @property
    def vp(self) -> float:
        return self.iterates[-1][0]

    @property
    def worst_residual(self) -> float:
        return self.iterates[-1][1]

    def to_dict(self):
        return {
            "iterates": [[float(a), float(b), float(c)] for a, b, c in self.iterates],
            "final": {
                "dim": self.final.dim,
                "vertices": [[float(x) for x in row] for row in self.final.vertices],
            },
            "restarts_used": self.restarts_used,
            "seed": self.seed,
            "converged": self.converged,
            "subgradient_fallbacks": self.subgradient_fallbacks,
        }


def _residuals(terms):
    denom = terms.rhs_scalar
    scalar = np.abs(terms.lhs_scalar - terms.rhs_scalar) / denom
    vector = np.linalg.norm(terms.lhs_vector - terms.rhs_vector, axis=1) / denom
    return float(max(scalar.max(), vector.max()))


def _fd_gradient_row(P: VPolytope, i: int, h: float, tol: Tolerance):
    """One-sided finite differences of |K(z)| |K(z)^o| in vertex i."""
    n = P.dim

    def val(pts):
        P1, C1 = hull(pts, tol)
        return volume(P1, C1) * volume(*polar(P1, C1, np.zeros(n), tol))

    base = val(P.vertices)
    g = np.zeros(n)
    for j in range(n):
        W = P.vertices.copy()
        W[i, j] += h
        g[j] = (val(W) - base) / h
    return g


def vp_gradient(
    P: VPolytope,
    vertex_id: int,
    C: FacetComplex | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> np.ndarray:
    """Gradient of the volume product in one vertex.

    Assumes the Santalo point already sits at the origin.  At vertices
    incident to a non-simplex facet the analytic formula does not apply;
    a SubgradientWarning is emitted and one-sided finite differences are
    used instead.
    """
    if C is None:
        P, C = hull(P.vertices, tol)
    terms = first_order_terms(P, C, tol)
    if terms.nonsimplicial[vertex_id]:
        warnings.warn(
            f"vertex {vertex_id} touches a non-simplex facet; "
            "falling back to finite differences",
            SubgradientWarning,
        )
        return _fd_gradient_row(P, vertex_id, 1e-7 * P.diameter, tol)
    return terms.lhs_vector[vertex_id] - terms.rhs_vector[vertex_id]


def _center_normalize(P, C, opts: AscendOptions, tol: Tolerance, warm: bool):
    """Move the Santalo point to the origin and rescale to unit volume."""
    z0 = np.zeros(P.dim) if warm and contains(C, np.zeros(P.dim), tol, P.scale) else None
    res = santalo_point(P, C, opts.santalo, z0=z0, tol=tol)
    vol = volume(P, C)
    P2, C2 = translate_and_scale(P, C, -res.s, vol ** (-1.0 / P.dim))
    return P2, C2, res.vp


def ascend(
    P0: VPolytope,
    opts: AscendOptions | None = None,
    C0: FacetComplex | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> OptimizeTrace:
    """Projected gradient ascent on the volume product.

    Keeps the vertex count fixed: a trial step is rejected (and the step
    halved) whenever the re-hulled candidate loses a vertex or its volume
    product does not strictly increase.  Terminates when the worst
    first-order residual drops below ``opts.tol_residual``; raises
    StalledBelowTolerance (trace attached) if the step underflows first.
    """
    opts = opts or AscendOptions()
    if C0 is None:
        P, C = hull(P0.vertices, tol)
    else:
        P, C = P0, C0
    m = P.num_vertices
    n = P.dim

    P, C, vp = _center_normalize(P, C, opts, tol, warm=False)
    step = opts.step_init
    iterates = []
    fallbacks = 0

    for _ in range(opts.max_iters):
        terms = first_order_terms(P, C, tol)
        worst = _residuals(terms)
        iterates.append((vp, worst, step))
        if worst <= opts.tol_residual:
            return OptimizeTrace(iterates, P, 1, -1, True, fallbacks)

        G = terms.lhs_vector - terms.rhs_vector
        if terms.nonsimplicial.any():
            h = 1e-7 * P.diameter
            for i in np.flatnonzero(terms.nonsimplicial):
                G[i] = _fd_gradient_row(P, int(i), h, tol)
                fallbacks += 1

        accepted = False
        while step >= opts.step_min:
            W = P.vertices + step * G
            try:
                P1, C1 = hull(W, tol)
            except DegenerateInput:
                step *= 0.5
                continue
            if P1.num_vertices != m:
                step *= 0.5
                continue
            try:
                P2, C2, vp1 = _center_normalize(P1, C1, opts, tol, warm=True)
            except NoConvergence:
                step *= 0.5
                continue
            if not (vp1 > vp):
                step *= 0.5
                continue
            accepted = True
            break
        if not accepted:
            trace = OptimizeTrace(iterates, P, 1, -1, False, fallbacks)
            raise StalledBelowTolerance(
                f"step underflowed at residual {worst:.3e}", trace=trace
            )
        P, C, vp = P2, C2, vp1
        step = min(step * opts.step_growth, opts.step_max)

    terms = first_order_terms(P, C, tol)
    worst = _residuals(terms)
    iterates.append((vp, worst, step))
    return OptimizeTrace(iterates, P, 1, -1, worst <= opts.tol_residual, fallbacks)


def _random_start(rng, n: int, m: int, tol: Tolerance, max_rejects: int = 1000):
    """m points uniform on the unit sphere forming a full-dimensional hull."""
    for _ in range(max_rejects):
        pts = rng.normal(size=(m, n))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        try:
            P, C = hull(pts, tol)
        except DegenerateInput:
            continue
        if P.num_vertices == m:
            return P, C
    raise StartGenerationFailed(
        f"no full-dimensional start with {m} extreme points in {max_rejects} draws"
    )


def _bump_points(P: VPolytope, C: FacetComplex, facet_id: int, t: float) -> np.ndarray:
    """Vertices of conv(K, x_F + t u_F) with x_F the centroid of facet F."""
    f = C.facets[facet_id]
    x = facet_centroid(C, facet_id, P) + t * f.normal
    return np.vstack([P.vertices, x])


def _repair_vertex_count(trace: OptimizeTrace, m: int, rng, opts, tol) -> OptimizeTrace:
    """Restore a lost vertex by bumping a facet outward, then re-ascend."""
    for _ in range(8):
        P = trace.final
        if P.num_vertices == m:
            return trace
        P, C = hull(P.vertices, tol)
        fid = int(rng.integers(C.num_facets))
        t = 1e-3 * P.diameter
        while t > 1e-12 * P.diameter:
            try:
                P1, C1 = hull(_bump_points(P, C, fid, t), tol)
            except DegenerateInput:
                t *= 0.25
                continue
            if P1.num_vertices == P.num_vertices + 1:
                break
            t *= 0.25
        else:
            continue
        try:
            trace = ascend(P1, opts, C1, tol)
        except StalledBelowTolerance as exc:
            trace = exc.trace
    return trace


def optimize_multistart(
    n: int,
    m: int,
    restarts: int,
    seed: int,
    opts: AscendOptions | None = None,
    tol: Tolerance = DEFAULT_TOL,
    threads: int | None = None,
) -> OptimizeTrace:
    """Best-of-restarts ascent from random spherical starts.

    Restart i draws from seed + i, so the result is deterministic and
    restarts may run concurrently; ties go to the lower sub-seed.
    """
    if m < n + 1:
        raise BadArity("need at least dim+1 vertices")
    opts = opts or AscendOptions()

    def run(i: int) -> OptimizeTrace:
        rng = np.random.default_rng(seed + i)
        P0, C0 = _random_start(rng, n, m, tol)
        try:
            trace = ascend(P0, opts, C0, tol)
        except StalledBelowTolerance as exc:
            trace = exc.trace
        if trace.final.num_vertices != m:
            trace = _repair_vertex_count(trace, m, rng, opts, tol)
        trace.seed = seed + i
        return trace

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            traces = list(pool.map(run, range(restarts)))
    else:
        traces = [run(i) for i in range(restarts)]

    best = min(traces, key=lambda tr: (-tr.vp, tr.seed))
    best.restarts_used = restarts
    return best


def sweep_M(
    n: int,
    m_range,
    restarts: int,
    seed: int,
    opts: AscendOptions | None = None,
    tol: Tolerance = DEFAULT_TOL,
    threads: int | None = None,
) -> list:
    """Estimate the maximal volume product for each vertex count in range.

    Returns rows (m, estimate, closed_form_or_None, gap); estimates must be
    strictly increasing in m and, in the plane, stay below pi^2.
    """
    rows = []
    for m in m_range:
        trace = optimize_multistart(n, m, restarts, seed, opts, tol, threads)
        known = None
        if m == n + 1:
            known = closed_form_simplex_vp(n).value
        elif n == 2:
            known = closed_form_Pm(m).value
        elif m == n + 2:
            known = f_n_k(n, n // 2).value
        gap = None if known is None else trace.vp - known
        rows.append((m, trace.vp, known, gap))
    return rows


@dataclass
class PerturbationProbe:
    """Samples of vp(conv(K, x_F + t u_F)) for small outward t.

    ``slope`` is the linear fit at 0+ and should match
    |K^o| |F| / n (``expected_slope``); ``decay_exponent`` fits the loss of
    polar volume at the frozen center, which decays like t^dim.
    """

    facet_id: int
    direction: np.ndarray
    t_max: float
    samples: list
    slope: float
    expected_slope: float
    polar_losses: list
    decay_exponent: float


def probe_facet_bump(
    P: VPolytope,
    facet_id: int,
    t_grid,
    C: FacetComplex | None = None,
    opts: SantaloOptions | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> PerturbationProbe:
    """First-order law of adding a vertex just beyond a facet centroid.

    The polytope is recentred first.  The grid must stay inside the region
    bounded by the planes of the facets adjacent to ``facet_id``.
    """
    from .santalo import recentered

    P, C, _ = recentered(P, C, opts, tol)
    if not 0 <= facet_id < C.num_facets:
        raise BadFacet(f"facet {facet_id} does not exist")
    f = C.facets[facet_id]
    x0 = facet_centroid(C, facet_id, P)
    u = f.normal

    # Admissible range: x0 + t u must stay inside every adjacent facet plane.
    fset = set(f.vertex_ids)
    t_max = math.inf
    for k, g in enumerate(C.facets):
        if k == facet_id or len(fset & set(g.vertex_ids)) < P.dim - 1:
            continue
        du = float(g.normal @ u)
        if du > 0:
            t_max = min(t_max, (g.offset - float(g.normal @ x0)) / du)

    ts = np.asarray(t_grid, dtype=float)
    if ts.size == 0 or ts.min() <= 0.0:
        raise TGridOutsideRegion("grid must be strictly positive")
    if ts.max() >= t_max:
        raise TGridOutsideRegion(f"grid exceeds admissible t_max = {t_max:g}")

    vp0 = volume(P, C) * volume(*polar(P, C, np.zeros(P.dim), tol))
    pv0 = volume(*polar(P, C, np.zeros(P.dim), tol))
    samples = []
    losses = []
    for t in ts:
        Pt, Ct = hull(_bump_points(P, C, facet_id, float(t)), tol)
        vpt = volume_product(Pt, Ct, opts, tol).vp
        samples.append((float(t), float(vpt)))
        pvt = volume(*polar(Pt, Ct, np.zeros(P.dim), tol))
        losses.append((float(t), float(pv0 - pvt)))

    tarr = np.array([s[0] for s in samples])
    varr = np.array([s[1] for s in samples])
    slope = float(np.polyfit(tarr, varr, 1)[0])
    expected = pv0 * facet_measure(C, facet_id, P) / P.dim

    larr = np.array([max(v, 0.0) for _, v in losses])
    mask = larr > 0
    if mask.sum() >= 2:
        decay = float(np.polyfit(np.log(tarr[mask]), np.log(larr[mask]), 1)[0])
    else:
        decay = math.nan
    return PerturbationProbe(
        facet_id=facet_id,
        direction=u.copy(),
        t_max=float(t_max),
        samples=samples,
        slope=slope,
        expected_slope=float(expected),
        polar_losses=losses,
        decay_exponent=decay,
    )


@dataclass
class ShadowProbe:
    """Convexity diagnostics along a single-vertex line path.

    Moving one vertex along a fixed line is a shadow system, so |K_t| must
    be convex in t and 1/|K_t^{s(K_t)}| must be convex in t; the minima of
    the raw second differences certify that on the sampled grid.
    """

    ts: np.ndarray
    volumes: np.ndarray
    inv_polar_volumes: np.ndarray
    vps: np.ndarray
    min_volume_second_diff: float
    min_inv_second_diff: float
    volume_affine: bool
    vp_unimodal: bool


def _second_differences(vals: np.ndarray) -> np.ndarray:
    return vals[:-2] - 2.0 * vals[1:-1] + vals[2:]


def _unimodal(vals: np.ndarray, rtol: float = 1e-9) -> bool:
    scale = float(np.max(np.abs(vals))) or 1.0
    d = np.diff(vals)
    d[np.abs(d) <= rtol * scale] = 0.0
    signs = [s for s in np.sign(d) if s != 0]
    flips = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    return flips <= 1


def shadow_convexity_probe(
    P: VPolytope,
    vertex_id: int,
    direction,
    t_grid,
    C: FacetComplex | None = None,
    opts: SantaloOptions | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> ShadowProbe:
    """Sample |K_t| and 1/|K_t^{s(K_t)}| along a single-vertex line path."""
    if C is None:
        P, C = hull(P.vertices, tol)
    d = np.asarray(direction, dtype=float)
    if d.shape != (P.dim,):
        raise DegenerateAlongPath("direction has wrong dimension")
    nd = np.linalg.norm(d)
    if nd == 0.0:
        raise DegenerateAlongPath("zero direction")
    d = d / nd

    ts = np.asarray(t_grid, dtype=float)
    vols = np.empty_like(ts)
    invs = np.empty_like(ts)
    vps = np.empty_like(ts)
    others = np.delete(P.vertices, vertex_id, axis=0)
    for k, t in enumerate(ts):
        pts = np.vstack([others, P.vertices[vertex_id] + t * d])
        try:
            Pt, Ct = hull(pts, tol)
        except DegenerateInput as exc:
            raise DegenerateAlongPath(f"path degenerates at t = {t:g}") from exc
        vols[k] = volume(Pt, Ct)
        res = volume_product(Pt, Ct, opts, tol)
        invs[k] = 1.0 / res.polar_volume
        vps[k] = res.vp

    sd_vol = _second_differences(vols) if ts.size >= 3 else np.zeros(0)
    sd_inv = _second_differences(invs) if ts.size >= 3 else np.zeros(0)
    min_vol = float(sd_vol.min()) if sd_vol.size else 0.0
    min_inv = float(sd_inv.min()) if sd_inv.size else 0.0
    affine = bool(sd_vol.size == 0 or np.max(np.abs(sd_vol)) <= 1e-9 * max(vols.max(), 1.0))
    return ShadowProbe(
        ts=ts,
        volumes=vols,
        inv_polar_volumes=invs,
        vps=vps,
        min_volume_second_diff=min_vol,
        min_inv_second_diff=min_inv,
        volume_affine=affine,
        vp_unimodal=_unimodal(vps),
    )
