"""Acceptance checks wiring the whole pipeline against closed forms.

Each criterion function returns a CheckResult and is independent except for
the optimizer outputs, which are produced once per context and shared.  The
CLI ``verify`` command and the acceptance test module both run these.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .constructions import (
    POLYGON_VP_LIMIT,
    closed_form_Pm,
    closed_form_simplex_vp,
    closed_form_symmetric_vp,
    conv_two_simplices,
    cross_polytope,
    cube,
    f_n_k,
    regular_polygon,
    remark_counterexample,
    simplex,
)
from .criticality import polygon_lambda_table, vertex_residuals, is_simplicial
from .errors import UnknownSuite
from .geometry import (
    affine_map,
    hausdorff_distance,
    hull,
    volume,
)
from .optimizer import (
    AscendOptions,
    optimize_multistart,
    probe_facet_bump,
    shadow_convexity_probe,
    sweep_M,
    _random_start,
)
from .santalo import recentered, stability_probe, volume_product


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail} ({self.elapsed:.1f}s)"


@dataclass
class VerifyContext:
    """Memoizes optimizer runs shared between criteria."""

    threads: int | None = None
    _cache: dict = field(default_factory=dict)

    def multistart(self, n: int, m: int, restarts: int, seed: int = 0):
        key = (n, m, restarts, seed)
        if key not in self._cache:
            self._cache[key] = optimize_multistart(
                n, m, restarts, seed, threads=self.threads
            )
        return self._cache[key]


def _timed(fn):
    def wrapper(ctx: VerifyContext) -> CheckResult:
        t0 = time.perf_counter()
        name, passed, detail = fn(ctx)
        return CheckResult(name, passed, detail, time.perf_counter() - t0)

    wrapper.__name__ = fn.__name__
    return wrapper


def _align_to_regular(P, m: int) -> float:
    """Hausdorff distance to the regular m-gon after best-fit affine alignment."""
    target = regular_polygon(m)
    V = P.vertices
    center = V.mean(axis=0)
    order = np.argsort(np.arctan2(V[:, 1] - center[1], V[:, 0] - center[0]))
    A = V[order]
    T = target.vertices
    tc = T.mean(axis=0)
    torder = np.argsort(np.arctan2(T[:, 1] - tc[1], T[:, 0] - tc[0]))
    B = T[torder]

    ones = np.ones((m, 1))
    best = math.inf
    for flip in (False, True):
        Aa = A[::-1] if flip else A
        for shift in range(m):
            Bb = np.roll(B, shift, axis=0)
            X = np.hstack([Aa, ones])
            coef, *_ = np.linalg.lstsq(X, Bb, rcond=None)
            M, b = coef[:2].T, coef[2]
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            mapped = affine_map(P, M, b)
            best = min(best, hausdorff_distance(mapped, target))
    return best


@_timed
def criterion_1(ctx):
    """Planar maximality: multistart recovers the regular m-gon, m = 3..10."""
    t0 = time.perf_counter()
    worst_rel = worst_spread = worst_align = 0.0
    for m in range(3, 11):
        tr = ctx.multistart(2, m, 16)
        want = closed_form_Pm(m).value
        rel = abs(tr.vp - want) / want
        spread = polygon_lambda_table(tr.final).spread
        align = _align_to_regular(tr.final, m) / regular_polygon(m).diameter
        worst_rel = max(worst_rel, rel)
        worst_spread = max(worst_spread, spread)
        worst_align = max(worst_align, align)
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-5 and worst_spread <= 1e-5 and worst_align <= 1e-4 and elapsed <= 60.0
    return (
        "polygon maximality m=3..10",
        ok,
        f"worst vp rel {worst_rel:.2e}, lambda spread {worst_spread:.2e}, "
        f"aligned d_H/diam {worst_align:.2e}, runtime {elapsed:.1f}s <= 60s",
    )


@_timed
def criterion_2(ctx):
    """Pipeline volume products match every closed form to 1e-8."""
    t0 = time.perf_counter()
    worst = 0.0
    for m in range(3, 13):
        got = volume_product(regular_polygon(m)).vp
        worst = max(worst, abs(got - closed_form_Pm(m).value) / closed_form_Pm(m).value)
    for n in range(2, 6):
        want = closed_form_simplex_vp(n).value
        worst = max(worst, abs(volume_product(simplex(n)).vp - want) / want)
        want = closed_form_symmetric_vp(n).value
        worst = max(worst, abs(volume_product(cross_polytope(n)).vp - want) / want)
        worst = max(worst, abs(volume_product(cube(n)).vp - want) / want)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed <= 30.0
    return (
        "closed-form pipeline match",
        ok,
        f"worst rel err {worst:.2e}, runtime {elapsed:.1f}s <= 30s",
    )


@_timed
def criterion_3(ctx):
    """Hulls of two orthogonal simplices hit f_n(k); search finds 9 at (3,5)."""
    worst = 0.0
    mid_ok = True
    for n in (3, 4, 5):
        vals = {}
        for k in range(1, n):
            got = volume_product(conv_two_simplices(n, k)).vp
            want = f_n_k(n, k).value
            worst = max(worst, abs(got - want) / want)
            vals[k] = got
        kbest = max(vals, key=vals.get)
        if kbest not in (n // 2, (n + 1) // 2):
            mid_ok = False
    anchors = (
        abs(f_n_k(3, 1).value - 9.0),
        abs(f_n_k(4, 2).value - 729.0 / 96.0),
    )
    tr = ctx.multistart(3, 5, 16)
    search_rel = abs(tr.vp - 9.0) / 9.0
    ok = worst <= 1e-7 and mid_ok and max(anchors) <= 1e-12 and search_rel <= 1e-5
    return (
        "n+2 vertices",
        ok,
        f"worst closed-form rel {worst:.2e}, argmax at floor(n/2): {mid_ok}, "
        f"search (3,5) rel {search_rel:.2e}",
    )


@_timed
def criterion_4(ctx):
    """Volume of conv(L-x, M-y) factorizes; vp drops off-center."""
    rng = np.random.default_rng(4)
    worst = 0.0
    strict = True
    for n in range(2, 6):
        for k in range(1, n):
            L = simplex(k).vertices
            M = simplex(n - k).vertices
            base = conv_two_simplices(n, k)
            vpB, CB = hull(base.vertices)
            vol_want = (
                volume(*hull(L)) * volume(*hull(M)) / math.comb(n, k)
            )
            vp0 = volume_product(vpB, CB).vp
            for _ in range(20):
                wx = rng.dirichlet(np.ones(k + 1))
                wy = rng.dirichlet(np.ones(n - k + 1))
                x = wx @ L
                y = wy @ M
                pts = np.zeros((L.shape[0] + M.shape[0], n))
                pts[: L.shape[0], :k] = L - x
                pts[L.shape[0] :, k:] = M - y
                Pt, Ct = hull(pts)
                worst = max(worst, abs(volume(Pt, Ct) - vol_want) / vol_want)
                moved = max(np.linalg.norm(x), np.linalg.norm(y))
                if moved > 1e-9 and not volume_product(Pt, Ct).vp < vp0:
                    strict = False
    ok = worst <= 1e-10 and strict
    return (
        "volume factorization",
        ok,
        f"worst volume rel {worst:.2e}, vp strictly below centered value: {strict}",
    )


@_timed
def criterion_5(ctx):
    """Facet-bump first-order slope and polar-loss decay exponent."""
    details = []
    ok = True
    for P, label in ((cube(2), "square"), (regular_polygon(6), "hexagon")):
        Ph, Ch = hull(P.vertices)
        ts = np.geomspace(1e-5, 1e-3, 8) * Ph.diameter
        pr = probe_facet_bump(Ph, 0, ts, Ch)
        rel = abs(pr.slope - pr.expected_slope) / pr.expected_slope
        ok = ok and rel <= 0.05 and abs(pr.decay_exponent - 2.0) <= 0.2
        details.append(f"{label}: slope rel {rel:.3%}, decay {pr.decay_exponent:.2f}")
    return ("facet-bump first-order law", ok, "; ".join(details))


@_timed
def criterion_6(ctx):
    """Residuals: tiny on the square and optimizer outputs, large on the
    counterexample quadrilateral."""
    sq = vertex_residuals(*hull(cube(2).vertices))
    worst_opt = 0.0
    for key in ((2, m, 16, 0) for m in range(3, 11)):
        worst_opt = max(worst_opt, ctx.multistart(*key[:3]).worst_residual)
    for nm in ((3, 5, 16), (3, 6, 6), (3, 7, 6)):
        worst_opt = max(worst_opt, ctx.multistart(*nm).worst_residual)
    rem, Crem = hull(remark_counterexample().vertices)
    rep = vertex_residuals(rem, Crem)
    vp_rem = volume_product(rem, Crem).vp
    ok = sq.worst <= 1e-10 and worst_opt <= 1e-6 and rep.worst > 1e-2 and vp_rem < 8.0
    return (
        "criticality residuals",
        ok,
        f"square {sq.worst:.1e}, optimizer worst {worst_opt:.1e}, "
        f"counterexample {rep.worst:.1e} with vp {vp_rem:.4f} < 8",
    )


@_timed
def criterion_7(ctx):
    """Simpliciality of search outputs in R^3 for m = 5, 6, 7."""
    flags = []
    for nm in ((3, 5, 16), (3, 6, 6), (3, 7, 6)):
        tr = ctx.multistart(*nm)
        flags.append(is_simplicial(*hull(tr.final.vertices)))
    ok = all(flags)
    return ("maximizer simpliciality", ok, f"simplicial flags {flags}")


@_timed
def criterion_8(ctx):
    """Monotone vertex-count sweeps with the right anchors."""
    rows2 = sweep_M(2, range(3, 9), 8, 0, threads=ctx.threads)
    ests2 = [r[1] for r in rows2]
    inc = all(b > a for a, b in zip(ests2, ests2[1:]))
    below = all(e < POLYGON_VP_LIMIT for e in ests2)
    rows3 = sweep_M(3, range(4, 6), 8, 0, threads=ctx.threads)
    a34 = abs(rows3[0][1] - 64.0 / 9.0) / (64.0 / 9.0)
    a35 = abs(rows3[1][1] - 9.0) / 9.0
    ok = inc and below and a34 <= 1e-5 and a35 <= 1e-5
    return (
        "monotone sweep",
        ok,
        f"2d increasing {inc}, below pi^2 {below}, 3d anchors rel {a34:.1e}, {a35:.1e}",
    )


@_timed
def criterion_9(ctx):
    """Shadow-system convexity along 100 random single-vertex line paths."""
    rng = np.random.default_rng(9)
    min_vol = min_inv = math.inf
    count = 0
    from .geometry import DEFAULT_TOL

    for n in (2, 3):
        for _ in range(50):
            m = int(rng.integers(n + 2, n + 6))
            P, C = _random_start(rng, n, m, DEFAULT_TOL)
            vid = int(rng.integers(m))
            d = rng.normal(size=n)
            span = 0.15 * P.diameter
            ts = np.linspace(-span, span, 9)
            pr = shadow_convexity_probe(P, vid, d, ts, C)
            min_vol = min(min_vol, pr.min_volume_second_diff)
            min_inv = min(min_inv, pr.min_inv_second_diff)
            count += 1
    ok = count == 100 and min_vol >= -1e-9 and min_inv >= -1e-8
    return (
        "shadow-system convexity",
        ok,
        f"{count} paths, min d2|K_t| {min_vol:.1e} >= -1e-9, "
        f"min d2(1/|K_t^s|) {min_inv:.1e} >= -1e-8",
    )


@_timed
def criterion_10(ctx):
    """Quadratic stability of the recentred polar volume."""
    slopes = []
    for P in (cube(2), regular_polygon(5)):
        pr = stability_probe(P, np.geomspace(1e-4, 1e-2, 7))
        slopes.append(pr.slope)
    ok = all(s >= 1.8 for s in slopes)
    return ("stability exponent", ok, f"log-log slopes {[f'{s:.2f}' for s in slopes]}")


CRITERIA = (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
)

SUITES = {
    "polygons": (criterion_1, criterion_2, criterion_8),
    "n-plus-2": (criterion_3, criterion_4),
    "shadow": (criterion_9, criterion_10),
    "bump": (criterion_5,),
    "all": CRITERIA,
}


def run_suite(name: str, threads: int | None = None, echo=print) -> list:
    """Run one named suite; returns the CheckResults (echoing one line each)."""
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    ctx = VerifyContext(threads=threads)
    results = []
    for crit in SUITES[name]:
        res = crit(ctx)
        results.append(res)
        if echo:
            echo(res.line())
    return results
