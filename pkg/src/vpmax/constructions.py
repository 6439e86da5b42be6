"""Closed-form oracle polytopes and extremal values.

Regular and sheared polygons, regular simplices, cubes and cross-polytopes,
hulls of two orthogonal simplices, and the quadrilateral showing that
adding a vertex carelessly can lower the volume product.  Every closed form
here is exactly reproducible by the numerical pipeline, which is what the
acceptance suite checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadArity, SingularMatrix
from .geometry import MAX_DIM, VPolytope, hull

#: Limit of the m-gon volume product as m grows (the disk value pi^2).
POLYGON_VP_LIMIT = math.pi**2


@dataclass(frozen=True)
class ClosedFormValue:
    label: str
    value: float
    provenance: str

    def to_dict(self):
        return {"label": self.label, "value": self.value, "provenance": self.provenance}


def _check_dim(n: int):
    if not 1 <= n <= MAX_DIM:
        raise BadArity(f"dimension {n} outside 1..{MAX_DIM}")


def regular_polygon(m: int) -> VPolytope:
    """Regular m-gon with unit circumcircle, one vertex at (1, 0)."""
    if m < 3:
        raise BadArity("a polygon needs at least 3 vertices")
    k = np.arange(m)
    pts = np.column_stack([np.cos(2 * np.pi * k / m), np.sin(2 * np.pi * k / m)])
    return hull(pts)[0]


def affine_regular_polygon(m: int, B: float, D: float) -> VPolytope:
    """Image of the regular m-gon under [[1, D], [0, B]]."""
    if m < 3:
        raise BadArity("a polygon needs at least 3 vertices")
    if B == 0.0:
        raise SingularMatrix("shear matrix with B = 0 is singular")
    k = np.arange(m)
    c, s = np.cos(2 * np.pi * k / m), np.sin(2 * np.pi * k / m)
    pts = np.column_stack([c + D * s, B * s])
    return hull(pts)[0]


def closed_form_Pm(m: int) -> ClosedFormValue:
    """Volume product of the regular m-gon: (m sin(pi/m))^2."""
    if m < 3:
        raise BadArity("a polygon needs at least 3 vertices")
    return ClosedFormValue(
        label=f"P(P_{m})",
        value=(m * math.sin(math.pi / m)) ** 2,
        provenance="(m sin(pi/m))^2",
    )


def simplex(n: int) -> VPolytope:
    """Regular n-simplex centered at the origin with unit circumradius.

    Centering at the symmetry point pins every affine-invariant point
    (Santalo point included) to the origin.
    """
    _check_dim(n)
    # Householder map sending ones/sqrt(n+1) to the last coordinate axis
    # turns the centered unit-basis model into n coordinates.
    e = np.eye(n + 1)
    u = e - 1.0 / (n + 1)
    w = np.full(n + 1, 1.0 / math.sqrt(n + 1))
    w[n] -= 1.0
    w /= np.linalg.norm(w)
    Q = np.eye(n + 1) - 2.0 * np.outer(w, w)
    coords = u @ Q.T[:, :n]
    coords *= math.sqrt((n + 1) / n)
    return hull(coords)[0]


def cube(n: int) -> VPolytope:
    """The cube [-1, 1]^n."""
    _check_dim(n)
    pts = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    return hull(pts)[0]


def cross_polytope(n: int) -> VPolytope:
    """conv{+-e_i}, the dual of the cube."""
    _check_dim(n)
    pts = np.vstack([np.eye(n), -np.eye(n)])
    return hull(pts)[0]


def closed_form_simplex_vp(n: int) -> ClosedFormValue:
    """Volume product of any n-simplex: (n+1)^(n+1) / (n!)^2."""
    _check_dim(n)
    value = (n + 1) ** (n + 1) / math.factorial(n) ** 2
    return ClosedFormValue(f"P(simplex_{n})", value, "(n+1)^(n+1)/(n!)^2")


def closed_form_symmetric_vp(n: int) -> ClosedFormValue:
    """Volume product of the cube and the cross-polytope: 4^n / n!."""
    _check_dim(n)
    value = 4**n / math.factorial(n)
    return ClosedFormValue(f"P(B1_{n}) = P(Binf_{n})", value, "4^n/n!")


def conv_two_simplices(n: int, k: int) -> VPolytope:
    """Hull of a regular k-simplex and a regular (n-k)-simplex in
    complementary orthogonal coordinate blocks, n + 2 vertices in total."""
    _check_dim(n)
    if not 1 <= k <= n - 1:
        raise BadArity("k must satisfy 1 <= k <= n-1")
    a = simplex(k).vertices
    b = simplex(n - k).vertices
    pts = np.zeros((a.shape[0] + b.shape[0], n))
    pts[: a.shape[0], :k] = a
    pts[a.shape[0] :, k:] = b
    return hull(pts)[0]


def g_of(x: float) -> float:
    """g(x) = (x+1)^(x+1) / Gamma(x+1), log-concave on the nonnegative axis.

    Integer arguments take an exact integer path; real arguments accumulate
    in log space.
    """
    if x < 0:
        raise BadArity("g is defined for x >= 0")
    if float(x).is_integer():
        k = int(x)
        return (k + 1) ** (k + 1) / math.factorial(k)
    return math.exp((x + 1) * math.log(x + 1) - math.lgamma(x + 1))


def f_n_k(n: int, k: int) -> ClosedFormValue:
    """Volume product of conv of complementary regular simplices:
    f_n(k) = g(k) g(n-k) / n!, symmetric in k and maximal at k = n//2."""
    if not 0 <= k <= n:
        raise BadArity("k must satisfy 0 <= k <= n")
    num = (k + 1) ** (k + 1) * (n - k + 1) ** (n - k + 1)
    den = math.factorial(k) * math.factorial(n - k) * math.factorial(n)
    return ClosedFormValue(f"f_{n}({k})", num / den, "g(k)g(n-k)/n!")


def remark_counterexample() -> VPolytope:
    """Quadrilateral conv{(1,-1), (-1,-1), (-1,1), (10,1)}.

    Adding the far vertex (10, 1) to the square lowers the volume product
    below the square's value 8, so it is not a maximizer among 4-gons.
    """
    pts = np.array([[1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0], [10.0, 1.0]])
    return hull(pts)[0]


def oracle_rows(m_max: int = 12, n_max: int = 5) -> list:
    """Closed-form table rows as emitted by the CLI oracle command."""
    rows = []
    for m in range(3, m_max + 1):
        rows.append(closed_form_Pm(m))
    rows.append(ClosedFormValue("lim_m P(P_m)", POLYGON_VP_LIMIT, "pi^2"))
    for n in range(1, n_max + 1):
        rows.append(closed_form_simplex_vp(n))
        rows.append(closed_form_symmetric_vp(n))
    for n in range(2, n_max + 1):
        for k in range(1, n):
            rows.append(f_n_k(n, k))
    return rows
