"""Convex-body catalog, Gram-determinant simplex volumes, exact integrals.

The catalog is the fixed menagerie used throughout the package: the standard
simplex in any dimension (with the planar triangle T2 and the tetrahedron T3
as named members), the unit cube, the unit ball, the closed upper half of the
unit ball, and right prisms base x [0, h].  Descriptors are immutable and may
carry a marked point used by the fixed-vertex moment machinery.

All membership tests on polytopes are exact when given exact coordinates
(floats are converted to their exact binary rationals first); curved bodies
use floating arithmetic with a 1e-12 tolerance where one is called for.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import UsageError
from .exact import format_rational, parse_rational

CURVED_MEMBERSHIP_TOL = 1e-12

_SIMPLEX_KINDS = ("simplex", "T2", "T3")

T2_VERTICES = (
    (Fraction(0), Fraction(0)),
    (Fraction(1), Fraction(0)),
    (Fraction(0), Fraction(1)),
)

T3_VERTICES = (
    (Fraction(0), Fraction(0), Fraction(0)),
    (Fraction(1), Fraction(0), Fraction(0)),
    (Fraction(0), Fraction(1), Fraction(0)),
    (Fraction(0), Fraction(0), Fraction(1)),
)


def _to_fraction(value) -> Fraction:
    if isinstance(value, Rational):
        return Fraction(value)
    return Fraction(float(value))


# ---------------------------------------------------------------------------
# simplex volumes


def _det_fraction(rows) -> Fraction:
    m = [list(r) for r in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            if f:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return det


def _gram_det_exact(pts) -> Fraction:
    base = pts[0]
    vecs = [
        [Fraction(a) - Fraction(b) for a, b in zip(p, base)] for p in pts[1:]
    ]
    gram = [[sum(x * y for x, y in zip(u, v)) for v in vecs] for u in vecs]
    return _det_fraction(gram)


def gram_volume(points) -> float:
    """(n-1)-dimensional volume of the convex hull of n points in R^d.

    For n points the value is sqrt(det(M^T M)) / (n-1)! where the columns of
    M are the edge vectors from the first point.  Rational inputs go through
    exact determinant arithmetic with a single floating square root at the
    end; floating inputs use a singular-value product, which is stable for
    nearly degenerate point sets.

    Degenerate (affinely dependent) inputs give 0.  Raises UsageError for
    fewer than two points, for more than d+1 points, or for ragged input.
    """
    pts = [tuple(p) for p in points]
    n = len(pts)
    if n < 2:
        raise UsageError("gram_volume needs at least two points")
    d = len(pts[0])
    if any(len(p) != d for p in pts[1:]):
        raise UsageError("all points must have the same dimension")
    if n > d + 1:
        raise UsageError(
            "at most d+1 = %d points can be affinely independent in "
            "dimension %d, got %d" % (d + 1, d, n)
        )
    if all(isinstance(c, Rational) for p in pts for c in p):
        det = _gram_det_exact(pts)
        return math.sqrt(det) / math.factorial(n - 1)
    mat = np.asarray(pts, dtype=float)
    edges = mat[1:] - mat[0]
    sing = np.linalg.svd(edges, compute_uv=False)
    return float(np.prod(sing)) / math.factorial(n - 1)


def monomial_integral_T3(l: int, m: int, n: int) -> Fraction:
    """Exact integral of x^l y^m z^n over the standard tetrahedron.

    Equals l! m! n! / (l+m+n+3)!.
    """
    num = math.factorial(l) * math.factorial(m) * math.factorial(n)
    return Fraction(num, math.factorial(l + m + n + 3))


# ---------------------------------------------------------------------------
# body descriptors


@dataclass(frozen=True)
class Body:
    """Immutable descriptor of one catalog body.

    kind is one of "simplex", "cube", "ball", "halfball", "T2", "T3",
    "product".  Products carry the base body and a positive height; any body
    may carry a marked point (``fixed_point``) lying in the closed body.
    """

    kind: str
    dim: int
    base: Optional["Body"] = None
    height: Union[Fraction, float, None] = None
    fixed_point: Optional[Tuple] = None


def is_polytopal(body: Body) -> bool:
    if body.kind in _SIMPLEX_KINDS or body.kind == "cube":
        return True
    if body.kind == "product":
        return is_polytopal(body.base)
    return False


def _attach_fixed_point(body: Body, fixed_point) -> Body:
    if fixed_point is None:
        return body
    pt = tuple(fixed_point)
    if len(pt) != body.dim:
        raise UsageError(
            "marked point has dimension %d, body has dimension %d"
            % (len(pt), body.dim)
        )
    tol = 0.0 if is_polytopal(body) else CURVED_MEMBERSHIP_TOL
    if not contains(body, pt, tol=tol):
        raise UsageError("marked point must lie in the closed body")
    return dataclasses.replace(body, fixed_point=pt)


def _check_dim(d: int) -> int:
    if not isinstance(d, int) or d < 1:
        raise UsageError("dimension must be a positive integer")
    return d


def standard_simplex(d: int, fixed_point=None) -> Body:
    """Standard simplex conv(0, e_1, ..., e_d)."""
    return _attach_fixed_point(Body("simplex", _check_dim(d)), fixed_point)


def cube(d: int, fixed_point=None) -> Body:
    """Unit cube [0, 1]^d."""
    return _attach_fixed_point(Body("cube", _check_dim(d)), fixed_point)


def ball(d: int, fixed_point=None) -> Body:
    """Closed unit ball."""
    return _attach_fixed_point(Body("ball", _check_dim(d)), fixed_point)


def halfball(d: int, fixed_point=None) -> Body:
    """Closed upper half of the unit ball: ||x|| <= 1 and x_d >= 0."""
    return _attach_fixed_point(Body("halfball", _check_dim(d)), fixed_point)


def triangle_T2(fixed_point=None) -> Body:
    """The planar triangle with vertices (0,0), (1,0), (0,1)."""
    return _attach_fixed_point(Body("T2", 2), fixed_point)


def tetrahedron_T3(fixed_point=None) -> Body:
    """The tetrahedron with vertices 0, e_1, e_2, e_3."""
    return _attach_fixed_point(Body("T3", 3), fixed_point)


def product(base: Body, height, fixed_point=None) -> Body:
    """Right prism base x [0, height]."""
    if isinstance(height, float):
        h: Union[Fraction, float] = height
    else:
        h = _to_fraction(height)
    if not float(h) > 0:
        raise UsageError("prism height must be positive")
    body = Body("product", base.dim + 1, base=base, height=h)
    return _attach_fixed_point(body, fixed_point)


# ---------------------------------------------------------------------------
# membership and boundary


def _contains_exact(body: Body, pt: Sequence[Fraction]) -> bool:
    k = body.kind
    if k in _SIMPLEX_KINDS:
        return all(v >= 0 for v in pt) and sum(pt) <= 1
    if k == "cube":
        return all(0 <= v <= 1 for v in pt)
    if k == "product":
        z = pt[-1]
        return 0 <= z <= _to_fraction(body.height) and _contains_exact(
            body.base, pt[:-1]
        )
    raise UsageError("exact membership is only defined for polytopes")


def _margins(body: Body, pt) -> list:
    """Signed distances to the supporting constraints, positive inside.

    Each entry is the Euclidean distance to one constraint hyperplane or
    sphere, with a positive sign when the point satisfies the constraint
    strictly.  The minimum is >= 0 exactly on the closed body and is 0 on
    the boundary.
    """
    k = body.kind
    x = [float(v) for v in pt]
    if k in _SIMPLEX_KINDS:
        return x + [(1.0 - sum(x)) / math.sqrt(body.dim)]
    if k == "cube":
        return x + [1.0 - v for v in x]
    if k == "ball":
        return [1.0 - math.hypot(*x)]
    if k == "halfball":
        return [1.0 - math.hypot(*x), x[-1]]
    if k == "product":
        z = x[-1]
        return _margins(body.base, pt[:-1]) + [z, float(body.height) - z]
    raise UsageError("unsupported body kind %r" % (k,))


def contains(body: Body, point, tol: float = 0.0) -> bool:
    """Whether the point lies in the closed body (within tol for tol > 0)."""
    pt = tuple(point)
    if len(pt) != body.dim:
        raise UsageError(
            "point has dimension %d, body has dimension %d"
            % (len(pt), body.dim)
        )
    if tol == 0.0 and is_polytopal(body):
        return _contains_exact(body, [_to_fraction(v) for v in pt])
    return min(_margins(body, pt)) >= -tol


def boundary_residual(body: Body, point) -> float:
    """Distance from the point to the body's boundary (0 exactly on it)."""
    pt = tuple(point)
    if len(pt) != body.dim:
        raise UsageError(
            "point has dimension %d, body has dimension %d"
            % (len(pt), body.dim)
        )
    return abs(min(_margins(body, pt)))


def polygon_edges(body: Body):
    """Edges of a planar catalog polytope as (start, end) vertex pairs."""
    if body.kind == "T2" or (body.kind == "simplex" and body.dim == 2):
        verts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    elif body.kind == "cube" and body.dim == 2:
        verts = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    else:
        raise UsageError("edge lists exist only for planar catalog polytopes")
    return [(verts[i], verts[(i + 1) % len(verts)]) for i in range(len(verts))]


# ---------------------------------------------------------------------------
# measures


def _ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def body_measures(body: Body) -> dict:
    """Volume and surface measure of a catalog body.

    Returns {"volume": v, "surface": s} where s is the (d-1)-dimensional
    boundary measure.  For a prism base x [0, h] the surface consists of two
    flat copies of the base plus the side band: 2 vol(base) + S(base) h.
    """
    k = body.kind
    if k in _SIMPLEX_KINDS:
        d = body.dim
        vol = 1.0 / math.factorial(d)
        surf = (d + math.sqrt(d)) / math.factorial(d - 1)
    elif k == "cube":
        vol = 1.0
        surf = 2.0 * body.dim
    elif k == "ball":
        vol = _ball_volume(body.dim)
        surf = body.dim * vol
    elif k == "halfball":
        d = body.dim
        vol = _ball_volume(d) / 2.0
        surf = d * _ball_volume(d) / 2.0 + _ball_volume(d - 1)
    elif k == "product":
        inner = body_measures(body.base)
        h = float(body.height)
        vol = inner["volume"] * h
        surf = 2.0 * inner["volume"] + inner["surface"] * h
    else:
        raise UsageError("unsupported body kind %r" % (k,))
    return {"volume": vol, "surface": surf}


# ---------------------------------------------------------------------------
# JSON descriptors


def _num_to_json(value):
    if isinstance(value, bool):
        raise UsageError("boolean is not a coordinate")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return format_rational(value)
    return float(value)


def _num_from_json(value):
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, bool):
        raise UsageError("boolean is not a coordinate")
    if isinstance(value, int):
        return value
    return float(value)


def body_to_json(body: Body) -> dict:
    """Plain-data view of a body descriptor (exact rationals as "p/q")."""
    out = {"kind": body.kind, "dim": body.dim}
    if body.kind == "product":
        out["base"] = body_to_json(body.base)
        out["height"] = _num_to_json(body.height)
    if body.fixed_point is not None:
        out["fixed_point"] = [_num_to_json(v) for v in body.fixed_point]
    return out


def body_from_json(data: dict) -> Body:
    """Inverse of body_to_json."""
    kind = data.get("kind")
    fp = None
    if "fixed_point" in data:
        fp = tuple(_num_from_json(v) for v in data["fixed_point"])
    if kind == "product":
        base = body_from_json(data["base"])
        return product(base, _num_from_json(data["height"]), fixed_point=fp)
    simple = {
        "simplex": standard_simplex,
        "cube": cube,
        "ball": ball,
        "halfball": halfball,
    }
    if kind in simple:
        return simple[kind](int(data["dim"]), fixed_point=fp)
    if kind == "T2":
        return triangle_T2(fixed_point=fp)
    if kind == "T3":
        return tetrahedron_T3(fixed_point=fp)
    raise UsageError("unknown body kind %r" % (kind,))
