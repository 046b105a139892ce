"""Closed-form moments of distances and chord lengths in triangles.

Three families of moments for a planar triangle:

* the k-th moment of the distance of one uniform point from a vertex,
* the same from an arbitrary point on an edge (split into two sub-triangles
  and averaged with area weights),
* the k-th moment of the distance between two independent uniform points.

Every formula reduces to the antiderivative of integer powers of the
cosecant, which is evaluated by an exact elementary recurrence.  The
hypergeometric form -cos(phi) 2F1(1/2, (m+1)/2; 3/2; cos^2(phi)) of that
antiderivative is never summed as a series: the series degenerates as the
argument approaches 1 (thin triangles) while the recurrence stays stable.

The ratio of the edge-midpoint moment to the two-point moment on the unit
right isosceles triangle collapses to the closed form
r(k) = (k+3)(k+4) / (2^(k+3) + 2^(k/2+2)), which is the quantity whose decay
drives the counterexample search in higher dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from .errors import DomainError, UsageError

__all__ = [
    "TriangleSpec",
    "EdgePointSpec",
    "csc_power_antiderivative",
    "vertex_moment",
    "edgepoint_moment",
    "chord_moment",
    "ratio_r",
    "unit_right_isosceles",
]


def csc_power_antiderivative(m: int, phi: float) -> float:
    """Antiderivative I_m of 1/sin(phi)^m, for integer m >= 1.

    Normalized so that I_1 = log(tan(phi/2)) and I_2 = -cot(phi); higher
    orders follow the reduction
    I_m = -cos(phi) / ((m-1) sin(phi)^(m-1)) + (m-2)/(m-1) I_(m-2).
    Differences I_m(b) - I_m(a) give definite integrals over [a, b] in
    (0, pi).
    """
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise UsageError("power m must be an integer >= 1")
    if not 0.0 < phi < math.pi:
        raise DomainError("angle must lie strictly between 0 and pi")
    s = math.sin(phi)
    c = math.cos(phi)
    if m % 2:
        val = math.log(math.tan(phi / 2.0))
        order = 1
    else:
        val = -c / s
        order = 2
    while order < m:
        order += 2
        val = -c / ((order - 1) * s ** (order - 1)) + (order - 2) / (order - 1) * val
    return val


def _check_moment_order(k) -> int:
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise UsageError("moment order k must be a positive integer")
    return k


@dataclass(frozen=True)
class TriangleSpec:
    """Side lengths and derived angles of a nondegenerate triangle.

    Sides a, b, c lie opposite the vertices A, B, C; the angles alpha, beta,
    gamma sit at those vertices.  Angles are always derived from the sides,
    never supplied.
    """

    a: float
    b: float
    c: float
    alpha: float
    beta: float
    gamma: float

    @classmethod
    def from_sides(cls, a, b, c) -> "TriangleSpec":
        a, b, c = float(a), float(b), float(c)
        if min(a, b, c) <= 0.0:
            raise DomainError("side lengths must be positive")
        if a + b <= c or b + c <= a or a + c <= b:
            raise DomainError("degenerate triangle: inequality must be strict")
        alpha = math.acos((b * b + c * c - a * a) / (2.0 * b * c))
        beta = math.acos((a * a + c * c - b * b) / (2.0 * a * c))
        gamma = math.acos((a * a + b * b - c * c) / (2.0 * a * b))
        return cls(a, b, c, alpha, beta, gamma)

    @classmethod
    def from_vertices(cls, va, vb, vc) -> "TriangleSpec":
        return cls.from_sides(
            math.dist(vb, vc), math.dist(va, vc), math.dist(va, vb)
        )

    @property
    def area(self) -> float:
        return self.a * self.c * math.sin(self.beta) / 2.0


def unit_right_isosceles() -> TriangleSpec:
    """The triangle with vertices (0,0), (1,0), (0,1)."""
    return TriangleSpec.from_sides(math.sqrt(2.0), 1.0, 1.0)


@dataclass(frozen=True)
class EdgePointSpec:
    """A point D on the edge AB, located c1 away from A.

    The closed interval [0, c] is accepted; the endpoints degenerate to the
    vertices A and B and the moment machinery falls back to the vertex
    formula there.
    """

    c1: float

    def validate(self, t: TriangleSpec) -> None:
        if not 0.0 <= float(self.c1) <= t.c:
            raise DomainError("edge point must satisfy 0 <= c1 <= c")

    def chord_distance(self, t: TriangleSpec) -> float:
        """Length d of the segment from D to the opposite vertex C."""
        self.validate(t)
        c1 = float(self.c1)
        return math.sqrt(
            c1 * c1 + t.b * t.b - 2.0 * c1 * t.b * math.cos(t.alpha)
        )

    def angle_delta(self, t: TriangleSpec) -> float:
        """Angle at D between the rays DA and DC.

        Computed from coordinates with a two-argument arctangent, so obtuse
        configurations land on the correct branch (an arcsine of the sine
        rule would not distinguish delta from pi - delta).
        """
        self.validate(t)
        c1 = float(self.c1)
        if c1 == 0.0 or c1 == t.c:
            raise DomainError("delta is undefined when D coincides with a vertex")
        # with A at the origin and B on the positive x axis:
        # DA = (-c1, 0), DC = (b cos(alpha) - c1, b sin(alpha))
        dot = c1 * (c1 - t.b * math.cos(t.alpha))
        cross = c1 * t.b * math.sin(t.alpha)
        return math.atan2(cross, dot)


_VERTEX_LABELS = {"A": 0, "B": 1, "C": 2}


def vertex_moment(t: TriangleSpec, vertex: str, k: int) -> float:
    """k-th moment of the distance of a uniform point from one vertex.

    Sweeping a ray from the chosen vertex across the triangle reduces the
    moment to a cosecant-power integral:
    E = 2 (c sin beta)^(k+1) / ((k+2) a) * (I_(k+2)(alpha+beta) - I_(k+2)(beta))
    for vertex A, and cyclic relabelings for B and C.
    """
    _check_moment_order(k)
    if vertex not in _VERTEX_LABELS:
        raise UsageError("vertex must be one of 'A', 'B', 'C'")
    sides = (t.a, t.b, t.c)
    angles = (t.alpha, t.beta, t.gamma)
    i = _VERTEX_LABELS[vertex]
    opp = sides[i]
    adj = sides[(i + 2) % 3]
    start = angles[(i + 1) % 3]
    sweep = angles[i]
    m = k + 2
    height = adj * math.sin(start)
    diff = csc_power_antiderivative(m, sweep + start) - csc_power_antiderivative(
        m, start
    )
    return 2.0 * height ** (k + 1) / (m * opp) * diff


def edgepoint_moment(t: TriangleSpec, e: EdgePointSpec, k: int) -> float:
    """k-th moment of the distance of a uniform point from a point on AB.

    The segment DC splits the triangle into ACD and DBC; the moment is the
    area-weighted average of the two vertex moments taken at D.
    """
    _check_moment_order(k)
    e.validate(t)
    c1 = float(e.c1)
    if c1 == 0.0:
        return vertex_moment(t, "A", k)
    if c1 == t.c:
        return vertex_moment(t, "B", k)
    va = (0.0, 0.0)
    vb = (t.c, 0.0)
    vc = (t.b * math.cos(t.alpha), t.b * math.sin(t.alpha))
    vd = (c1, 0.0)
    left = TriangleSpec.from_vertices(vd, va, vc)
    right = TriangleSpec.from_vertices(vd, vb, vc)
    wl = left.area
    wr = right.area
    return (
        wl * vertex_moment(left, "A", k) + wr * vertex_moment(right, "A", k)
    ) / (wl + wr)


def chord_moment(t: TriangleSpec, k: int) -> float:
    """k-th moment of the distance between two uniform points.

    A line-integral decomposition over all chords, with the one-dimensional
    two-point moment 2 l^(k+1)/((k+2)(k+3)) on each chord, leaves a sum over
    ordered vertex pairs (i, j) of cosecant-power antiderivatives:

    E = 8 / ((k+2)(k+3)(k+4)) (2 area)^-2
        * sum_(i != j) sin(eta_i)^(k+3) e_j^(k+4) B(i, j)

    with B(i, j) = -cos(eta_i) (I_(k+2)(eta_j) + I_(k+2)(eta_i))
                   + sin(eta_i)/(k+2) (csc(eta_j)^(k+2) - csc(eta_i)^(k+2)).
    """
    _check_moment_order(k)
    sides = (t.a, t.b, t.c)
    angles = (t.alpha, t.beta, t.gamma)
    m = k + 2
    anti = [csc_power_antiderivative(m, ang) for ang in angles]
    cscs = [1.0 / math.sin(ang) ** m for ang in angles]
    terms = []
    for i in range(3):
        sin_i = math.sin(angles[i])
        cos_i = math.cos(angles[i])
        for j in range(3):
            if j == i:
                continue
            bracket = -cos_i * (anti[j] + anti[i]) + sin_i / m * (
                cscs[j] - cscs[i]
            )
            terms.append(sin_i ** (k + 3) * sides[j] ** (k + 4) * bracket)
    two_area = 2.0 * t.area
    pref = 8.0 / ((k + 2) * (k + 3) * (k + 4)) / (two_area * two_area)
    return pref * math.fsum(terms)


def ratio_r(k: int) -> float:
    """Ratio of the hypotenuse-midpoint moment to the two-point moment on
    the unit right isosceles triangle: (k+3)(k+4) / (2^(k+3) + 2^(k/2+2)).

    Strictly decreasing in k and below 1 from k = 1 on.
    """
    _check_moment_order(k)
    return (k + 3) * (k + 4) / (2.0 ** (k + 3) + 2.0 ** (k / 2.0 + 2.0))
