"""Exact rational polynomials and Sturm-chain sign certification.

Everything in this module computes over `fractions.Fraction`; no floating
point is involved anywhere. Two polynomial representations are provided:

* :class:`MVPoly` - sparse multivariate polynomials keyed by exponent
  vectors, used to expand Gram determinants symbolically.
* :class:`UniPoly` - dense univariate polynomials, used for interpolation
  certificates and Sturm chains.

The central decision procedure is :func:`sturm_nonneg_on_interval`, which
certifies ``p(t) >= 0`` for every ``t`` in a closed rational interval, or
returns a rational witness point where ``p`` is negative. Polynomials that
touch zero (even-multiplicity roots) inside the interval are accepted; the
test is for sign changes, not for roots.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd as _int_gcd
from typing import Iterable, Mapping, Sequence

__all__ = [
    "format_rational",
    "parse_rational",
    "MVPoly",
    "mv_mul",
    "mv_pow",
    "UniPoly",
    "uni_eval",
    "SturmChain",
    "NonnegResult",
    "sturm_nonneg_on_interval",
]


# ---------------------------------------------------------------------------
# rational serialization
# ---------------------------------------------------------------------------

def format_rational(q: Fraction | int) -> str:
    """Render an exact rational as ``p/q`` (``q`` omitted when it is 1)."""
    q = Fraction(q)
    return str(q)


def parse_rational(text: str) -> Fraction:
    """Parse ``p`` or ``p/q`` into a Fraction.

    Raises ValueError on anything else, including floats; exact values must
    round-trip exactly.
    """
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"expected exact rational, got {type(value).__name__}")


# ---------------------------------------------------------------------------
# sparse multivariate polynomials
# ---------------------------------------------------------------------------

class MVPoly:
    """Sparse multivariate polynomial with Fraction coefficients.

    Terms are stored as a dict from exponent tuples (one nonnegative int per
    variable) to nonzero coefficients. Instances are never mutated after
    construction, so they are safe to share between threads.
    """

    __slots__ = ("variables", "_terms")

    def __init__(self, variables: Sequence[str],
                 terms: Mapping[tuple, Fraction | int] | None = None):
        self.variables = tuple(variables)
        nvars = len(self.variables)
        clean: dict[tuple, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise ValueError(
                    f"exponent vector {exps} does not match {nvars} variables")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            coeff = _as_fraction(coeff)
            if coeff:
                clean[exps] = clean.get(exps, Fraction(0)) + coeff
                if not clean[exps]:
                    del clean[exps]
        self._terms = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "MVPoly":
        return cls(variables, {})

    @classmethod
    def constant(cls, variables: Sequence[str], value) -> "MVPoly":
        value = _as_fraction(value)
        if not value:
            return cls.zero(variables)
        return cls(variables, {(0,) * len(tuple(variables)): value})

    @classmethod
    def variable(cls, variables: Sequence[str], name: str) -> "MVPoly":
        variables = tuple(variables)
        idx = variables.index(name)
        exps = [0] * len(variables)
        exps[idx] = 1
        return cls(variables, {tuple(exps): Fraction(1)})

    # -- inspection ---------------------------------------------------------

    def terms(self) -> dict[tuple, Fraction]:
        return dict(self._terms)

    def coefficient(self, exps: tuple) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def num_terms(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def evaluate(self, point: Mapping[str, Fraction] | Sequence) -> Fraction:
        """Exact evaluation at a rational point.

        ``point`` is either a mapping from variable name to value or a
        sequence in variable order.
        """
        if isinstance(point, Mapping):
            values = [_as_fraction(point[v]) for v in self.variables]
        else:
            values = [_as_fraction(v) for v in point]
            if len(values) != len(self.variables):
                raise ValueError("point length does not match variable count")
        total = Fraction(0)
        for exps, coeff in self._terms.items():
            term = coeff
            for val, e in zip(values, exps):
                if e:
                    term *= val ** e
            total += term
        return total

    # -- arithmetic ---------------------------------------------------------

    def _check_compatible(self, other: "MVPoly") -> None:
        if self.variables != other.variables:
            raise ValueError("polynomials are over different variable tuples")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MVPoly.constant(self.variables, other)
        self._check_compatible(other)
        terms = dict(self._terms)
        for exps, coeff in other._terms.items():
            acc = terms.get(exps, Fraction(0)) + coeff
            if acc:
                terms[exps] = acc
            elif exps in terms:
                del terms[exps]
        out = MVPoly.zero(self.variables)
        out._terms = terms
        return out

    __radd__ = __add__

    def __neg__(self):
        out = MVPoly.zero(self.variables)
        out._terms = {e: -c for e, c in self._terms.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MVPoly.constant(self.variables, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            scalar = _as_fraction(other)
            out = MVPoly.zero(self.variables)
            if scalar:
                out._terms = {e: c * scalar for e, c in self._terms.items()}
            return out
        return mv_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return mv_pow(self, k)

    def __eq__(self, other):
        if not isinstance(other, MVPoly):
            return NotImplemented
        return self.variables == other.variables and self._terms == other._terms

    def __hash__(self):
        return hash((self.variables, frozenset(self._terms.items())))

    def __repr__(self):
        return f"MVPoly({len(self._terms)} terms in {len(self.variables)} vars)"


def mv_mul(a: MVPoly, b: MVPoly) -> MVPoly:
    """Exact product of two sparse polynomials over the same variables."""
    a._check_compatible(b)
    terms: dict[tuple, Fraction] = {}
    for ea, ca in a._terms.items():
        for eb, cb in b._terms.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            acc = terms.get(key, Fraction(0)) + ca * cb
            if acc:
                terms[key] = acc
            elif key in terms:
                del terms[key]
    out = MVPoly.zero(a.variables)
    out._terms = terms
    return out


def mv_pow(p: MVPoly, k: int) -> MVPoly:
    """``p ** k`` by binary exponentiation (k >= 0)."""
    if k < 0:
        raise ValueError("negative power of a polynomial")
    result = MVPoly.constant(p.variables, 1)
    base = p
    while k:
        if k & 1:
            result = mv_mul(result, base)
        k >>= 1
        if k:
            base = mv_mul(base, base)
    return result


# ---------------------------------------------------------------------------
# dense univariate polynomials
# ---------------------------------------------------------------------------

class UniPoly:
    """Dense univariate polynomial with Fraction coefficients.

    ``coeffs[i]`` is the coefficient of ``t**i``; trailing zeros are trimmed,
    and the zero polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_as_fraction(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "UniPoly":
        return cls(())

    @classmethod
    def one(cls) -> "UniPoly":
        return cls((1,))

    @classmethod
    def x(cls) -> "UniPoly":
        return cls((0, 1))

    # -- inspection ---------------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree, with -1 as the sentinel for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> Fraction:
        if not self.coeffs:
            return Fraction(0)
        return self.coeffs[-1]

    def __call__(self, x) -> Fraction:
        return uni_eval(self, x)

    def __eq__(self, other):
        if not isinstance(other, UniPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"UniPoly(degree={self.degree})"

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UniPoly((other,))
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [Fraction(0)] * (n - len(other.coeffs))
        return UniPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return UniPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UniPoly((other,))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            scalar = _as_fraction(other)
            return UniPoly(c * scalar for c in self.coeffs)
        if self.is_zero() or other.is_zero():
            return UniPoly.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, ci in enumerate(self.coeffs):
            if not ci:
                continue
            for j, cj in enumerate(other.coeffs):
                if cj:
                    out[i + j] += ci * cj
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = UniPoly.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def derivative(self) -> "UniPoly":
        return UniPoly(i * c for i, c in enumerate(self.coeffs) if i)

    def compose(self, inner: "UniPoly") -> "UniPoly":
        """Exact composition self(inner(t)) by Horner's scheme."""
        result = UniPoly.zero()
        for c in reversed(self.coeffs):
            result = result * inner + c
        return result

    def divmod(self, divisor: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        """Exact polynomial division with remainder."""
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dlead = divisor.leading()
        dd = divisor.degree
        quot = [Fraction(0)] * max(0, len(rem) - dd)
        for i in range(len(rem) - 1, dd - 1, -1):
            if not rem[i]:
                continue
            factor = rem[i] / dlead
            quot[i - dd] = factor
            for j, dc in enumerate(divisor.coeffs):
                rem[i - dd + j] -= factor * dc
        return UniPoly(quot), UniPoly(rem)

    def rem(self, divisor: "UniPoly") -> "UniPoly":
        return self.divmod(divisor)[1]

    # -- normalization and factor structure ----------------------------------

    def _scaled_primitive(self, keep_sign: bool) -> "UniPoly":
        if self.is_zero():
            return self
        den_lcm = 1
        for c in self.coeffs:
            den_lcm = den_lcm * c.denominator // _int_gcd(den_lcm, c.denominator)
        ints = [int(c * den_lcm) for c in self.coeffs]
        g = 0
        for v in ints:
            g = _int_gcd(g, abs(v))
        if ints[-1] < 0 and not keep_sign:
            g = -g
        return UniPoly(Fraction(v, g) for v in ints)

    def primitive(self) -> "UniPoly":
        """Integer-primitive scaling with a positive leading coefficient.

        The result equals ``self`` times a nonzero rational; the sign of that
        rational is chosen to make the leading coefficient positive, which is
        the canonical form used for gcds and factor lists.
        """
        return self._scaled_primitive(keep_sign=False)

    def primitive_same_sign(self) -> "UniPoly":
        """Integer-primitive scaling by a strictly positive rational.

        Unlike :meth:`primitive` this never flips signs, so it is safe inside
        sign-sensitive constructions such as Sturm chains.
        """
        return self._scaled_primitive(keep_sign=True)

    def gcd(self, other: "UniPoly") -> "UniPoly":
        """Primitive gcd by the Euclidean algorithm (positive leading coeff)."""
        a, b = self.primitive(), other.primitive()
        while not b.is_zero():
            a, b = b, a.rem(b).primitive()
        return a.primitive()

    def squarefree_part(self) -> "UniPoly":
        """self / gcd(self, self'), scaled primitive."""
        if self.is_zero() or self.degree == 0:
            return self.primitive()
        g = self.gcd(self.derivative())
        q, r = self.divmod(g)
        if not r.is_zero():
            raise ArithmeticError("gcd division left a remainder")
        return q.primitive()

    def yun_decomposition(self) -> list[tuple[int, "UniPoly"]]:
        """Squarefree decomposition self = lc * prod f_i ** i (Yun's algorithm).

        Returns [(multiplicity, primitive factor)] with nonconstant factors
        only; factors are pairwise coprime and squarefree.
        """
        if self.is_zero() or self.degree < 1:
            return []
        p = self.primitive()
        dp = p.derivative()
        g = p.gcd(dp)
        if g.degree == 0:
            return [(1, p)]
        out: list[tuple[int, UniPoly]] = []
        w = p.divmod(g)[0]
        y = dp.divmod(g)[0]
        i = 1
        while w.degree > 0:
            z = y - w.derivative()
            if z.is_zero():
                # everything left has multiplicity exactly i
                out.append((i, w.primitive()))
                break
            f = w.gcd(z)
            if f.degree > 0:
                out.append((i, f.primitive()))
            w = w.divmod(f)[0]
            y = z.divmod(f)[0]
            i += 1
        return out

    def odd_multiplicity_part(self) -> "UniPoly":
        """Product of the squarefree factors with odd multiplicity.

        The real roots of the result are exactly the points where ``self``
        changes sign; even-multiplicity touch points are excluded.
        """
        result = UniPoly.one()
        for mult, factor in self.yun_decomposition():
            if mult % 2:
                result = result * factor
        return result.primitive()


def uni_eval(p: UniPoly, x) -> Fraction:
    """Exact Horner evaluation of ``p`` at the rational point ``x``."""
    x = _as_fraction(x)
    acc = Fraction(0)
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# Sturm chains
# ---------------------------------------------------------------------------

class SturmChain:
    """Sturm chain of the squarefree part of a polynomial.

    Consecutive chain elements satisfy the negated Euclidean remainder
    relation up to positive scaling (each remainder is rescaled to a
    primitive integer polynomial, which leaves all sign counts unchanged
    while keeping coefficients small).
    """

    def __init__(self, p: UniPoly):
        base = p.squarefree_part()
        chain = [base]
        if base.degree >= 1:
            chain.append(base.derivative().primitive_same_sign())
            while chain[-1].degree >= 1:
                r = chain[-2].rem(chain[-1])
                if r.is_zero():
                    break
                chain.append((-r).primitive_same_sign())
        self.chain = chain

    def count_sign_changes(self, x) -> int:
        x = _as_fraction(x)
        signs = []
        for q in self.chain:
            v = uni_eval(q, x)
            if v:
                signs.append(1 if v > 0 else -1)
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    def count_roots(self, lo, hi) -> int:
        """Distinct real roots in (lo, hi]; endpoints must not be roots of
        the squarefree part for the classical theorem to apply exactly."""
        lo, hi = _as_fraction(lo), _as_fraction(hi)
        if hi < lo:
            raise ValueError("empty interval")
        return self.count_sign_changes(lo) - self.count_sign_changes(hi)


@dataclass(frozen=True)
class NonnegResult:
    """Outcome of a nonnegativity check with an optional counterexample."""

    nonnegative: bool
    reason: str
    witness: Fraction | None = None
    witness_value: Fraction | None = None

    def __bool__(self) -> bool:
        return self.nonnegative


def _deflate_root(p: UniPoly, root: Fraction) -> UniPoly:
    """Divide out every (t - root) factor from p."""
    linear = UniPoly((-root, 1))
    while not p.is_zero() and not uni_eval(p, root):
        p = p.divmod(linear)[0]
    return p


def _negative_witness(p: UniPoly, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Find a rational point in [lo, hi] with p < 0, assuming one exists.

    Scans progressively finer uniform rational grids; a sign change of p in
    the open interval guarantees a negative value on a set of positive
    measure, so the scan terminates.
    """
    for m in (8, 64, 512, 4096, 65536, 2 ** 24):
        step = (hi - lo) / m
        for i in range(m + 1):
            x = lo + i * step
            v = uni_eval(p, x)
            if v < 0:
                return x, v
    raise ArithmeticError("failed to locate negative witness on refined grids")


def sturm_nonneg_on_interval(p: UniPoly, lo, hi) -> NonnegResult:
    """Decide exactly whether ``p(t) >= 0`` for every t in [lo, hi].

    The decision composes three exact facts: the endpoint values, the
    presence of odd-multiplicity roots (sign crossings) strictly inside the
    interval, and the sign of the polynomial at one interior non-root point.
    Even-multiplicity interior roots are tolerated by construction.
    """
    lo, hi = _as_fraction(lo), _as_fraction(hi)
    if hi < lo:
        raise ValueError("interval end precedes start")
    if p.is_zero():
        return NonnegResult(True, "zero-polynomial")
    if lo == hi:
        v = uni_eval(p, lo)
        if v < 0:
            return NonnegResult(False, "endpoint-negative", lo, v)
        return NonnegResult(True, "single-point")

    v_lo, v_hi = uni_eval(p, lo), uni_eval(p, hi)
    if v_lo < 0:
        return NonnegResult(False, "endpoint-negative", lo, v_lo)
    if v_hi < 0:
        return NonnegResult(False, "endpoint-negative", hi, v_hi)

    crossings = p.odd_multiplicity_part()
    crossings = _deflate_root(crossings, lo)
    crossings = _deflate_root(crossings, hi)
    if crossings.degree >= 1:
        chain = SturmChain(crossings)
        if chain.count_roots(lo, hi) > 0:
            x, v = _negative_witness(p, lo, hi)
            return NonnegResult(False, "interior-sign-change", x, v)

    # No interior sign change: one interior non-root sample decides the sign.
    width = hi - lo
    samples = max(p.degree + 2, 3)
    for i in range(1, samples + 1):
        x = lo + width * Fraction(i, samples + 1)
        v = uni_eval(p, x)
        if v > 0:
            return NonnegResult(True, "no-interior-sign-change")
        if v < 0:
            return NonnegResult(False, "interior-negative", x, v)
    # More interior zeros than the degree allows would force p == 0.
    return NonnegResult(True, "identically-zero-on-samples")
