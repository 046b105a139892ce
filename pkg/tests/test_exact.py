"""Tests for exact rational polynomials and Sturm certification."""

from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from simplexmoments.exact import (
    MVPoly,
    SturmChain,
    UniPoly,
    format_rational,
    mv_mul,
    mv_pow,
    parse_rational,
    sturm_nonneg_on_interval,
    uni_eval,
)


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def eval_mv_naive(poly: MVPoly, values) -> F:
    """Term-by-term evaluation, independent of MVPoly.evaluate internals."""
    total = F(0)
    for exps, coeff in poly.terms().items():
        term = coeff
        for v, e in zip(values, exps):
            term *= F(v) ** e
        total += term
    return total


def eval_uni_powersum(p: UniPoly, x) -> F:
    """Plain power-sum evaluation as an oracle for Horner."""
    return sum((c * F(x) ** i for i, c in enumerate(p.coeffs)), F(0))


def random_unipoly(rng: random.Random, max_degree=10, coeff_range=6) -> UniPoly:
    deg = rng.randint(0, max_degree)
    coeffs = [F(rng.randint(-coeff_range, coeff_range),
               rng.randint(1, 4)) for _ in range(deg + 1)]
    return UniPoly(coeffs)


def random_mvpoly(rng: random.Random, variables, nterms=5, max_exp=3) -> MVPoly:
    terms = {}
    for _ in range(nterms):
        exps = tuple(rng.randint(0, max_exp) for _ in variables)
        terms[exps] = terms.get(exps, F(0)) + F(rng.randint(-9, 9), rng.randint(1, 5))
    return MVPoly(variables, terms)


# ---------------------------------------------------------------------------
# rational serialization
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("value,text", [
    (F(3, 4), "3/4"),
    (F(-3, 4), "-3/4"),
    (F(5), "5"),
    (F(0), "0"),
    (F(6, 4), "3/2"),
])
def test_format_rational(value, text):
    assert format_rational(value) == text


def test_parse_format_roundtrip():
    rng = random.Random(7)
    for _ in range(200):
        q = F(rng.randint(-10**9, 10**9), rng.randint(1, 10**9))
        assert parse_rational(format_rational(q)) == q


def test_parse_rejects_floats():
    with pytest.raises(ValueError):
        parse_rational("0.25")


# ---------------------------------------------------------------------------
# multivariate polynomials
# ---------------------------------------------------------------------------

def test_mvpoly_zero_coefficients_dropped():
    p = MVPoly(("x", "y"), {(1, 0): F(2), (0, 1): F(0)})
    assert p.num_terms() == 1
    assert p.coefficient((0, 1)) == 0


def test_mvpoly_mul_matches_pointwise_products():
    rng = random.Random(11)
    variables = ("x", "y", "z")
    for _ in range(30):
        a = random_mvpoly(rng, variables)
        b = random_mvpoly(rng, variables)
        prod = mv_mul(a, b)
        point = [F(rng.randint(-5, 5), rng.randint(1, 4)) for _ in variables]
        assert prod.evaluate(point) == eval_mv_naive(a, point) * eval_mv_naive(b, point)


def test_mv_pow_matches_repeated_multiplication():
    rng = random.Random(13)
    variables = ("x", "y")
    p = random_mvpoly(rng, variables, nterms=4, max_exp=2)
    acc = MVPoly.constant(variables, 1)
    for k in range(5):
        assert mv_pow(p, k) == acc
        acc = mv_mul(acc, p)


def test_mvpoly_add_sub_neg():
    rng = random.Random(17)
    variables = ("x", "y")
    a = random_mvpoly(rng, variables)
    b = random_mvpoly(rng, variables)
    point = [F(2, 3), F(-1, 2)]
    assert (a + b).evaluate(point) == a.evaluate(point) + b.evaluate(point)
    assert (a - b).evaluate(point) == a.evaluate(point) - b.evaluate(point)
    assert (-a).evaluate(point) == -a.evaluate(point)
    assert (a - a).is_zero()


def test_mvpoly_rejects_mismatched_variables():
    a = MVPoly(("x",), {(1,): F(1)})
    b = MVPoly(("y",), {(1,): F(1)})
    with pytest.raises(ValueError):
        mv_mul(a, b)


def test_mvpoly_total_degree_sentinel():
    assert MVPoly.zero(("x",)).total_degree() == -1
    assert MVPoly.constant(("x",), 3).total_degree() == 0


# ---------------------------------------------------------------------------
# univariate polynomials
# ---------------------------------------------------------------------------

def test_uni_eval_matches_powersum_oracle():
    rng = random.Random(19)
    for _ in range(50):
        p = random_unipoly(rng)
        x = F(rng.randint(-8, 8), rng.randint(1, 5))
        assert uni_eval(p, x) == eval_uni_powersum(p, x)


def test_unipoly_divmod_identity():
    rng = random.Random(23)
    for _ in range(40):
        a = random_unipoly(rng, max_degree=9)
        b = random_unipoly(rng, max_degree=4)
        if b.is_zero():
            continue
        q, r = a.divmod(b)
        assert q * b + r == a
        assert r.degree < b.degree


def test_unipoly_compose_matches_pointwise():
    rng = random.Random(29)
    for _ in range(20):
        outer = random_unipoly(rng, max_degree=5)
        inner = random_unipoly(rng, max_degree=3)
        x = F(rng.randint(-4, 4), rng.randint(1, 3))
        assert uni_eval(outer.compose(inner), x) == uni_eval(outer, uni_eval(inner, x))


def test_unipoly_degree_sentinel_and_trim():
    assert UniPoly(()).degree == -1
    assert UniPoly((0, 0)).degree == -1
    assert UniPoly((1, 0)).degree == 0


def test_primitive_is_positive_integer_primitive():
    p = UniPoly((F(-2, 3), F(4, 9), F(-8, 3)))
    prim = p.primitive()
    assert prim.leading() > 0
    ints = [c for c in prim.coeffs]
    assert all(c.denominator == 1 for c in ints)
    # same roots: primitive is a positive scalar multiple
    ratio = p.coeffs[0] / prim.coeffs[0]
    assert all(a == ratio * b for a, b in zip(p.coeffs, prim.coeffs))
    assert ratio < 0 or ratio > 0


def test_gcd_contains_common_factor():
    rng = random.Random(31)
    t = UniPoly.x()
    for _ in range(15):
        f = (t - rng.randint(-3, 3)) * (t - rng.randint(-3, 3))
        g = f * random_unipoly(rng, max_degree=3)
        h = f * random_unipoly(rng, max_degree=3)
        if g.is_zero() or h.is_zero():
            continue
        d = g.gcd(h)
        # f divides the gcd
        _, r = d.divmod(f.primitive())
        assert r.is_zero()


def test_yun_reconstructs_multiplicities():
    rng = random.Random(37)
    t = UniPoly.x()
    for _ in range(15):
        roots = rng.sample(range(-6, 7), 3)
        mults = [rng.randint(1, 3) for _ in range(3)]
        p = UniPoly.one()
        for r, m in zip(roots, mults):
            p = p * (t - r) ** m
        rebuilt = UniPoly.one()
        for m, f in p.yun_decomposition():
            rebuilt = rebuilt * f ** m
        assert rebuilt.primitive() == p.primitive()


def test_squarefree_part_has_no_repeated_roots():
    t = UniPoly.x()
    p = (t - 1) ** 3 * (t + 2) ** 2 * (t - F(1, 2))
    sf = p.squarefree_part()
    assert sf.degree == 3
    assert sf.gcd(sf.derivative()).degree == 0


def test_odd_multiplicity_part_keeps_only_crossings():
    t = UniPoly.x()
    p = (t - 1) ** 2 * (t + 1) ** 3 * (t - 3)
    odd = p.odd_multiplicity_part()
    assert uni_eval(odd, 1) != 0
    assert uni_eval(odd, -1) == 0
    assert uni_eval(odd, 3) == 0
    assert odd.degree == 2


# ---------------------------------------------------------------------------
# Sturm chains
# ---------------------------------------------------------------------------

def test_sturm_chain_root_count_known_roots():
    t = UniPoly.x()
    p = (t - 1) * (t - 2) * (t - 3)
    chain = SturmChain(p)
    assert chain.count_roots(0, 4) == 3
    assert chain.count_roots(F(3, 2), F(5, 2)) == 1
    assert chain.count_roots(4, 10) == 0
    # multiplicities are collapsed by the squarefree reduction
    chain2 = SturmChain((t - 1) ** 4 * (t - 2))
    assert chain2.count_roots(0, 3) == 2


def test_sturm_chain_remainder_relation_up_to_positive_scale():
    rng = random.Random(41)
    for _ in range(10):
        p = random_unipoly(rng, max_degree=8)
        if p.degree < 2:
            continue
        chain = SturmChain(p).chain
        for i in range(2, len(chain)):
            r = chain[i - 2].rem(chain[i - 1])
            # chain[i] is a strictly positive multiple of -r
            neg = -r
            ratio = None
            for a, b in zip(chain[i].coeffs, neg.coeffs):
                if b:
                    ratio = a / b
                    break
            assert ratio is not None and ratio > 0
            assert all(a == ratio * b for a, b in zip(chain[i].coeffs, neg.coeffs))


def test_sturm_no_phantom_roots_for_positive_definite_quadratic():
    # leading-coefficient sign handling: the final chain element here is a
    # negative constant and must stay negative after rescaling
    p = UniPoly((1, F(-1, 2), F(4, 3)))
    chain = SturmChain(p)
    assert chain.count_roots(-1, 2) == 0
    assert sturm_nonneg_on_interval(p, -1, 2)


def test_nonneg_simple_cases():
    t = UniPoly.x()
    assert sturm_nonneg_on_interval((t - 1) ** 2, 0, 2)
    assert sturm_nonneg_on_interval(t * t + 1, -5, 5)
    assert not sturm_nonneg_on_interval(-((t - 1) ** 2), 0, 2)
    res = sturm_nonneg_on_interval(t, -1, 1)
    assert not res
    assert uni_eval(t, res.witness) == res.witness_value < 0
    assert sturm_nonneg_on_interval(t, 0, 1)  # crossing exactly at the endpoint
    assert sturm_nonneg_on_interval(UniPoly.zero(), 0, 1)


def test_nonneg_even_touch_inside_interval():
    t = UniPoly.x()
    # touches zero at 1/3 and 2/3 but never crosses
    p = (t - F(1, 3)) ** 2 * (t - F(2, 3)) ** 2
    assert sturm_nonneg_on_interval(p, 0, 1)
    assert not sturm_nonneg_on_interval(-p, 0, 1)


def test_nonneg_irrational_crossing():
    t = UniPoly.x()
    p = t * t - 2  # crosses at sqrt(2)
    res = sturm_nonneg_on_interval(p, 0, 2)
    assert not res
    assert res.witness_value < 0
    assert sturm_nonneg_on_interval(p, 2, 5)


def test_nonneg_single_point_and_bad_interval():
    t = UniPoly.x()
    assert sturm_nonneg_on_interval(t, F(1, 2), F(1, 2))
    assert not sturm_nonneg_on_interval(t, -F(1, 2), -F(1, 2))
    with pytest.raises(ValueError):
        sturm_nonneg_on_interval(t, 1, 0)


def test_nonneg_negative_only_in_interior():
    t = UniPoly.x()
    # negative strictly inside, zero at both ends, no odd-multiplicity roots
    p = -((t - 0) ** 2) * (t - 1) ** 2
    res = sturm_nonneg_on_interval(p, 0, 1)
    assert not res
    assert res.witness_value < 0


def test_nonneg_agrees_with_dense_grid():
    """Randomized check against a 10^4-point rational grid.

    The grid can only refute nonnegativity; certified-true polynomials must
    never show a negative grid value, and certified-false results must carry
    an exactly-negative witness.
    """
    rng = random.Random(43)
    grid_n = 10**4
    lo, hi = F(-1), F(2)
    for _ in range(12):
        p = random_unipoly(rng, max_degree=10, coeff_range=4)
        res = sturm_nonneg_on_interval(p, lo, hi)
        if res:
            step = (hi - lo) / grid_n
            assert all(uni_eval(p, lo + i * step) >= 0
                       for i in range(grid_n + 1))
        else:
            assert lo <= res.witness <= hi
            assert uni_eval(p, res.witness) == res.witness_value
            assert res.witness_value < 0
