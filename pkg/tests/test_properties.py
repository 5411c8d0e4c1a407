"""Randomized invariants of the semiring, the hull machinery and the linearization."""

import itertools
import random
from fractions import Fraction as F

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from systems import random_hybrid_system, random_nabla_system
from tropsys import _exact as ex
from tropsys import certify as cf
from tropsys import macaulay as mc
from tropsys import polygeom as pg
from tropsys.oracle import brute_feasibility
from tropsys.tropsem import BOTTOM, TropicalPolynomial, TropicalScalar, scalar, tadd, tmul
from tropsys.tropsolve import check_solution, feasibility

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
scalars = st.one_of(
    st.just(BOTTOM),
    rationals.map(scalar),
    st.tuples(rationals, st.integers(-3, 3)).map(lambda t: TropicalScalar(*t)),
)


@settings(max_examples=1000, deadline=None)
@given(scalars, scalars, scalars)
def test_semiring_laws(a, b, c):
    assert tadd(a, b) == tadd(b, a)
    assert tmul(a, b) == tmul(b, a)
    assert tadd(tadd(a, b), c) == tadd(a, tadd(b, c))
    assert tmul(tmul(a, b), c) == tmul(a, tmul(b, c))
    assert tmul(a, tadd(b, c)) == tadd(tmul(a, b), tmul(a, c))
    assert tadd(a, BOTTOM) == a and tmul(a, scalar(0)) == a
    assert tmul(a, BOTTOM).is_bottom
    assert tadd(a, a) == a


exps2 = st.tuples(st.integers(0, 3), st.integers(0, 3))
polys2 = st.dictionaries(exps2, st.integers(-6, 6), min_size=1, max_size=6).map(
    lambda d: TropicalPolynomial(2, d))
points2 = st.tuples(rationals, rationals)


@settings(max_examples=300, deadline=None)
@given(polys2, points2, rationals, exps2)
def test_argmax_and_root_invariants(f, x, c, alpha):
    top = f.evaluate(x)
    arg = f.argmax_set(x)
    assert arg and all(f.term_values(x)[a] == top for a in arg)
    assert all(v <= top for v in f.term_values(x).values())
    # scaling and monomial shifts move every term by the same amount
    assert f.scale(c).is_root(x) == f.is_root(x)
    assert f.shift(alpha).is_root(x) == f.is_root(x)
    assert f.shift(alpha).argmax_set(x) == {tuple(a + b for a, b in zip(e, alpha)) for e in arg}


lifts = st.dictionaries(exps2, st.integers(-6, 6), min_size=1, max_size=7)


@settings(max_examples=200, deadline=None)
@given(lifts)
def test_hull_dominates_and_touches_exactly_on_the_hull(lift):
    h = pg.upper_hull(lift)
    for a, w in lift.items():
        v = pg.eval_concave(h, a)
        assert v >= scalar(w)
        if a in h.vertices:
            assert v == scalar(w)
        # equality means the lifted point sits on some upper facet
        on_facet = any(f.value_at(a) == scalar(w) for f in h.upper_facets)
        assert (v == scalar(w)) == on_facet


pointsets = st.lists(exps2, min_size=1, max_size=6)


@settings(max_examples=150, deadline=None)
@given(pointsets, pointsets)
def test_minkowski_commutes_and_matches_pairwise_sums(A, B):
    P, R = pg.convex_hull(A), pg.convex_hull(B)
    S1, S2 = pg.minkowski_sum(P, R), pg.minkowski_sum(R, P)
    assert set(S1.vertices) == set(S2.vertices)
    brute = pg.convex_hull([tuple(a + b for a, b in zip(p, q)) for p in A for q in B])
    assert set(S1.vertices) == set(brute.vertices)


def _carath_value(lifted, q):
    """Max of the lifted heights over convex combinations of <= n+1 points hitting q."""
    pts = list(lifted.items())
    n = len(q)
    best = None
    for k in range(1, n + 2):
        for combo in itertools.combinations(pts, k):
            # sum lambda_i a_i = q, sum lambda_i = 1
            rows = [[F(a[d]) for a, _ in combo] for d in range(n)] + [[F(1)] * k]
            rhs = [F(v) for v in q] + [F(1)]
            lam = _solve_any(rows, rhs, k)
            if lam is None or any(l < 0 for l in lam):
                continue
            val = sum(l * w for l, (_, w) in zip(lam, combo))
            best = val if best is None or val > best else best
    return best


def _solve_any(rows, rhs, k):
    red, pivots = ex.rref([r + [b] for r, b in zip(rows, rhs)])
    if k in pivots or len(pivots) < k:
        return None  # inconsistent, or not a unique solution
    return [red[i][k] for i in range(k)]


@settings(max_examples=60, deadline=None)
@given(st.lists(lifts, min_size=1, max_size=3), st.lists(st.integers(1, 2), min_size=3, max_size=3),
       points2)
def test_sup_convolution_matches_decomposition(lift_list, mults, q):
    mults = mults[:len(lift_list)]
    hulls = [pg.upper_hull(l) for l in lift_list]
    conv = pg.sup_convolution(hulls, mults)
    # brute force: every way of adding one lifted vertex per copy
    summed = {(): 0}
    for h, m in zip(hulls, mults):
        lift = {a: v.plain() for a, v in h.vertices.items()}
        for _ in range(m):
            nxt = {}
            for s, w in summed.items():
                for a, v in lift.items():
                    key = tuple(x + y for x, y in zip(s or (0, 0), a))
                    nxt[key] = max(nxt.get(key, -10**9), w + v)
            summed = nxt
    assume(len(summed) <= 30)
    for a, w in summed.items():
        assert pg.eval_concave(conv, a) >= scalar(w)
    expected = _carath_value(summed, q)
    got = pg.eval_concave(conv, q)
    assert (expected is None and got.is_bottom) or got == scalar(expected)


def test_veronese_soundness_nabla():
    rng = random.Random(11)
    checked = 0
    for _ in range(150):
        s, deg = random_nabla_system(rng, max_degree=2)
        res = brute_feasibility(s)
        if not res.feasible:
            continue
        for cols in (mc.ce_set(s).points, mc.simplex_points(s.n, sum(deg))):
            lin = mc.linearize(s, cols)
            assert check_solution(lin, mc.veronese(res.x, cols))
        checked += 1
    assert checked > 20


def test_veronese_soundness_hybrid():
    rng = random.Random(12)
    checked = 0
    for _ in range(150):
        s = random_hybrid_system(rng)
        res = brute_feasibility(s)
        if not res.feasible:
            continue
        cols = mc.ce_set(s, nonempty=True).points
        assert check_solution(mc.linearize(s, cols), mc.veronese(res.x, cols))
        checked += 1
    assert checked > 20


def test_witness_scaling_invariance():
    rng = random.Random(13)
    seen = 0
    for _ in range(120):
        s, _deg = random_nabla_system(rng, max_degree=2)
        cols = mc.ce_set(s, nonempty=True).points
        lin = mc.linearize(s, cols)
        res = feasibility(lin)
        if not res.feasible:
            continue
        seen += 1
        for lam in (F(-7, 3), F(0), F(5)):
            assert check_solution(lin, tuple(v + lam for v in res.witness))
        # rescaling each relation leaves the verdict unchanged
        bumped = type(s)(s.n, tuple(type(r)(r.f.scale(rng.randint(-4, 4))) for r in s.relations))
        assert feasibility(mc.linearize(bumped, cols)).feasible
    assert seen > 10


square = st.integers(2, 6).flatmap(lambda n: st.lists(
    st.lists(st.one_of(st.none(), st.integers(-5, 5)), min_size=n, max_size=n), min_size=n, max_size=n))


@settings(max_examples=120, deadline=None)
@given(square)
def test_tdet_against_permutation_enumeration(M):
    n = len(M)
    vals = []
    for perm in itertools.permutations(range(n)):
        entries = [M[i][perm[i]] for i in range(n)]
        if None not in entries:
            vals.append(sum(entries))
    res = cf.is_trop_nonsingular(M)
    if not vals:
        assert res.status is cf.Nonsingularity.INCONCLUSIVE
        return
    best = max(vals)
    assert res.tdet == scalar(best)
    unique = vals.count(best) == 1
    assert (res.status is cf.Nonsingularity.NONSINGULAR_UNIQUE) == unique
