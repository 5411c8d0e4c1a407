"""End-to-end acceptance checks, one per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the summary)
or directly with ``python3 tests/test_acceptance.py``.
"""

import random
import sys
import time
from contextlib import contextmanager
from fractions import Fraction as F
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from conftest import DATA  # noqa: E402
from systems import (EMPTY_CE_NO_ROOT, EMPTY_CE_ROOT, IMPLICATION, S1, S2,  # noqa: E402
                     random_hybrid_system, random_nabla_system, tight_family)
from tropsys import certify as cf  # noqa: E402
from tropsys import macaulay as mc  # noqa: E402
from tropsys.cli import run  # noqa: E402
from tropsys.oracle import brute_feasibility, nontoric_search  # noqa: E402
from tropsys.tropsolve import feasibility  # noqa: E402

RESULTS = []


@contextmanager
def criterion(num, title, limit):
    start = time.perf_counter()
    ok, detail = False, ""
    try:
        yield
        ok = True
    except AssertionError as err:
        detail = f" ({err})" if str(err) else ""
        raise
    finally:
        took = time.perf_counter() - start
        if ok and took > limit:
            ok, detail = False, f" (over the {limit:g} s budget)"
        line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {title} [{took:.2f} s / {limit:g} s]{detail}"
        RESULTS.append(line)
        print(line)
        assert ok, line


def _normalized(y):
    return [v - y[0] for v in y]


def test_criterion_1_small_systems():
    with criterion(1, "S1 infeasible, S2 feasible with its Veronese witness, six CE points", 1.0):
        assert run(["check", str(DATA / "s1.trop")])[0] == 10
        assert run(["check", str(DATA / "s2.trop")])[0] == 0
        data = mc.ce_set(S2)
        assert data.delta == (F(-9, 10), F(-9, 10))
        assert data.points == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        assert mc.ce_set(S1).points == data.points
        res = feasibility(mc.linearize(S2, data.points))
        assert res.feasible and _normalized(res.witness) == [0, -3, -1, -6, -4, -2]
        assert not feasibility(mc.linearize(S1, data.points)).feasible


def test_criterion_2_certificate():
    with criterion(2, "S1 certificate scaling and diagonal, verified, unique tdet", 1.0):
        cert = cf.build_certificate(S1)
        assert [s.plain() for s in cert.scaling] == [F(18, 5), F(24, 5), F(19, 5), F(33, 10), F(41, 10),
                                                     F(11, 5)]
        assert [d.plain() for d in cert.diagonal()] == [F(-13, 5), F(-14, 5), F(-14, 5), F(-13, 10),
                                                        F(-21, 10), F(-6, 5)]
        assert cf.verify_certificate(cert, S1)
        assert cf.is_trop_nonsingular(cert.tilde()).status is cf.Nonsingularity.NONSINGULAR_UNIQUE


def test_criterion_3_tightness():
    with criterion(3, "tight family: root-free, solvable at (n-1)(d-1), not one degree higher", 10.0):
        for n, d in [(2, 2), (2, 3), (3, 2)]:
            s = tight_family(n, d)
            N = (n - 1) * (d - 1)
            assert not brute_feasibility(s).feasible, (n, d)
            assert feasibility(mc.degree_set(s, N)).feasible, (n, d, N)
            assert not feasibility(mc.degree_set(s, N + 1)).feasible, (n, d, N + 1)


def test_criterion_4_degree_bound():
    with criterion(4, "degree bound on 200 random systems agrees with the oracle", 300.0):
        rng = random.Random(2024)
        for k in range(200):
            s, deg = random_nabla_system(rng, max_degree=3)
            truth = brute_feasibility(s).feasible
            bounds = [sum(deg)]
            if mc.newton_polytope(s, dilated=False).dim == s.n:
                bounds.append(sum(deg) - s.n)
            apriori = [mc.simplex_points(s.n, d) for d in deg]
            for N in bounds:
                lin = mc.linearize(s, mc.simplex_points(s.n, N), apriori)
                assert feasibility(lin).feasible == truth, (k, N)


def test_criterion_5_positivstellensatz():
    with criterion(5, "implication certified by the 10-column CE linearization", 2.0):
        data = mc.ce_set(IMPLICATION)
        assert data.profile.r == (1, 1, 1, 1) and len(data.points) == 10
        assert not feasibility(mc.linearize(IMPLICATION, data.points)).feasible
        cert = cf.build_certificate(IMPLICATION)
        assert cf.verify_certificate(cert, IMPLICATION) and cert.dominant
        plus, minus = cert.tilde("plus"), cert.tilde("minus")
        for k, rc in enumerate(cert.rows):
            assert rc.case == "minus"
            assert all(minus[k][k] > e for e in plus[k] if not e.is_bottom)


def test_criterion_6_hybrid():
    with criterion(6, "200 random hybrid systems agree with the oracle", 300.0):
        rng = random.Random(4048)
        for k in range(200):
            s = random_hybrid_system(rng, n=rng.randint(1, 3), max_degree=3, max_rel=4)
            cols = mc.ce_set(s, nonempty=True).points
            assert feasibility(mc.linearize(s, cols)).feasible == brute_feasibility(s).feasible, k


def test_criterion_7_property_suites():
    import test_certify
    import test_properties as tp
    with criterion(7, "semiring, Veronese, scaling, sup-convolution and tdet properties", 300.0):
        tp.test_semiring_laws()
        tp.test_veronese_soundness_nabla()
        tp.test_veronese_soundness_hybrid()
        tp.test_witness_scaling_invariance()
        tp.test_sup_convolution_matches_decomposition()
        test_certify.test_tdet_of_the_scaled_matrix_is_unique(cf.build_certificate(S1))


def test_criterion_8_empty_ce():
    with criterion(8, "empty CE set: exit 20, qbar infeasible, stratum search finds (0,0,0)", 5.0):
        assert run(["check", str(DATA / "empty_ce.trop"), "--set", "ce"])[0] == 20
        assert run(["check", str(DATA / "empty_ce.trop"), "--set", "qbar"])[0] == 10
        assert mc.ce_set(EMPTY_CE_NO_ROOT).points == []
        assert mc.ce_set(EMPTY_CE_ROOT).points == []
        res = nontoric_search(EMPTY_CE_ROOT)
        assert res.feasible and res.x == (0, 0, 0)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
