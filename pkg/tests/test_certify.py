import itertools
import json
from fractions import Fraction as F

import pytest

from systems import EMPTY_CE_NO_ROOT, IMPLICATION, S1, S1_REORDERED, S2
from tropsys import certify as cf
from tropsys.tropsem import BOTTOM, TropicalScalar, scalar

_ = None
S1_TILDE = [
    [F(-13, 5), F(-14, 5), F(-14, 5), _, F(-31, 10), _],
    [_, F(-14, 5), F(-19, 5), _, _, _],
    [F(-18, 5), F(-24, 5), F(-14, 5), _, _, _],
    [_, _, _, F(-13, 10), F(-41, 10), _],
    [_, _, _, _, F(-21, 10), F(-11, 5)],
    [_, _, F(-19, 5), _, F(-41, 10), F(-6, 5)],
]


@pytest.fixture(scope="module")
def s1_cert():
    return cf.build_certificate(S1)


def _plain(m):
    return [[None if e.is_bottom else e.plain() for e in row] for row in m]


def test_s1_row_contents(s1_cert):
    got = [(rc.p, rc.j + 1, rc.a_j) for rc in s1_cert.rows]
    assert got[:4] == [((0, 0), 1, (0, 0)), ((1, 0), 3, (1, 0)), ((0, 1), 2, (0, 1)), ((2, 0), 3, (1, 0))]
    assert all(rc.kind is cf.ContentKind.NULL_SINGLETON for rc in s1_cert.rows)


def test_s1_scaled_matrix(s1_cert):
    assert [s.plain() for s in s1_cert.scaling] == [F(18, 5), F(24, 5), F(19, 5), F(33, 10), F(41, 10), F(11, 5)]
    assert _plain(s1_cert.tilde()) == S1_TILDE
    assert s1_cert.dominant
    assert cf.verify_certificate(s1_cert, S1)


def test_perturbed_scaling_fails_verification(s1_cert):
    bad = cf.certificate_from_json(cf.certificate_to_json(s1_cert))
    bad.scaling[2] = bad.scaling[2] + 1
    assert not cf.verify_certificate(bad, S1)


def test_reordered_relations_change_the_fifth_row():
    cert = cf.build_certificate(S1_REORDERED)
    rc = cert.rows[4]
    # the row becomes x1 * f2, f2 now being the third relation
    assert rc.p == (1, 1) and S1_REORDERED.relations[rc.j] is S1.relations[1]
    assert rc.alpha == (1, 0)
    assert cf.verify_certificate(cert, S1_REORDERED)


def test_s2_yields_its_root():
    res = cf.build_certificate(S2)
    assert isinstance(res, cf.SolutionFound)
    assert tuple(res.x) == (-3, -1)


def test_empty_ce_set_raises():
    with pytest.raises(cf.EmptyCESet):
        cf.build_certificate(EMPTY_CE_NO_ROOT)


def test_implication_certificate():
    cert = cf.build_certificate(IMPLICATION)
    assert len(cert.ce_points) == 10
    by_p = {rc.p: rc for rc in cert.rows}
    assert (by_p[(1, 0)].j + 1, by_p[(1, 0)].a_j) == (4, (1, 0))
    assert (by_p[(0, 2)].j + 1, by_p[(0, 2)].a_j) == (2, (0, 1))
    assert by_p[(1, 0)].alpha == (0, 0) and by_p[(0, 2)].alpha == (0, 1)
    assert all(rc.kind is cf.ContentKind.POS_SHAPLEY_FOLKMAN for rc in cert.rows)
    assert cert.scaling[0] == TropicalScalar(6, 1)
    assert cert.dominant and cf.verify_certificate(cert, IMPLICATION)
    plus, minus = cert.tilde("plus"), cert.tilde("minus")
    for k, rc in enumerate(cert.rows):
        assert rc.case == "minus"
        assert all(minus[k][k] > e for e in plus[k] if not e.is_bottom)


def test_json_round_trip(s1_cert):
    data = cf.certificate_to_json(s1_cert)
    text = json.dumps(data)
    back = cf.certificate_from_json(json.loads(text))
    assert cf.certificate_to_json(back) == data
    assert cf.verify_certificate(back, S1)


def _brute_tdet(M):
    n = len(M)
    best, count = BOTTOM, 0
    for perm in itertools.permutations(range(n)):
        vals = [scalar(M[i][perm[i]]) for i in range(n)]
        if any(v.is_bottom for v in vals):
            continue
        total = sum(vals[1:], vals[0])
        if total > best:
            best, count = total, 1
        elif total == best:
            count += 1
    return best, count


def test_tdet_of_the_scaled_matrix_is_unique(s1_cert):
    res = cf.is_trop_nonsingular(s1_cert.tilde())
    best, count = _brute_tdet(s1_cert.tilde())
    assert res.status is cf.Nonsingularity.NONSINGULAR_UNIQUE
    assert res.tdet == best == scalar(F(-64, 5)) and count == 1


def test_tdet_small_cases():
    assert cf.is_trop_nonsingular([[0, 0], [0, 0]]).status is cf.Nonsingularity.INCONCLUSIVE
    diag = [[1, None, None], [None, 2, None], [None, None, 3]]
    res = cf.is_trop_nonsingular(diag)
    assert res.status is cf.Nonsingularity.NONSINGULAR_UNIQUE and res.tdet == scalar(6)
