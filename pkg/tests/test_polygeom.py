from fractions import Fraction as F

import pytest

from systems import IMPLICATION, S1
from tropsys import polygeom as pg
from tropsys.macaulay import ce_set, newton_polytope
from tropsys.tropsem import scalar


def test_unit_square_hull():
    P = pg.convex_hull([(0, 0), (1, 0), (0, 1), (1, 1)])
    assert P.dim == 2 and len(P.facets) == 4
    assert set(P.vertices) == {(0, 0), (1, 0), (0, 1), (1, 1)}


def test_collinear_points_give_a_segment():
    P = pg.convex_hull([(0, 0), (2, 0), (1, 0)])
    assert P.dim == 1
    assert set(P.vertices) == {(0, 0), (2, 0)}
    assert P.contains((1, 0)) and not P.contains((1, F(1, 2)))


def test_minkowski_hexagon():
    Q = newton_polytope(S1, dilated=False)
    assert set(Q.vertices) == {(0, 1), (1, 0), (3, 0), (3, 1), (1, 3), (0, 3)}


def test_minkowski_heptagon_for_the_implication():
    Q = newton_polytope(IMPLICATION, dilated=False)
    assert set(Q.vertices) == {(2, 0), (5, 0), (5, 1), (4, 2), (2, 3), (0, 3), (0, 2)}


def test_minkowski_with_point_translates():
    P = pg.convex_hull([(0, 0), (1, 2), (3, 1)])
    R = pg.minkowski_sum(P, pg.convex_hull([(2, -1)]))
    assert set(R.vertices) == set(pg.translate(P, (2, -1)).vertices)


def test_shifted_hexagon_lattice_points():
    Q = newton_polytope(S1, dilated=False)
    shifted = pg.translate(Q, (F(-9, 10), F(-9, 10)))
    assert sorted(pg.lattice_points(shifted)) == sorted([(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])


def test_shifted_tetrahedron_has_no_lattice_points():
    T = pg.convex_hull([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert pg.lattice_points(pg.translate(T, (F(1, 10),) * 3)) == []


def test_shifted_segment():
    assert pg.lattice_points(pg.translate(pg.convex_hull([(0,), (1,)]), (F(1, 10),))) == [(1,)]


def test_upper_hull_of_a_plane():
    h = pg.upper_hull({(0, 0): 0, (1, 0): 0, (0, 1): 1})
    assert len(h.upper_facets) == 1
    assert h.upper_facets[0].x == (0, -1)
    assert set(h.upper_facets[0].vertices) == {(0, 0), (1, 0), (0, 1)}


def test_upper_hull_one_variable():
    h = pg.upper_hull({(0,): 0, (1,): 0})
    assert [f.x for f in h.upper_facets] == [(0,)]
    assert h.upper_facets[0].support == scalar(0)


def test_inessential_point_lies_below_the_hull():
    h = pg.upper_hull({(0,): 0, (1,): -5, (2,): 0})
    assert set(h.vertices) == {(0,), (2,)}
    assert pg.eval_concave(h, (1,)) == scalar(0)


def test_single_hull_convolution_is_identity():
    h = pg.upper_hull({(0, 0): 1, (1, 0): 2, (0, 1): 1, (1, 1): 1})
    g = pg.sup_convolution([h], [1])
    assert g.vertices == h.vertices


def test_scaling_value_of_the_first_ce_point():
    data = ce_set(S1)
    assert pg.eval_concave(data.hull, (F(9, 10), F(9, 10))) == scalar(F(18, 5))


def test_two_level_scaling_for_the_implication():
    data = ce_set(IMPLICATION)
    q = tuple(p - d for p, d in zip((1, 0), data.delta))
    assert pg.eval_concave(data.hull, q) == scalar(6) + pg.TropicalScalar(0, 1)


def test_s1_subdivision_has_eight_cells():
    assert len(ce_set(S1).hull.upper_facets) == 8


def test_cell_of_labels_and_walls():
    h = ce_set(S1).hull
    cell = pg.cell_of(h, (F(9, 10), F(9, 10)))
    assert cell.x == (-3, -1)
    assert pg.cell_of(h, (1, 0)) is pg.WALL
    with pytest.raises(ValueError):
        pg.cell_of(h, (0, 0))


def test_eval_outside_support_is_bottom():
    h = pg.upper_hull({(0,): 0, (1,): 0})
    assert pg.eval_concave(h, (2,)).is_bottom


def test_generic_shift_defaults():
    data = ce_set(S1)
    assert data.delta == (F(-9, 10), F(-9, 10))
    assert data.shift.verified


def test_point_polytope_shift_is_z():
    P = pg.convex_hull([(0, 0)])
    s = pg.generic_shift(P, z=(3, -2))
    assert s.delta == (3, -2) and s.verified


def test_implication_shift_gives_ten_points():
    data = ce_set(IMPLICATION)
    assert data.shift.verified and len(data.points) == 10


def test_dumps_are_plain_json_types():
    import json
    h = ce_set(S1).hull
    json.dumps(pg.dump_hull(h))
    json.dumps(pg.dump_polytope(h.support_polytope))
