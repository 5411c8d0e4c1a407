"""Canny-Emiris sets, Macaulay submatrices and linearized tropical systems."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Sequence

from . import _exact as ex
from . import polygeom as pg
from .tropsem import (BOTTOM, Nabla, PolySystem, Rel, TropicalPolynomial, TwoSided,
                      format_scalar, glex_key, glex_sorted, scalar)


@dataclass(frozen=True)
class RowIndex:
    i: int
    alpha: tuple

    def label(self, names=None) -> str:
        mono = "*".join(
            (n if e == 1 else f"{n}^{e}")
            for n, e in zip(names or [f"x{k + 1}" for k in range(len(self.alpha))], self.alpha) if e
        )
        return f"{mono + '*' if mono else ''}f{self.i + 1}"


class RowKind(enum.Enum):
    NABLA = "nabla"
    GEQ = ">="
    EQ = "=="
    GT = ">"


_KIND = {Rel.GEQ: RowKind.GEQ, Rel.EQ: RowKind.EQ, Rel.GT: RowKind.GT}


@dataclass
class MacaulayView:
    """Finite block of the Macaulay matrix.

    ``plus[r]`` / ``minus[r]`` map column positions to coefficients; a nabla
    row keeps its single layer in ``plus`` and leaves ``minus`` empty.
    """

    columns: list
    rows: list
    kinds: list
    plus: list
    minus: list

    @property
    def shape(self):
        return len(self.rows), len(self.columns)

    def entry(self, r: int, c: int, layer: str = "plus"):
        src = self.plus if layer == "plus" else self.minus
        return src[r].get(c, BOTTOM)

    def dense(self, layer: str = "plus") -> list:
        return [[self.entry(r, c, layer) for c in range(len(self.columns))] for r in range(len(self.rows))]

    @property
    def two_sided(self) -> bool:
        return any(k is not RowKind.NABLA for k in self.kinds)


@dataclass
class LinRow:
    kind: RowKind
    plus: dict
    minus: dict
    source: RowIndex | None = None


@dataclass
class LinearSystem:
    columns: list
    rows: list

    @property
    def ncols(self) -> int:
        return len(self.columns)


@dataclass(frozen=True)
class DilationProfile:
    r: tuple


def _aff_dim(points) -> int:
    pts = list(points)
    if not pts:
        return 0
    return len(ex.affine_hull(pts)[1])


def dilation_profile(system: PolySystem) -> DilationProfile:
    r = []
    for rel in system.relations:
        if isinstance(rel, Nabla):
            r.append(1)
        elif rel.rel is Rel.EQ:
            r.append(max(_aff_dim(rel.minus.terms), _aff_dim(rel.plus.terms)) + 1)
        else:
            r.append(_aff_dim(rel.minus.terms) + 1)
    return DilationProfile(tuple(r))


def relation_hull(rel) -> pg.LiftedHull:
    """Concavification of the combined coefficient map of one relation."""
    return pg.upper_hull(rel.combined().terms)


@dataclass
class CEData:
    shift: pg.GenericShift
    points: list
    hull: pg.LiftedHull
    polytope: pg.QPolytope
    hulls: list
    profile: DilationProfile

    @property
    def delta(self):
        return self.shift.delta


def newton_polytope(system: PolySystem, dilated: bool = True) -> pg.QPolytope:
    r = dilation_profile(system).r if dilated else [1] * len(system.relations)
    acc = None
    for rel, ri in zip(system.relations, r):
        Qi = pg.dilate(pg.convex_hull(rel.support), ri)
        acc = Qi if acc is None else pg.minkowski_sum(acc, Qi)
    if acc is None:
        acc = pg.convex_hull([tuple([0] * system.n)])
    return acc


def ce_set(system: PolySystem, seed=None, delta=None, nonempty: bool = False) -> CEData:
    """Canny-Emiris set (Q~ + delta) ∩ Z^n with its lifted subdivision.

    With ``nonempty`` set, an empty set under the default shift triggers
    shifts pointing from the barycentre towards each vertex of Q~.
    """
    if not system.relations:
        raise ValueError("system without relations")
    profile = dilation_profile(system)
    hulls = [relation_hull(rel) for rel in system.relations]
    hull = pg.sup_convolution(hulls, list(profile.r))
    Q = hull.support_polytope
    if delta is not None:
        delta = tuple(Fraction(d) for d in delta)
        shift = pg.GenericShift(delta, seed, pg._shift_ok(Q, hull, delta))
    else:
        shift = pg.generic_shift(Q, hull, seed)
    pts = pg.lattice_points(pg.translate(Q, shift.delta))
    if not pts and nonempty and delta is None and Q.dim > 0:
        centre = tuple(sum(v[c] for v in Q.vertices) / len(Q.vertices) for c in range(Q.n))
        for v in Q.vertices:
            direction = tuple(Fraction(1, 7) * (a - b) for a, b in zip(v, centre))
            try:
                cand = pg.generic_shift(Q, hull, seed if seed is not None else 0,
                                        z=[0] * Q.n, direction=direction)
            except RuntimeError:
                continue
            cand_pts = pg.lattice_points(pg.translate(Q, cand.delta))
            if cand_pts:
                shift, pts = cand, cand_pts
                break
    return CEData(shift, pts, hull, Q, hulls, profile)


def qbar_set(system: PolySystem, dilated: bool = True) -> list:
    """Lattice points of the (dilated) Newton polytope itself."""
    return pg.lattice_points(newton_polytope(system, dilated))


def simplex_points(n: int, N: int) -> list:
    pts = [p for p in iproduct(range(N + 1), repeat=n) if sum(p) <= N]
    return glex_sorted(pts)


def relation_degree(rel) -> int:
    return max(sum(a) for a in rel.support)


def _layers(rel):
    if isinstance(rel, Nabla):
        return RowKind.NABLA, rel.f.terms, {}
    return _KIND[rel.rel], rel.plus.terms, rel.minus.terms


def macaulay_view(system: PolySystem, columns: Sequence, apriori: Sequence | None = None) -> MacaulayView:
    cols = glex_sorted(set(tuple(c) for c in columns))
    pos = {c: k for k, c in enumerate(cols)}
    if apriori is not None:
        if len(apriori) != len(system.relations):
            raise ValueError("one a-priori support per relation expected")
        for rel, A in zip(system.relations, apriori):
            if not set(rel.support) <= {tuple(a) for a in A}:
                raise ValueError("a-priori support does not contain the actual support")
    rows, kinds, plus, minus = [], [], [], []
    for i, rel in enumerate(system.relations):
        A = [tuple(a) for a in (apriori[i] if apriori is not None else rel.support)]
        kind, pterms, mterms = _layers(rel)
        alphas = set()
        for beta in cols:
            for a in A:
                alpha = tuple(b - c for b, c in zip(beta, a))
                if alpha in alphas:
                    continue
                if all(tuple(x + y for x, y in zip(alpha, s)) in pos for s in A):
                    alphas.add(alpha)
        for alpha in glex_sorted(alphas):
            rows.append(RowIndex(i, alpha))
            kinds.append(kind)
            plus.append({pos[tuple(x + y for x, y in zip(alpha, s))]: c for s, c in pterms.items()})
            minus.append({pos[tuple(x + y for x, y in zip(alpha, s))]: c for s, c in mterms.items()})
    return MacaulayView(cols, rows, kinds, plus, minus)


def truncated_view(system: PolySystem, N: int) -> MacaulayView:
    if not system.is_ordinary:
        raise ValueError("truncation needs nonnegative exponents")
    if N < 0:
        raise ValueError("truncation degree must be nonnegative")
    cols = simplex_points(system.n, N)
    apriori = [simplex_points(system.n, relation_degree(rel)) for rel in system.relations]
    return macaulay_view(system, cols, apriori)


def to_linear(view: MacaulayView) -> LinearSystem:
    rows = [LinRow(k, dict(p), dict(m), src)
            for k, p, m, src in zip(view.kinds, view.plus, view.minus, view.rows)]
    return LinearSystem(list(view.columns), rows)


def linearize(system: PolySystem, columns: Sequence, apriori: Sequence | None = None) -> LinearSystem:
    return to_linear(macaulay_view(system, columns, apriori))


def veronese(x, columns) -> tuple:
    return tuple(ex.dot(c, x) for c in columns)


def degree_set(system: PolySystem, N: int) -> LinearSystem:
    return to_linear(truncated_view(system, N))


# ----------------------------------------------------------------------------
# dumps


def view_to_json(view: MacaulayView, names=None) -> dict:
    def layer(src):
        return [[None if c not in row else format_scalar(row[c]) for c in range(len(view.columns))]
                for row in src]

    out = {
        "columns": [list(c) for c in view.columns],
        "rows": [{"i": r.i + 1, "alpha": list(r.alpha), "label": r.label(names), "kind": k.value}
                 for r, k in zip(view.rows, view.kinds)],
        "plus": layer(view.plus),
    }
    if view.two_sided:
        out["minus"] = layer(view.minus)
    return out


def view_to_csv(view: MacaulayView, names=None) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["row", "kind", "layer"] + ["X^" + "_".join(str(a) for a in c) for c in view.columns]
    w.writerow(header)
    layers = [("plus", view.plus)] + ([("minus", view.minus)] if view.two_sided else [])
    for r, (idx, kind) in enumerate(zip(view.rows, view.kinds)):
        for name, src in layers:
            if kind is RowKind.NABLA and name == "minus":
                continue
            w.writerow([idx.label(names), kind.value, name] +
                       ["" if c not in src[r] else format_scalar(src[r][c]) for c in range(len(view.columns))])
    return buf.getvalue()
