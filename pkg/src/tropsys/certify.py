"""Canny-Emiris infeasibility certificates: row contents, square matrices, dominance."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import _exact as ex
from . import polygeom as pg
from .macaulay import CEData, ce_set, dilation_profile, relation_hull
from .tropsem import (BOTTOM, Nabla, PolySystem, Rel, TropicalScalar, TwoSided, format_scalar,
                      glex_key, parse_scalar, scalar)


class EmptyCESet(ValueError):
    pass


class WallIncident(RuntimeError):
    pass


class ContentKind(enum.Enum):
    NULL_SINGLETON = "NullSingleton"
    POS_SHAPLEY_FOLKMAN = "PosShapleyFolkman"


@dataclass(frozen=True)
class RowContent:
    p: tuple
    j: int  # 0-based relation index
    a_j: tuple
    kind: ContentKind
    x: tuple
    case: str  # "single", "minus" (a_j on the right side) or "plus"

    @property
    def alpha(self) -> tuple:
        return tuple(u - v for u, v in zip(self.p, self.a_j))


@dataclass
class SolutionFound:
    x: tuple
    two_level: tuple
    eps: Fraction
    p: tuple


@dataclass
class Certificate:
    shift: pg.GenericShift
    ce_points: list
    rows: list
    scaling: list
    plus: list
    minus: list
    verdicts: list

    @property
    def delta(self):
        return self.shift.delta

    @property
    def dominant(self) -> bool:
        return all(self.verdicts)

    def tilde(self, layer: str = "plus") -> list:
        src = self.plus if layer == "plus" else self.minus
        return [[BOTTOM if e.is_bottom else e - s for e, s in zip(row, self.scaling)] for row in src]

    def diagonal(self) -> list:
        """Diagonal of the rescaled matrix on the layer that carries a_j."""
        out = []
        for k, rc in enumerate(self.rows):
            layer = "minus" if rc.case == "minus" else "plus"
            out.append(self.tilde(layer)[k][k])
        return out


@dataclass
class VerifyResult:
    ok: bool
    message: str = ""

    def __bool__(self):
        return self.ok


# ----------------------------------------------------------------------------
# hull bookkeeping


class _Context:
    """Hulls shared by all row contents of one system."""

    def __init__(self, system: PolySystem, data: CEData):
        self.system = system
        self.data = data
        self.r = list(data.profile.r)
        self._hat = {}

    def hat(self, j: int) -> pg.LiftedHull:
        """Sup-convolution of all relation hulls with one copy of h_j removed."""
        if j not in self._hat:
            mult = list(self.r)
            mult[j] -= 1
            hulls = [h for h, m in zip(self.data.hulls, mult) if m > 0]
            ms = [m for m in mult if m > 0]
            self._hat[j] = pg.sup_convolution(hulls, ms) if hulls else pg.point_hull(self.system.n)
        return self._hat[j]


def _value(poly, x):
    return poly.evaluate(x) if poly.terms else BOTTOM


def _violation(rel: TwoSided, x):
    """'minus' when the right side wins, 'plus' when an equality loses the other way."""
    lhs, rhs = _value(rel.plus, x), _value(rel.margin_minus(), x)
    if rhs > lhs:
        return "minus"
    if rel.rel is Rel.EQ and rhs < lhs:
        return "plus"
    return None


def _split_ok(ctx: _Context, j: int, q, a) -> bool:
    """q = a + (q - a) realises h~(q) = h_j(a) + h^_j(q - a) off every wall of h^_j."""
    hat = ctx.hat(j)
    rest = ex.vec_sub(q, a)
    if not hat.support_polytope.contains(rest):
        return False
    if pg.cell_of(hat, rest) is pg.WALL:
        return False
    return pg.eval_concave(ctx.data.hull, q) == ctx.data.hulls[j].points[a] + pg.eval_concave(hat, rest)


def row_content(p, ctx: _Context):
    """Row content of the CE point p, or SolutionFound when the cell normal solves the system."""
    q = ex.vec_sub(tuple(Fraction(v) for v in p), ctx.data.delta)
    cell = pg.cell_of(ctx.data.hull, q)
    if cell is pg.WALL:
        raise WallIncident(f"shifted point {p} lies on a wall of the subdivision")
    x = cell.x
    system = ctx.system
    faces = [pg.face_vertices(h, x) for h in ctx.data.hulls]
    singles = [i for i, rel in enumerate(system.relations)
               if isinstance(rel, Nabla) and len(faces[i]) == 1]
    if singles:
        j = max(singles)
        a = faces[j][0]
        if not _split_ok(ctx, j, q, a):
            raise WallIncident(f"no valid decomposition for {p}")
        return RowContent(tuple(p), j, a, ContentKind.NULL_SINGLETON, x, "single")
    violated = [(i, _violation(rel, x)) for i, rel in enumerate(system.relations)
                if isinstance(rel, TwoSided)]
    violated = [(i, c) for i, c in violated if c is not None]
    if not violated:
        return _solution(system, x, p)
    j, case = max(violated)
    rel = system.relations[j]
    layer = rel.margin_minus() if case == "minus" else rel.plus
    h = ctx.data.hulls[j]
    cands = [a for a in faces[j] if a in layer.terms and layer.terms[a] == h.points[a]]
    for a in sorted(cands, key=glex_key):
        if _split_ok(ctx, j, q, a):
            return RowContent(tuple(p), j, a, ContentKind.POS_SHAPLEY_FOLKMAN, x, case)
    raise WallIncident(f"no extreme point of the cell at {p} splits off")


def _solution(system: PolySystem, x, p) -> SolutionFound:
    t = Fraction(1)
    for _ in range(256):
        plain = tuple(scalar(v).instantiate(t) for v in x)
        if system.holds(plain):
            return SolutionFound(plain, tuple(x), t, tuple(p))
        t /= 2
    raise AssertionError("cell normal does not instantiate to a solution")


# ----------------------------------------------------------------------------
# square matrices


def _layers(rel, case):
    if isinstance(rel, Nabla):
        return rel.f.terms, {}
    return rel.plus.terms, rel.margin_minus().terms


def square_rows(system: PolySystem, rows, points):
    """Layers of M_EE: row p is the Macaulay row (j, p - a_j) restricted to E."""
    plus, minus = [], []
    for rc in rows:
        pl, mi = _layers(system.relations[rc.j], rc.case)
        alpha = rc.alpha
        prow, mrow = [], []
        for p2 in points:
            a2 = tuple(u - v for u, v in zip(p2, alpha))
            prow.append(scalar(pl[a2]) if a2 in pl else BOTTOM)
            mrow.append(scalar(mi[a2]) if a2 in mi else BOTTOM)
        plus.append(prow)
        minus.append(mrow)
    return plus, minus


def _dominance(rc: RowContent, k: int, tplus, tminus) -> bool:
    if rc.case == "single":
        diag = tplus[k][k]
        return all(e < diag for c, e in enumerate(tplus[k]) if c != k)
    if rc.case == "minus":
        diag = tminus[k][k]
        return all(e < diag for e in tplus[k])
    diag = tplus[k][k]
    return all(e < diag for e in tminus[k])


def row_content_null(p, system: PolySystem, data: CEData | None = None):
    data = data or ce_set(system)
    return row_content(p, _Context(system, data))


row_content_pos = row_content_null


def build_certificate(system: PolySystem, seed=None, delta=None, nonempty: bool = False):
    """Certificate of infeasibility over the CE set, or SolutionFound."""
    data = ce_set(system, seed=seed, delta=delta, nonempty=nonempty)
    if not data.points:
        raise EmptyCESet("the Canny-Emiris set is empty")
    if not data.shift.verified:
        raise WallIncident("the shift is not generic")
    ctx = _Context(system, data)
    rows = []
    for p in data.points:
        rc = row_content(p, ctx)
        if isinstance(rc, SolutionFound):
            return rc
        rows.append(rc)
    points = list(data.points)
    scaling = [pg.eval_concave(data.hull, ex.vec_sub(tuple(map(Fraction, p)), data.delta)) for p in points]
    plus, minus = square_rows(system, rows, points)
    cert = Certificate(data.shift, points, rows, scaling, plus, minus, [])
    tplus, tminus = cert.tilde("plus"), cert.tilde("minus")
    cert.verdicts = [_dominance(rc, k, tplus, tminus) for k, rc in enumerate(rows)]
    for k, rc in enumerate(rows):
        q = ex.vec_sub(tuple(map(Fraction, rc.p)), data.delta)
        expected = -pg.eval_concave(ctx.hat(rc.j), ex.vec_sub(q, rc.a_j))
        if cert.diagonal()[k] != expected:
            raise AssertionError(f"diagonal entry at {rc.p} differs from -h^_j(p - delta - a_j)")
    return cert


# ----------------------------------------------------------------------------
# verification


def verify_certificate(cert: Certificate, system: PolySystem, columns=None) -> VerifyResult:
    """Re-check a certificate from scratch.

    Admissibility of every row over E, entries against the polynomials,
    scaling against a recomputed h~, and strict dominance.  With ``columns``
    the zero block over columns outside E is checked as well.
    """
    points = [tuple(p) for p in cert.ce_points]
    E = set(points)
    n = system.n
    if len(cert.rows) != len(points):
        return VerifyResult(False, "one row per CE point expected")
    if not points:
        return VerifyResult(False, "empty CE set")
    r = dilation_profile(system).r
    hulls = [relation_hull(rel) for rel in system.relations]
    hull = pg.sup_convolution(hulls, list(r))
    delta = tuple(Fraction(d) for d in cert.delta)
    moved = pg.lattice_points(pg.translate(hull.support_polytope, delta))
    if sorted(moved, key=glex_key) != sorted(points, key=glex_key):
        return VerifyResult(False, "CE points do not match (Q~ + delta) ∩ Z^n")
    for k, rc in enumerate(cert.rows):
        if tuple(rc.p) != points[k]:
            return VerifyResult(False, f"row {k} is attached to {rc.p}, expected {points[k]}")
        if not 0 <= rc.j < len(system.relations):
            return VerifyResult(False, f"row {k}: relation index out of range")
        rel = system.relations[rc.j]
        support = rel.support
        alpha = rc.alpha
        for a in support:
            if tuple(u + v for u, v in zip(alpha, a)) not in E:
                return VerifyResult(False, f"row {k}: X^{alpha} f_{rc.j + 1} leaves the CE set")
        if rc.case == "single" and not isinstance(rel, Nabla):
            return VerifyResult(False, f"row {k}: single-layer content on a two-sided relation")
        if rc.case in ("plus", "minus") and not isinstance(rel, TwoSided):
            return VerifyResult(False, f"row {k}: two-sided content on a nabla relation")
        if columns is not None:
            cols = {tuple(c) for c in columns}
            if not E <= cols:
                return VerifyResult(False, "supplied columns do not contain the CE set")
    plus, minus = square_rows(system, cert.rows, points)
    if [[scalar(e) for e in row] for row in cert.plus] != plus or \
            [[scalar(e) for e in row] for row in cert.minus] != minus:
        return VerifyResult(False, "matrix entries do not match the Macaulay coefficients")
    for k, p in enumerate(points):
        val = pg.eval_concave(hull, ex.vec_sub(tuple(map(Fraction, p)), delta))
        if scalar(cert.scaling[k]) != val:
            return VerifyResult(False, f"scaling at {p} is {format_scalar(cert.scaling[k])}, "
                                       f"recomputed {format_scalar(val)}")
    tplus, tminus = cert.tilde("plus"), cert.tilde("minus")
    for k, rc in enumerate(cert.rows):
        if not _dominance(rc, k, tplus, tminus):
            return VerifyResult(False, f"row {k} (point {rc.p}) is not dominant")
    return VerifyResult(True, "ok")


# ----------------------------------------------------------------------------
# tropical nonsingularity


class Nonsingularity(enum.Enum):
    NONSINGULAR_UNIQUE = "NonsingularUnique"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class AssignmentResult:
    status: Nonsingularity
    tdet: TropicalScalar
    permutation: tuple | None


def _hungarian_min(cost):
    """Exact O(n^3) assignment minimising integer costs; returns (row->col, u, v)."""
    n = len(cost)
    INF = float("inf")
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta, j1 = INF, 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta, j1 = minv[j], j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    assign = [0] * n
    for j in range(1, n + 1):
        assign[p[j] - 1] = j - 1
    return assign, u[1:], v[1:]


def is_trop_nonsingular(M) -> AssignmentResult:
    """Optimal assignment of a square tropical matrix and uniqueness of the optimum."""
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("matrix is not square")
    if n == 0:
        return AssignmentResult(Nonsingularity.NONSINGULAR_UNIQUE, scalar(0), ())
    entries = [[scalar(e) for e in row] for row in M]
    finite = [e for row in entries for e in row if not e.is_bottom]
    if not finite:
        return AssignmentResult(Nonsingularity.INCONCLUSIVE, BOTTOM, None)
    den = ex.common_denominator(finite)
    maxb = max(abs(e.b * den) for e in finite) + 1
    M_enc = 2 * n * maxb + 1
    enc = [[None if e.is_bottom else int(e.a * den) * M_enc + int(e.b * den) for e in row] for row in entries]
    span = max(abs(w) for row in enc for w in row if w is not None)
    big = (2 * n + 2) * span + 1
    cost = [[big if w is None else -w for w in row] for row in enc]
    assign, u, v = _hungarian_min(cost)
    if any(enc[i][assign[i]] is None for i in range(n)):
        return AssignmentResult(Nonsingularity.INCONCLUSIVE, BOTTOM, None)
    tdet = entries[0][assign[0]]
    for i in range(1, n):
        tdet = tdet + entries[i][assign[i]]
    # another optimal permutation exists iff the tight graph has an alternating cycle
    owner = {assign[i]: i for i in range(n)}
    succ = [[owner[j] for j in range(n) if j != assign[i] and enc[i][j] is not None
             and cost[i][j] - u[i] - v[j] == 0] for i in range(n)]
    color = [0] * n

    def has_cycle(s):
        stack = [(s, iter(succ[s]))]
        color[s] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
            elif color[nxt] == 1:
                return True
            elif color[nxt] == 0:
                color[nxt] = 1
                stack.append((nxt, iter(succ[nxt])))
        return False

    unique = not any(color[s] == 0 and has_cycle(s) for s in range(n))
    status = Nonsingularity.NONSINGULAR_UNIQUE if unique else Nonsingularity.INCONCLUSIVE
    return AssignmentResult(status, tdet, tuple(assign))


# ----------------------------------------------------------------------------
# serialisation


def _s(v):
    v = scalar(v)
    return None if v.is_bottom else format_scalar(v)


def _p(v):
    return None if v is None else parse_scalar(v)


def certificate_to_json(cert: Certificate) -> dict:
    return {
        "delta": [str(d) for d in cert.delta],
        "ce_points": [list(p) for p in cert.ce_points],
        "rows": [{"p": list(rc.p), "j": rc.j + 1, "a_j": list(rc.a_j), "kind": rc.kind.value,
                  "x": [format_scalar(c) for c in rc.x], "case": rc.case} for rc in cert.rows],
        "scaling": [format_scalar(s) for s in cert.scaling],
        "matrices": {"plus": [[_s(e) for e in row] for row in cert.plus],
                     "minus": [[_s(e) for e in row] for row in cert.minus]},
        "verdict": {"rows": ["pass" if v else "fail" for v in cert.verdicts],
                    "dominant": cert.dominant},
    }


def certificate_from_json(data: dict) -> Certificate:
    delta = tuple(Fraction(d) for d in data["delta"])
    rows = [RowContent(tuple(r["p"]), int(r["j"]) - 1, tuple(r["a_j"]), ContentKind(r["kind"]),
                       tuple(parse_scalar(c) for c in r["x"]), r.get("case", "single"))
            for r in data["rows"]]
    plus = [[_p(e) if e is not None else BOTTOM for e in row] for row in data["matrices"]["plus"]]
    minus = [[_p(e) if e is not None else BOTTOM for e in row] for row in data["matrices"]["minus"]]
    verdicts = [v == "pass" for v in data["verdict"]["rows"]]
    return Certificate(pg.GenericShift(delta, None, True), [tuple(p) for p in data["ce_points"]],
                       rows, [parse_scalar(s) for s in data["scaling"]], plus, minus, verdicts)
