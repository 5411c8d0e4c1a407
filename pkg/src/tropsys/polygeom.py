"""Exact polyhedral geometry: hulls, Minkowski sums, lattice points, upper hulls.

All arithmetic is over Fractions.  Heights carrying an infinitesimal level
are handled by refining the rational upper hull of their leading parts with
the upper hull of their infinitesimal parts, cell by cell.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from . import _exact as ex
from .tropsem import BOTTOM, TropicalScalar, glex_key, scalar


def _fpoint(p) -> tuple:
    return tuple(Fraction(v) for v in p)


def _ipoint(p) -> tuple:
    """Integer tuple when every coordinate is integral, Fraction tuple otherwise."""
    if all(Fraction(v).denominator == 1 for v in p):
        return tuple(int(v) for v in p)
    return _fpoint(p)


@dataclass(frozen=True)
class QPolytope:
    """Bounded rational polytope in V- and H-representation.

    ``facets`` are proper inequalities ``normal·x <= offset`` (normals inside
    the direction space), ``equations`` pin down the affine hull.
    """

    n: int
    vertices: tuple
    facets: tuple
    equations: tuple
    dim: int
    affine_basis: tuple
    origin: tuple

    @property
    def halfspaces(self) -> tuple:
        hs = list(self.facets)
        for nrm, val in self.equations:
            hs.append((nrm, val))
            hs.append((tuple(-v for v in nrm), -val))
        return tuple(hs)

    def in_affine_hull(self, p) -> bool:
        return all(ex.dot(nrm, p) == val for nrm, val in self.equations)

    def contains(self, p) -> bool:
        return self.in_affine_hull(p) and all(ex.dot(nrm, p) <= off for nrm, off in self.facets)

    def in_relint(self, p) -> bool:
        return self.in_affine_hull(p) and all(ex.dot(nrm, p) < off for nrm, off in self.facets)

    def on_boundary(self, p) -> bool:
        return self.contains(p) and not self.in_relint(p)

    def bounding_box(self):
        lo = [min(v[i] for v in self.vertices) for i in range(self.n)]
        hi = [max(v[i] for v in self.vertices) for i in range(self.n)]
        return lo, hi


class _Wall:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Wall"

    def __bool__(self):
        return False


WALL = _Wall()


@dataclass(frozen=True)
class UpperFacet:
    x: tuple
    support: object
    vertices: tuple

    def value_at(self, q):
        """support - <x, q>: the affine piece of h on this cell."""
        return self.support - ex.dot(self.x, q)


@dataclass(frozen=True)
class Cell:
    index: int
    x: tuple


@dataclass
class LiftedHull:
    """Upper hull of lifted points (alpha, h(alpha)); h is its concavification."""

    base_n: int
    points: dict
    vertices: dict
    upper_facets: list
    support_polytope: QPolytope

    @property
    def lifted_vertices(self) -> list:
        return [tuple(a) + (h,) for a, h in sorted(self.vertices.items(), key=lambda kv: glex_key(kv[0]))]


@dataclass(frozen=True)
class GenericShift:
    delta: tuple
    seed: object
    verified: bool
    z: tuple = ()
    eps: tuple = ()
    attempts: int = 1


# ----------------------------------------------------------------------------
# convex hulls


def _coordinates(points, origin, basis, pivots):
    """Coordinates of points in the RREF basis of their affine hull."""
    return [tuple(p[c] - origin[c] for c in pivots) for p in points]


def _hull_frame(points):
    pts = [_fpoint(p) for p in points]
    origin = pts[0]
    diffs = [ex.vec_sub(p, origin) for p in pts[1:]]
    red, pivots = ex.rref(diffs) if diffs else ([], [])
    basis = [tuple(r) for r in red]
    return pts, origin, basis, pivots


def _initial_simplex(pts, k):
    chosen = [0]
    diffs = []
    for i in range(1, len(pts)):
        d = ex.vec_sub(pts[i], pts[0])
        if ex.rank(diffs + [d]) > len(diffs):
            diffs.append(d)
            chosen.append(i)
            if len(chosen) == k + 1:
                break
    return chosen


def _beneath_beyond(pts, k):
    """Facets of the hull of full-dimensional points in R^k.

    Returns (faces, extreme) where faces are (normal, offset, vertex-index set)
    with the outward normal, and extreme is the set of extreme-point indices.
    """
    simplex = _initial_simplex(pts, k)
    centroid = tuple(sum(pts[i][c] for i in simplex) / (k + 1) for c in range(k))
    facets = {}
    ridges = defaultdict(set)
    counter = [0]

    def add_facet(vs):
        p0 = pts[vs[0]]
        diffs = [ex.vec_sub(pts[v], p0) for v in vs[1:]]
        nrm = ex.nullspace(diffs, k)[0] if diffs else (Fraction(1),)
        off = ex.dot(nrm, p0)
        if ex.dot(nrm, centroid) > off:
            nrm = tuple(-v for v in nrm)
            off = -off
        fid = counter[0]
        counter[0] += 1
        facets[fid] = (vs, nrm, off)
        for drop in range(len(vs)):
            ridges[vs[:drop] + vs[drop + 1:]].add(fid)

    def remove_facet(fid):
        vs = facets.pop(fid)[0]
        for drop in range(len(vs)):
            r = vs[:drop] + vs[drop + 1:]
            ridges[r].discard(fid)
            if not ridges[r]:
                del ridges[r]

    for sub in combinations(sorted(simplex), k):
        add_facet(tuple(sub))

    in_simplex = set(simplex)
    for i, p in enumerate(pts):
        if i in in_simplex:
            continue
        visible = [fid for fid, (_, nrm, off) in facets.items() if ex.dot(nrm, p) > off]
        if not visible:
            continue
        vis = set(visible)
        horizon = []
        for fid in visible:
            vs = facets[fid][0]
            for drop in range(len(vs)):
                r = vs[:drop] + vs[drop + 1:]
                if any(o not in vis for o in ridges[r] if o != fid):
                    horizon.append(r)
        for fid in visible:
            remove_facet(fid)
        for r in horizon:
            add_facet(tuple(sorted(r + (i,))))

    # merge coplanar neighbours into genuine facets
    parent = {fid: fid for fid in facets}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for r, owners in ridges.items():
        if len(owners) != 2:
            continue
        f, g = sorted(owners)
        vs_f, nrm, off = facets[f]
        opposite = [v for v in facets[g][0] if v not in r]
        if all(ex.dot(nrm, pts[v]) == off for v in opposite):
            parent[find(f)] = find(g)
    groups = defaultdict(list)
    for fid in facets:
        groups[find(fid)].append(fid)
    faces = []
    for members in groups.values():
        _, nrm, off = facets[members[0]]
        verts = set()
        for fid in members:
            verts.update(facets[fid][0])
        # any input point on the plane belongs to the face
        faces.append((nrm, off, verts))
    on_face = defaultdict(list)
    for idx, (nrm, off, verts) in enumerate(faces):
        for v in verts:
            on_face[v].append(idx)
    extreme = set()
    for v, idxs in on_face.items():
        if ex.rank([faces[j][0] for j in idxs]) == k:
            extreme.add(v)
    faces = [(nrm, off, verts & extreme) for nrm, off, verts in faces]
    return faces, extreme


def _to_ambient(u, origin, basis):
    """Vector x in span(basis) with <x, b_i> = u_i, plus <x, origin>."""
    k = len(basis)
    gram = [[ex.dot(basis[i], basis[j]) for j in range(k)] for i in range(k)]
    w = ex.solve(gram, list(u))
    n = len(origin)
    x = []
    for c in range(n):
        total = 0
        for j in range(k):
            if basis[j][c]:
                total = total + w[j] * basis[j][c]
        x.append(ex.demote(total) if isinstance(total, TropicalScalar) else Fraction(total))
    return tuple(x)


def convex_hull(points) -> QPolytope:
    pts = list(dict.fromkeys(_fpoint(p) for p in points))
    if not pts:
        raise ValueError("convex hull of an empty set")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise ValueError("points of mixed dimension")
    pts, origin, basis, pivots = _hull_frame(pts)
    k = len(basis)
    equations = tuple((tuple(e), ex.dot(e, origin)) for e in ex.nullspace(basis, n)) if k < n else ()
    if k == 0:
        return QPolytope(n, (origin,), (), equations, 0, (), origin)
    coords = _coordinates(pts, origin, basis, pivots)
    faces, extreme = _beneath_beyond(coords, k)
    facets = []
    for nrm, off, _ in faces:
        x = _to_ambient(nrm, origin, basis)
        facets.append((x, off + ex.dot(x, origin)))
    verts = tuple(sorted(pts[i] for i in extreme))
    return QPolytope(n, verts, tuple(facets), equations, k, tuple(basis), origin)


def minkowski_sum(P: QPolytope, R: QPolytope) -> QPolytope:
    if P.n != R.n:
        raise ValueError("ambient dimensions differ")
    return convex_hull({ex.vec_add(u, v) for u in P.vertices for v in R.vertices})


def dilate(P: QPolytope, r) -> QPolytope:
    return convex_hull([tuple(r * c for c in v) for v in P.vertices])


def translate(P: QPolytope, shift) -> QPolytope:
    shift = _fpoint(shift)
    return QPolytope(
        P.n,
        tuple(ex.vec_add(v, shift) for v in P.vertices),
        tuple((nrm, off + ex.dot(nrm, shift)) for nrm, off in P.facets),
        tuple((nrm, val + ex.dot(nrm, shift)) for nrm, val in P.equations),
        P.dim,
        P.affine_basis,
        ex.vec_add(P.origin, shift),
    )


def _box_points(P: QPolytope):
    lo, hi = P.bounding_box()
    ranges = [range(math.ceil(a), math.floor(b) + 1) for a, b in zip(lo, hi)]

    def rec(i, prefix):
        if i == len(ranges):
            yield tuple(prefix)
            return
        for v in ranges[i]:
            prefix.append(v)
            yield from rec(i + 1, prefix)
            prefix.pop()

    yield from rec(0, [])


def lattice_points(P: QPolytope) -> list:
    """Integer points of P in graded-lex order."""
    return sorted((p for p in _box_points(P) if P.contains(p)), key=glex_key)


def boundary_lattice_points(P: QPolytope) -> list:
    return sorted((p for p in _box_points(P) if P.on_boundary(p)), key=glex_key)


# ----------------------------------------------------------------------------
# upper hulls and sup-convolution


def _plain_upper(items: Mapping) -> tuple:
    """Upper facets of rational lifted points; returns (facets, extreme map)."""
    alphas = list(items)
    pts, origin, basis, pivots = _hull_frame(alphas)
    n = len(origin)
    k = len(basis)
    heights = [Fraction(items[a]) for a in alphas]
    if k == 0:
        zero = tuple(Fraction(0) for _ in range(n))
        a = alphas[0]
        return [UpperFacet(zero, heights[0], (a,))], {a: heights[0]}
    coords = _coordinates(pts, origin, basis, pivots)
    lifted = [c + (h,) for c, h in zip(coords, heights)]
    if ex.rank([ex.vec_sub(p, lifted[0]) for p in lifted[1:]]) == k:
        # heights are affine on the support: one flat facet
        simplex = _initial_simplex(coords, k)
        mat = [list(coords[i]) + [Fraction(1)] for i in simplex]
        sol = ex.solve(mat, [heights[i] for i in simplex])
        u, c = sol[:k], sol[k]
        x = _to_ambient([-v for v in u], origin, basis)
        support = c + ex.dot(x, origin)
        base = convex_hull(alphas)
        verts = tuple(sorted((a for a in alphas if _fpoint(a) in set(base.vertices)), key=glex_key))
        return [UpperFacet(x, support, verts)], {a: items[a] for a in verts}
    faces, extreme = _beneath_beyond(lifted, k + 1)
    facets = []
    used = {}
    for nrm, off, verts in faces:
        lead = nrm[-1]
        if lead <= 0:
            continue
        u = [v / lead for v in nrm[:-1]]
        x = _to_ambient(u, origin, basis)
        support = off / lead + ex.dot(x, origin)
        vs = tuple(sorted((alphas[i] for i in verts), key=glex_key))
        for a in vs:
            used[a] = items[a]
        facets.append(UpperFacet(x, support, vs))
    return facets, used


def _dedupe(lifted: Mapping) -> dict:
    best = {}
    for a, h in lifted.items():
        a = tuple(a)
        h = scalar(h)
        if h.is_bottom:
            continue
        if a not in best or h > best[a]:
            best[a] = h
    return best


def upper_hull(lifted: Mapping) -> LiftedHull:
    """Concave hull of a finite map exponent -> height (heights may carry eps)."""
    pts = _dedupe(lifted)
    if not pts:
        raise ValueError("upper hull of an empty map")
    n = len(next(iter(pts)))
    support = convex_hull(list(pts))
    if all(h.b == 0 for h in pts.values()):
        facets, verts = _plain_upper({a: h.a for a, h in pts.items()})
        facets = [UpperFacet(f.x, scalar(f.support), f.vertices) for f in facets]
        return LiftedHull(n, pts, {a: pts[a] for a in verts}, facets, support)
    lead, _ = _plain_upper({a: h.a for a, h in pts.items()})
    facets = []
    verts = {}
    for fa in lead:
        cell = {a: h.b for a, h in pts.items()
                if h.a + ex.dot(fa.x, a) == fa.support}
        sub, sub_verts = _plain_upper(cell)
        for fb in sub:
            x = tuple(TropicalScalar(xa, xb) for xa, xb in zip(fa.x, fb.x))
            facets.append(UpperFacet(x, TropicalScalar(fa.support, fb.support), fb.vertices))
        for a in sub_verts:
            verts[a] = pts[a]
    return LiftedHull(n, pts, verts, facets, support)


def point_hull(n: int) -> LiftedHull:
    """Neutral element of sup-convolution: h(0) = 0."""
    return upper_hull({tuple([0] * n): 0})


def sup_convolution(hulls: Sequence[LiftedHull], multiplicities: Sequence[int] | None = None) -> LiftedHull:
    """Hull whose hypograph is the Minkowski sum of the given hypographs."""
    if multiplicities is None:
        multiplicities = [1] * len(hulls)
    if len(multiplicities) != len(hulls):
        raise ValueError("one multiplicity per hull expected")
    if not hulls:
        raise ValueError("need at least one hull (use point_hull for the neutral element)")
    n = hulls[0].base_n
    if any(h.base_n != n for h in hulls):
        raise ValueError("hulls live in different dimensions")
    acc = {tuple([0] * n): scalar(0)}
    result = None
    for h, r in zip(hulls, multiplicities):
        if r < 0:
            raise ValueError("multiplicities must be nonnegative")
        for _ in range(r):
            sums = {}
            for a, ha in acc.items():
                for b, hb in h.vertices.items():
                    key = tuple(x + y for x, y in zip(a, b))
                    val = ha + hb
                    if key not in sums or val > sums[key]:
                        sums[key] = val
            result = upper_hull(sums)
            acc = dict(result.vertices)
    return result if result is not None else upper_hull(acc)


def eval_concave(h: LiftedHull, q) -> TropicalScalar:
    q = _fpoint(q)
    if not h.support_polytope.contains(q):
        return BOTTOM
    return scalar(min(f.value_at(q) for f in h.upper_facets))


def cell_of(h: LiftedHull, q):
    """Unique cell containing q in its relative interior, or WALL."""
    q = _fpoint(q)
    P = h.support_polytope
    if not P.contains(q):
        raise ValueError(f"point {q} lies outside the support")
    if not P.in_relint(q) and P.dim > 0:
        return WALL
    values = [f.value_at(q) for f in h.upper_facets]
    best = min(values)
    hits = [i for i, v in enumerate(values) if v == best]
    if len(hits) != 1:
        return WALL
    return Cell(hits[0], h.upper_facets[hits[0]].x)


def face_argmax(h: LiftedHull, x) -> list:
    """Points of h attaining max h(a) + <x, a>; the face C(x, h)."""
    vals = {a: v + ex.dot(x, a) for a, v in h.points.items()}
    top = max(vals.values())
    return sorted((a for a, v in vals.items() if v == top), key=glex_key)


def face_vertices(h: LiftedHull, x) -> list:
    vals = {a: v + ex.dot(x, a) for a, v in h.vertices.items()}
    top = max(vals.values())
    return sorted((a for a, v in vals.items() if v == top), key=glex_key)


# ----------------------------------------------------------------------------
# generic shifts


def default_offset(Q: QPolytope) -> tuple:
    """Integer part of the shift: one unit below the componentwise minimum."""
    return tuple(math.floor(min(v[i] for v in Q.vertices)) * -1 - 1 for i in range(Q.n))


def _shift_ok(Q: QPolytope, hull: LiftedHull | None, delta) -> bool:
    moved = translate(Q, delta)
    if boundary_lattice_points(moved):
        return False
    if hull is None:
        return True
    for p in lattice_points(moved):
        if cell_of(hull, ex.vec_sub(_fpoint(p), delta)) is WALL:
            return False
    return True


def _make_delta(Q, z, eps, direction=None):
    delta = [Fraction(c) for c in z]
    if direction is not None:
        # the direction dominates; eps only breaks ties
        eps = [e / 100 for e in eps]
    for e, b in zip(eps, Q.affine_basis):
        for c in range(Q.n):
            delta[c] += e * b[c]
    if direction is not None:
        for c in range(Q.n):
            delta[c] += direction[c]
    return tuple(delta)


def generic_shift(Q: QPolytope, subdivision: LiftedHull | None = None, seed=None,
                  z=None, eps=None, direction=None, max_tries: int = 64) -> GenericShift:
    """Shift delta in z + V with no lattice point on the boundary of Q + delta and
    every lattice point of Q + delta in the interior of a cell of the subdivision."""
    z = tuple(int(c) for c in (z if z is not None else default_offset(Q)))
    k = len(Q.affine_basis)
    candidates = []
    if eps is not None:
        candidates.append(tuple(Fraction(e) for e in eps))
    elif seed is None:
        candidates.append(tuple(Fraction(1, 10) for _ in range(k)))
    rng = random.Random(0 if seed is None else seed)
    denom = 10
    tries = 0
    while True:
        if candidates:
            e = candidates.pop(0)
        else:
            e = tuple(Fraction(rng.randint(1, denom - 1), denom) for _ in range(k))
            denom *= 2
        tries += 1
        delta = _make_delta(Q, z, e, direction)
        if k == 0 or _shift_ok(Q, subdivision, delta):
            return GenericShift(delta, seed, True, z, e, tries)
        if tries >= max_tries:
            raise RuntimeError("no generic shift found within the retry limit")


# ----------------------------------------------------------------------------
# debug dumps


def _s(v):
    from .tropsem import format_scalar
    return format_scalar(v)


def dump_polytope(P: QPolytope) -> dict:
    return {
        "n": P.n,
        "dim": P.dim,
        "vertices": [[str(c) for c in v] for v in P.vertices],
        "halfspaces": [{"normal": [str(c) for c in nrm], "offset": str(off)} for nrm, off in P.halfspaces],
        "affine_basis": [[str(c) for c in b] for b in P.affine_basis],
    }


def dump_hull(h: LiftedHull) -> dict:
    return {
        "base_n": h.base_n,
        "vertices": [{"alpha": list(a), "height": _s(v)} for a, v in
                     sorted(h.vertices.items(), key=lambda kv: glex_key(kv[0]))],
        "facets": [{"x": [_s(c) for c in f.x], "support": _s(f.support),
                    "vertices": [list(a) for a in f.vertices]} for f in h.upper_facets],
        "support": dump_polytope(h.support_polytope),
    }
