"""Small exact linear-algebra kernel over Fractions.

Entries are Fractions; a few routines also accept TropicalScalar values
(a + b*eps) where they enter linearly (right-hand sides, one matrix column).
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from .tropsem import TropicalScalar


def is_plain(v) -> bool:
    return not isinstance(v, TropicalScalar) or v.b == 0


def demote(v):
    """TropicalScalar without infinitesimal part -> Fraction."""
    if isinstance(v, TropicalScalar) and v.b == 0 and v.a is not None:
        return v.a
    return v


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def dot(u, v):
    total = 0
    for a, b in zip(u, v):
        if a and b:
            total = total + a * b
    return total


def rref(rows):
    """Reduced row echelon form of a rational matrix; returns (rows, pivots)."""
    m = [list(map(Fraction, r)) for r in rows]
    pivots = []
    if not m:
        return m, pivots
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows) -> int:
    return len(rref(rows)[1]) if rows else 0


def nullspace(rows, ncols):
    """Basis of {v : rows·v = 0} as rational vectors."""
    red, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return basis


def affine_hull(points):
    """Return (origin, basis) with basis rows spanning the direction space."""
    pts = [tuple(map(Fraction, p)) for p in points]
    origin = pts[0]
    diffs = [vec_sub(p, origin) for p in pts[1:]]
    red, _ = rref(diffs) if diffs else ([], [])
    basis = [tuple(r) for r in red]
    return origin, basis


def solve(matrix, rhs):
    """Solve a square nonsingular rational system; rhs entries may be TropicalScalar."""
    n = len(matrix)
    m = [list(map(Fraction, row)) for row in matrix]
    b = list(rhs)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        m[c], m[piv] = m[piv], m[c]
        b[c], b[piv] = b[piv], b[c]
        inv = 1 / m[c][c]
        m[c] = [v * inv for v in m[c]]
        b[c] = b[c] * inv
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
                b[i] = b[i] - b[c] * f
    return [demote(v) for v in b]


def det_rational(matrix) -> Fraction:
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    m = [list(map(Fraction, row)) for row in matrix]
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return det


def det_mixed(matrix):
    """Determinant where at most one column carries infinitesimal entries."""
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    rows = [[demote(v) for v in row] for row in matrix]
    special = {j for row in rows for j, v in enumerate(row) if not is_plain(v)}
    if not special:
        return det_rational(rows)
    if len(special) > 1:
        raise ArithmeticError("infinitesimal entries in more than one column")
    j = special.pop()
    total = 0
    for i in range(n):
        entry = rows[i][j]
        if entry == 0:
            continue
        minor = [r[:j] + r[j + 1:] for k, r in enumerate(rows) if k != i]
        d = det_rational(minor)
        if d:
            sign = -1 if (i + j) % 2 else 1
            total = total + entry * (d * sign)
    return demote(total) if isinstance(total, TropicalScalar) else Fraction(total)


def normal_of(diffs, dim):
    """Vector orthogonal to dim-1 independent difference vectors (cofactors)."""
    normal = []
    for j in range(dim):
        minor = [r[:j] + r[j + 1:] for r in diffs]
        d = det_mixed(minor)
        normal.append(-d if j % 2 else d)
    return tuple(demote(v) for v in normal)


def common_denominator(values) -> int:
    den = 1
    for v in values:
        if isinstance(v, TropicalScalar):
            if v.a is None:
                continue
            den = lcm(den, v.a.denominator, v.b.denominator)
        else:
            den = lcm(den, Fraction(v).denominator)
    return den
