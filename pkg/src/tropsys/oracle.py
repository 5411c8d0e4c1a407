"""Ground truth by enumeration: argmax patterns plus exact Fourier-Motzkin."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import prod

from .macaulay import LinearSystem, RowKind
from .tropsem import Nabla, PolySystem, Rel, TropicalPolynomial, TwoSided, scalar

MAX_VARS = 32
PATTERN_GUARD = 10 ** 6


class GuardExceeded(RuntimeError):
    pass


@dataclass
class OracleResult:
    feasible: bool
    x: tuple | None = None
    support: tuple | None = None

    def __bool__(self):
        return self.feasible


# ----------------------------------------------------------------------------
# Fourier-Motzkin


def _norm(coeffs, rhs, strict):
    """Scale so the first nonzero coefficient has magnitude 1."""
    lead = next((c for c in coeffs if c), None)
    if lead is None:
        return tuple(coeffs), rhs, strict
    s = abs(lead)
    return tuple(c / s for c in coeffs), rhs / s, strict


def _dedupe(cons):
    best = {}
    for coeffs, rhs, strict in cons:
        coeffs, rhs, strict = _norm(coeffs, rhs, strict)
        old = best.get(coeffs)
        if old is None or rhs > old[0] or (rhs == old[0] and strict and not old[1]):
            best[coeffs] = (rhs, strict)
    return [(c, r, s) for c, (r, s) in best.items()]


def _trivially_false(rhs, strict):
    return rhs > 0 or (strict and rhs == 0)


def _parse_constraints(constraints):
    out = []
    for row, rel, rhs in constraints:
        rel = rel.value if isinstance(rel, Rel) else rel
        row = tuple(Fraction(c) for c in row)
        rhs = Fraction(rhs)
        if rel in (">=", "ge"):
            out.append((row, rhs, False))
        elif rel in (">", "gt"):
            out.append((row, rhs, True))
        elif rel in ("==", "eq"):
            out.append((row, rhs, False))
            out.append((tuple(-c for c in row), -rhs, False))
        elif rel in ("<=",):
            out.append((tuple(-c for c in row), -rhs, False))
        elif rel in ("<",):
            out.append((tuple(-c for c in row), -rhs, True))
        else:
            raise ValueError(f"unknown relation {rel!r}")
    return out


def _fm(cons, nvars):
    """Eliminate variables from the last; returns None when infeasible, else levels."""
    levels = []
    cur = _dedupe(cons)
    for k in range(nvars - 1, -1, -1):
        levels.append(cur)
        lower, upper, rest = [], [], []
        for c in cur:
            coef = c[0][k]
            (lower if coef > 0 else upper if coef < 0 else rest).append(c)
        nxt = list(rest)
        for lc, lr, ls in lower:
            for uc, ur, us in upper:
                a, b = lc[k], -uc[k]
                coeffs = tuple(b * x + a * y for x, y in zip(lc, uc))
                nxt.append((coeffs, b * lr + a * ur, ls or us))
        cur = []
        for c in _dedupe(nxt):
            if not any(c[0]):
                if _trivially_false(c[1], c[2]):
                    return None
            else:
                cur.append(c)
    for coeffs, rhs, strict in cur:
        if _trivially_false(rhs, strict):
            return None
    levels.reverse()
    return levels


def _sample(levels, nvars):
    x = [Fraction(0)] * nvars
    for k in range(nvars):
        lo = hi = None
        lo_s = hi_s = False
        for coeffs, rhs, strict in levels[k]:
            coef = coeffs[k]
            if not coef:
                continue
            rest = sum((c * v for c, v in zip(coeffs[:k], x[:k])), Fraction(0))
            bound = (rhs - rest) / coef
            if coef > 0:
                if lo is None or bound > lo or (bound == lo and strict):
                    lo, lo_s = bound, strict
            else:
                if hi is None or bound < hi or (bound == hi and strict):
                    hi, hi_s = bound, strict
        if lo is not None and hi is not None:
            x[k] = lo if lo == hi else (lo + hi) / 2
        elif lo is not None:
            x[k] = lo + 1 if lo_s else lo
        elif hi is not None:
            x[k] = hi - 1 if hi_s else hi
        else:
            x[k] = Fraction(0)
    return tuple(x)


def lp_feasible(constraints, nvars: int | None = None):
    """A rational point satisfying all ``row·x rel rhs`` constraints, or None."""
    cons = _parse_constraints(constraints)
    if nvars is None:
        nvars = len(cons[0][0]) if cons else 0
    if nvars > MAX_VARS:
        raise GuardExceeded(f"{nvars} variables exceed the cap of {MAX_VARS}")
    if any(len(c[0]) != nvars for c in cons):
        raise ValueError("constraint rows of unequal length")
    if nvars == 0:
        return () if all(not _trivially_false(r, s) for _, r, s in cons) else None
    levels = _fm(cons, nvars)
    if levels is None:
        return None
    return _sample(levels, nvars)


# ----------------------------------------------------------------------------
# pattern search


def _plain(c) -> Fraction:
    c = scalar(c)
    if c.b:
        raise ValueError("the oracle expects plain rational coefficients")
    return c.a


def _term(poly: TropicalPolynomial, alpha):
    """Affine form c + <alpha, x> as (coefficients, constant)."""
    return tuple(Fraction(a) for a in alpha), _plain(poly.terms[alpha])


def _ge(lhs, rhs, strict=False):
    """lhs >= rhs for affine forms -> (row, rhs-constant, strict)."""
    (lc, l0), (rc, r0) = lhs, rhs
    return tuple(a - b for a, b in zip(lc, rc)), r0 - l0, strict


def _relation_options(rel, n):
    """Per relation, a list of alternative constraint blocks."""
    if isinstance(rel, Nabla):
        f = rel.f
        opts = []
        for a, b in combinations(f.support, 2):
            ta, tb = _term(f, a), _term(f, b)
            block = [_ge(ta, tb), _ge(tb, ta)]
            block += [_ge(ta, _term(f, c)) for c in f.support if c not in (a, b)]
            opts.append(block)
        return opts
    plus, minus = rel.plus, rel.minus
    strict = rel.rel is Rel.GT
    opts = []
    if rel.rel is Rel.EQ:
        for a in plus.support:
            for b in minus.support:
                ta, tb = _term(plus, a), _term(minus, b)
                block = [_ge(ta, tb), _ge(tb, ta)]
                block += [_ge(ta, _term(plus, c)) for c in plus.support if c != a]
                block += [_ge(tb, _term(minus, c)) for c in minus.support if c != b]
                opts.append(block)
        return opts
    if not minus.terms:
        return [[]]
    for a in plus.support:
        ta = _term(plus, a)
        opts.append([_ge(ta, _term(minus, c), strict) for c in minus.support])
    return opts


def _pattern_count(system: PolySystem) -> int:
    counts = []
    for rel in system.relations:
        if isinstance(rel, Nabla):
            m = len(rel.f.terms)
            counts.append(m * (m - 1) // 2)
        else:
            counts.append(max(len(rel.plus.terms), 1) * max(len(rel.minus.terms), 1))
    return prod(counts) if counts else 1


def _search(blocks_per_rel, nvars):
    """Depth-first over alternatives, pruning with FM after every block."""
    order = sorted(range(len(blocks_per_rel)), key=lambda i: len(blocks_per_rel[i]))

    def rec(depth, acc):
        if depth == len(order):
            return lp_feasible([(r, ">" if s else ">=", b) for r, b, s in acc], nvars)
        for block in blocks_per_rel[order[depth]]:
            nxt = acc + block
            if lp_feasible([(r, ">" if s else ">=", b) for r, b, s in nxt], nvars) is None:
                continue
            found = rec(depth + 1, nxt)
            if found is not None:
                return found
        return None

    return rec(0, [])


def brute_feasibility(system: PolySystem) -> OracleResult:
    """Finite point satisfying every relation, found by argmax-pattern search."""
    if _pattern_count(system) > PATTERN_GUARD:
        raise GuardExceeded("too many argmax patterns")
    blocks = []
    for rel in system.relations:
        opts = _relation_options(rel, system.n)
        if not opts:
            return OracleResult(False)
        blocks.append(opts)
    x = _search(blocks, system.n)
    if x is None:
        return OracleResult(False)
    if not system.holds(x):
        raise AssertionError(f"oracle sample {x} fails the system")
    return OracleResult(True, x, tuple(range(system.n)))


def restrict(system: PolySystem, support) -> PolySystem | None:
    """Relations on the stratum where exactly the variables in ``support`` are finite.

    Returns None when some nabla relation keeps at most one term there.
    """
    support = tuple(sorted(support))
    drop = [k for k in range(system.n) if k not in support]
    rels = []
    for rel in system.relations:
        if not isinstance(rel, Nabla):
            raise ValueError("stratum search handles nabla relations only")
        kept = {tuple(a[k] for k in support): c for a, c in rel.f.terms.items()
                if all(a[k] == 0 for k in drop)}
        if len(kept) <= 1:
            return None
        rels.append(Nabla(TropicalPolynomial(len(support), kept)))
    return PolySystem(len(support), tuple(rels), tuple(system.names[k] for k in support))


def nontoric_search(system: PolySystem) -> OracleResult:
    """Solutions in T^n: try every support, largest first."""
    if not system.is_ordinary:
        raise ValueError("stratum search needs nonnegative exponents")
    n = system.n
    for size in range(n, -1, -1):
        for I in combinations(range(n), size):
            sub = restrict(system, I)
            if sub is None:
                continue
            if size == 0:
                # all variables bottom: every relation is a constant, no root
                continue
            res = brute_feasibility(sub)
            if res.feasible:
                x = [None] * n
                for k, v in zip(I, res.x):
                    x[k] = v
                return OracleResult(True, tuple(x), I)
    return OracleResult(False)


# ----------------------------------------------------------------------------
# tropical linear systems


def _lin_options(row, ncols):
    def form(c, v):
        e = [Fraction(0)] * ncols
        e[c] = Fraction(1)
        return tuple(e), _plain(v)

    plus = {c: v for c, v in row.plus.items() if not scalar(v).is_bottom}
    minus = {c: v for c, v in row.minus.items() if not scalar(v).is_bottom}
    if row.kind is RowKind.NABLA:
        opts = []
        for a, b in combinations(sorted(plus), 2):
            ta, tb = form(a, plus[a]), form(b, plus[b])
            block = [_ge(ta, tb), _ge(tb, ta)] + [_ge(ta, form(c, plus[c])) for c in plus if c not in (a, b)]
            opts.append(block)
        return opts
    strict = row.kind is RowKind.GT
    if row.kind is RowKind.EQ:
        opts = []
        for a in sorted(plus):
            for b in sorted(minus):
                ta, tb = form(a, plus[a]), form(b, minus[b])
                block = [_ge(ta, form(c, minus[c])) for c in minus]
                block += [_ge(tb, form(c, plus[c])) for c in plus]
                opts.append(block)
        return opts
    if not minus:
        return [[]]
    return [[_ge(form(a, plus[a]), form(c, minus[c]), strict) for c in minus] for a in sorted(plus)]


def linear_feasibility(system: LinearSystem) -> OracleResult:
    """Finite y solving the tropical linear system, by pattern enumeration."""
    blocks = []
    total = 1
    for row in system.rows:
        opts = _lin_options(row, system.ncols)
        if not opts:
            return OracleResult(False)
        total *= len(opts)
        blocks.append(opts)
    if total > PATTERN_GUARD:
        raise GuardExceeded("too many argmax patterns")
    y = _search(blocks, system.ncols)
    return OracleResult(y is not None, y)
