"""Max-plus scalars, tropical polynomials and polynomial systems.

Scalars live in Q ∪ {-inf} extended by an infinitesimal level: a value is
``a + b*eps`` compared lexicographically.  The ordinary sum of two values is
their tropical product, ``max`` is their tropical sum.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence, Union

Number = Union[int, Fraction, "TropicalScalar"]


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, Rational)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise TypeError(f"not an exact rational: {v!r}")


class TropicalScalar:
    """``a + b*eps`` with ``a, b`` rational, or bottom (``a is None``)."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        if a is None:
            self.a = None
            self.b = Fraction(0)
        else:
            self.a = _frac(a)
            self.b = _frac(b)

    # construction helpers
    @classmethod
    def coerce(cls, v) -> "TropicalScalar":
        if isinstance(v, TropicalScalar):
            return v
        if v is None:
            return BOTTOM
        return cls(_frac(v))

    @property
    def is_bottom(self) -> bool:
        return self.a is None

    @property
    def is_finite(self) -> bool:
        return self.a is not None

    @property
    def is_plain(self) -> bool:
        return self.a is not None and self.b == 0

    def key(self):
        return (0, 0, 0) if self.a is None else (1, self.a, self.b)

    def instantiate(self, eps) -> Fraction:
        """Plain rational obtained by substituting ``eps``."""
        if self.a is None:
            raise ValueError("bottom has no rational value")
        return self.a + self.b * _frac(eps)

    def plain(self) -> Fraction:
        if not self.is_plain:
            raise ValueError(f"{self} is not a plain rational")
        return self.a

    # ordinary arithmetic (tropical product is `+`)
    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            if self.a is None:
                return self
            return TropicalScalar(self.a + other, self.b)
        if isinstance(other, TropicalScalar):
            if self.a is None:
                return self
            if other.a is None:
                return other
            return TropicalScalar(self.a + other.a, self.b + other.b)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        if self.a is None:
            raise ArithmeticError("cannot negate bottom")
        return TropicalScalar(-self.a, -self.b)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return self + (-other)
        if isinstance(other, TropicalScalar):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if self.a is None:
                raise ArithmeticError("cannot scale bottom")
            return TropicalScalar(self.a * other, self.b * other)
        if isinstance(other, TropicalScalar):
            if self.a is None or other.a is None:
                raise ArithmeticError("cannot scale bottom")
            if other.b == 0:
                return self * other.a
            if self.b == 0:
                return other * self.a
            raise ArithmeticError("product of two infinitesimal-carrying values")
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / other)
        if isinstance(other, TropicalScalar) and other.is_plain:
            return self * (Fraction(1) / other.a)
        return NotImplemented

    # ordering
    def _cmp_key(self, other):
        if isinstance(other, TropicalScalar):
            return other.key()
        if isinstance(other, (int, Fraction)):
            return (1, Fraction(other), Fraction(0))
        if other is None:
            return (0, 0, 0)
        return None

    def __eq__(self, other):
        k = self._cmp_key(other)
        return NotImplemented if k is None else self.key() == k

    def __lt__(self, other):
        k = self._cmp_key(other)
        return NotImplemented if k is None else self.key() < k

    def __le__(self, other):
        k = self._cmp_key(other)
        return NotImplemented if k is None else self.key() <= k

    def __gt__(self, other):
        k = self._cmp_key(other)
        return NotImplemented if k is None else self.key() > k

    def __ge__(self, other):
        k = self._cmp_key(other)
        return NotImplemented if k is None else self.key() >= k

    def __hash__(self):
        if self.a is None:
            return hash(None)
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __repr__(self):
        return f"TropicalScalar({format_scalar(self)})"

    def __str__(self):
        return format_scalar(self)


BOTTOM = TropicalScalar(None)
ZERO = TropicalScalar(0)
EPS = TropicalScalar(0, 1)


def scalar(v) -> TropicalScalar:
    return TropicalScalar.coerce(v)


def tadd(x, y) -> TropicalScalar:
    """Tropical sum (max)."""
    x, y = scalar(x), scalar(y)
    return x if x >= y else y


def tmul(x, y) -> TropicalScalar:
    """Tropical product (ordinary sum, bottom absorbing)."""
    return scalar(x) + scalar(y)


def tsum(values: Iterable) -> TropicalScalar:
    best = BOTTOM
    for v in values:
        v = scalar(v)
        if v > best:
            best = v
    return best


def format_scalar(v) -> str:
    v = scalar(v)
    if v.is_bottom:
        return "-inf"
    if v.b == 0:
        return str(v.a)
    sign = "+" if v.b > 0 else "-"
    mag = abs(v.b)
    tail = "eps" if mag == 1 else f"{mag}*eps"
    return f"{v.a}{sign}{tail}"


def parse_scalar(text) -> TropicalScalar:
    """Inverse of :func:`format_scalar`; ``None`` maps to bottom."""
    if text is None:
        return BOTTOM
    if isinstance(text, (int, Fraction, TropicalScalar)):
        return scalar(text)
    s = str(text).replace(" ", "")
    if s == "-inf":
        return BOTTOM
    if not s.endswith("eps"):
        return TropicalScalar(Fraction(s))
    body = s[:-3]
    if body.endswith("*"):
        body = body[:-1]
    # split the rational part from the eps multiplier at the last sign
    cut = max(body.rfind("+"), body.rfind("-"))
    while cut > 0 and body[cut - 1] in "eE":
        cut = max(body.rfind("+", 0, cut), body.rfind("-", 0, cut))
    if cut <= 0:
        head, tail = "0", body
    else:
        head, tail = body[:cut], body[cut:]
    if tail in ("+", "-", ""):
        tail += "1"
    return TropicalScalar(Fraction(head), Fraction(tail))


Exponent = tuple  # tuple of ints


def glex_key(alpha: Sequence[int]):
    """Graded order: total degree first, then x1-heavy monomials first."""
    return (sum(alpha), tuple(-a for a in alpha))


def glex_sorted(points: Iterable[Sequence[int]]) -> list:
    return sorted((tuple(p) for p in points), key=glex_key)


def _dot(alpha, x):
    total = 0
    for a, xi in zip(alpha, x):
        if a:
            total = total + a * xi
    return total


class TropicalPolynomial:
    """Finite map from exponent tuples to finite tropical coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping):
        clean = {}
        for alpha, c in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n:
                raise ValueError(f"exponent {alpha} has length {len(alpha)}, expected {n}")
            c = scalar(c)
            if c.is_bottom:
                raise ValueError("bottom coefficients are not stored")
            if alpha in clean:
                c = tadd(clean[alpha], c)
            clean[alpha] = c
        self.n = n
        self.terms = clean

    @property
    def support(self) -> list:
        return glex_sorted(self.terms)

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, alpha):
        return self.terms.get(tuple(alpha), BOTTOM)

    def __eq__(self, other):
        return (isinstance(other, TropicalPolynomial) and self.n == other.n
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __repr__(self):
        body = " + ".join(f"{format_scalar(c)}*X^{a}" for a, c in sorted(self.terms.items()))
        return f"TropicalPolynomial({self.n}, {body or 'bottom'})"

    def _check(self, x):
        if len(x) != self.n:
            raise ValueError(f"point has {len(x)} coordinates, polynomial has {self.n} variables")

    def term_values(self, x) -> dict:
        self._check(x)
        return {a: c + _dot(a, x) for a, c in self.terms.items()}

    def evaluate(self, x) -> TropicalScalar:
        return tsum(self.term_values(x).values())

    def argmax_set(self, x) -> set:
        vals = self.term_values(x)
        if not vals:
            return set()
        top = max(vals.values())
        return {a for a, v in vals.items() if v == top}

    def is_root(self, x) -> bool:
        return len(self.argmax_set(x)) >= 2

    def shift(self, alpha) -> "TropicalPolynomial":
        """Monomial multiple X^alpha * f."""
        return TropicalPolynomial(self.n, {tuple(a + b for a, b in zip(k, alpha)): c
                                           for k, c in self.terms.items()})

    def scale(self, c) -> "TropicalPolynomial":
        return TropicalPolynomial(self.n, {k: v + scalar(c) for k, v in self.terms.items()})

    def max_with(self, other: "TropicalPolynomial") -> "TropicalPolynomial":
        merged = dict(self.terms)
        for k, v in other.terms.items():
            merged[k] = tadd(merged.get(k, BOTTOM), v)
        return TropicalPolynomial(self.n, merged)

    def degree(self) -> int:
        return max(sum(a) for a in self.terms) if self.terms else 0


def evaluate(f: TropicalPolynomial, x) -> TropicalScalar:
    return f.evaluate(x)


def argmax_set(f: TropicalPolynomial, x) -> set:
    return f.argmax_set(x)


def is_root(f: TropicalPolynomial, x) -> bool:
    return f.is_root(x)


class Rel(enum.Enum):
    GEQ = ">="
    EQ = "=="
    GT = ">"


def compare(lhs, rel: Rel, rhs) -> bool:
    lhs, rhs = scalar(lhs), scalar(rhs)
    if rel is Rel.GEQ:
        return lhs >= rhs
    if rel is Rel.EQ:
        return lhs == rhs
    return lhs > rhs


def holds_relation(fplus: TropicalPolynomial, rel: Rel, fminus: TropicalPolynomial, x) -> bool:
    return compare(fplus.evaluate(x), rel, fminus.evaluate(x))


@dataclass(frozen=True)
class Nabla:
    """``f ∇ 0``: the maximum of f is attained at least twice."""

    f: TropicalPolynomial

    @property
    def support(self) -> list:
        return self.f.support

    def combined(self) -> TropicalPolynomial:
        return self.f

    def holds(self, x) -> bool:
        return self.f.is_root(x)


@dataclass(frozen=True)
class TwoSided:
    """``f⁺ ▷ f⁻`` with ▷ one of >=, ==, >."""

    plus: TropicalPolynomial
    rel: Rel
    minus: TropicalPolynomial

    @property
    def support(self) -> list:
        return glex_sorted(set(self.plus.terms) | set(self.minus.terms))

    def margin_minus(self) -> TropicalPolynomial:
        """Minus side with the infinitesimal margin used for strict rows."""
        return self.minus.scale(EPS) if self.rel is Rel.GT else self.minus

    def combined(self) -> TropicalPolynomial:
        return self.plus.max_with(self.margin_minus())

    def holds(self, x) -> bool:
        return holds_relation(self.plus, self.rel, self.minus, x)


Relation = Union[Nabla, TwoSided]


@dataclass(frozen=True)
class PolySystem:
    n: int
    relations: tuple
    names: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple(self.relations))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i + 1}" for i in range(self.n)))
        if len(self.names) != self.n:
            raise ValueError("variable names do not match n")
        for rel in self.relations:
            polys = [rel.f] if isinstance(rel, Nabla) else [rel.plus, rel.minus]
            for p in polys:
                if p.n != self.n:
                    raise ValueError("relation polynomial has the wrong variable count")

    @property
    def is_nabla(self) -> bool:
        return all(isinstance(r, Nabla) for r in self.relations)

    @property
    def is_ordinary(self) -> bool:
        return all(min(a) >= 0 for r in self.relations for a in r.support)

    def holds(self, x) -> bool:
        return all(r.holds(x) for r in self.relations)

    def violated(self, x) -> list:
        return [i for i, r in enumerate(self.relations) if not r.holds(x)]


def poly(n: int, terms: Mapping) -> TropicalPolynomial:
    return TropicalPolynomial(n, terms)


def nabla_system(n: int, polys: Sequence[Mapping], names: Sequence[str] = ()) -> PolySystem:
    return PolySystem(n, tuple(Nabla(TropicalPolynomial(n, p)) for p in polys), tuple(names))
