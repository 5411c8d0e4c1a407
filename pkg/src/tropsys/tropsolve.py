"""Feasibility of tropical linear systems through mean-payoff games.

A system of rows ``max_j(a_ij + y_j) >= max_l(b_il + y_l)`` has a finite
solution iff ``y <= T(y)`` is solvable, where

    T(y)_l = min_i ( -b_il + max_j (a_ij + y_j) ).

T is the Shapley operator of a game in which Min owns the column nodes
(picking a row, paying ``-b_il``) and Max owns the row nodes (picking a
column, receiving ``a_ij``).  A finite sub-fixed point exists iff the game
value is nonnegative at every column node.  The sign test uses retreat-based
strategy improvement; weights carrying the infinitesimal level are encoded
as integers ``A*M + B`` with M large enough that integer order agrees with
the lexicographic one on every path and cycle of the game.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, lcm

from .macaulay import LinearSystem, LinRow, RowKind
from .tropsem import BOTTOM, EPS, TropicalScalar, format_scalar, scalar

MIN, MAX = "min", "max"


# ----------------------------------------------------------------------------
# data


@dataclass
class GeqRow:
    """``max(plus) >= max(minus)``; values may carry the infinitesimal level."""

    plus: dict
    minus: dict
    origin: int = -1


@dataclass
class GameInstance:
    owners: list
    edges: list  # per node: list of (target, TropicalScalar weight)
    labels: list = field(default_factory=list)
    column_nodes: dict = field(default_factory=dict)  # column index -> node

    @property
    def size(self) -> int:
        return len(self.owners)


@dataclass
class GameSolution:
    values: list
    max_strategy: dict
    min_strategy: dict


class Status(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


@dataclass
class FeasibilityResult:
    status: Status
    witness: tuple | None = None
    two_level: tuple | None = None
    eps_instantiation: Fraction | None = None
    reason: str = ""

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE


# ----------------------------------------------------------------------------
# row normalisation


def nabla_to_two_sided(row: LinRow) -> list:
    """One >= row per finite entry: the other entries reach at least as high."""
    finite = {c: v for c, v in row.plus.items() if not scalar(v).is_bottom}
    if not finite:
        raise ValueError("nabla row without finite entries")
    if len(finite) == 1:
        return None
    out = []
    for j, v in finite.items():
        out.append(GeqRow({c: w for c, w in finite.items() if c != j}, {j: v}))
    return out


def normalize(system: LinearSystem):
    """Rows as GeqRow list, or None when a single-entry nabla row is present."""
    rows = []
    for idx, row in enumerate(system.rows):
        plus = {c: scalar(v) for c, v in row.plus.items() if not scalar(v).is_bottom}
        minus = {c: scalar(v) for c, v in row.minus.items() if not scalar(v).is_bottom}
        if row.kind is RowKind.NABLA:
            split = nabla_to_two_sided(row)
            if split is None:
                return None
            for g in split:
                g.origin = idx
            rows.extend(split)
        elif row.kind is RowKind.GEQ:
            rows.append(GeqRow(plus, minus, idx))
        elif row.kind is RowKind.EQ:
            rows.append(GeqRow(plus, minus, idx))
            rows.append(GeqRow(minus, plus, idx))
        else:
            rows.append(GeqRow(plus, {c: v + EPS for c, v in minus.items()}, idx))
    return rows


@dataclass
class _Pruned:
    core_rows: list
    core_cols: list
    stages: list  # [(free columns, removed rows)] in removal order
    infeasible: str = ""


def _prune(rows: list, ncols: int) -> _Pruned:
    rows = [r for r in rows if r.minus]
    for r in rows:
        if not r.plus:
            return _Pruned([], [], [], "row with empty left side and finite right side")
    alive_rows = set(range(len(rows)))
    alive_cols = set(range(ncols))
    stages = []
    while True:
        constrained = set()
        for i in alive_rows:
            constrained.update(rows[i].minus)
        free = alive_cols - constrained
        if not free:
            break
        removed = {i for i in alive_rows if any(c in free for c in rows[i].plus)}
        stages.append((sorted(free), sorted(removed)))
        alive_cols -= free
        alive_rows -= removed
    return _Pruned([rows[i] for i in sorted(alive_rows)], sorted(alive_cols),
                   [(f, [rows[i] for i in rem]) for f, rem in stages])


# ----------------------------------------------------------------------------
# games


def to_game(system: LinearSystem) -> GameInstance:
    """Game on the rows and columns that survive pruning.

    Column nodes come first (Min), then one Max node per >= row.
    """
    rows = normalize(system)
    if rows is None:
        return GameInstance([], [], [], {})
    pr = _prune(rows, system.ncols)
    return _build_game(pr.core_rows, pr.core_cols, system.columns)


def _build_game(rows, cols, names=None) -> GameInstance:
    node_of = {c: k for k, c in enumerate(cols)}
    owners = [MIN] * len(cols) + [MAX] * len(rows)
    edges = [[] for _ in owners]
    labels = [f"col {tuple(names[c]) if names else c}" for c in cols]
    for r, row in enumerate(rows):
        rn = len(cols) + r
        labels.append(f"row {r}")
        for c, b in row.minus.items():
            edges[node_of[c]].append((rn, -b))
        for c, a in row.plus.items():
            edges[rn].append((node_of[c], a))
    return GameInstance(owners, edges, labels, dict(node_of))


def _encode(game: GameInstance):
    """Integer weights order-isomorphic to the two-level ones on paths and cycles."""
    ws = [scalar(w) for out in game.edges for _, w in out]
    den = 1
    for w in ws:
        den = lcm(den, w.a.denominator, w.b.denominator)
    maxb = max([abs(w.b * den) for w in ws] + [1])
    L = max(game.size, 1)
    M = int(2 * L * L * maxb + 2) if any(w.b for w in ws) else 1
    enc = [[(t, int(scalar(w).a * den) * M + int(scalar(w).b * den)) for t, w in out]
           for out in game.edges]
    return enc, den, M


INF = float("inf")


def _evaluate(enc, player_owner, owners, strategy):
    """Shortest distances to the retreat sink under a fixed strategy of the player.

    Player nodes follow ``strategy`` (None = retreat, weight 0); opponent nodes
    minimise over all their edges.  Nodes that cannot reach the sink get INF.
    """
    n = len(owners)
    preds = [[] for _ in range(n)]
    dist = [INF] * n
    queue = deque()
    for v in range(n):
        if owners[v] == player_owner:
            s = strategy[v]
            if s is None:
                dist[v] = 0
                queue.append(v)
            else:
                t, w = enc[v][s]
                preds[t].append((v, w))
        else:
            for t, w in enc[v]:
                preds[t].append((v, w))
    inq = [False] * n
    for v in queue:
        inq[v] = True
    while queue:
        u = queue.popleft()
        inq[u] = False
        du = dist[u]
        if du == INF:
            continue
        for v, w in preds[u]:
            cand = du + w
            if owners[v] == player_owner:
                if cand != dist[v]:
                    dist[v] = cand
                    if not inq[v]:
                        queue.append(v)
                        inq[v] = True
            elif cand < dist[v]:
                dist[v] = cand
                if not inq[v]:
                    queue.append(v)
                    inq[v] = True
    return dist


def _augment(enc, owners, player):
    """Split every opponent-to-opponent edge by a single-edge player node.

    Afterwards every cycle meets a player node, so the opponent alone can
    never close a cycle; cycle sums (hence value signs) are unchanged.
    """
    enc2 = [list(out) for out in enc]
    owners2 = list(owners)
    via = [[t for t, _ in out] for out in enc]
    for v, out in enumerate(enc):
        if owners[v] == player:
            continue
        for s, (t, w) in enumerate(out):
            if owners[t] != player:
                m = len(owners2)
                owners2.append(player)
                enc2.append([(t, 0)])
                enc2[v][s] = (m, w)
                via[v][s] = m
    return enc2, owners2, via


def _positive_region(enc, owners, player):
    """Retreat-based strategy improvement for ``player`` maximising the weights.

    Returns (values, strategy, via) over the augmented graph; ``via[v][s]`` is
    the node reached by edge s of original node v.  A node has value INF iff
    the player can force a strictly positive mean payoff from it.
    """
    enc, owners, via = _augment(enc, owners, player)
    n = len(owners)
    strategy = [None] * n
    while True:
        dist = _evaluate(enc, player, owners, strategy)
        changed = False
        for v in range(n):
            if owners[v] != player:
                continue
            best, best_s = dist[v], strategy[v]
            for s, (t, w) in enumerate(enc[v]):
                cand = INF if dist[t] == INF else w + dist[t]
                if cand > best:
                    best, best_s = cand, s
            if 0 > best:
                best, best_s = 0, None
            if best_s != strategy[v] and best > dist[v]:
                strategy[v] = best_s
                changed = True
        if not changed:
            return dist, strategy, via


def _dual_run(enc, owners):
    """Run for Min on negated weights: finite value <=> Max secures mean >= 0."""
    neg = [[(t, -w) for t, w in out] for out in enc]
    return _positive_region(neg, owners, MIN)


def _decode(v, den, M):
    """Integer path weight -> two-level scalar."""
    a = Fraction(round(Fraction(v, M)))
    if M == 1:
        return TropicalScalar(Fraction(v, den))
    b = v - int(a) * M
    if abs(b) * 2 > M:
        a = Fraction(v - b, M)
    return TropicalScalar(Fraction(int(a), den), Fraction(b, den))


# ----------------------------------------------------------------------------
# feasibility


def _finish_free(pr: _Pruned, y: dict):
    for free, removed in reversed(pr.stages):
        need = {c: None for c in free}
        for row in removed:
            rhs = max((b + y[c] for c, b in row.minus.items() if y.get(c, BOTTOM) is not BOTTOM
                       and not scalar(y[c]).is_bottom), default=None)
            if rhs is None:
                continue
            target = next(c for c in free if c in row.plus)
            val = rhs - row.plus[target]
            if need[target] is None or val > need[target]:
                need[target] = val
        for c in free:
            y[c] = need[c] if need[c] is not None else scalar(0)


def check_solution(system: LinearSystem, y) -> bool:
    """Exact row-by-row check; entries of y may be two-level scalars or bottom."""
    if len(y) != system.ncols:
        raise ValueError(f"vector has {len(y)} entries, system has {system.ncols} columns")
    ys = [scalar(v) for v in y]

    def side(layer):
        return max((scalar(c) + ys[k] for k, c in layer.items()), default=BOTTOM)

    for row in system.rows:
        if row.kind is RowKind.NABLA:
            vals = [scalar(c) + ys[k] for k, c in row.plus.items()]
            top = max(vals, default=BOTTOM)
            if not top.is_bottom and sum(1 for v in vals if v == top) < 2:
                return False
            continue
        lhs, rhs = side(row.plus), side(row.minus)
        if row.kind is RowKind.GEQ and not lhs >= rhs:
            return False
        if row.kind is RowKind.EQ and not lhs == rhs:
            return False
        if row.kind is RowKind.GT and not lhs > rhs:
            return False
    return True


def instantiate(y, t) -> tuple:
    return tuple(scalar(v).instantiate(t) if not scalar(v).is_bottom else None for v in y)


def _normalise(y):
    finite = [v for v in y if v is not None]
    if not finite:
        return tuple(y)
    low = min(finite)
    return tuple(None if v is None else v - low for v in y)


def feasibility(system: LinearSystem, nonzero: bool = False) -> FeasibilityResult:
    """Decide whether the system has a solution.

    By default the solution must be finite in every column.  With ``nonzero``
    set, bottom entries are allowed as long as one entry is finite.
    """
    if system.ncols == 0:
        if nonzero:
            return FeasibilityResult(Status.INFEASIBLE, reason="no columns")
        return FeasibilityResult(Status.FEASIBLE, (), (), Fraction(1))
    rows = normalize(system)
    if rows is None:
        if not nonzero:
            return FeasibilityResult(Status.INFEASIBLE, reason="nabla row with a single finite entry")
        # such a row forces its column to bottom; hand the game the ∇ split anyway
        rows = []
        for idx, row in enumerate(system.rows):
            sub = LinearSystem(system.columns, [row])
            part = normalize(sub)
            if part is None:
                (c, v), = row.plus.items()
                rows.append(GeqRow({}, {c: scalar(v)}, idx))
            else:
                rows.extend(part)
    pr = _prune(rows, system.ncols)
    if pr.infeasible and not nonzero:
        return FeasibilityResult(Status.INFEASIBLE, reason=pr.infeasible)
    if pr.infeasible:
        pr = _prune_nonzero(rows, system.ncols)
    y = {}
    if pr.core_cols:
        game = _build_game(pr.core_rows, pr.core_cols)
        enc, den, M = _encode(game)
        dist, _, _ = _dual_run(enc, game.owners)
        ncore = len(pr.core_cols)
        finite = [dist[k] != INF for k in range(ncore)]
        if not nonzero and not all(finite):
            return FeasibilityResult(Status.INFEASIBLE, reason="Min forces a negative mean payoff")
        if nonzero and not any(finite) and not pr.stages:
            return FeasibilityResult(Status.INFEASIBLE, reason="Min forces a negative mean payoff everywhere")
        for k, c in enumerate(pr.core_cols):
            y[c] = -_decode(dist[k], den, M) if finite[k] else BOTTOM
    _finish_free(pr, y)
    two = tuple(y[c] for c in range(system.ncols))
    t = Fraction(1)
    for _ in range(256):
        cand = instantiate(two, t)
        if check_solution(system, cand):
            return FeasibilityResult(Status.FEASIBLE, _normalise(cand), two, t)
        t /= 2
    raise AssertionError("witness failed verification for every eps tried")


def _prune_nonzero(rows, ncols):
    """Pruning that keeps rows with an empty left side; they force bottom."""
    keep = [r for r in rows if r.minus]
    forced = set()
    for r in keep:
        if not r.plus:
            forced.update(r.minus)
    # columns forced to bottom vanish from every other row
    changed = True
    while changed:
        changed = False
        for r in keep:
            live_plus = {c: v for c, v in r.plus.items() if c not in forced}
            live_minus = {c: v for c, v in r.minus.items() if c not in forced}
            if live_minus and not live_plus:
                new = set(live_minus) - forced
                if new:
                    forced |= new
                    changed = True
    cleaned = []
    for r in keep:
        plus = {c: v for c, v in r.plus.items() if c not in forced}
        minus = {c: v for c, v in r.minus.items() if c not in forced}
        if minus:
            cleaned.append(GeqRow(plus, minus, r.origin))
    pr = _prune(cleaned, ncols)
    pr.core_cols = [c for c in pr.core_cols if c not in forced]
    pr.stages = [([c for c in f if c not in forced], rem) for f, rem in pr.stages]
    pr.forced = forced
    return pr


# ----------------------------------------------------------------------------
# exact game values


def _farey(lo: Fraction, hi: Fraction, L: int) -> Fraction:
    """The fraction of least denominator (<= L) in [lo, hi]."""
    for q in range(1, L + 1):
        p = ceil(lo * q)
        if Fraction(p, q) <= hi:
            return Fraction(p, q)
    raise ArithmeticError("no fraction with small denominator in the interval")


def solve_game(game: GameInstance) -> GameSolution:
    """Exact mean-payoff values and optimal positional strategies.

    Values are located by bisection on the threshold oracle down to width
    below 1/L^2, which isolates the unique fraction of denominator <= L; the
    infinitesimal part is resolved in the same way on the integer encoding.
    """
    n = game.size
    if n == 0:
        return GameSolution([], {}, {})
    if any(not out for out in game.edges):
        raise ValueError("every node needs an outgoing edge")
    enc, den, M = _encode(game)
    W = max(abs(w) for out in enc for _, w in out) + 1
    L = n
    # values in encoded units lie in [-W, W] with denominator <= L
    lo = {v: Fraction(-W) for v in range(n)}
    hi = {v: Fraction(W) for v in range(n)}
    width = Fraction(1, L * L)
    while True:
        groups = {}
        for v in range(n):
            if hi[v] - lo[v] >= width:
                groups.setdefault((lo[v], hi[v]), []).append(v)
        if not groups:
            break
        for (a, b), members in groups.items():
            mid = (a + b) / 2
            above = _threshold_ge(enc, game.owners, mid)
            for v in members:
                if above[v]:
                    lo[v] = mid
                else:
                    hi[v] = mid
    enc_vals = [_farey(lo[v], hi[v], L) for v in range(n)]
    values = [_decode_rational(x, den, M, L) for x in enc_vals]
    max_strategy, min_strategy = {}, {}
    for x in sorted(set(enc_vals)):
        nodes = [v for v in range(n) if enc_vals[v] == x]
        shifted = _shift_enc(enc, x)
        dist_ge, _, via_ge = _dual_run(shifted, game.owners)
        dist_le, _, via_le = _positive_region(shifted, game.owners, MAX)
        for v in nodes:
            # tight edges of the potentials certify mean >= x resp. <= x
            if game.owners[v] == MAX:
                max_strategy[v] = min(range(len(enc[v])), key=lambda s: (
                    -shifted[v][s][1] + dist_ge[via_ge[v][s]], s))
            else:
                min_strategy[v] = min(range(len(enc[v])), key=lambda s: (
                    shifted[v][s][1] + dist_le[via_le[v][s]], s))
    return GameSolution(values, max_strategy, min_strategy)


def _shift_enc(enc, x: Fraction):
    """Scale integer weights by den(x) and subtract num(x)."""
    q, p = x.denominator, x.numerator
    return [[(t, w * q - p) for t, w in out] for out in enc]


def _threshold_ge(enc, owners, theta: Fraction) -> list:
    dist, _, _ = _dual_run(_shift_enc(enc, theta), owners)
    return [dist[v] != INF for v in range(len(owners))]


def _decode_rational(x: Fraction, den: int, M: int, L: int) -> TropicalScalar:
    if M == 1:
        return TropicalScalar(x / den)
    a = (x / M).limit_denominator(L)
    b = x - a * M
    return TropicalScalar(a / den, b / den)


def strategy_value(game: GameInstance, start: int, max_strategy: dict, min_strategy: dict):
    """Mean payoff of the play from start under two positional strategies."""
    seen = {}
    path = []
    v = start
    while v not in seen:
        seen[v] = len(path)
        s = max_strategy[v] if game.owners[v] == MAX else min_strategy[v]
        t, w = game.edges[v][s]
        path.append(scalar(w))
        v = t
    cycle = path[seen[v]:]
    total = sum(cycle[1:], cycle[0])
    return total / len(cycle)


def brute_force_values(game: GameInstance) -> list:
    """max over Max strategies of min over Min strategies, node by node."""
    maxn = [v for v in range(game.size) if game.owners[v] == MAX]
    minn = [v for v in range(game.size) if game.owners[v] == MIN]
    max_choices = [dict(zip(maxn, c)) for c in itertools.product(*[range(len(game.edges[v])) for v in maxn])]
    min_choices = [dict(zip(minn, c)) for c in itertools.product(*[range(len(game.edges[v])) for v in minn])]
    out = []
    for v in range(game.size):
        out.append(max(min(strategy_value(game, v, s, t) for t in min_choices) for s in max_choices))
    return out


# ----------------------------------------------------------------------------
# dumps


def dump_game(game: GameInstance, solution: GameSolution | None = None) -> dict:
    out = {
        "nodes": [{"id": v, "owner": game.owners[v], "label": game.labels[v] if game.labels else str(v),
                   "edges": [{"to": t, "weight": format_scalar(w)} for t, w in game.edges[v]]}
                  for v in range(game.size)],
    }
    if solution is not None:
        out["values"] = [format_scalar(x) for x in solution.values]
    return out
