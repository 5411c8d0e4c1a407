"""Command line: parse system files and run checks, certificates and dumps."""

from __future__ import annotations

import argparse
import io
import json
import re
import sys
from contextlib import redirect_stderr, redirect_stdout
from fractions import Fraction

from . import certify as cf
from . import macaulay as mc
from . import oracle as orc
from . import tropsolve as ts
from .tropsem import Nabla, PolySystem, Rel, TropicalPolynomial, TwoSided, format_scalar, glex_sorted, scalar

EXIT_FEASIBLE = 0
EXIT_INFEASIBLE = 10
EXIT_EMPTY_CE = 20
EXIT_ERROR = 2
EXIT_VERIFY_FAILED = 1


# ----------------------------------------------------------------------------
# parsing


class ParseError(ValueError):
    def __init__(self, line: int, col: int, msg: str):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line, self.col = line, col


_NUM = r"\d+(?:\.\d+)?(?:/\d+)?|\.\d+"
_TOKEN = re.compile(rf"\s*(?:(?P<num>{_NUM})|\((?P<pnum>\s*[-+]?\s*(?:{_NUM})\s*)\)"
                    rf"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[*^]))")
_EXP = re.compile(r"\s*(?:\(\s*([-+]?\d+)\s*\)|([-+]?\d+))")


def _split_ident(word: str, names: list):
    """Split a juxtaposed run like ``x1x2`` into declared names (longest match first)."""
    if word in names:
        return [word]
    for name in sorted(names, key=len, reverse=True):
        if word.startswith(name):
            rest = _split_ident(word[len(name):], names)
            if rest is not None:
                return [name] + rest
    return None


def _top_level_split(text: str, sep: str):
    parts, depth, start = [], 0, 0
    for k, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append((start, text[start:k]))
            start = k + 1
    parts.append((start, text[start:]))
    return parts


def _parse_term(text: str, names: list, lineno: int, col0: int):
    n = len(names)
    s = text.strip()
    offset = col0 + len(text) - len(text.lstrip())
    if not s:
        raise ParseError(lineno, offset + 1, "empty term")
    sign = 1
    if s[0] in "+-":
        sign = -1 if s[0] == "-" else 1
        s = s[1:]
        offset += 1
    coeff = None
    exps = [0] * n
    pos = 0
    seen_monomial = False
    while pos < len(s):
        if s[pos:].strip() == "":
            break
        m = _TOKEN.match(s, pos)
        if not m:
            raise ParseError(lineno, offset + pos + 1, f"unexpected text {s[pos:]!r}")
        kind = m.lastgroup
        if kind in ("num", "pnum"):
            if coeff is not None or seen_monomial:
                raise ParseError(lineno, offset + pos + 1, "coefficient must come first")
            coeff = Fraction(m.group(kind).replace(" ", ""))
            pos = m.end()
        elif kind == "op":
            if m.group("op") != "*":
                raise ParseError(lineno, offset + pos + 1, "exponent without variable")
            pos = m.end()
        else:
            parts = _split_ident(m.group("ident"), names)
            if parts is None:
                raise ParseError(lineno, offset + m.start("ident") + 1,
                                 f"unknown variable {m.group('ident')!r}")
            pos = m.end()
            power = 1
            rest = s[pos:].lstrip()
            if rest.startswith("^"):
                pos = len(s) - len(rest) + 1
                em = _EXP.match(s, pos)
                if not em:
                    raise ParseError(lineno, offset + pos + 1, "bad exponent")
                power = int(em.group(1) or em.group(2))
                pos = em.end()
            for k, name in enumerate(parts):
                exps[names.index(name)] += power if k == len(parts) - 1 else 1
            seen_monomial = True
    if coeff is None:
        if sign < 0:
            raise ParseError(lineno, col0 + 1, "sign without coefficient")
        coeff = Fraction(0)
    return tuple(exps), sign * coeff


def _parse_poly(text: str, names: list, lineno: int, col0: int) -> TropicalPolynomial:
    if not text.strip():
        raise ParseError(lineno, col0 + 1, "empty polynomial")
    terms = {}
    for start, part in _top_level_split(text, "+"):
        alpha, c = _parse_term(part, names, lineno, col0 + start)
        terms[alpha] = max(terms[alpha], c) if alpha in terms else c
    return TropicalPolynomial(len(names), terms)


def parse(text: str) -> PolySystem:
    names = None
    relations = []
    for lineno, raw in enumerate(text.replace("−", "-").splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        stripped = line.lstrip()
        col0 = len(line) - len(stripped)
        if stripped.startswith("vars:"):
            if names is not None:
                raise ParseError(lineno, col0 + 1, "variables declared twice")
            names = stripped[5:].split()
            if not names:
                raise ParseError(lineno, col0 + 1, "no variables declared")
            for nm in names:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", nm):
                    raise ParseError(lineno, col0 + 1, f"bad variable name {nm!r}")
            if len(set(names)) != len(names):
                raise ParseError(lineno, col0 + 1, "duplicate variable")
            continue
        if names is None:
            raise ParseError(lineno, col0 + 1, "missing 'vars:' header")
        if stripped.startswith("f:"):
            body = stripped[2:]
            base = col0 + 2
            if "~" not in body:
                raise ParseError(lineno, base + 1, "expected '~ 0'")
            lhs, rhs = body.rsplit("~", 1)
            if rhs.strip() != "0":
                raise ParseError(lineno, base + len(lhs) + 2, "right side of '~' must be 0")
            relations.append(Nabla(_parse_poly(lhs, names, lineno, base)))
        elif stripped.startswith("r:"):
            body = stripped[2:]
            base = col0 + 2
            for op, rel in ((">=", Rel.GEQ), ("==", Rel.EQ), (">", Rel.GT)):
                k = body.find(op)
                if k >= 0:
                    break
            else:
                raise ParseError(lineno, base + 1, "expected one of >=, ==, >")
            lhs, rhs = body[:k], body[k + len(op):]
            relations.append(TwoSided(_parse_poly(lhs, names, lineno, base), rel,
                                      _parse_poly(rhs, names, lineno, base + k + len(op))))
        else:
            raise ParseError(lineno, col0 + 1, "expected 'vars:', 'f:' or 'r:'")
    if names is None:
        raise ParseError(1, 1, "missing 'vars:' header")
    return PolySystem(len(names), tuple(relations), tuple(names))


def _fmt_coeff(c) -> str:
    c = scalar(c)
    if c.b:
        raise ValueError("coefficients with an infinitesimal part have no file syntax")
    return f"({c.a})" if c.a < 0 else str(c.a)


def format_poly(f: TropicalPolynomial, names) -> str:
    out = []
    for alpha in f.support:
        mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(names, alpha) if e)
        c = _fmt_coeff(f.terms[alpha])
        out.append(f"{c}*{mono}" if mono else c)
    return " + ".join(out)


def format_system(system: PolySystem) -> str:
    lines = ["vars: " + " ".join(system.names)]
    for rel in system.relations:
        if isinstance(rel, Nabla):
            lines.append(f"f: {format_poly(rel.f, system.names)} ~ 0")
        else:
            lines.append(f"r: {format_poly(rel.plus, system.names)} {rel.rel.value} "
                         f"{format_poly(rel.minus, system.names)}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# helpers


def _columns(system: PolySystem, set_spec: str, seed):
    """(columns, apriori, label, ce data or None)."""
    if set_spec == "ce":
        data = mc.ce_set(system, seed=seed)
        return data.points, None, "ce", data
    if set_spec == "qbar":
        return mc.qbar_set(system), None, "qbar", None
    if set_spec.startswith("degree:"):
        N = int(set_spec.split(":", 1)[1])
        if not system.is_ordinary:
            raise ValueError("degree sets need nonnegative exponents")
        apriori = [mc.simplex_points(system.n, mc.relation_degree(r)) for r in system.relations]
        return mc.simplex_points(system.n, N), apriori, f"degree:{N}", None
    raise ValueError(f"unknown set {set_spec!r}")


def root_from_witness(system: PolySystem, columns, y):
    """Read x off a Veronese-shaped witness; None when that fails to solve the system."""
    cols = [tuple(c) for c in columns]
    pos = {c: k for k, c in enumerate(cols)}
    n = system.n
    for base in cols:
        steps = [tuple(b + (1 if i == k else 0) for i, b in enumerate(base)) for k in range(n)]
        if all(s in pos for s in steps):
            x = tuple(Fraction(y[pos[s]]) - Fraction(y[pos[base]]) for s in steps)
            if system.holds(x):
                return x
    return None


def _fmt_vec(v):
    return [None if c is None else str(c) for c in v]


def _emit(payload: dict, as_json: bool, text: str):
    if as_json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


# ----------------------------------------------------------------------------
# commands


def cmd_check(system: PolySystem, args) -> int:
    if args.method == "oracle":
        res = orc.brute_feasibility(system)
        payload = {"status": "feasible" if res.feasible else "infeasible",
                   "witness_y": None, "root_x": _fmt_vec(res.x) if res.feasible else None,
                   "set_used": "oracle", "|E|": None}
        _emit(payload, args.json, payload["status"] + (f" at x = {payload['root_x']}" if res.feasible else ""))
        return EXIT_FEASIBLE if res.feasible else EXIT_INFEASIBLE
    columns, apriori, label, _ = _columns(system, args.set, args.seed)
    if label == "ce" and not columns:
        payload = {"status": "inconclusive", "witness_y": None, "root_x": None,
                   "set_used": label, "|E|": 0}
        _emit(payload, args.json, "inconclusive: the Canny-Emiris set is empty")
        return EXIT_EMPTY_CE
    lin = mc.linearize(system, columns, apriori)
    if args.dump_game:
        with open(args.dump_game, "w") as fh:
            json.dump(ts.dump_game(ts.to_game(lin)), fh, indent=2)
    res = ts.feasibility(lin)
    root = None
    if res.feasible:
        root = root_from_witness(system, columns, res.witness)
        if root is None:
            try:
                found = orc.brute_feasibility(system)
                root = found.x if found.feasible else None
            except orc.GuardExceeded:
                root = None
    payload = {
        "status": res.status.value,
        "witness_y": _fmt_vec(res.witness) if res.feasible else None,
        "root_x": _fmt_vec(root) if root is not None else None,
        "set_used": label,
        "|E|": len(columns),
    }
    if res.feasible:
        text = f"feasible ({label}, {len(columns)} columns)"
        if root is not None:
            text += f"; root x = ({', '.join(str(c) for c in root)})"
    else:
        text = f"infeasible ({label}, {len(columns)} columns)"
    _emit(payload, args.json, text)
    return EXIT_FEASIBLE if res.feasible else EXIT_INFEASIBLE


def _build_with_retries(system, seed):
    attempts = [seed] + [s for s in range(1, 9) if s != seed]
    last = None
    for s in attempts:
        try:
            return cf.build_certificate(system, seed=s)
        except cf.WallIncident as err:
            last = err
    raise last


def cmd_certify(system: PolySystem, args) -> int:
    try:
        result = _build_with_retries(system, args.seed)
    except cf.EmptyCESet:
        _emit({"status": "inconclusive", "reason": "empty Canny-Emiris set"}, args.json,
              "inconclusive: the Canny-Emiris set is empty")
        return EXIT_EMPTY_CE
    if isinstance(result, cf.SolutionFound):
        payload = {"status": "solution", "x": _fmt_vec(result.x), "p": list(result.p)}
        _emit(payload, args.json, f"solution found at x = ({', '.join(str(c) for c in result.x)})")
        return EXIT_FEASIBLE
    data = cf.certificate_to_json(result)
    check = cf.verify_certificate(result, system)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(data, fh, indent=2)
    payload = {"status": "certified" if check else "verification-failed", "message": check.message,
               "certificate": data}
    text = (f"infeasible: certificate over {len(result.ce_points)} points verified"
            if check else f"certificate failed verification: {check.message}")
    _emit(payload, args.json, text)
    return EXIT_INFEASIBLE if check else EXIT_VERIFY_FAILED


def cmd_verify(system: PolySystem, args) -> int:
    with open(args.cert) as fh:
        cert = cf.certificate_from_json(json.load(fh))
    check = cf.verify_certificate(cert, system)
    print("certificate valid" if check else f"certificate invalid: {check.message}")
    return 0 if check else EXIT_VERIFY_FAILED


def cmd_macaulay(system: PolySystem, args) -> int:
    columns, apriori, _, _ = _columns(system, args.set, args.seed)
    view = mc.macaulay_view(system, columns, apriori)
    if args.json:
        text = json.dumps(mc.view_to_json(view, system.names), indent=2)
    else:
        text = mc.view_to_csv(view, system.names)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 0


def cmd_solve(system: PolySystem, args) -> int:
    if args.nontoric:
        res = orc.nontoric_search(system)
        if res.feasible:
            payload = {"status": "feasible", "root_x": _fmt_vec(res.x),
                       "support": [system.names[k] for k in res.support]}
            _emit(payload, args.json, "root x = (" + ", ".join("-inf" if c is None else str(c)
                                                               for c in res.x) + ")")
            return EXIT_FEASIBLE
        _emit({"status": "infeasible", "root_x": None}, args.json, "no root on any stratum")
        return EXIT_INFEASIBLE
    data = mc.ce_set(system, seed=args.seed)
    columns, label = data.points, "ce"
    if not columns:
        columns, label = mc.qbar_set(system), "qbar"
    res = ts.feasibility(mc.linearize(system, columns))
    if not res.feasible:
        _emit({"status": "infeasible", "root_x": None, "set_used": label}, args.json, "infeasible")
        return EXIT_INFEASIBLE
    root = root_from_witness(system, columns, res.witness)
    if root is None:
        found = orc.brute_feasibility(system)
        root = found.x if found.feasible else None
    payload = {"status": "feasible", "root_x": _fmt_vec(root) if root else None, "set_used": label,
               "witness_y": _fmt_vec(res.witness)}
    _emit(payload, args.json, "root x = (" + ", ".join(str(c) for c in root) + ")" if root
          else "feasible, no root extracted")
    return EXIT_FEASIBLE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tropsys", description="Exact tropical polynomial system solver")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="decide feasibility")
    c.add_argument("file")
    c.add_argument("--method", choices=["game", "oracle"], default="game")
    c.add_argument("--set", default="ce", help="ce, qbar or degree:N")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--json", action="store_true")
    c.add_argument("--dump-game", metavar="PATH")

    c = sub.add_parser("certify", help="build and verify an infeasibility certificate")
    c.add_argument("file")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--json", action="store_true")
    c.add_argument("--out")

    c = sub.add_parser("verify-cert", help="re-verify a certificate file")
    c.add_argument("file")
    c.add_argument("cert")

    c = sub.add_parser("macaulay", help="dump a Macaulay submatrix")
    c.add_argument("file")
    c.add_argument("--set", default="ce")
    c.add_argument("--seed", type=int, default=None)
    fmt = c.add_mutually_exclusive_group()
    fmt.add_argument("--csv", action="store_true")
    fmt.add_argument("--json", action="store_true")
    c.add_argument("--out")

    c = sub.add_parser("solve", help="decide feasibility and extract a root")
    c.add_argument("file")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--json", action="store_true")
    c.add_argument("--nontoric", action="store_true")
    return p


COMMANDS = {"check": cmd_check, "certify": cmd_certify, "verify-cert": cmd_verify,
            "macaulay": cmd_macaulay, "solve": cmd_solve}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else 0
    try:
        with open(args.file, encoding="utf-8") as fh:
            system = parse(fh.read())
    except (OSError, ParseError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    try:
        return COMMANDS[args.command](system, args)
    except (OSError, ValueError, orc.GuardExceeded) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


def run(argv) -> tuple:
    """Run a command in-process; returns (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()
