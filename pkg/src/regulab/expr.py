"""Closed-form real expressions: parsing, printing, and evaluation.

Grammar (ASCII, whitespace insignificant)::

    expr    := term (('+'|'-') term)*
    term    := power (('*'|'/') power)*
    power   := unary ('^' power)?            # right associative
    unary   := '-' unary | atom
    atom    := NUMBER | VAR | FUNC '(' args ')' | '(' expr ')'
             | 'if' '(' cmp ',' expr ',' expr ')'
    cmp     := expr ('<'|'>'|'<='|'>='|'=='|'!=') expr

Variables are ``x1 .. xn``; functions are abs, sqrt, exp, min, max.
Comparisons are only legal as the first argument of ``if``.  Unary minus
binds tighter than binary ``-`` but looser than ``^``.

Expressions are immutable after parse and evaluation is pure, so they are
safe to share across parallel workers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

_FUNCS = {"abs", "sqrt", "exp", "min", "max"}
_CMP_OPS = ("<=", ">=", "==", "!=", "<", ">")


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class EvalDomainError(ExprError):
    """Evaluation hit a domain error (division by zero, sqrt of a negative, ...)."""

    def __init__(self, message, node):
        super().__init__(f"{message} in subexpression '{to_source(node)}'")
        self.node = node


# AST nodes are plain tuples so structural equality is tuple equality:
#   ('num', float) ('var', int) ('neg', node)
#   ('bin', op, left, right) ('call', name, (args...))
#   ('if', ('cmp', op, left, right), then, else)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op><=|>=|==|!=|[-+*/^(),<>]))"
)


def _tokenize(source):
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            stripped = source[pos:].lstrip()
            if not stripped:
                break
            off = pos + (len(source[pos:]) - len(stripped))
            raise ParseError(f"unexpected character {stripped[0]!r}", off)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ParseError(f"expected '{op}', found {text or 'end of input'!r}", off)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {text!r}", off)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in ("+", "-"):
                self.advance()
                node = ("bin", text, node, self.term())
            else:
                return node

    def term(self):
        node = self.power()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in ("*", "/"):
                self.advance()
                node = ("bin", text, node, self.power())
            else:
                return node

    def power(self):
        base = self.unary()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return ("bin", "^", base, self.power())
        return base

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            # -x^2 means -(x^2): exponentiation binds tighter than negation
            return ("neg", self.power())
        return self.atom()

    def atom(self):
        kind, text, off = self.advance()
        if kind == "num":
            return ("num", float(text))
        if kind == "ident":
            if text == "if":
                self.expect("(")
                cond = self.comparison()
                self.expect(",")
                then = self.expr()
                self.expect(",")
                other = self.expr()
                self.expect(")")
                return ("if", cond, then, other)
            if text in _FUNCS:
                self.expect("(")
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.advance()
                    args.append(self.expr())
                self.expect(")")
                if text in ("abs", "sqrt", "exp") and len(args) != 1:
                    raise ParseError(f"{text} takes exactly one argument", off)
                if text in ("min", "max") and len(args) < 2:
                    raise ParseError(f"{text} takes at least two arguments", off)
                return ("call", text, tuple(args))
            m = re.fullmatch(r"x([1-9]\d*)", text)
            if m:
                return ("var", int(m.group(1)))
            raise ParseError(f"unknown identifier {text!r}", off)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(
            f"expected a number, variable, function call or '(', found {text or 'end of input'!r}",
            off,
        )

    def comparison(self):
        left = self.expr()
        kind, text, off = self.peek()
        if kind == "op" and text in _CMP_OPS:
            self.advance()
            right = self.expr()
            return ("cmp", text, left, right)
        raise ParseError(
            f"expected a comparison operator ({'|'.join(_CMP_OPS)}), found {text or 'end of input'!r}",
            off,
        )


def _collect_vars(node, out):
    tag = node[0]
    if tag == "var":
        out.add(node[1])
    elif tag == "neg":
        _collect_vars(node[1], out)
    elif tag == "bin":
        _collect_vars(node[2], out)
        _collect_vars(node[3], out)
    elif tag == "call":
        for a in node[2]:
            _collect_vars(a, out)
    elif tag == "cmp":
        _collect_vars(node[2], out)
        _collect_vars(node[3], out)
    elif tag == "if":
        _collect_vars(node[1], out)
        _collect_vars(node[2], out)
        _collect_vars(node[3], out)


@dataclass(frozen=True)
class Expression:
    """Immutable parsed expression over variables x1..x{arity}."""

    ast: tuple
    arity: int
    source: str = ""

    def __call__(self, point):
        return evaluate(self, point)

    def eval_many(self, points):
        return eval_many(self, points)

    def free_vars(self):
        return free_vars(self)

    def __str__(self):
        return to_source(self.ast)


def parse(source, arity=None):
    """Parse ``source`` into an Expression.

    ``arity`` defaults to the largest variable index appearing in the tree
    (0 for constant expressions).
    """
    if not isinstance(source, str):
        raise ParseError("expression source must be text", 0)
    node = _Parser(source).parse()
    seen = set()
    _collect_vars(node, seen)
    max_idx = max(seen) if seen else 0
    if arity is None:
        arity = max_idx
    elif max_idx > arity:
        raise ExprError(f"variable x{max_idx} exceeds declared arity {arity}")
    return Expression(node, arity, source)


def free_vars(e):
    out = set()
    _collect_vars(e.ast, out)
    return out


# ---------------------------------------------------------------- printing

_PREC = {"+": 10, "-": 10, "*": 20, "/": 20, "neg": 25, "^": 30}


def _fmt_num(v):
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_source(node, parent_prec=0):
    tag = node[0]
    if tag == "num":
        return _fmt_num(node[1])
    if tag == "var":
        return f"x{node[1]}"
    if tag == "neg":
        inner = to_source(node[1], _PREC["neg"])
        text = f"-{inner}"
        return f"({text})" if parent_prec > _PREC["neg"] else text
    if tag == "bin":
        op = node[1]
        prec = _PREC[op]
        # left associative except ^; right operand of -,/ needs a bump
        lp = prec
        rp = prec + (0 if op == "^" else 1)
        if op == "^":
            lp = prec + 1
        text = f"{to_source(node[2], lp)} {op} {to_source(node[3], rp)}"
        return f"({text})" if parent_prec > prec else text
    if tag == "call":
        args = ", ".join(to_source(a) for a in node[2])
        return f"{node[1]}({args})"
    if tag == "cmp":
        return f"{to_source(node[2])} {node[1]} {to_source(node[3])}"
    if tag == "if":
        return f"if({to_source(node[1])}, {to_source(node[2])}, {to_source(node[3])})"
    raise ExprError(f"unknown node tag {tag!r}")


def print_expr(e):
    return to_source(e.ast)


# --------------------------------------------------------------- evaluation

_CMP_FUNCS = {
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _eval_node(node, point):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "var":
        return point[node[1] - 1]
    if tag == "neg":
        return -_eval_node(node[1], point)
    if tag == "bin":
        op = node[1]
        a = _eval_node(node[2], point)
        b = _eval_node(node[3], point)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0.0:
                raise EvalDomainError("division by zero", node)
            return a / b
        if op == "^":
            try:
                r = math.pow(a, b)
            except (ValueError, OverflowError):
                raise EvalDomainError(f"invalid power {a!r} ^ {b!r}", node) from None
            if a == 0.0 and b < 0.0:
                raise EvalDomainError("zero raised to a negative power", node)
            return r
        raise ExprError(f"unknown operator {op!r}")
    if tag == "call":
        name = node[1]
        args = [_eval_node(a, point) for a in node[2]]
        if name == "abs":
            return abs(args[0])
        if name == "sqrt":
            if args[0] < 0.0:
                raise EvalDomainError("sqrt of a negative number", node)
            return math.sqrt(args[0])
        if name == "exp":
            try:
                return math.exp(args[0])
            except OverflowError:
                raise EvalDomainError("exp overflow", node) from None
        if name == "min":
            return min(args)
        if name == "max":
            return max(args)
        raise ExprError(f"unknown function {name!r}")
    if tag == "if":
        _, op, left, right = node[1]
        cond = _CMP_FUNCS[op](_eval_node(left, point), _eval_node(right, point))
        # exactly one branch evaluates
        return _eval_node(node[2] if cond else node[3], point)
    raise ExprError(f"unknown node tag {tag!r}")


def evaluate(e, point):
    """Evaluate at a single point.  Deterministic; raises EvalDomainError."""
    point = np.asarray(point, dtype=float)
    if point.ndim != 1 or point.shape[0] != e.arity:
        raise ExprError(f"point has length {point.shape}, expected arity {e.arity}")
    if not np.all(np.isfinite(point)):
        raise ExprError("evaluation point must be finite")
    return float(_eval_node(e.ast, point))


def _eval_many_node(node, pts):
    """Vectorized evaluation; conditionals evaluate one branch per row.

    Domain errors yield non-finite entries instead of raising; callers in
    the solvers treat those rows as failed seeds.
    """
    tag = node[0]
    n = pts.shape[0]
    if tag == "num":
        return np.full(n, node[1])
    if tag == "var":
        return pts[:, node[1] - 1].copy()
    if tag == "neg":
        return -_eval_many_node(node[1], pts)
    if tag == "bin":
        op = node[1]
        a = _eval_many_node(node[2], pts)
        b = _eval_many_node(node[3], pts)
        with np.errstate(all="ignore"):
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                out = a / b
                out[b == 0.0] = np.nan
                return out
            if op == "^":
                return np.power(a, b)
    if tag == "call":
        name = node[1]
        args = [_eval_many_node(a, pts) for a in node[2]]
        with np.errstate(all="ignore"):
            if name == "abs":
                return np.abs(args[0])
            if name == "sqrt":
                out = np.sqrt(np.abs(args[0]))
                out[args[0] < 0] = np.nan
                return out
            if name == "exp":
                return np.exp(args[0])
            if name == "min":
                return np.minimum.reduce(args)
            if name == "max":
                return np.maximum.reduce(args)
    if tag == "if":
        _, op, left, right = node[1]
        with np.errstate(all="ignore"):
            mask = _CMP_FUNCS[op](_eval_many_node(left, pts), _eval_many_node(right, pts))
        out = np.empty(n)
        if np.any(mask):
            out[mask] = _eval_many_node(node[2], pts[mask])
        if not np.all(mask):
            inv = ~mask
            out[inv] = _eval_many_node(node[3], pts[inv])
        return out
    raise ExprError(f"unknown node tag {tag!r}")


def eval_many(e, points):
    """Evaluate at an (N, arity) array of points; returns an (N,) array."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if e.arity == 0:
        return _eval_many_node(e.ast, np.empty((pts.shape[0], 0)))
    if pts.shape[1] != e.arity:
        raise ExprError(f"points have width {pts.shape[1]}, expected arity {e.arity}")
    return _eval_many_node(e.ast, pts)
