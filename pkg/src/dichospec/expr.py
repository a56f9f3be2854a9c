"""Scalar coefficient expressions in the single variable ``t``.

Grammar (lowest to highest precedence)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?          # right-associative
    atom  := NUMBER | "t" | "pi" | "e" | FUNC "(" expr ")" | "(" expr ")"

There is no implicit multiplication and no unary plus.  ``ln`` is the
natural logarithm; ``log`` is deliberately absent.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import EvaluationError, ExpressionSyntaxError, UnknownIdentifierError

FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "sqrt", "abs")
CONSTANTS = {"pi": math.pi, "e": math.e}
VARIABLE = "t"
ALLOWED_NAMES = (VARIABLE,) + tuple(CONSTANTS) + FUNCTIONS


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError("numeric literals are finite and non-negative")


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    name: str

    def __post_init__(self):
        if self.name not in CONSTANTS:
            raise ValueError(f"unknown constant {self.name!r}")


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"

    def __post_init__(self):
        if self.op not in "+-*/^" or len(self.op) != 1:
            raise ValueError(f"unknown operator {self.op!r}")


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise ValueError(f"unknown function {self.func!r}")


Node = Union[Num, Var, Const, Neg, BinOp, Call]


# --- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<op>[-+*/^()])
      | (?P<bad>\S)
    )""",
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str
    text: str
    offset: int  # byte offset into the UTF-8 encoded source


def _tokenize(text):
    tokens = []
    pos = 0
    byte_of = lambda i: len(text[:i].encode("utf-8"))
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            break  # only trailing whitespace left
        kind = m.lastgroup
        start = m.start(kind)
        if kind == "bad":
            raise ExpressionSyntaxError(
                f"unexpected character {m.group(kind)!r}", byte_of(start), text)
        tokens.append(_Token(kind, m.group(kind), byte_of(start)))
        pos = m.end()
    tokens.append(_Token("end", "", len(text.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def fail(self, message, tok=None):
        tok = tok or self.tok
        raise ExpressionSyntaxError(message, tok.offset, self.text)

    def accept(self, op):
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            if self.tok.kind in ("num", "name") or self.tok.text == "(":
                self.fail(f"unexpected {self.tok.text!r}; implicit multiplication "
                          "is not supported, write '*'")
            self.fail(f"unexpected {self.tok.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            value = float(tok.text)
            if not math.isfinite(value):
                self.fail("numeric literal out of range")
            self.i += 1
            return Num(value)
        if tok.kind == "name":
            self.i += 1
            name = tok.text
            if name == VARIABLE:
                return Var()
            if name in CONSTANTS:
                return Const(name)
            if name in FUNCTIONS:
                if not self.accept("("):
                    self.fail(f"function {name!r} requires parentheses")
                arg = self.expr()
                if not self.accept(")"):
                    self.fail("expected ')'")
                return Call(name, arg)
            raise UnknownIdentifierError(name, tok.offset, ALLOWED_NAMES, self.text)
        if self.accept("("):
            node = self.expr()
            if not self.accept(")"):
                self.fail("expected ')'")
            return node
        if tok.kind == "end":
            self.fail("unexpected end of expression")
        self.fail(f"unexpected {tok.text!r}")


def parse_expression(text: str) -> Node:
    """Parse ``text`` into an immutable AST."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0, text)
    return _Parser(text).parse()


# --- serialization -------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3
_ATOM_PREC = 5


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def serialize(node: Node) -> str:
    """Inverse of :func:`parse_expression` up to whitespace and redundant parentheses."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return VARIABLE
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({serialize(node.arg)})"
    if isinstance(node, Neg):
        inner = serialize(node.operand)
        if _prec(node.operand) < _NEG_PREC:
            inner = f"({inner})"
        return "-" + inner
    p = _PREC[node.op]
    right_assoc = node.op == "^"
    left, right = serialize(node.left), serialize(node.right)
    lp, rp = _prec(node.left), _prec(node.right)
    if lp < p or (lp == p and right_assoc):
        left = f"({left})"
    if rp < p or (rp == p and not right_assoc):
        right = f"({right})"
    return f"{left}{node.op}{right}"


# --- evaluation --------------------------------------------------------------

def _first_bad(mask, t):
    """``(hit, t_at_hit)`` for a boolean mask over the evaluation points."""
    if np.ndim(mask) == 0:
        return bool(mask), t
    if mask.any():
        idx = int(np.argmax(mask))
        return True, float(np.broadcast_to(t, mask.shape).flat[idx])
    return False, None


def _scratch(x, t):
    # a temporary array owned by the evaluator, safe to overwrite
    return isinstance(x, np.ndarray) and x is not t and x.shape == np.shape(t)


_UFUNC = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide, "^": np.power}


def _eval(node, t):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return t
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        x = _eval(node.operand, t)
        return np.negative(x, out=x) if _scratch(x, t) else -x
    if isinstance(node, Call):
        x = _eval(node.arg, t)
        f = node.func
        if f == "ln":
            hit, where = _first_bad(np.asarray(x) <= 0, t)
            if hit:
                raise EvaluationError("ln of non-positive argument", serialize(node), where)
            ufunc = np.log
        elif f == "sqrt":
            hit, where = _first_bad(np.asarray(x) < 0, t)
            if hit:
                raise EvaluationError("sqrt of negative argument", serialize(node), where)
            ufunc = np.sqrt
        elif f == "abs":
            ufunc = np.abs
        else:
            ufunc = getattr(np, f)
        return ufunc(x, out=x) if _scratch(x, t) else ufunc(x)
    a = _eval(node.left, t)
    b = _eval(node.right, t)
    if node.op == "/":
        hit, where = _first_bad(np.asarray(b) == 0, t)
        if hit:
            raise EvaluationError("division by zero", serialize(node), where)
    ufunc = _UFUNC[node.op]
    if _scratch(a, t):
        return ufunc(a, b, out=a)
    if _scratch(b, t):
        return ufunc(a, b, out=b)
    return ufunc(a, b)


def evaluate(ast: Node, t):
    """Evaluate ``ast`` at ``t`` (a float or an array of floats).

    Scalar input gives a Python float.  Any non-finite intermediate result
    raises :class:`EvaluationError`.
    """
    scalar = np.ndim(t) == 0
    tt = float(t) if scalar else np.asarray(t, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval(ast, tt)
    out = np.asarray(out, dtype=float)
    if scalar:
        if not math.isfinite(out):
            raise EvaluationError("non-finite value", serialize(ast), tt)
        return float(out)
    if out.shape != tt.shape:
        out = np.array(np.broadcast_to(out, tt.shape))
    elif out is tt:
        out = out.copy()
    if not np.isfinite(out.sum()):
        finite = np.isfinite(out)
        idx = int(np.argmin(finite))
        raise EvaluationError("non-finite value", serialize(ast), float(tt.flat[idx]))
    return out


def _as_ast(expr):
    return parse_expression(expr) if isinstance(expr, str) else expr


@dataclass(frozen=True)
class CoefficientFunction:
    """A coefficient ``t -> a(t)`` with an optional closed-form antiderivative.

    ``domain_start`` is the earliest time at which ``body`` is evaluable.  A
    cumulative integral anchored before it applies the start-gap rule (see
    :mod:`dichospec.quad`).
    """

    body: Node
    antiderivative: Optional[Node] = None
    domain_start: float = 0.0
    label: str = field(default="", compare=False)

    @classmethod
    def from_text(cls, body, antiderivative=None, domain_start=0.0, label=""):
        body_ast = _as_ast(body)
        anti_ast = None if antiderivative is None else _as_ast(antiderivative)
        return cls(body_ast, anti_ast, float(domain_start), label or serialize(body_ast))

    @property
    def has_antiderivative(self):
        return self.antiderivative is not None

    def __call__(self, t):
        return evaluate(self.body, t)

    def primitive(self, t):
        if self.antiderivative is None:
            raise ValueError("coefficient has no closed-form antiderivative")
        return evaluate(self.antiderivative, t)

    def antiderivative_mismatch(self, n=1000, hi=1e3, step=1e-5):
        """Largest scaled gap between a central difference of the antiderivative and the body.

        At each sample the gap ``|fd - body|`` is reduced by the rounding noise
        of the difference quotient, ``4 eps (|F(t+h)| + |F(t-h)|) / (2h)``, and
        divided by ``max(1, |body|)``.
        """
        if self.antiderivative is None:
            raise ValueError("coefficient has no closed-form antiderivative")
        lo = max(self.domain_start, 1.0)
        t = np.linspace(lo, hi, n)
        up, down = self.primitive(t + step), self.primitive(t - step)
        fd = (up - down) / (2 * step)
        noise = 4 * np.finfo(float).eps * (np.abs(up) + np.abs(down)) / (2 * step)
        body = self(t)
        gap = np.maximum(np.abs(fd - body) - noise, 0.0)
        return float(np.max(gap / np.maximum(1.0, np.abs(body))))

    def check_antiderivative(self, rtol=1e-6, **kwargs):
        return self.antiderivative_mismatch(**kwargs) <= rtol

    def __str__(self):
        return self.label or serialize(self.body)
