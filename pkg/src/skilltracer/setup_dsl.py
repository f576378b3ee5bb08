"""Exercise set-up expressions and their probability polynomials.

A set-up describes how an exercise draws on skills: ``and(A, B)`` needs
both, ``or(A, B)`` allows either method, ``pick(A, B)`` selects one variant
at random, and ``part(A, 0.3)`` marks a skill as affecting only part of the
exercise.  Compiling a set-up yields a sparse multivariate polynomial in
the per-skill success rates whose value is the success probability of the
whole exercise; everything downstream (updates, inference, prediction)
consumes that polynomial rather than the tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Optional

from . import basis
from .basis import BasisCoefficients
from .errors import (
    ArityError,
    ConstraintError,
    MissingSkillDistributionError,
    MissingVariableError,
    SetupSyntaxError,
)

RESERVED = {"and", "or", "pick", "part"}

# Exponent vectors are canonical sorted tuples of (skill, power) pairs with
# all powers >= 1; the constant monomial is the empty tuple.
Monomial = tuple


@dataclass(frozen=True)
class SkillRef:
    skill: str


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


@dataclass(frozen=True)
class Pick:
    """Random selection of k children; weights only make sense for k = 1."""

    children: tuple
    weights: Optional[tuple] = None
    k: int = 1


@dataclass(frozen=True)
class Part:
    child: object
    p: float


class ProbPolynomial:
    """Sparse multivariate polynomial over per-skill success rates."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, float]):
        self.terms = {m: float(c) for m, c in terms.items() if c != 0.0}
        if not self.terms:
            self.terms = {(): 0.0}

    @classmethod
    def constant(cls, value: float) -> "ProbPolynomial":
        return cls({(): value})

    @classmethod
    def variable(cls, skill: str) -> "ProbPolynomial":
        return cls({((skill, 1),): 1.0})

    @property
    def variables(self) -> set:
        return {s for mono in self.terms for s, _ in mono}

    def degree(self, skill: str) -> int:
        return max((e for mono in self.terms for s, e in mono if s == skill), default=0)

    def max_degree(self) -> int:
        return max((self.degree(s) for s in self.variables), default=0)

    def __add__(self, other: "ProbPolynomial") -> "ProbPolynomial":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0.0) + c
        return ProbPolynomial(out)

    def scaled(self, factor: float) -> "ProbPolynomial":
        return ProbPolynomial({m: c * factor for m, c in self.terms.items()})

    def __mul__(self, other: "ProbPolynomial") -> "ProbPolynomial":
        out: dict = {}
        for m1, c1 in self.terms.items():
            e1 = dict(m1)
            for m2, c2 in other.terms.items():
                merged = dict(e1)
                for s, e in m2:
                    merged[s] = merged.get(s, 0) + e
                key = tuple(sorted(merged.items()))
                out[key] = out.get(key, 0.0) + c1 * c2
        return ProbPolynomial(out)

    def __eq__(self, other):
        if not isinstance(other, ProbPolynomial):
            return NotImplemented
        keys = set(self.terms) | set(other.terms)
        return all(
            abs(self.terms.get(k, 0.0) - other.terms.get(k, 0.0)) < 1e-12 for k in keys
        )

    def __repr__(self):  # pragma: no cover - debugging aid
        def mono(m):
            return "*".join(f"{s}^{e}" if e > 1 else s for s, e in m) or "1"

        return " + ".join(f"{c:g}*{mono(m)}" for m, c in sorted(self.terms.items()))


def one_minus(poly: ProbPolynomial) -> ProbPolynomial:
    return ProbPolynomial.constant(1.0) + poly.scaled(-1.0)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_.\-]*)|(?P<punct>[(),:]))"
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, pos: int | None = None):
        raise SetupSyntaxError(message, self.pos if pos is None else pos)

    def peek(self):
        m = _TOKEN.match(self.text, self.pos)
        if m is None:
            rest = self.text[self.pos:]
            if rest.strip():
                at = self.pos + len(rest) - len(rest.lstrip())
                self.error(f"unexpected character {rest.strip()[0]!r}", at)
            return None, None, self.pos
        kind = m.lastgroup
        return kind, m.group(kind), m.start(kind)

    def take(self):
        kind, value, start = self.peek()
        if kind is not None:
            m = _TOKEN.match(self.text, self.pos)
            self.pos = m.end()
        return kind, value, start

    def expect_punct(self, char: str):
        kind, value, start = self.take()
        if kind != "punct" or value != char:
            self.error(f"expected {char!r}", start)

    def parse_expr(self):
        kind, value, start = self.take()
        if kind == "ident":
            nk, nv, _ = self.peek()
            if nk == "punct" and nv == "(":
                if value.lower() not in RESERVED:
                    self.error(f"unknown operator {value!r}", start)
                return self.parse_call(value.lower(), start)
            if value.lower() in RESERVED:
                self.error(f"{value!r} is a reserved operator name, not a skill", start)
            return SkillRef(value)
        if kind is None:
            self.error("unexpected end of input")
        self.error(f"expected a skill or operator, got {value!r}", start)

    def parse_call(self, op: str, start: int):
        self.expect_punct("(")
        if op == "part":
            child = self.parse_expr()
            kind, value, vstart = self.take()
            if kind == "punct" and value == ")":
                raise ArityError("part() takes exactly one expression and one fraction")
            if not (kind == "punct" and value == ","):
                self.error("expected ',' or ')'", vstart)
            kind, value, vstart = self.take()
            if kind != "num":
                self.error("part() needs a numeric fraction as its second argument",
                           vstart)
            p = float(value)
            kind, value, vstart = self.take()
            if kind == "punct" and value == ",":
                raise ArityError("part() takes exactly one expression and one fraction")
            if not (kind == "punct" and value == ")"):
                self.error("expected ')'", vstart)
            if not 0.0 < p < 1.0:
                raise ConstraintError(f"part fraction must lie strictly in (0,1), got {p}")
            return Part(child, p)
        if op == "pick":
            return self.parse_pick(start)
        children = [self.parse_expr()]
        while True:
            kind, value, vstart = self.take()
            if kind == "punct" and value == ",":
                children.append(self.parse_expr())
            elif kind == "punct" and value == ")":
                break
            else:
                self.error("expected ',' or ')'", vstart)
        if len(children) < 2:
            raise ArityError(f"{op}() needs at least two children")
        node = And if op == "and" else Or
        return node(tuple(children))

    def parse_pick(self, start: int):
        k = 1
        kind, value, _ = self.peek()
        if kind == "num":
            if not value.isdigit():
                self.error("pick() selection count must be an integer", start)
            self.take()
            k = int(value)
            self.expect_punct(",")
        children, weights = [], []
        while True:
            children.append(self.parse_expr())
            kind, value, vstart = self.peek()
            if kind == "punct" and value == ":":
                self.take()
                wk, wv, wstart = self.take()
                if wk != "num":
                    self.error("expected a weight after ':'", wstart)
                weights.append(float(wv))
            kind, value, vstart = self.take()
            if kind == "punct" and value == ")":
                break
            if not (kind == "punct" and value == ","):
                self.error("expected ',' or ')'", vstart)
        if weights and len(weights) != len(children):
            raise ArityError("pick() weights must be given for every child or none")
        if len(children) < 2:
            raise ArityError("pick() needs at least two children")
        if not 1 <= k <= len(children):
            raise ArityError(
                f"pick() selection count {k} out of range for {len(children)} children"
            )
        if weights:
            if k != 1:
                raise ConstraintError("pick() weights are only supported when one child is selected")
            if min(weights) <= 0.0:
                raise ConstraintError("pick() weights must be positive")
            if abs(sum(weights) - 1.0) > 1e-9:
                raise ConstraintError(f"pick() weights must sum to 1, got {sum(weights)}")
        return Pick(tuple(children), tuple(weights) if weights else None, k)


def _validate_parts(node, parent) -> None:
    if isinstance(node, Part):
        if not isinstance(parent, (And, Or)):
            where = "the root" if parent is None else type(parent).__name__.lower()
            raise ConstraintError(
                f"part() is only meaningful directly beneath and() or or(), not at {where}"
            )
        _validate_parts(node.child, node)
    elif isinstance(node, (And, Or, Pick)):
        for child in node.children:
            _validate_parts(child, node)


def parse(text: str):
    """Parse a set-up expression; raises SetupSyntaxError with a position."""
    parser = _Parser(text)
    expr = parser.parse_expr()
    kind, value, start = parser.peek()
    if kind is not None:
        parser.error(f"unexpected trailing input {value!r}", start)
    _validate_parts(expr, None)
    return expr


def to_text(node) -> str:
    """Canonical textual form; parse(to_text(e)) reproduces e structurally."""
    if isinstance(node, SkillRef):
        return node.skill
    if isinstance(node, Part):
        return f"part({to_text(node.child)}, {node.p!r})"
    if isinstance(node, And):
        return "and(" + ", ".join(to_text(c) for c in node.children) + ")"
    if isinstance(node, Or):
        return "or(" + ", ".join(to_text(c) for c in node.children) + ")"
    if isinstance(node, Pick):
        if node.weights:
            inner = ", ".join(
                f"{to_text(c)}:{w!r}" for c, w in zip(node.children, node.weights)
            )
            return f"pick({inner})"
        prefix = f"{node.k}, " if node.k != 1 else ""
        return f"pick({prefix}" + ", ".join(to_text(c) for c in node.children) + ")"
    raise TypeError(f"not a set-up node: {node!r}")


def _compile_operand(child, parent) -> ProbPolynomial:
    """Compile a direct child, folding in part() semantics of the parent."""
    if isinstance(child, Part):
        inner = compile_setup(child.child)
        if isinstance(parent, And):
            # Only a p-fraction of the exercise needs this sub-skill:
            # success probability 1 - p*(1 - inner).
            return one_minus(one_minus(inner).scaled(child.p))
        return inner.scaled(child.p)
    return compile_setup(child)


def compile_setup(expr) -> ProbPolynomial:
    """Reduce a set-up tree to its success-probability polynomial."""
    if isinstance(expr, SkillRef):
        return ProbPolynomial.variable(expr.skill)
    if isinstance(expr, And):
        out = ProbPolynomial.constant(1.0)
        for child in expr.children:
            out = out * _compile_operand(child, expr)
        return out
    if isinstance(expr, Or):
        fail = ProbPolynomial.constant(1.0)
        for child in expr.children:
            fail = fail * one_minus(_compile_operand(child, expr))
        return one_minus(fail)
    if isinstance(expr, Pick):
        polys = [compile_setup(c) for c in expr.children]
        if expr.k == 1:
            weights = expr.weights or [1.0 / len(polys)] * len(polys)
            out = ProbPolynomial.constant(0.0)
            for poly, w in zip(polys, weights):
                out = out + poly.scaled(w)
            return out
        combos = list(combinations(polys, expr.k))
        out = ProbPolynomial.constant(0.0)
        for combo in combos:
            prod = ProbPolynomial.constant(1.0)
            for poly in combo:
                prod = prod * poly
            out = out + prod
        return out.scaled(1.0 / len(combos))
    if isinstance(expr, Part):
        raise ConstraintError("part() is only meaningful directly beneath and() or or()")
    raise TypeError(f"not a set-up node: {expr!r}")


def evaluate(poly: ProbPolynomial, assignment: Mapping[str, float]) -> float:
    missing = poly.variables - set(assignment)
    if missing:
        raise MissingVariableError(f"no value for skill(s): {sorted(missing)}")
    total = 0.0
    for mono, coef in poly.terms.items():
        term = coef
        for skill, exp in mono:
            term *= assignment[skill] ** exp
        total += term
    return total


def expected_value(poly: ProbPolynomial,
                   dists: Mapping[str, BasisCoefficients]) -> float:
    """E[poly] when the skills are independent with the given distributions."""
    missing = poly.variables - set(dists)
    if missing:
        raise MissingSkillDistributionError(f"no distribution for skill(s): {sorted(missing)}")
    tables = {s: basis.moment_table(dists[s], poly.degree(s)) for s in poly.variables}
    total = 0.0
    for mono, coef in poly.terms.items():
        term = coef
        for skill, exp in mono:
            term *= tables[skill][exp]
        total += term
    return total
