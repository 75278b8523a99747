"""Safe-PCTL formulas with bounded until: AST, parser, printer and semantics.

Surface syntax::

    formula := or
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := "!" unary | primary
    primary := "true" | ATOM | "(" formula ")" | prob
    prob    := "P" ("<=" | "<") NUMBER "[" formula "U" "<=" INT formula "]"
    ATOM    := '"' chars '"'
    NUMBER  := decimal | INT "/" INT

Atomic propositions are case-sensitive quoted strings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, List, Union

from .errors import FormulaSyntaxError, UnsupportedFragment
from .models import Path


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    operand: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Prob:
    comparison: str
    threshold: Fraction
    left: "Formula"
    horizon: int
    right: "Formula"


Formula = Union[TrueF, Atom, Not, And, Or, Prob]


@dataclass(frozen=True)
class BoundedUntilSpec:
    """``P<=p [ phi1 U<=k phi2 ]`` (or ``P<p``) with propositional operands."""

    comparison: str
    threshold: Fraction
    horizon: int
    phi1: Formula
    phi2: Formula

    def __post_init__(self):
        if self.comparison not in ("<=", "<"):
            raise UnsupportedFragment(f"comparison {self.comparison!r} is not an upper bound")
        if not 0 <= self.threshold <= 1:
            raise ValueError("threshold must lie in [0, 1]")
        if self.horizon < 0:
            raise ValueError("horizon must be a natural number")
        if not (is_propositional(self.phi1) and is_propositional(self.phi2)):
            raise UnsupportedFragment("nested probabilistic operators are not checkable")

    def holds(self, value: Fraction) -> bool:
        if self.comparison == "<=":
            return value <= self.threshold
        return value < self.threshold

    def violated_by(self, value: Fraction) -> bool:
        return not self.holds(value)

    def as_formula(self) -> Prob:
        return Prob(self.comparison, self.threshold, self.phi1, self.horizon, self.phi2)

    def __str__(self):
        return pretty(self.as_formula())


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<string>"[^"]*")
      | (?P<number>\d+/\d+|\d+(?:\.\d*)?|\.\d+)
      | (?P<op><=|>=|<|>|&|\||!|\[|\]|\(|\))
      | (?P<word>[A-Za-z_][A-Za-z_0-9]*)
    )""",
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> List[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind, text=None):
        tok = self.cur
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            got = tok.text or "end of input"
            raise FormulaSyntaxError(f"expected {want!r}, found {got!r}", tok.pos)
        return self.take()

    def formula(self):
        node = self.conj()
        while self.cur.kind == "op" and self.cur.text == "|":
            self.take()
            node = Or(node, self.conj())
        return node

    def conj(self):
        node = self.unary()
        while self.cur.kind == "op" and self.cur.text == "&":
            self.take()
            node = And(node, self.unary())
        return node

    def unary(self):
        if self.cur.kind == "op" and self.cur.text == "!":
            self.take()
            return Not(self.unary())
        return self.primary()

    def primary(self):
        tok = self.cur
        if tok.kind == "string":
            self.take()
            return Atom(tok.text[1:-1])
        if tok.kind == "op" and tok.text == "(":
            self.take()
            node = self.formula()
            self.expect("op", ")")
            return node
        if tok.kind == "word":
            if tok.text == "true":
                self.take()
                return TrueF()
            if tok.text == "P":
                return self.prob()
            if tok.text == "X":
                raise UnsupportedFragment("the next operator X is not supported")
            raise FormulaSyntaxError(f"unexpected word {tok.text!r} (atoms must be quoted)", tok.pos)
        raise FormulaSyntaxError(f"unexpected {tok.text or 'end of input'!r}", tok.pos)

    def prob(self):
        self.take()
        cmp_tok = self.cur
        if cmp_tok.kind != "op" or cmp_tok.text not in ("<=", "<", ">=", ">"):
            raise FormulaSyntaxError("expected a comparison after P", cmp_tok.pos)
        self.take()
        if cmp_tok.text in (">=", ">"):
            raise UnsupportedFragment(f"lower bound P{cmp_tok.text} is outside the safety fragment")
        num = self.expect("number")
        threshold = Fraction(num.text)
        if threshold > 1:
            raise FormulaSyntaxError("probability threshold exceeds 1", num.pos)
        self.expect("op", "[")
        left = self.formula()
        u = self.expect("word", "U")
        if not (self.cur.kind == "op" and self.cur.text == "<="):
            raise UnsupportedFragment(f"unbounded until at position {u.pos} is not supported")
        self.take()
        k = self.expect("number")
        if not k.text.isdigit():
            raise FormulaSyntaxError("horizon must be a natural number", k.pos)
        right = self.formula()
        self.expect("op", "]")
        return Prob(cmp_tok.text, threshold, left, int(k.text), right)


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    node = p.formula()
    if p.cur.kind != "end":
        raise FormulaSyntaxError(f"trailing input {p.cur.text!r}", p.cur.pos)
    _check_safe(node)
    return node


def _check_safe(node, live=False):
    # safe level: P allowed, negation only over propositional formulas;
    # live level (inside P operands): negation may also wrap a P operator
    if isinstance(node, (TrueF, Atom)):
        return
    if isinstance(node, (And, Or)):
        _check_safe(node.left, live)
        _check_safe(node.right, live)
        return
    if isinstance(node, Not):
        if is_propositional(node.operand):
            return
        if live and isinstance(node.operand, Prob):
            _check_safe(node.operand.left, True)
            _check_safe(node.operand.right, True)
            return
        raise UnsupportedFragment("negation over a probabilistic operator leaves the safety fragment")
    if isinstance(node, Prob):
        if live:
            raise UnsupportedFragment("a bare probabilistic operator inside an until operand is not safe")
        _check_safe(node.left, True)
        _check_safe(node.right, True)
        return
    raise TypeError(node)


def is_propositional(node) -> bool:
    if isinstance(node, (TrueF, Atom)):
        return True
    if isinstance(node, Not):
        return is_propositional(node.operand)
    if isinstance(node, (And, Or)):
        return is_propositional(node.left) and is_propositional(node.right)
    return False


def as_bounded_until(node: Formula) -> BoundedUntilSpec:
    if not isinstance(node, Prob):
        raise UnsupportedFragment("expected a single outermost P operator")
    return BoundedUntilSpec(node.comparison, node.threshold, node.horizon, node.left, node.right)


def parse_spec(text: str) -> BoundedUntilSpec:
    return as_bounded_until(parse_formula(text))


_PREC = {Or: 1, And: 2}


def _fmt_threshold(p: Fraction) -> str:
    d = p.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d != 1:
        return f"{p.numerator}/{p.denominator}"
    from decimal import Decimal

    text = format(Decimal(p.numerator) / Decimal(p.denominator), "f")
    return text.rstrip("0").rstrip(".") if "." in text else text


def pretty(node: Formula) -> str:
    if isinstance(node, TrueF):
        return "true"
    if isinstance(node, Atom):
        return f'"{node.name}"'
    if isinstance(node, Not):
        inner = pretty(node.operand)
        return f"!({inner})" if isinstance(node.operand, (And, Or)) else f"!{inner}"
    if isinstance(node, (And, Or)):
        prec = _PREC[type(node)]
        op = "&" if isinstance(node, And) else "|"
        left, right = pretty(node.left), pretty(node.right)
        if _PREC.get(type(node.left), 9) < prec:
            left = f"({left})"
        if _PREC.get(type(node.right), 9) <= prec:
            right = f"({right})"
        return f"{left} {op} {right}"
    if isinstance(node, Prob):
        return (
            f"P{node.comparison}{_fmt_threshold(node.threshold)} "
            f"[ {pretty(node.left)} U<={node.horizon} {pretty(node.right)} ]"
        )
    raise TypeError(node)


def holds_in(labels: FrozenSet[str], node: Formula) -> bool:
    if isinstance(node, TrueF):
        return True
    if isinstance(node, Atom):
        return node.name in labels
    if isinstance(node, Not):
        return not holds_in(labels, node.operand)
    if isinstance(node, And):
        return holds_in(labels, node.left) and holds_in(labels, node.right)
    if isinstance(node, Or):
        return holds_in(labels, node.left) or holds_in(labels, node.right)
    raise UnsupportedFragment("probabilistic operators have no label-only semantics")


def satisfying_states(system, phi: Formula) -> FrozenSet[str]:
    if not is_propositional(phi):
        raise UnsupportedFragment("satisfying_states needs a propositional formula")
    return frozenset(s for s in system.states if holds_in(system.labels.get(s, frozenset()), phi))


def path_satisfies(system, path: Path, spec: BoundedUntilSpec) -> bool:
    for i in range(min(spec.horizon, path.length) + 1):
        labels = system.labels.get(path.states[i], frozenset())
        if holds_in(labels, spec.phi2):
            return True
        if not holds_in(labels, spec.phi1):
            return False
    return False
