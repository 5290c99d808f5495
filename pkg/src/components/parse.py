"""Text front end: tokenizer, recursive-descent parser and renderer."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from src.components.errors import ProblemSyntaxError, UnknownDomainName, UnsupportedTerm
from src.components.expr import (
    BinOp,
    Domain,
    Exponential,
    Factorial,
    Neg,
    Node,
    Num,
    Power,
    Problem,
    RawEquation,
    Var,
    clear_denominators,
)

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(
    r"""
    (?P<space>[ \t\r]+)
    |(?P<newline>\n)
    |(?P<int>\d+)
    |(?P<ident>[a-z][a-z0-9_]*)
    |(?P<name>[A-Z][A-Za-z0-9_]*)
    |(?P<op>[-+*/^!()=;,\[\]])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"and", "in"}
_DOMAINS = {"Z": Domain.integers(), "N": Domain.positive(), "N0": Domain.natural()}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ProblemSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        value = match.group()
        column = pos - line_start + 1
        if kind == "newline":
            tokens.append(Token("newline", value, line, column))
            line, line_start = line + 1, match.end()
        elif kind == "ident" and value in _KEYWORDS:
            tokens.append(Token(value, value, line, column))
        elif kind != "space":
            tokens.append(Token(value if kind == "op" else kind, value, line, column))
        pos = match.end()
    tokens.append(Token("eof", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def accept(self, kind: str) -> Token | None:
        if self.current.kind == kind:
            return self.advance()
        return None

    def expect(self, *kinds: str) -> Token:
        if self.current.kind in kinds:
            return self.advance()
        raise self.error(f"unexpected {self.describe()}", kinds)

    def error(self, message: str, expected=()) -> ProblemSyntaxError:
        token = self.current
        return ProblemSyntaxError(message, token.line, token.column, expected)

    def describe(self) -> str:
        token = self.current
        return "end of input" if token.kind == "eof" else f"{token.text!r}"

    def skip_newlines(self) -> None:
        while self.accept("newline"):
            pass

    # problem := system [';' domainlist]
    def problem(self) -> tuple[list[RawEquation], dict[str, Domain], set[str]]:
        self.skip_newlines()
        equations = [self.equation()]
        while True:
            if self.accept("and"):
                self.skip_newlines()
                equations.append(self.equation())
            elif self.current.kind == "newline":
                self.skip_newlines()
                if self.current.kind in ("eof", ";"):
                    break
                equations.append(self.equation())
            else:
                break
        domains: dict[str, Domain] = {}
        nonvanishing: set[str] = set()
        if self.accept(";"):
            self.skip_newlines()
            if self.current.kind != "eof":
                self.clause(domains, nonvanishing)
                self.skip_newlines()
                while self.accept(","):
                    self.skip_newlines()
                    self.clause(domains, nonvanishing)
                    self.skip_newlines()
        self.skip_newlines()
        if self.current.kind != "eof":
            raise self.error(f"unexpected {self.describe()}", ("and", ";", "end of input"))
        return equations, domains, nonvanishing

    def equation(self) -> RawEquation:
        lhs = self.expr()
        self.expect("=")
        return RawEquation(lhs, self.expr())

    def expr(self) -> Node:
        node = self.term()
        while self.current.kind in ("+", "-"):
            op = self.advance().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.current.kind in ("*", "/"):
            op = self.advance().kind
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        token = self.current
        if token.kind == "int":
            self.advance()
            value = int(token.text)
            if self.accept("^"):
                exponent = self.expect("ident", "int")
                if exponent.kind == "ident":
                    return Exponential(value, exponent.text)
                return Power(Num(value), int(exponent.text))
            return Num(value)
        if token.kind == "ident":
            self.advance()
            if self.current.kind == "!":
                self.advance()
                return Factorial(token.text)
            if self.accept("^"):
                exponent = self.expect("ident", "int")
                if exponent.kind == "ident":
                    raise UnsupportedTerm(f"{token.text}^{exponent.text}")
                return Power(Var(token.text), int(exponent.text))
            return Var(token.text)
        if token.kind == "(":
            self.advance()
            self.skip_newlines()
            inner = self.expr()
            self.skip_newlines()
            self.expect(")")
            if self.accept("^"):
                exponent = self.expect("ident", "int")
                if exponent.kind == "int":
                    return Power(inner, int(exponent.text))
                base = _constant(inner)
                if base is None:
                    raise UnsupportedTerm(f"non-constant base raised to {exponent.text}")
                return Exponential(base, exponent.text)
            return inner
        if token.kind == "-":
            self.advance()
            return Neg(self.factor())
        raise self.error(f"unexpected {self.describe()}", ("integer", "identifier", "(", "-"))

    def clause(self, domains: dict[str, Domain], nonvanishing: set[str]) -> None:
        names = [self.expect("ident").text]
        if self.current.kind in ("*", "!"):
            while self.accept("*"):
                names.append(self.expect("ident").text)
            self.expect("!")
            self.expect("=")
            zero = self.current
            if self.expect("int").text != "0":
                raise ProblemSyntaxError("product constraint must compare with 0", zero.line, zero.column, ("0",))
            nonvanishing.update(names)
            return
        while self.accept(","):
            names.append(self.expect("ident").text)
        self.expect("in")
        domain = self.domain()
        for name in names:
            if name in domains and domains[name] != domain:
                raise self.error(f"conflicting domains for {name}")
            domains[name] = domain

    def domain(self) -> Domain:
        token = self.current
        if token.kind == "name":
            self.advance()
            if token.text not in _DOMAINS:
                raise UnknownDomainName(f"{token.line}:{token.column}: unknown domain {token.text!r}")
            return _DOMAINS[token.text]
        if token.kind == "[":
            self.advance()
            lo = self.signed_int()
            self.expect(",")
            hi = self.signed_int()
            self.expect("]")
            if lo > hi:
                raise ProblemSyntaxError(f"empty interval [{lo},{hi}]", token.line, token.column)
            return Domain.interval(lo, hi)
        if token.kind == "ident":
            raise UnknownDomainName(f"{token.line}:{token.column}: unknown domain {token.text!r}")
        raise self.error(f"unexpected {self.describe()}", ("Z", "N", "N0", "["))

    def signed_int(self) -> int:
        sign = -1 if self.accept("-") else 1
        return sign * int(self.expect("int").text)


def _constant(node: Node) -> int | None:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg):
        inner = _constant(node.operand)
        return None if inner is None else -inner
    return None


def _mentioned(node: Node) -> set[str]:
    """Variable names written in ``node``, including any that cancel out."""
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Exponential, Factorial)):
        return {node.variable}
    if isinstance(node, (Power, Neg)):
        return _mentioned(node.operand)
    if isinstance(node, BinOp):
        return _mentioned(node.left) | _mentioned(node.right)
    return set()


def parse_problem(text: str) -> Problem:
    """Parse problem text into a normalized ``Problem``."""
    try:
        raw_equations, declared, nonvanishing = _Parser(text).problem()
        written = set().union(*(_mentioned(raw.lhs) | _mentioned(raw.rhs) for raw in raw_equations))
        equations = []
        for raw in raw_equations:
            eq, cleared = clear_denominators(raw)
            nonvanishing |= cleared
            equations.append(eq)
    except RecursionError:
        raise ProblemSyntaxError("expression nested too deeply", 1, 1) from None
    domains = dict(declared)
    for var in written | nonvanishing:
        domains.setdefault(var, Domain.integers())
    constraints = (frozenset(nonvanishing),) if nonvanishing else ()
    problem = Problem(tuple(equations), dict(sorted(domains.items())), constraints)
    logger.debug("parsed %s", problem.render())
    return problem


def render(problem: Problem) -> str:
    return problem.render()
