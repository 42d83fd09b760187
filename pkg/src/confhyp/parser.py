"""Recursive-descent parser for exact scalar expressions.

Grammar (ASCII, whitespace insignificant):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' INT)?
    atom   := INT | IDENT | '(' expr ')'

Integer literals are exact; rationals are written 'p/q'; identifiers must
be chart coordinates.  The canonical printer emits fully parenthesized
normal form, and parse . print . parse is the identity.
"""

from __future__ import annotations

from .expr import Chart, ScalarExpr


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnknownIdentifierError(ParseError):
    pass


_OPS = set("+-*/^()")


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, chart: Chart):
        self.tokens = _tokenize(text)
        self.chart = chart
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind: str):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> ScalarExpr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"trailing input {tok[1]!r}", tok[2])
        return e

    def expr(self) -> ScalarExpr:
        e = self.term()
        while self.peek()[0] in "+-":
            op = self.advance()[0]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> ScalarExpr:
        e = self.unary()
        while self.peek()[0] in "*/":
            op, _, pos = self.advance()
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", pos)
                e = e / rhs
        return e

    def unary(self) -> ScalarExpr:
        if self.peek()[0] == "-":
            self.advance()
            return -self.unary()
        return self.power()

    def power(self) -> ScalarExpr:
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            tok = self.advance()
            if tok[0] != "int":
                raise ParseError("exponent must be a nonnegative integer literal", tok[2])
            return base ** int(tok[1])
        return base

    def atom(self) -> ScalarExpr:
        kind, text, pos = self.advance()
        if kind == "int":
            return self.chart.const(int(text))
        if kind == "ident":
            if text not in self.chart.coords:
                raise UnknownIdentifierError(f"unknown identifier {text!r}", pos)
            return self.chart.coord(text)
        if kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected token {text!r}", pos)


def parse_expr(text: str, chart: Chart) -> ScalarExpr:
    """Parse an expression in the chart's coordinates."""
    return _Parser(text, chart).parse()


def print_expr(e: ScalarExpr) -> str:
    """Canonical fully parenthesized form; reparses to an equal value."""
    if not e.coeffs:
        return "0"
    r = e.chart.radial
    parts = []
    for exp in sorted(e.coeffs):
        c = e.coeffs[exp]
        cs = str(c)
        if exp == 0:
            parts.append(cs)
        elif exp > 0:
            parts.append(f"({cs}*{r}^{exp})")
        else:
            parts.append(f"({cs}/{r}^{-exp})")
    return " + ".join(parts)
