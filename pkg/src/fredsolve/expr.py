"""Tiny arithmetic-expression parser for CLI inputs.

Grammar: +, -, *, /, unary minus, parentheses, sin, cos, exp, the variable x,
and numeric literals.  Compiles to a numpy-vectorized callable.  Errors report
a 1-based column.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import ExprParseError

__all__ = ["compile_expr"]

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_]+)|([()+\-*/]))")
_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ExprParseError(f"unexpected character {text[pos]!r}", pos + 1)
            self.tokens.append((m.group(0).strip(), pos + 1))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def column(self):
        if self.i < len(self.tokens):
            return self.tokens[self.i][1]
        # exhausted: point at the token that left the expression open
        return self.tokens[-1][1] if self.tokens else 1

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.peek() is not None:
            raise ExprParseError(f"unexpected token {self.peek()!r}", self.column())
        return node

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op, _ = self.take()
            rhs = self.term()
            node = (lambda a, b: (lambda x: a(x) + b(x)))(node, rhs) if op == "+" \
                else (lambda a, b: (lambda x: a(x) - b(x)))(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek() in ("*", "/"):
            op, _ = self.take()
            rhs = self.factor()
            node = (lambda a, b: (lambda x: a(x) * b(x)))(node, rhs) if op == "*" \
                else (lambda a, b: (lambda x: a(x) / b(x)))(node, rhs)
        return node

    def factor(self):
        tok = self.peek()
        if tok == "-":
            self.take()
            inner = self.factor()
            return lambda x: -inner(x)
        if tok == "+":
            self.take()
            return self.factor()
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok is None:
            raise ExprParseError("unexpected end of expression", self.column())
        if tok == "(":
            _, col = self.take()
            node = self.expr()
            if self.peek() != ")":
                raise ExprParseError("unclosed parenthesis opened", col)
            self.take()
            return node
        if re.fullmatch(r"\d+\.\d*|\.\d+|\d+", tok):
            self.take()
            value = float(tok)
            return lambda x: value + 0.0 * np.asarray(x, dtype=float)
        if tok in _FUNCS:
            name, col = self.take()
            if self.peek() != "(":
                raise ExprParseError(f"{name} needs a parenthesized argument", self.column())
            _, pcol = self.take()
            node = self.expr()
            if self.peek() != ")":
                raise ExprParseError("unclosed parenthesis opened", pcol)
            self.take()
            fn = _FUNCS[name]
            return lambda x: fn(node(x))
        if tok == "x":
            self.take()
            return lambda x: np.asarray(x, dtype=float)
        _, col = self.take()
        raise ExprParseError(f"unknown name {tok!r}", col)


def compile_expr(text: str):
    """Compile an expression in x to a numpy-vectorized callable."""
    if not text or not text.strip():
        raise ExprParseError("empty expression", 1)
    return _Parser(text).parse()
