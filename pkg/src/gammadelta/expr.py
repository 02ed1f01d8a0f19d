"""A small recursive-descent parser for ring expressions.

Grammar::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' INT)?
    atom    := NUMBER | IDENT | call | '(' expr ')'
    call    := 'g_' INT '(' expr ')'          divided power
             | ('d' | 'phi') ('^' INT)? '(' expr ')'

Numbers are integers or ``a/b`` handled by the division operator.  The
parser builds a tiny tuple AST; :func:`evaluate` maps it into a ring.
"""

from __future__ import annotations

import re
from fractions import Fraction

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.pos = pos
        self.text = text


def tokenize(text: str):
    pos = 0
    out = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], self.text)

    def expect(self, value):
        t = self.peek()
        if t[1] != value or t[0] == "end":
            self.error(f"expected {value!r}")
        return self.next()

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.error("unexpected token")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.next()[1]
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            tok = self.next()
            rhs = self.unary()
            node = ("mul", node, rhs) if tok[1] == "*" else ("div", node, rhs, tok[2])
        return node

    def unary(self):
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.next()
            return ("neg", self.unary())
        return self.power()

    def integer(self):
        t = self.peek()
        if t[0] != "num":
            self.error("expected an integer")
        return int(self.next()[1])

    def power(self):
        node = self.atom()
        if self.peek()[1] == "^":
            self.next()
            node = ("pow", node, self.integer())
        return node

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.next()
            return ("num", Fraction(int(val)))
        if kind == "op" and val == "(":
            self.next()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "ident":
            m = re.fullmatch(r"g_(\d+)", val)
            if m and self.peek(1)[1] == "(":
                self.next()
                return ("gamma", int(m.group(1)), self._arg())
            if val in ("d", "phi"):
                # d(..), d^k(..); a bare d or d^k not followed by '(' is a variable
                if self.peek(1)[1] == "(":
                    self.next()
                    return (val, 1, self._arg())
                if self.peek(1)[1] == "^" and self.peek(2)[0] == "num" and self.peek(3)[1] == "(":
                    self.next()
                    self.next()
                    k = self.integer()
                    return (val, k, self._arg())
            self.next()
            return ("var", val)
        self.error("expected a number, variable or '('")

    def _arg(self):
        self.expect("(")
        node = self.expr()
        self.expect(")")
        return node


def parse(text: str):
    """Parse ``text`` into a tuple AST; raises :class:`ParseError`."""
    if not text.strip():
        raise ParseError("empty expression", 0, text)
    return _Parser(text).parse()


def variables(node) -> list:
    """Variable names in first-occurrence order."""
    out = []

    def walk(n):
        if n[0] == "var":
            if n[1] not in out:
                out.append(n[1])
        elif n[0] == "num":
            pass
        elif n[0] in ("gamma", "d", "phi"):
            walk(n[2])
        elif n[0] == "pow":
            walk(n[1])
        else:
            for c in n[1:]:
                if isinstance(c, tuple):
                    walk(c)

    walk(node)
    return out


def uses(node, kind: str) -> bool:
    if node[0] == kind:
        return True
    return any(isinstance(c, tuple) and uses(c, kind) for c in node[1:])


def evaluate(node, ring, var=None, gamma=None, delta=None, phi=None):
    """Evaluate the AST in ``ring``.

    ``var(name)`` builds variables (default ``ring.var``); ``gamma(n, f)``,
    ``delta(f, k)`` and ``phi(f, k)`` implement the function forms.  A form
    without an implementation raises ``ValueError``.
    """
    var = var or ring.var

    def ev(n):
        tag = n[0]
        if tag == "num":
            return ring.scalar(n[1])
        if tag == "var":
            return var(n[1])
        if tag == "add":
            return ev(n[1]) + ev(n[2])
        if tag == "sub":
            return ev(n[1]) - ev(n[2])
        if tag == "mul":
            return ev(n[1]) * ev(n[2])
        if tag == "neg":
            return -ev(n[1])
        if tag == "div":
            den = ev(n[2])
            if not den.is_scalar() or not den:
                raise ValueError("can only divide by a nonzero scalar")
            return ev(n[1]) / den.as_scalar()
        if tag == "pow":
            return ev(n[1]) ** n[2]
        if tag == "gamma":
            if gamma is None:
                raise ValueError("divided powers g_n(...) are not available here")
            return gamma(n[1], ev(n[2]))
        if tag == "d":
            if delta is None:
                raise ValueError("d(...) is not available here")
            return delta(ev(n[2]), n[1])
        if tag == "phi":
            if phi is None:
                raise ValueError("phi(...) is not available here")
            return phi(ev(n[2]), n[1])
        raise AssertionError(tag)

    return ev(node)
