"""Concrete syntax: a small recursive-descent parser and a minimal printer.

    term  := abs | app
    abs   := ('\\' | 'λ') ident+ '.' term
    app   := atom* (atom | abs)
    atom  := (ident | '(' term ')') cut*
    cut   := '[' ident '/' term ']' | '[' ident '//' term ']'

Cuts bind tighter than application, so ``t u[x/s]`` is ``t (u[x/s])``, and an
abstraction body extends as far right as possible.  The identifier ``I`` is
read as the identity ``\\x.x`` unless ``macros`` says otherwise.
"""

from __future__ import annotations

import re

from .errors import ParseError
from .term_core import Abs, App, Dist, Sub, Var

IDENTITY = Abs("x", Var("x"))
DEFAULT_MACROS = {"I": IDENTITY}

_SUBSCRIPTS = str.maketrans("₀₁₂₃₄₅₆₇₈₉", "0123456789")
_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<lam>\\|λ)|(?P<dslash>//)|(?P<slash>/)|(?P<dot>\.)"
    r"|(?P<lp>\()|(?P<rp>\))|(?P<lb>\[)|(?P<rb>\])"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_'₀-₉]*)"
)
_NAMES = {
    "lam": "'\\'", "dslash": "'//'", "slash": "'/'", "dot": "'.'", "lp": "'('",
    "rp": "')'", "lb": "'['", "rb": "']'", "ident": "identifier", "eof": "end of input",
}


def _tokenize(text):
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            if kind == "ident":
                value = value.translate(_SUBSCRIPTS)
            tokens.append((kind, value, line, col))
        for ch in m.group():
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos = m.end()
    tokens.append(("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text, macros):
        self.toks = _tokenize(text)
        self.i = 0
        self.macros = macros

    def peek(self):
        return self.toks[self.i]

    def take(self, *kinds):
        tok = self.toks[self.i]
        if tok[0] not in kinds:
            found = _NAMES[tok[0]] if tok[0] != "ident" else repr(tok[1])
            raise ParseError(
                f"unexpected {found}", tok[2], tok[3], [_NAMES[k] for k in kinds]
            )
        self.i += 1
        return tok

    def term(self):
        items = []
        while True:
            kind = self.peek()[0]
            if kind == "lam":
                items.append(self.abstraction())
                break
            if kind in ("ident", "lp"):
                items.append(self.atom())
                continue
            break
        if not items:
            self.take("lam", "ident", "lp")
        t = items[0]
        for a in items[1:]:
            t = App(t, a)
        return t

    def abstraction(self):
        self.take("lam")
        binders = [self.take("ident")[1]]
        while self.peek()[0] == "ident":
            binders.append(self.take("ident")[1])
        self.take("dot")
        body = self.term()
        for b in reversed(binders):
            body = Abs(b, body)
        return body

    def atom(self):
        tok = self.take("ident", "lp")
        if tok[0] == "ident":
            t = self.macros.get(tok[1], Var(tok[1]))
        else:
            t = self.term()
            self.take("rp")
        while self.peek()[0] == "lb":
            self.take("lb")
            name = self.take("ident")[1]
            sep = self.take("slash", "dslash")
            where = self.peek()
            content = self.term()
            self.take("rb")
            if sep[0] == "slash":
                t = Sub(t, name, content)
            else:
                if not isinstance(content, Abs):
                    raise ParseError(
                        "distributor content must be an abstraction",
                        where[2], where[3], ["'\\'"],
                    )
                t = Dist(t, name, content)
        return t


def parse(text: str, macros=None):
    """Parse ``text`` into a term; raises :class:`ParseError` on bad input."""
    p = _Parser(text, DEFAULT_MACROS if macros is None else macros)
    t = p.term()
    p.take("eof")
    return t


def show(t, unicode: bool = False) -> str:
    """Print ``t`` with the fewest parentheses that still parse back."""
    lam = "λ" if unicode else "\\"
    return _show(t, lam)


def _show(t, lam):
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Abs):
        return f"{lam}{t.binder}.{_show(t.body, lam)}"
    if isinstance(t, App):
        fun = _show(t.fun, lam)
        if isinstance(t.fun, Abs):
            fun = f"({fun})"
        arg = _show(t.arg, lam)
        if isinstance(t.arg, (App, Abs)):
            arg = f"({arg})"
        return f"{fun} {arg}"
    body = _show(t.body, lam)
    if isinstance(t.body, (App, Abs)):
        body = f"({body})"
    sep = "/" if isinstance(t, Sub) else "//"
    return f"{body}[{t.binder}{sep}{_show(t.content, lam)}]"
