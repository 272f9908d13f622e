"""Levels of variables, the cuts-level measure and its multiset order."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .term_core import Abs, App, Sub, Var, free_vars, size


def level(t, z: str) -> int:
    """Depth of the free occurrences of ``z``, counted across chained substitutions."""
    if isinstance(t, Var):
        return 0
    if isinstance(t, App):
        return max(level(t.fun, z), level(t.arg, z))
    if isinstance(t, Abs):
        return 0 if t.binder == z else level(t.body, z)
    inner = 0 if t.binder == z else level(t.body, z)
    if z not in free_vars(t.content):
        return inner
    es = 1 if isinstance(t, Sub) else 0
    return max(inner, level(t.body, t.binder) + level(t.content, z) + es)


@dataclass(frozen=True, order=True)
class A:
    k: int
    n: int

    def __str__(self):
        return f"a({self.k},{self.n})"


@dataclass(frozen=True, order=True)
class B:
    k: int

    def __str__(self):
        return f"b({self.k})"


OObject = A | B


def o_greater(x, y) -> bool:
    """The strict object order ``x > y``."""
    if isinstance(x, A) and isinstance(y, A):
        return x.k > y.k or (x.k == y.k and x.n > y.n)
    if isinstance(x, A):
        return x.k > y.k
    if isinstance(y, A):
        return x.k >= y.k
    return x.k > y.k


def o_less(x, y) -> bool:
    return o_greater(y, x)


def mul_greater(m1, m2) -> bool:
    """Multiset extension: ``m1 > m2``.

    After cancelling the common part, ``m1`` must keep something and every
    leftover element of ``m2`` must be dominated by a leftover of ``m1``.
    """
    m1, m2 = Counter(m1), Counter(m2)
    x = m1 - m2
    y = m2 - m1
    if not x:
        return False
    return all(any(o_greater(a, b) for a in x) for b in y)


def mul_less(m1, m2) -> bool:
    return mul_greater(m2, m1)


def mul_geq(m1, m2) -> bool:
    return Counter(m1) == Counter(m2) or mul_greater(m1, m2)


def shift(k: int, m: Counter) -> Counter:
    """Add ``k`` to the level of every object."""
    out = Counter()
    for o, c in m.items():
        out[A(o.k + k, o.n) if isinstance(o, A) else B(o.k + k)] += c
    return out


def cl_measure(t) -> Counter:
    """The cuts-level measure, a multiset of objects."""
    if isinstance(t, Var):
        return Counter()
    if isinstance(t, Abs):
        return cl_measure(t.body)
    if isinstance(t, App):
        return cl_measure(t.fun) + cl_measure(t.arg)
    k = level(t.body, t.binder)
    out = cl_measure(t.body)
    if isinstance(t, Sub):
        out += shift(k + 1, cl_measure(t.content))
        out[A(k + 1, size(t.content))] += 1
    else:
        out += shift(k, cl_measure(t.content))
        out[B(k)] += 1
    return out


def show_measure(m) -> str:
    items = sorted(Counter(m).elements(), key=lambda o: (isinstance(o, B), o.k, getattr(o, "n", 0)))
    return "[" + ", ".join(str(o) for o in items) + "]"
