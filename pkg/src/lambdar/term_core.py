"""Terms of the node replication calculus, paths, fresh names and grammars.

Terms are immutable.  A cut is either an explicit substitution ``Sub`` or an
explicit distributor ``Dist``; the content of a distributor is always an
abstraction.  Structural equality (``==``) is syntactic; use :func:`alpha_eq`
to compare terms up to renaming of bound variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .errors import CaptureError


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Abs:
    binder: str
    body: "Term"


@dataclass(frozen=True, slots=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True, slots=True)
class Sub:
    body: "Term"
    binder: str
    content: "Term"


@dataclass(frozen=True, slots=True)
class Dist:
    body: "Term"
    binder: str
    content: "Term"

    def __post_init__(self):
        if not isinstance(self.content, Abs):
            raise TypeError("distributor content must be an abstraction")


Term = Var | Abs | App | Sub | Dist
CUTS = (Sub, Dist)


def is_cut(t) -> bool:
    return isinstance(t, CUTS)


def es_flag(t) -> int:
    """1 for an explicit substitution, 0 for a distributor."""
    return 1 if isinstance(t, Sub) else 0


# ---------------------------------------------------------------------------
# paths


class Sel(str, Enum):
    ABS_BODY = "AbsBody"
    APP_FUN = "AppFun"
    APP_ARG = "AppArg"
    CUT_BODY = "CutBody"
    CUT_CONTENT = "CutContent"


Path = tuple


def children(t) -> list:
    if isinstance(t, Abs):
        return [(Sel.ABS_BODY, t.body)]
    if isinstance(t, App):
        return [(Sel.APP_FUN, t.fun), (Sel.APP_ARG, t.arg)]
    if isinstance(t, CUTS):
        return [(Sel.CUT_BODY, t.body), (Sel.CUT_CONTENT, t.content)]
    return []


def subterm(t, path) -> Term:
    for sel in path:
        t = _child(t, sel)
    return t


def _child(t, sel):
    if sel is Sel.ABS_BODY and isinstance(t, Abs):
        return t.body
    if sel is Sel.APP_FUN and isinstance(t, App):
        return t.fun
    if sel is Sel.APP_ARG and isinstance(t, App):
        return t.arg
    if sel is Sel.CUT_BODY and isinstance(t, CUTS):
        return t.body
    if sel is Sel.CUT_CONTENT and isinstance(t, CUTS):
        return t.content
    raise ValueError(f"selector {sel.value} does not apply to {type(t).__name__}")


def replace_at(t, path, new) -> Term:
    """Replace the subterm at ``path`` by ``new``; capture is allowed."""
    spine = []
    for sel in path:
        spine.append((t, sel))
        t = _child(t, sel)
    for parent, sel in reversed(spine):
        if sel is Sel.ABS_BODY:
            new = Abs(parent.binder, new)
        elif sel is Sel.APP_FUN:
            new = App(new, parent.arg)
        elif sel is Sel.APP_ARG:
            new = App(parent.fun, new)
        elif sel is Sel.CUT_BODY:
            new = type(parent)(new, parent.binder, parent.content)
        else:
            new = type(parent)(parent.body, parent.binder, new)
    return new


def binders_above(t, path) -> list:
    """Names bound by the constructors crossed when following ``path``."""
    out = []
    for sel in path:
        if sel is Sel.ABS_BODY:
            out.append(t.binder)
        elif sel is Sel.CUT_BODY:
            out.append(t.binder)
        t = _child(t, sel)
    return out


def iter_paths(t, prefix=()) -> Iterator:
    """Preorder enumeration of ``(path, subterm)`` pairs."""
    yield prefix, t
    for sel, c in children(t):
        yield from iter_paths(c, prefix + (sel,))


def plug(ctx, filler, capture_free=True) -> Term:
    """Fill the hole of the context ``ctx = (term, path)``.

    With ``capture_free`` the plugging is refused when a binder crossed by the
    path would capture a free variable of ``filler``.
    """
    t, path = ctx
    if capture_free:
        clash = set(binders_above(t, path)) & free_vars(filler)
        if clash:
            raise CaptureError(f"plugging would capture {sorted(clash)}")
    return replace_at(t, path, filler)


# ---------------------------------------------------------------------------
# variables


def free_vars(t) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Abs):
        return free_vars(t.body) - {t.binder}
    if isinstance(t, App):
        return free_vars(t.fun) | free_vars(t.arg)
    return (free_vars(t.body) - {t.binder}) | free_vars(t.content)


def all_names(t) -> set:
    """Every variable name occurring in ``t``, bound or free."""
    out = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            out.add(s.name)
        elif isinstance(s, Abs):
            out.add(s.binder)
            stack.append(s.body)
        elif isinstance(s, App):
            stack.extend((s.fun, s.arg))
        else:
            out.add(s.binder)
            stack.extend((s.body, s.content))
    return out


def occ_count(t, x) -> int:
    """Number of free occurrences of ``x`` in ``t``."""
    if isinstance(t, Var):
        return 1 if t.name == x else 0
    if isinstance(t, Abs):
        return 0 if t.binder == x else occ_count(t.body, x)
    if isinstance(t, App):
        return occ_count(t.fun, x) + occ_count(t.arg, x)
    inner = 0 if t.binder == x else occ_count(t.body, x)
    return inner + occ_count(t.content, x)


def size(t) -> int:
    """Number of constructors, cuts included."""
    if isinstance(t, Var):
        return 1
    if isinstance(t, Abs):
        return 1 + size(t.body)
    if isinstance(t, App):
        return 1 + size(t.fun) + size(t.arg)
    return 1 + size(t.body) + size(t.content)


def is_pure(t) -> bool:
    if isinstance(t, Var):
        return True
    if isinstance(t, Abs):
        return is_pure(t.body)
    if isinstance(t, App):
        return is_pure(t.fun) and is_pure(t.arg)
    return False


@dataclass
class FreshSupply:
    """Deterministic source of fresh names.

    Names are built from a stem and an increasing numeric suffix.  A drawn
    name differs from everything in the avoid-set and from every name drawn
    before.
    """

    avoid_set: set = field(default_factory=set)
    counters: dict = field(default_factory=dict)

    def avoid(self, names) -> None:
        self.avoid_set.update(names)

    def fresh(self, base="x", avoid=()) -> str:
        stem = base.rstrip("0123456789'_") or "x"
        n = self.counters.get(stem, 0)
        while True:
            n += 1
            name = f"{stem}{n}"
            if name not in self.avoid_set and name not in avoid:
                break
        self.counters[stem] = n
        self.avoid_set.add(name)
        return name

    def copy(self) -> "FreshSupply":
        return FreshSupply(set(self.avoid_set), dict(self.counters))


def subst_meta(t, x, u, supply: FreshSupply) -> Term:
    """Capture-avoiding meta-level substitution ``t{x/u}``."""
    fu = free_vars(u)
    supply.avoid(fu)
    return _subst(t, x, u, fu, supply)


def _subst(t, x, u, fu, supply):
    if isinstance(t, Var):
        return u if t.name == x else t
    if isinstance(t, App):
        return App(_subst(t.fun, x, u, fu, supply), _subst(t.arg, x, u, fu, supply))
    if isinstance(t, Abs):
        y, body = _under_binder(t.binder, t.body, x, u, fu, supply)
        return t if body is None else Abs(y, body)
    content = _subst(t.content, x, u, fu, supply)
    y, body = _under_binder(t.binder, t.body, x, u, fu, supply)
    if body is None:
        body = t.body
    return type(t)(body, y, content)


def _under_binder(y, body, x, u, fu, supply):
    if y == x or x not in free_vars(body):
        return y, None
    if y in fu:
        supply.avoid(all_names(body))
        y2 = supply.fresh(y, avoid=fu | {x})
        body = _subst(body, y, Var(y2), frozenset((y2,)), supply)
        y = y2
    return y, _subst(body, x, u, fu, supply)


def rename_free(t, old, new, supply: FreshSupply) -> Term:
    """Rename the free occurrences of ``old`` into ``new``."""
    return subst_meta(t, old, Var(new), supply)


# ---------------------------------------------------------------------------
# alpha equivalence


def alpha_eq(t, u) -> bool:
    """Alpha-equivalence by simultaneous traversal with binder maps."""
    return _aeq(t, u, {}, {}, 0)


def _aeq(t, u, m1, m2, depth):
    if type(t) is not type(u):
        return False
    if isinstance(t, Var):
        i, j = m1.get(t.name), m2.get(u.name)
        if i is None and j is None:
            return t.name == u.name
        return i == j
    if isinstance(t, Abs):
        return _aeq(t.body, u.body, {**m1, t.binder: depth}, {**m2, u.binder: depth}, depth + 1)
    if isinstance(t, App):
        return _aeq(t.fun, u.fun, m1, m2, depth) and _aeq(t.arg, u.arg, m1, m2, depth)
    return _aeq(t.content, u.content, m1, m2, depth) and _aeq(
        t.body, u.body, {**m1, t.binder: depth}, {**m2, u.binder: depth}, depth + 1
    )


def alpha_key(t, env=None, depth=0):
    """A hashable nameless key; two terms share a key iff they are alpha-equal."""
    env = env or {}
    if isinstance(t, Var):
        i = env.get(t.name)
        return ("f", t.name) if i is None else ("b", depth - i)
    if isinstance(t, Abs):
        return ("l", alpha_key(t.body, {**env, t.binder: depth}, depth + 1))
    if isinstance(t, App):
        return ("a", alpha_key(t.fun, env, depth), alpha_key(t.arg, env, depth))
    tag = "s" if isinstance(t, Sub) else "d"
    return (
        tag,
        alpha_key(t.body, {**env, t.binder: depth}, depth + 1),
        alpha_key(t.content, env, depth),
    )


# ---------------------------------------------------------------------------
# list contexts


def peel_list(t):
    """Split ``t`` as ``L<inner>`` with ``inner`` not a cut.

    The cuts are returned inner-to-outer as ``(binder, content, kind)`` where
    ``kind`` is the class ``Sub`` or ``Dist``.
    """
    cuts = []
    while isinstance(t, CUTS):
        cuts.append((t.binder, t.content, type(t)))
        t = t.body
    cuts.reverse()
    return t, cuts


def wrap(inner, cuts) -> Term:
    """Inverse of :func:`peel_list`."""
    for binder, content, kind in cuts:
        inner = kind(inner, binder, content)
    return inner


def list_dom(cuts) -> set:
    return {b for b, _, _ in cuts}


def list_fv(cuts) -> set:
    """Free variables of the list context itself (its contents)."""
    out = set()
    for i, (_, content, _) in enumerate(cuts):
        outer = {b for b, _, _ in cuts[i + 1:]}
        out |= set(free_vars(content)) - outer
    return out


def rename_list_binders(inner, cuts, bad, supply: FreshSupply, keep=()):
    """Alpha-rename the binders of ``cuts`` that belong to ``bad``.

    The renaming is propagated to ``inner`` and to the contents that sit in
    the scope of the renamed binder.  Returns the new ``(inner, cuts)``.
    """
    if not any(b in bad for b, _, _ in cuts):
        return inner, cuts
    supply.avoid(all_names(wrap(inner, cuts)))
    supply.avoid(bad)
    supply.avoid(keep)
    term = inner
    new_cuts = []
    for b, content, kind in cuts:
        if b in bad:
            nb = supply.fresh(b)
            term = rename_free(wrap(term, new_cuts), b, nb, supply)
            term, new_cuts = _unwrap_n(term, len(new_cuts))
            b = nb
        new_cuts.append((b, content, kind))
    return term, new_cuts


def _unwrap_n(t, n):
    cuts = []
    for _ in range(n):
        cuts.append((t.binder, t.content, type(t)))
        t = t.body
    cuts.reverse()
    return t, cuts


# ---------------------------------------------------------------------------
# grammars


GRAMMARS = ("Pure", "U", "T", "LL", "Value", "Answer", "Na", "Ne")


def check_grammar(t, which: str) -> bool:
    """Membership of ``t`` in one of the restricted grammars.

    ``LL`` inspects the outer list of cuts of ``t`` and ignores the term the
    list is wrapped around.
    """
    if which == "Pure":
        return is_pure(t)
    if which == "Value":
        return is_value(t)
    if which == "Answer":
        return is_answer(t)
    if which == "U":
        return in_u(t)
    if which == "T":
        return in_t(t)
    if which == "LL":
        return is_ll(peel_list(t)[1])
    if which == "Na":
        return in_na(t)
    if which == "Ne":
        return in_ne(t)
    raise ValueError(f"unknown grammar {which!r}")


def is_value(t) -> bool:
    return isinstance(t, Abs) and is_pure(t.body)


def is_answer(t) -> bool:
    return isinstance(peel_list(t)[0], Abs)


def is_ll(cuts) -> bool:
    for i, (b, content, kind) in enumerate(cuts):
        if kind is Sub and not is_pure(content):
            return False
        if kind is Dist and not in_t(content):
            return False
        if any(b in free_vars(c) for _, c, _ in cuts[:i]):
            return False
    return True


def in_t(t) -> bool:
    if not isinstance(t, Abs):
        return False
    p, cuts = peel_list(t.body)
    if not is_pure(p) or not is_ll(cuts):
        return False
    return all(occ_count(p, b) == 1 for b, _, _ in cuts)


def in_u(t) -> bool:
    if isinstance(t, Var):
        return True
    if isinstance(t, Abs):
        return is_pure(t.body)
    if isinstance(t, App):
        return in_u(t.fun) and in_u(t.arg)
    if isinstance(t, Sub):
        return in_u(t.body) and in_u(t.content)
    return in_u(t.body) and in_t(t.content)


def in_na(t) -> bool:
    if isinstance(t, Abs):
        return is_pure(t.body)
    while isinstance(t, App):
        t = t.fun
    return isinstance(t, Var)


def ndv(t) -> frozenset:
    """Needed free variables (at most one)."""
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, App):
        return ndv(t.fun)
    if isinstance(t, Abs):
        return frozenset()
    inner = ndv(t.body)
    if isinstance(t, Dist):
        return inner - {t.binder}
    if t.binder in inner:
        return (inner - {t.binder}) | ndv(t.content)
    return inner


def in_ne_bar(t) -> bool:
    if isinstance(t, Var):
        return True
    if isinstance(t, App):
        return in_ne_bar(t.fun)
    if isinstance(t, Abs):
        return False
    if not in_ne_bar(t.body):
        return False
    if t.binder not in ndv(t.body):
        return True
    return isinstance(t, Sub) and in_ne_bar(t.content)


def in_ne(t) -> bool:
    return is_answer(t) or in_ne_bar(t)
