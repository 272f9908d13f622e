"""Weak evaluation strategies: call-by-name and fully lazy call-by-need.

Also hosts the skeleton machinery used by call-by-need: maximal free
expressions, the big-step splitting relation and the small-step splitting
reduction on terms of the grammar ``T``.
"""

from __future__ import annotations

from enum import Enum

from .errors import InternalNonTermination, NotInT, NotInU, NotPure
from .rewrite import Redex, RuleTag, contract, fire_with_witness, is_db_at, sub_rule_at
from .term_core import (
    Abs,
    App,
    Dist,
    FreshSupply,
    Sel,
    Sub,
    Var,
    all_names,
    free_vars,
    in_na,
    in_ne,
    in_t,
    in_u,
    is_answer,
    is_pure,
    is_value,
    list_fv,
    ndv,
    peel_list,
    rename_free,
    rename_list_binders,
    subst_meta,
    wrap,
)
from .trace import Status, Step, Trace

__all__ = [
    "StepKind", "Policy", "ndv", "locate_need", "name_redexes", "name_step", "name_normalize",
    "mfe_list", "skeleton", "plug_holes", "split_bigstep", "st_step", "st_trace",
    "st_normalize", "flneed_step", "flneed_normalize", "whr_step", "HOLE",
]


class StepKind(str, Enum):
    NDB = "ndB"
    NSUB = "nsub"
    FL_DB = "dB"
    FL_SPL = "spl"
    FL_LS = "1s"
    ST_VAR = "var"
    ST_APP = "app"
    ST_DIST = "dist"
    ST_ABS = "abs"


class Policy(str, Enum):
    PREFER_DB = "prefer-db"
    PREFER_SUB = "prefer-sub"
    LEFTMOST = "leftmost"


# ---------------------------------------------------------------------------
# needed variables


def locate_need(t):
    """The needed free variable of ``t`` and the path to its occurrence."""
    if isinstance(t, Var):
        return t.name, ()
    if isinstance(t, App):
        got = locate_need(t.fun)
        return None if got is None else (got[0], (Sel.APP_FUN,) + got[1])
    if isinstance(t, Abs):
        return None
    got = locate_need(t.body)
    if got is None:
        return None
    name, path = got
    if name != t.binder:
        return name, (Sel.CUT_BODY,) + path
    if isinstance(t, Dist):
        return None
    inner = locate_need(t.content)
    return None if inner is None else (inner[0], (Sel.CUT_CONTENT,) + inner[1])


# ---------------------------------------------------------------------------
# call-by-name


def name_redexes(t) -> list:
    """All call-by-name redexes as ``(kind, redex, closure label)`` triples."""
    if not in_u(t):
        raise NotInU("call-by-name is defined on the restricted grammar U")
    return _name_redexes(t)


def _name_redexes(t):
    out = []
    _collect_db(t, (), out, top=True)
    _collect_sub(t, (), out, top=True)
    out.sort(key=lambda item: [_SEL_ORDER[s] for s in item[1].path])
    return out


_SEL_ORDER = {Sel.ABS_BODY: 0, Sel.APP_FUN: 0, Sel.CUT_BODY: 0, Sel.APP_ARG: 1, Sel.CUT_CONTENT: 1}


def _collect_db(t, path, out, top):
    if is_db_at(t):
        label = "DB" if top else ("APPDB" if path[-1] is Sel.APP_FUN else "SUBDB")
        out.append((StepKind.NDB, Redex(path, RuleTag.DB), label))
    if isinstance(t, App):
        _collect_db(t.fun, path + (Sel.APP_FUN,), out, False)
    elif isinstance(t, (Sub, Dist)):
        _collect_db(t.body, path + (Sel.CUT_BODY,), out, False)


def _collect_sub(t, path, out, top):
    rule = sub_rule_at(t)
    if rule is not None:
        label = "S" if top else ("APPS" if path[-1] is Sel.APP_FUN else "SUBS")
        out.append((StepKind.NSUB, Redex(path, rule), label))
    if isinstance(t, App):
        _collect_sub(t.fun, path + (Sel.APP_FUN,), out, False)
    elif isinstance(t, Dist):
        _collect_sub(t.content.body, path + (Sel.CUT_CONTENT, Sel.ABS_BODY), out, False)


def _choose(redexes, policy):
    if policy is Policy.PREFER_DB:
        for item in redexes:
            if item[0] is StepKind.NDB:
                return item
    elif policy is Policy.PREFER_SUB:
        for item in redexes:
            if item[0] is StepKind.NSUB:
                return item
    return redexes[0]


def name_step(t, supply: FreshSupply, policy=Policy.PREFER_DB):
    """Fire one call-by-name redex chosen by ``policy``; ``None`` at a normal form."""
    if not in_u(t):
        raise NotInU("call-by-name is defined on the restricted grammar U")
    return _name_step(t, supply, Policy(policy), False)


def _name_step(t, supply, policy, names_avoided):
    redexes = _name_redexes(t)
    if not redexes:
        return None
    kind, r, label = _choose(redexes, policy)
    new, witness = fire_with_witness(t, r, supply, names_avoided)
    witness = dict(witness, rule=r.rule, closure=label)
    return Step(kind, r.path, new, witness)


def name_normalize(t, fuel: int, policy=Policy.PREFER_DB, supply: FreshSupply | None = None) -> Trace:
    """Iterate :func:`name_step`; the trace status tells how the run ended."""
    if not in_u(t):
        raise NotInU("call-by-name is defined on the restricted grammar U")
    supply = supply or FreshSupply()
    supply.avoid(all_names(t))
    policy = Policy(policy)
    trace = Trace(t)
    cur = t
    for _ in range(fuel):
        step = _name_step(cur, supply, policy, True)
        if step is None:
            trace.status = Status.NORMAL_FORM if in_na(cur) else Status.STUCK
            return trace
        trace.steps.append(step)
        cur = step.term
    trace.status = Status.NORMAL_FORM if not _name_redexes(cur) else Status.FUEL_EXHAUSTED
    return trace


def whr_step(p):
    """One weak-head beta step of a pure term, or ``None``."""
    if not is_pure(p):
        raise NotPure("weak-head reduction acts on pure terms")
    spine = []
    head = p
    while isinstance(head, App):
        spine.append(head.arg)
        head = head.fun
    if not spine or not isinstance(head, Abs):
        return _whr_inner(p)
    args = list(reversed(spine))
    supply = FreshSupply(set(all_names(p)))
    out = subst_meta(head.body, head.binder, args[0], supply)
    for a in args[1:]:
        out = App(out, a)
    return out


def _whr_inner(p):
    if isinstance(p, App):
        if isinstance(p.fun, Abs):
            supply = FreshSupply(set(all_names(p)))
            return subst_meta(p.fun.body, p.fun.binder, p.arg, supply)
        inner = _whr_inner(p.fun)
        return None if inner is None else App(inner, p.arg)
    return None


# ---------------------------------------------------------------------------
# skeletons and maximal free expressions

HOLE = "◇"


def _hole(i):
    return Var(f"{HOLE}{i}")


def _skeleton(p, theta, fillers):
    if not (free_vars(p) & theta):
        fillers.append(p)
        return _hole(len(fillers))
    if isinstance(p, Var):
        return p
    if isinstance(p, Abs):
        return Abs(p.binder, _skeleton(p.body, theta | {p.binder}, fillers))
    return App(_skeleton(p.fun, theta, fillers), _skeleton(p.arg, theta, fillers))


def skeleton(p, theta):
    """The skeleton of ``p`` for the variable set ``theta``.

    Holes are variables ``◇1``, ``◇2``, ... numbered left to right.
    """
    if not is_pure(p):
        raise NotPure("skeletons are defined on pure terms")
    return _skeleton(p, frozenset(theta), [])


def mfe_list(p, theta) -> list:
    """Maximal free expressions of ``p`` w.r.t. ``theta``, left to right."""
    if not is_pure(p):
        raise NotPure("maximal free expressions are defined on pure terms")
    fillers = []
    _skeleton(p, frozenset(theta), fillers)
    return fillers


def plug_holes(ctx, fillers):
    """Fill the numbered holes of ``ctx``; capture is intended here."""
    if isinstance(ctx, Var):
        if ctx.name.startswith(HOLE):
            return fillers[int(ctx.name[len(HOLE):]) - 1]
        return ctx
    if isinstance(ctx, Abs):
        return Abs(ctx.binder, plug_holes(ctx.body, fillers))
    return App(plug_holes(ctx.fun, fillers), plug_holes(ctx.arg, fillers))


def split_bigstep(p, theta, supply: FreshSupply):
    """Share every maximal free expression of ``p`` in its own substitution."""
    if not is_pure(p):
        raise NotPure("splitting is defined on pure terms")
    supply.avoid(all_names(p))
    inner, cuts = _split(p, frozenset(theta), supply)
    return wrap(inner, cuts)


def _split(p, theta, supply):
    if not (free_vars(p) & theta):
        x = supply.fresh("x")
        return Var(x), [(x, p, Sub)]
    if isinstance(p, Var):
        return p, []
    if isinstance(p, Abs):
        body, cuts = _split(p.body, theta | {p.binder}, supply)
        return Abs(p.binder, body), cuts
    f, l1 = _split(p.fun, theta, supply)
    a, l2 = _split(p.arg, theta, supply)
    return App(f, a), l1 + l2


# ---------------------------------------------------------------------------
# small-step splitting


def st_step(t, supply: FreshSupply):
    """The unique splitting step of ``t`` (an element of ``T``), or ``None``."""
    if not in_t(t):
        raise NotInT("small-step splitting is defined on the grammar T")
    supply.avoid(all_names(t))
    return _st_step(t, supply)


def _st_step(t, supply):
    y = t.binder
    inner, cuts = peel_list(t.body)
    # base rules act on the outermost cut mentioning y
    for i in range(len(cuts) - 1, -1, -1):
        x, content, kind = cuts[i]
        if y not in free_vars(content):
            continue
        s = wrap(inner, cuts[: i + 1])
        got = _st_base(s, y, supply)
        if got is None:
            return None
        kind_tag, s2 = got
        return kind_tag, Abs(y, wrap(s2, cuts[i + 1:]))
    return None


def _st_base(s, y, supply):
    x, content = s.binder, s.content
    if isinstance(s, Sub):
        if isinstance(content, Var):
            return StepKind.ST_VAR, subst_meta(s.body, x, content, supply)
        if isinstance(content, App):
            x1 = supply.fresh(x)
            x2 = supply.fresh(x)
            body = subst_meta(s.body, x, App(Var(x1), Var(x2)), supply)
            return StepKind.ST_APP, Sub(Sub(body, x1, content.fun), x2, content.arg)
        w = supply.fresh("w")
        lam = Abs(content.binder, Sub(Var(w), w, content.body))
        return StepKind.ST_DIST, Dist(s.body, x, lam)
    z = content.binder
    p, ll = peel_list(content.body)
    if z not in list_fv(ll):
        val = Abs(z, p)
        val, ll = rename_list_binders(val, ll, free_vars(s.body) - {x}, supply)
        return StepKind.ST_ABS, wrap(subst_meta(s.body, x, val, supply), ll)
    got = _st_step(content, supply)
    if got is None:
        return None
    return got[0], Dist(s.body, x, got[1])


def st_trace(t, supply: FreshSupply, fuel: int = 100_000) -> Trace:
    if not in_t(t):
        raise NotInT("small-step splitting is defined on the grammar T")
    supply.avoid(all_names(t))
    trace = Trace(t)
    cur = t
    for _ in range(fuel):
        got = _st_step(cur, supply)
        if got is None:
            return trace
        cur = got[1]
        trace.steps.append(Step(got[0], (), cur))
    raise InternalNonTermination("splitting did not terminate")


def st_normalize(t, supply: FreshSupply):
    return st_trace(t, supply).final


# ---------------------------------------------------------------------------
# fully lazy call-by-need


def flneed_step(t, supply: FreshSupply):
    """The unique call-by-need step of ``t`` as ``(kind, path, term, witness)``, or ``None``."""
    if not in_u(t):
        raise NotInU("call-by-need is defined on the restricted grammar U")
    supply.avoid(all_names(t))
    return _flneed_step(t, supply)


def _flneed_step(t, supply):
    # the caller guarantees t is in U and the supply avoids every name of t
    return _find(t, supply)


def flneed_step_record(t, supply: FreshSupply):
    got = flneed_step(t, supply)
    if got is None:
        return None
    kind, path, term, witness = got
    return Step(kind, path, term, witness)


def _find(t, supply, around=()):
    """The call-by-need step of ``t`` as ``(kind, path, new term, witness)``.

    Walks down the spine of applications and cuts, then back up while
    tracking the needed variable, so long cut chains cost one pass.
    """
    spine = []
    cur = t
    while True:
        if isinstance(cur, App):
            head = cur.fun
            while isinstance(head, (Sub, Dist)):
                head = head.body
            if isinstance(head, Abs):
                binders = list(around) + [n.binder for n, _ in spine if not isinstance(n, App)]
                new, w = contract(cur, RuleTag.DB, supply, binders, True)
                return StepKind.FL_DB, tuple(sel for _, sel in spine), _rebuild(spine, new), w
            spine.append((cur, Sel.APP_FUN))
            cur = cur.fun
        elif isinstance(cur, (Sub, Dist)):
            spine.append((cur, Sel.CUT_BODY))
            cur = cur.body
        else:
            break
    need = cur.name if isinstance(cur, Var) else None
    for i in range(len(spine) - 1, -1, -1):
        node, sel = spine[i]
        if sel is Sel.APP_FUN or node.binder != need:
            continue
        got = _found_at(node, supply, around, spine[:i])
        if got is not None:
            kind, sub_path, new, w = got
            return kind, tuple(s for _, s in spine[:i]) + sub_path, _rebuild(spine[:i], new), w
        if isinstance(node, Dist):
            return None
        need = _needed_var(node.content)
        if need is None:
            return None
    return None


def _rebuild(spine, new):
    for node, sel in reversed(spine):
        if sel is Sel.APP_FUN:
            new = App(new, node.arg)
        else:
            new = type(node)(new, node.binder, node.content)
    return new


def _needed_var(t):
    got = ndv(t)
    return next(iter(got)) if got else None


def _found_at(t, supply, around, above):
    """Step at a cut whose binder is needed by its body, or ``None``."""
    x = t.binder
    if isinstance(t, Sub):
        if is_answer(t.content):
            return (StepKind.FL_SPL, (), *_spl(t, supply))
        binders = tuple(around) + tuple(n.binder for n, _ in above if not isinstance(n, App))
        got = _find(t.content, supply, binders)
        if got is None:
            return None
        kind, path, new, w = got
        return kind, (Sel.CUT_CONTENT,) + path, Sub(t.body, x, new), w
    if not is_value(t.content):
        return None
    if x in free_vars(t.content):
        # the copy would be captured by the distributor itself
        nx = supply.fresh(x, all_names(t))
        t = Dist(rename_free(t.body, x, nx, supply), nx, t.content)
        x = nx
    _, path = locate_need(t.body)
    body = _replace_need(t.body, path, t.content, supply)
    return StepKind.FL_LS, (), Dist(body, x, t.content), {"path": path}


def _replace_need(t, path, v, supply):
    if not path:
        return v
    sel, rest = path[0], path[1:]
    if sel is Sel.APP_FUN:
        return App(_replace_need(t.fun, rest, v, supply), t.arg)
    if sel is Sel.CUT_CONTENT:
        return type(t)(t.body, t.binder, _replace_need(t.content, rest, v, supply))
    if t.binder in free_vars(v):
        nb = supply.fresh(t.binder, free_vars(v))
        t = type(t)(rename_free(t.body, t.binder, nb, supply), nb, t.content)
    return type(t)(_replace_need(t.body, rest, v, supply), t.binder, t.content)


def _spl(t, supply):
    lam, l_cuts = peel_list(t.content)
    body = t.body
    lam, l_cuts = rename_list_binders(lam, l_cuts, free_vars(body) - {t.binder}, supply)
    y, p = lam.binder, lam.body
    z = supply.fresh("z")
    nf = st_normalize(Abs(y, Sub(Var(z), z, p)), supply)
    p2, ll = peel_list(nf.body)
    dist = Dist(body, t.binder, Abs(y, p2))
    return wrap(wrap(dist, ll), l_cuts), {"outer": len(l_cuts), "shared": len(ll)}


def flneed_normalize(t, fuel: int, supply: FreshSupply | None = None) -> Trace:
    if not in_u(t):
        raise NotInU("call-by-need is defined on the restricted grammar U")
    supply = supply or FreshSupply()
    # U is closed under the strategy and every later name comes from the supply
    supply.avoid(all_names(t))
    trace = Trace(t)
    cur = t
    for _ in range(fuel):
        got = _flneed_step(cur, supply)
        if got is None:
            trace.status = Status.NORMAL_FORM if in_ne(cur) else Status.STUCK
            return trace
        trace.steps.append(Step(*got))
        cur = got[2]
    if _flneed_step(cur, supply.copy()) is None:
        trace.status = Status.NORMAL_FORM if in_ne(cur) else Status.STUCK
    else:
        trace.status = Status.FUEL_EXHAUSTED
    return trace
