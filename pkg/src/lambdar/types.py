"""Non-idempotent intersection types for the node replication calculus.

Derivations are immutable trees.  The constructors ``ax``, ``abs_``, ``ans``,
``app``, ``cut`` and ``many`` compute the environment, subject and type of a
node from its premises, so a derivation built only through them is valid by
construction; :func:`check_derivation` re-validates arbitrary trees.

Subject expansion works backwards along a reduction trace: starting from a
derivation of the normal form, every step is undone by a local rewiring of the
derivation at the redex (``expand_step``).  Full and partial
(anti-)substitution are the workhorses of those rewirings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    CaptureError,
    InvalidDerivation,
    NotANormalForm,
    NotInU,
    PartitionMismatch,
    SliceMismatch,
    UnsupportedStep,
)
from .measures import level
from .rewrite import RuleTag, extract
from .strategies import StepKind, flneed_normalize
from .syntax import show
from .term_core import (
    Abs,
    App,
    Dist,
    FreshSupply,
    Sel,
    Sub,
    Var,
    all_names,
    alpha_eq,
    binders_above,
    free_vars,
    in_ne,
    in_u,
    is_answer,
    peel_list,
    rename_free,
    replace_at,
    subst_meta,
    subterm,
    wrap,
)
from .trace import Status

# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class Ans:
    def __str__(self):
        return "a"


@dataclass(frozen=True)
class Base:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Arrow:
    dom: tuple
    cod: object

    def __str__(self):
        return f"{show_multi(self.dom)}->{self.cod}"


ANS_TYPE = Ans()


def multi(types) -> tuple:
    """A multi-type: a canonically ordered tuple of types."""
    return tuple(sorted(types, key=_type_key))


def _type_key(ty):
    if isinstance(ty, Ans):
        return (0,)
    if isinstance(ty, Base):
        return (1, ty.name)
    return (2, tuple(_type_key(d) for d in ty.dom), _type_key(ty.cod))


def show_multi(m) -> str:
    return "[" + ", ".join(str(t) for t in m) + "]"


def mt_union(*ms) -> tuple:
    return multi([t for m in ms for t in m])


def mt_minus(m, n):
    rest = list(m)
    for t in n:
        if t not in rest:
            raise SliceMismatch(f"{show_multi(n)} is not included in {show_multi(m)}")
        rest.remove(t)
    return multi(rest)


def env_union(*envs) -> dict:
    out = {}
    for env in envs:
        for x, m in env.items():
            out[x] = mt_union(out.get(x, ()), m)
    return {x: m for x, m in out.items() if m}


def env_minus(env, x) -> dict:
    return {k: v for k, v in env.items() if k != x}


def show_env(env) -> str:
    if not env:
        return "∅"
    return ", ".join(f"{x}:{show_multi(env[x])}" for x in sorted(env))


# ---------------------------------------------------------------------------
# derivations


class Rule(str, Enum):
    AX = "AX"
    ABS = "ABS"
    ANS = "ANS"
    APP = "APP"
    CUT = "CUT"
    MANY = "MANY"


@dataclass(frozen=True, eq=False)
class Derivation:
    rule: Rule
    premises: tuple
    env: dict
    subject: object
    type: object
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __str__(self):
        return "\n".join(render(self))


def ax(x: str, ty) -> Derivation:
    return Derivation(Rule.AX, (), {x: (ty,)}, Var(x), ty)


def abs_(x: str, body: Derivation) -> Derivation:
    _not_many(body)
    ty = Arrow(body.env.get(x, ()), body.type)
    return Derivation(Rule.ABS, (body,), env_minus(body.env, x), Abs(x, body.subject), ty)


def ans(t) -> Derivation:
    if not isinstance(t, Abs):
        raise InvalidDerivation("ANS types abstractions only")
    return Derivation(Rule.ANS, (), {}, t, ANS_TYPE)


def app(fun: Derivation, arg: Derivation) -> Derivation:
    _not_many(fun)
    if arg.rule is not Rule.MANY:
        raise InvalidDerivation("APP needs a MANY argument premise")
    if not isinstance(fun.type, Arrow) or fun.type.dom != arg.type:
        raise InvalidDerivation(
            f"APP: function type {fun.type} does not accept {show_multi(arg.type)}"
        )
    return Derivation(
        Rule.APP, (fun, arg), env_union(fun.env, arg.env), App(fun.subject, arg.subject),
        fun.type.cod,
    )


def cut(kind, x: str, body: Derivation, content: Derivation) -> Derivation:
    _not_many(body)
    if content.rule is not Rule.MANY:
        raise InvalidDerivation("CUT needs a MANY content premise")
    if body.env.get(x, ()) != content.type:
        raise InvalidDerivation(
            f"CUT on {x}: body uses {show_multi(body.env.get(x, ()))}, "
            f"content provides {show_multi(content.type)}"
        )
    env = env_union(env_minus(body.env, x), content.env)
    return Derivation(Rule.CUT, (body, content), env, kind(body.subject, x, content.subject), body.type)


def many(premises, subject) -> Derivation:
    fixed = []
    for p in premises:
        _not_many(p)
        if p.subject != subject:
            if not alpha_eq(p.subject, subject):
                raise InvalidDerivation("MANY premises must share the subject")
            p = retarget(p, subject)
        fixed.append(p)
    return Derivation(
        Rule.MANY, tuple(fixed), env_union(*(p.env for p in fixed)), subject,
        multi(p.type for p in fixed),
    )


def _not_many(d):
    if d.rule is Rule.MANY:
        raise InvalidDerivation("a MANY node cannot be used where a type is expected")


def retarget(phi: Derivation, t) -> Derivation:
    """Rebuild ``phi`` along the alpha-equal term ``t`` (names taken from ``t``)."""
    r = phi.rule
    if r is Rule.MANY:
        return many([retarget(p, t) for p in phi.premises], t)
    if r is Rule.AX:
        if not isinstance(t, Var):
            raise InvalidDerivation("retarget: shape mismatch at AX")
        return ax(t.name, phi.type)
    if r is Rule.ANS:
        return ans(t)
    if r is Rule.ABS:
        if not isinstance(t, Abs):
            raise InvalidDerivation("retarget: shape mismatch at ABS")
        return abs_(t.binder, retarget(phi.premises[0], t.body))
    if r is Rule.APP:
        if not isinstance(t, App):
            raise InvalidDerivation("retarget: shape mismatch at APP")
        return app(retarget(phi.premises[0], t.fun), retarget(phi.premises[1], t.arg))
    if not isinstance(t, (Sub, Dist)):
        raise InvalidDerivation("retarget: shape mismatch at CUT")
    return cut(type(t), t.binder, retarget(phi.premises[0], t.body), retarget(phi.premises[1], t.content))


# ---------------------------------------------------------------------------
# checking and measuring


def check_derivation(phi: Derivation):
    """Validate every node; returns ``(ok, diagnostics)``."""
    diags = []
    _check(phi, (), diags)
    return not diags, diags


def _check(phi, where, diags):
    def bad(msg):
        diags.append(f"{phi.rule.value} at {'/'.join(where) or 'root'}: {msg}")

    s, r, ps = phi.subject, phi.rule, phi.premises
    for i, p in enumerate(ps):
        _check(p, where + (str(i),), diags)
    if r is Rule.AX:
        if not isinstance(s, Var):
            return bad("subject is not a variable")
        if ps or phi.env != {s.name: (phi.type,)}:
            return bad("environment must be exactly the singleton of the subject")
    elif r is Rule.ANS:
        if not isinstance(s, Abs):
            return bad("subject is not an abstraction")
        if ps or phi.env or phi.type != ANS_TYPE:
            return bad("ANS needs an empty environment and the answer type")
    elif r is Rule.ABS:
        if not isinstance(s, Abs) or len(ps) != 1 or ps[0].rule is Rule.MANY:
            return bad("malformed abstraction node")
        b = ps[0]
        if b.subject != s.body:
            return bad("premise subject differs from the body")
        if phi.type != Arrow(b.env.get(s.binder, ()), b.type):
            return bad("type does not match the premise")
        if phi.env != env_minus(b.env, s.binder):
            return bad("environment does not drop the binder")
    elif r is Rule.APP:
        if not isinstance(s, App) or len(ps) != 2 or ps[1].rule is not Rule.MANY:
            return bad("malformed application node")
        f, a = ps
        if f.subject != s.fun or a.subject != s.arg:
            return bad("premise subjects differ from the application")
        if f.type != Arrow(a.type, phi.type):
            return bad("function type does not match")
        if phi.env != env_union(f.env, a.env):
            return bad("environment is not the union of the premises")
    elif r is Rule.CUT:
        if not isinstance(s, (Sub, Dist)) or len(ps) != 2 or ps[1].rule is not Rule.MANY:
            return bad("malformed cut node")
        b, c = ps
        if b.subject != s.body or c.subject != s.content:
            return bad("premise subjects differ from the cut")
        if b.env.get(s.binder, ()) != c.type:
            return bad("content multi-type differs from the binder's")
        if phi.type != b.type:
            return bad("type differs from the body type")
        if phi.env != env_union(env_minus(b.env, s.binder), c.env):
            return bad("environment mismatch")
    else:
        if any(p.rule is Rule.MANY or p.subject != s for p in ps):
            return bad("premises must type the same subject")
        if phi.type != multi(p.type for p in ps):
            return bad("multi-type is not the multiset of premise types")
        if phi.env != env_union(*(p.env for p in ps)):
            return bad("environment is not the union of the premises")
    if not set(phi.env) <= set(free_vars(s)):
        bad("environment mentions a variable that is not free")


def sz(phi: Derivation) -> int:
    own = 1 if phi.rule in (Rule.ABS, Rule.APP, Rule.ANS) else 0
    return own + sum(sz(p) for p in phi.premises)


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def measure_m(phi: Derivation, m: int) -> tuple:
    """The weighted derivation level triple."""
    if m in phi._cache:
        return phi._cache[m]
    r = phi.rule
    if r is Rule.AX:
        out = (0, 0, 1)
    elif r is Rule.ANS:
        out = (1, m, 0)
    elif r is Rule.ABS:
        out = _add(measure_m(phi.premises[0], m), (1, m, 0))
    elif r is Rule.APP:
        out = _add(_add(measure_m(phi.premises[0], m), measure_m(phi.premises[1], m)), (1, m, 0))
    elif r is Rule.CUT:
        s = phi.subject
        es = 1 if isinstance(s, Sub) else 0
        inner = m + level(s.body, s.binder) + es
        out = _add(measure_m(phi.premises[0], m), measure_m(phi.premises[1], inner))
    else:
        out = (0, 0, 0)
        for p in phi.premises:
            out = _add(out, measure_m(p, m))
    phi._cache[m] = out
    return out


def measure_d(phi: Derivation) -> tuple:
    return measure_m(phi, 1)


# ---------------------------------------------------------------------------
# slicing multi-type premises


def _take(pool, ty):
    for i, d in enumerate(pool):
        if d.type == ty:
            return pool.pop(i)
    raise SliceMismatch(f"no premise of type {ty} left")


def split_many(phi: Derivation, partition) -> list:
    """Split a MANY derivation along a partition of its multi-type."""
    if phi.rule is not Rule.MANY:
        raise PartitionMismatch("only MANY derivations can be split")
    if mt_union(*partition) != phi.type:
        raise PartitionMismatch("the parts do not add up to the multi-type")
    pool = list(phi.premises)
    return [many([_take(pool, t) for t in part], phi.subject) for part in partition]


def peel_cuts(phi: Derivation, n: int):
    """Remove ``n`` outer CUT layers; returns the core and the layers inner-to-outer."""
    layers = []
    for _ in range(n):
        if phi.rule is not Rule.CUT:
            raise InvalidDerivation("expected a CUT layer")
        layers.append((type(phi.subject), phi.subject.binder, phi.premises[1]))
        phi = phi.premises[0]
    layers.reverse()
    return phi, layers


def wrap_sliced(phis, layers) -> list:
    """Surround each derivation with the cut layers, sharing out their contents."""
    pools = [list(c.premises) for _, _, c in layers]
    out = []
    for phi in phis:
        cur = phi
        for k, (kind, w, c) in enumerate(layers):
            chosen = [_take(pools[k], ty) for ty in cur.env.get(w, ())]
            cur = cut(kind, w, cur, many(chosen, c.subject))
        out.append(cur)
    if any(pools):
        raise SliceMismatch("some cut content premises were not consumed")
    return out


# ---------------------------------------------------------------------------
# substitution and anti-substitution


def subst_typing(phi_t: Derivation, t, x: str, phi_u: Derivation, supply: FreshSupply | None = None):
    """Derivation of ``t{x/u}`` from one of ``t`` and one of ``u`` at ``env(x)``."""
    u = phi_u.subject
    supply = supply or FreshSupply(set(all_names(t)) | set(all_names(u)))
    result = subst_meta(t, x, u, supply)
    pool = list(phi_u.premises)
    out = _subst_walk(phi_t, t, result, x, pool)
    if pool:
        raise SliceMismatch("substitution left unused premises")
    return out


def _subst_walk(phi, t, r, x, pool):
    if phi.rule is Rule.MANY:
        return many([_subst_walk(p, t, r, x, pool) for p in phi.premises], r)
    if isinstance(t, Var):
        if t.name == x:
            return retarget(_take(pool, phi.type), r)
        return ax(r.name, phi.type)
    if phi.rule is Rule.ANS:
        return ans(r)
    if isinstance(t, Abs):
        if t.binder == x:
            return retarget(phi, r)
        return abs_(r.binder, _subst_walk(phi.premises[0], t.body, r.body, x, pool))
    if isinstance(t, App):
        return app(
            _subst_walk(phi.premises[0], t.fun, r.fun, x, pool),
            _subst_walk(phi.premises[1], t.arg, r.arg, x, pool),
        )
    body = (
        retarget(phi.premises[0], r.body) if t.binder == x
        else _subst_walk(phi.premises[0], t.body, r.body, x, pool)
    )
    content = _subst_walk(phi.premises[1], t.content, r.content, x, pool)
    return cut(type(r), r.binder, body, content)


def anti_subst_all(phi: Derivation, t, x: str):
    """Split a derivation of ``t{x/u}`` into one of ``t`` and the derivations of ``u``.

    ``t`` tells where the occurrences of ``x`` sit; the returned list holds a
    derivation of ``u`` for every typed copy.
    """
    collected = []
    out = _anti_walk(phi, t, x, collected)
    return out, collected


def _anti_walk(phi, t, x, col):
    if phi.rule is Rule.MANY:
        return many([_anti_walk(p, t, x, col) for p in phi.premises], t)
    if isinstance(t, Var):
        if t.name == x:
            col.append(phi)
        return ax(t.name, phi.type)
    if phi.rule is Rule.ANS:
        return ans(t)
    if isinstance(t, Abs):
        if t.binder == x:
            return retarget(phi, t)
        return abs_(t.binder, _anti_walk(phi.premises[0], t.body, x, col))
    if isinstance(t, App):
        return app(_anti_walk(phi.premises[0], t.fun, x, col), _anti_walk(phi.premises[1], t.arg, x, col))
    body = retarget(phi.premises[0], t.body) if t.binder == x else _anti_walk(phi.premises[0], t.body, x, col)
    return cut(type(t), t.binder, body, _anti_walk(phi.premises[1], t.content, x, col))


def walk(phi: Derivation, t, path, at_hole):
    """Rebuild ``phi`` along ``t`` (the new subject), transforming the node at ``path``.

    Copies created by MANY nodes on the way are all visited; untyped positions
    (ANS or empty MANY) simply take the new subject.
    """
    if phi.rule is Rule.MANY:
        return many([walk(p, t, path, at_hole) for p in phi.premises], t)
    if not path:
        return at_hole(phi, t)
    if phi.rule is Rule.ANS:
        return ans(t)
    sel, rest = path[0], path[1:]
    if sel is Sel.ABS_BODY:
        return abs_(t.binder, walk(phi.premises[0], t.body, rest, at_hole))
    if sel is Sel.APP_FUN:
        return app(walk(phi.premises[0], t.fun, rest, at_hole), retarget(phi.premises[1], t.arg))
    if sel is Sel.APP_ARG:
        return app(retarget(phi.premises[0], t.fun), walk(phi.premises[1], t.arg, rest, at_hole))
    if sel is Sel.CUT_BODY:
        return cut(type(t), t.binder, walk(phi.premises[0], t.body, rest, at_hole),
                   retarget(phi.premises[1], t.content))
    return cut(type(t), t.binder, retarget(phi.premises[0], t.body),
               walk(phi.premises[1], t.content, rest, at_hole))


def hole_level(t, path) -> int:
    """Level of the hole of the context ``(t, path)``."""
    names = all_names(t)
    z = "◇"
    while z in names:
        z += "'"
    return level(replace_at(t, path, Var(z)), z)


def partial_subst_typing(phi: Derivation, phi_u: Derivation, path) -> Derivation:
    """Plug ``u`` into the hole at ``path`` of ``C<<x>>``, consuming ``phi_u``.

    ``phi`` types ``C<<x>>``; every typed copy of the hole must be an axiom on
    the same variable and receives a premise of ``phi_u`` of the same type.
    """
    t = phi.subject
    u = phi_u.subject
    hole = subterm(t, path)
    if not isinstance(hole, Var):
        raise InvalidDerivation("the hole must hold a variable")
    if set(binders_above(t, path)) & free_vars(u):
        raise CaptureError("plugging would capture a free variable")
    new = replace_at(t, path, u)
    pool = list(phi_u.premises)
    psi = walk(phi, new, path, lambda d, s: retarget(_take(pool, d.type), s))
    if pool:
        raise SliceMismatch("the substituted derivation has unused premises")
    return psi


def hole_types(phi: Derivation, path) -> tuple:
    """Multi-type consumed by the hole at ``path`` across all copies."""
    found = []

    def grab(d, s):
        found.append(d.type)
        return d

    walk(phi, phi.subject, path, grab)
    return multi(found)


def anti_subst_typing(phi: Derivation, path, x: str):
    """Abstract the subterm at ``path`` as the variable ``x``.

    Returns the derivation of ``C<<x>>`` and a MANY derivation of the removed
    subterm at the multi-type assigned to ``x``.
    """
    t = phi.subject
    u = subterm(t, path)
    if x in free_vars(u) or x in binders_above(t, path):
        raise CaptureError(f"{x} clashes with the abstracted position")
    new = replace_at(t, path, Var(x))
    col = []

    def take(d, s):
        col.append(d)
        return ax(x, d.type)

    phi2 = walk(phi, new, path, take)
    return phi2, many(col, u)


# ---------------------------------------------------------------------------
# typing normal forms


def type_normal_form(t, target=None) -> Derivation:
    """A derivation for a call-by-need normal form.

    Answers get the answer type; neutral terms get ``target`` and only their
    needed variable receives a non-empty multi-type.
    """
    if not in_ne(t):
        raise NotANormalForm("the term is not a call-by-need normal form")
    if is_answer(t):
        return _type_answer(t)
    return _type_neutral(t, target if target is not None else Base("α"))


def _type_answer(t):
    inner, cuts = peel_list(t)
    phi = ans(inner)
    for x, c, kind in cuts:
        phi = cut(kind, x, phi, many([], c))
    return phi


def _type_neutral(t, ty):
    if isinstance(t, Var):
        return ax(t.name, ty)
    if isinstance(t, App):
        f = _type_neutral(t.fun, Arrow((), ty))
        return app(f, many([], t.arg))
    body = _type_neutral(t.body, ty)
    need = body.env.get(t.binder, ())
    if not need:
        return cut(type(t), t.binder, body, many([], t.content))
    prem = [_type_neutral(t.content, s) for s in need]
    return cut(type(t), t.binder, body, many(prem, t.content))


# ---------------------------------------------------------------------------
# subject expansion


def expand_step(phi1: Derivation, step, t0) -> Derivation:
    """Derivation of ``t0`` from one of the reduct recorded in ``step``."""
    rule = _rule_of(step)
    if rule is None:
        raise UnsupportedStep(f"no expansion for {step.kind}")
    local = _LOCAL[rule]

    def at_hole(d, s):
        return retarget(local(d, s, step.witness), s)

    return walk(phi1, t0, step.path, at_hole)


def _rule_of(step):
    k = step.kind
    if isinstance(k, RuleTag):
        return k
    if k in (StepKind.NDB, StepKind.FL_DB):
        return RuleTag.DB
    if k is StepKind.NSUB:
        return step.witness["rule"]
    if k is StepKind.FL_SPL:
        return "spl"
    if k is StepKind.FL_LS:
        return "1s"
    return None


def _exp_db(phi, s0, w):
    inner, layers = peel_cuts(phi, w["cuts"])
    body, content = inner.premises
    lam = abs_(inner.subject.binder, body)
    (core,) = wrap_sliced([lam], layers)
    return app(core, content)


def _redex_parts(phi, s0, w):
    inner, layers = peel_cuts(phi, w["cuts"])
    return inner, layers


def _exp_app(phi, s0, w):
    inner, layers = _redex_parts(phi, s0, w)
    phi_y, phi_s = inner.premises
    phi_t1, phi_u = phi_y.premises
    t, x = s0.body, s0.binder
    phi_t, copies = anti_subst_all(phi_t1, t, x)
    pool_u, pool_s = list(phi_u.premises), list(phi_s.premises)
    us = App(phi_u.subject, phi_s.subject)
    prem = []
    for c in copies:
        fy, zs = c.premises
        fun = _take(pool_u, fy.type)
        arg = many([_take(pool_s, d.type) for d in zs.premises], phi_s.subject)
        prem.append(app(fun, arg))
    if pool_u or pool_s:
        raise SliceMismatch("app expansion left unused premises")
    sliced = wrap_sliced(prem, layers)
    content = wrap(us, [(b, c.subject, k) for k, b, c in layers])
    return cut(Sub, x, phi_t, many(sliced, content))


def _exp_dist(phi, s0, w):
    inner, layers = _redex_parts(phi, s0, w)
    phi_t, phi_v = inner.premises
    lam = phi_v.subject
    y, zu = lam.binder, lam.body
    orig = Abs(y, zu.content)
    prem = []
    for d in phi_v.premises:
        if d.rule is Rule.ANS:
            prem.append(ans(orig))
        else:
            body_cut = d.premises[0]
            (phi_u,) = body_cut.premises[1].premises
            prem.append(abs_(y, phi_u))
    sliced = wrap_sliced(prem, layers)
    content = wrap(orig, [(b, c.subject, k) for k, b, c in layers])
    return cut(Sub, inner.subject.binder, phi_t, many(sliced, content))


def _exp_var(phi, s0, w):
    inner, layers = peel_cuts(phi, w["cuts"])
    x = s0.binder
    phi_t, copies = anti_subst_all(inner, s0.body, x)
    sliced = wrap_sliced(copies, layers)
    content = wrap(Var(w["var"]), [(b, c.subject, k) for k, b, c in layers])
    return cut(Sub, x, phi_t, many(sliced, content))


def _exp_abs(phi, s0, w):
    cuts = w["cuts"]
    inner, layers = peel_cuts(phi, len(cuts))
    t, x = s0.body, s0.binder
    phi_t, copies = anti_subst_all(inner, t, x)
    lam = s0.content
    prem = []
    abs_copies = [c for c in copies if c.rule is Rule.ABS]
    bodies = wrap_sliced([c.premises[0] for c in abs_copies], layers) if abs_copies else []
    if not abs_copies and any(c.premises for _, _, c in layers):
        raise SliceMismatch("abs expansion left unused premises")
    it = iter(bodies)
    for c in copies:
        if c.rule is Rule.ANS:
            prem.append(ans(lam))
        else:
            phi_lp = next(it)
            prem.append(abs_(lam.binder, unextract(lam.body, phi_lp)))
    return cut(Dist, x, phi_t, many(prem, lam))


def unextract(u, phi: Derivation) -> Derivation:
    """Derivation of ``u`` from one of its cut-extracted form ``L<p>``."""
    supply = FreshSupply(set(all_names(u)))
    got = extract(u, supply)
    if got is None:
        raise InvalidDerivation("the term has no cut extraction")
    p, cuts = got
    phi = retarget(phi, wrap(p, cuts))
    if isinstance(u, Var):
        return phi
    if isinstance(u, (Sub, Dist)):
        body, content = phi.premises
        return cut(type(u), u.binder, unextract(u.body, body), content)
    core, layers = peel_cuts(phi, len(cuts))
    if isinstance(u, Abs):
        if core.rule is Rule.ANS:
            return ans(u)
        (body,) = wrap_sliced([core.premises[0]], layers)
        return abs_(u.binder, unextract(u.body, body))
    # application: the function's cuts sit inside the argument's ones
    fa = extract(u.fun, FreshSupply(set(all_names(u))))
    n_a = len(fa[1])
    la, lc = layers[:n_a], layers[n_a:]
    f, a = core.premises
    (f2,) = wrap_sliced([f], la)
    args = wrap_sliced(list(a.premises), lc)
    fun = unextract(u.fun, f2)
    arg = many([unextract(u.arg, d) for d in args], u.arg) if args else many([], u.arg)
    return app(fun, arg)


def _exp_pi(rule):
    def expand(phi, s0, w):
        if rule is RuleTag.PI1:
            b, c = phi.premises
            if b.rule is Rule.ANS:
                return ans(s0)
            x = phi.subject.binder
            return abs_(s0.binder, cut(type(phi.subject), x, b.premises[0], c))
        if rule is RuleTag.PI2:
            b, c = phi.premises
            f, a = b.premises
            return app(cut(type(phi.subject), phi.subject.binder, f, c), a)
        if rule is RuleTag.PI3:
            b, c = phi.premises
            f, a = b.premises
            layer = [(type(phi.subject), phi.subject.binder, c)]
            args = wrap_sliced(list(a.premises), layer)
            subj = type(phi.subject)(a.subject, phi.subject.binder, c.subject)
            return app(f, many(args, subj))
        outer_b, outer_c = phi.premises
        t_phi, u_many = outer_b.premises
        layer = [(type(phi.subject), phi.subject.binder, outer_c)]
        parts = wrap_sliced(list(u_many.premises), layer)
        subj = type(phi.subject)(u_many.subject, phi.subject.binder, outer_c.subject)
        return cut(Sub, outer_b.subject.binder, t_phi, many(parts, subj))

    return expand


def _exp_spl(phi, s0, w):
    core, outer = peel_cuts(phi, w["outer"])
    dist, shared = peel_cuts(core, w["shared"])
    phi_n, phi_v = dist.premises
    lam, l_cuts = peel_list(s0.content)
    # the reduct may have renamed the list binders; follow its names
    supply = FreshSupply(set(all_names(s0)) | set(all_names(phi.subject)))
    for (old, _, _), (_, new, _) in zip(l_cuts, outer):
        if old != new:
            lam = rename_free(lam, old, new, supply)
    y, p = lam.binder, lam.body
    abs_copies = [d for d in phi_v.premises if d.rule is Rule.ABS]
    bodies = iter(wrap_sliced([d.premises[0] for d in abs_copies], shared))
    values = []
    for d in phi_v.premises:
        if d.rule is Rule.ANS:
            values.append(ans(lam))
        else:
            values.append(abs_(y, retarget(_unfold_typing(next(bodies)), p)))
    prem = wrap_sliced(values, outer)
    content = wrap(lam, [(b, c.subject, k) for k, b, c in outer])
    return cut(Sub, dist.subject.binder, phi_n, many(prem, content))


def _unfold_typing(phi: Derivation) -> Derivation:
    """Substitute away the outer substitution layers of ``phi``'s subject."""
    if phi.rule is Rule.CUT and isinstance(phi.subject, Sub):
        body = _unfold_typing(phi.premises[0])
        return subst_typing(body, body.subject, phi.subject.binder, phi.premises[1])
    return phi


def _exp_ls(phi, s0, w):
    body, phi_v = phi.premises
    # the step may have renamed the binder; work on the reduct, retarget later
    x = phi.subject.binder
    path = w["path"]
    col = []

    def take(d, s):
        col.append(d)
        return ax(x, d.type)

    phi_n = walk(body, replace_at(body.subject, path, Var(x)), path, take)
    return cut(Dist, x, phi_n, many(col + list(phi_v.premises), phi_v.subject))


_LOCAL = {
    RuleTag.DB: _exp_db,
    RuleTag.APP: _exp_app,
    RuleTag.DIST: _exp_dist,
    RuleTag.VAR: _exp_var,
    RuleTag.ABS: _exp_abs,
    RuleTag.PI1: _exp_pi(RuleTag.PI1),
    RuleTag.PI2: _exp_pi(RuleTag.PI2),
    RuleTag.PI3: _exp_pi(RuleTag.PI3),
    RuleTag.PI4: _exp_pi(RuleTag.PI4),
    "spl": _exp_spl,
    "1s": _exp_ls,
}


def expand_trace(phi: Derivation, trace) -> list:
    """Fold :func:`expand_step` backwards over a trace.

    Returns one derivation per term of the trace, in forward order.
    """
    terms = trace.terms()
    out = [phi]
    for i in range(len(trace.steps) - 1, -1, -1):
        phi = expand_step(phi, trace.steps[i], terms[i])
        out.append(phi)
    out.reverse()
    return out


def infer_traced(t, fuel: int = 10_000, supply: FreshSupply | None = None, target=None):
    """Like :func:`infer` but also returns the trace and every intermediate derivation.

    Returns ``(None, trace, [])`` when the run does not reach a normal form.
    """
    if not in_u(t):
        raise NotInU("inference is defined on the restricted grammar U")
    tr = flneed_normalize(t, fuel, supply)
    if tr.status is not Status.NORMAL_FORM:
        return None, tr, []
    chain = expand_trace(type_normal_form(tr.final, target or Base("α")), tr)
    ok, diags = check_derivation(chain[0])
    if not ok:
        raise InvalidDerivation("; ".join(diags))
    return chain[0], tr, chain


def infer(t, fuel: int = 10_000, supply: FreshSupply | None = None, target=None):
    """Type a U term: normalise it, type the normal form, expand back.

    Returns ``None`` when no normal form is reached within ``fuel``; that only
    suggests untypability, it does not prove it.
    """
    return infer_traced(t, fuel, supply, target)[0]


# ---------------------------------------------------------------------------
# rendering and serialisation


def judgement(phi: Derivation, unicode=False) -> str:
    ty = show_multi(phi.type) if phi.rule is Rule.MANY else str(phi.type)
    return f"{show_env(phi.env)} ⊢ {show(phi.subject, unicode)} : {ty}"


def render(phi: Derivation, unicode=False, indent=0) -> list:
    """Indented tree, conclusion first."""
    lines = ["  " * indent + f"({phi.rule.value}) {judgement(phi, unicode)}"]
    for p in phi.premises:
        lines += render(p, unicode, indent + 1)
    return lines


def type_to_json(ty):
    if isinstance(ty, Ans):
        return "a"
    if isinstance(ty, Base):
        return {"base": ty.name}
    return {"dom": [type_to_json(d) for d in ty.dom], "cod": type_to_json(ty.cod)}


def type_from_json(obj):
    if obj == "a":
        return ANS_TYPE
    if "base" in obj:
        return Base(obj["base"])
    return Arrow(multi(type_from_json(d) for d in obj["dom"]), type_from_json(obj["cod"]))


def to_json(phi: Derivation) -> dict:
    out = {
        "rule": phi.rule.value,
        "subject": show(phi.subject),
        "env": {x: [type_to_json(t) for t in m] for x, m in sorted(phi.env.items())},
    }
    if phi.rule is Rule.MANY:
        out["type"] = [type_to_json(t) for t in phi.type]
    else:
        out["type"] = type_to_json(phi.type)
    if phi.premises:
        out["premises"] = [to_json(p) for p in phi.premises]
    return out


def from_json(obj, parse) -> Derivation:
    """Rebuild a derivation from :func:`to_json` output (``parse`` reads subjects)."""
    t = parse(obj["subject"])
    prem = [from_json(p, parse) for p in obj.get("premises", [])]
    rule = Rule(obj["rule"])
    if rule is Rule.AX:
        return ax(t.name, type_from_json(obj["type"]))
    if rule is Rule.ANS:
        return ans(t)
    if rule is Rule.ABS:
        return abs_(t.binder, prem[0])
    if rule is Rule.APP:
        return app(*prem)
    if rule is Rule.CUT:
        return cut(type(t), t.binder, *prem)
    return many(prem, t)


def dumps(phi: Derivation) -> str:
    return json.dumps(to_json(phi), ensure_ascii=False)
