"""Permutation rules, replication rules at a distance, unfolding and probes.

Every rule acts on the subterm found at a path.  Distance rules move a list
of cuts (found by peeling) out of the redex; whenever that would capture a
variable, the list binders are renamed first.  Fresh names always come from
the caller's :class:`FreshSupply`, so runs are reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .errors import InternalNonTermination, InvalidRedex, NotABetaRedex, NotPure
from .term_core import (
    CUTS,
    Abs,
    App,
    Dist,
    FreshSupply,
    Sel,
    Sub,
    Var,
    all_names,
    alpha_key,
    binders_above,
    free_vars,
    is_pure,
    iter_paths,
    list_dom,
    list_fv,
    peel_list,
    rename_free,
    rename_list_binders,
    replace_at,
    subst_meta,
    subterm,
    wrap,
)
from .trace import Status, Step, Trace


class RuleTag(str, Enum):
    PI1 = "pi1"
    PI2 = "pi2"
    PI3 = "pi3"
    PI4 = "pi4"
    DB = "dB"
    APP = "app"
    DIST = "dist"
    ABS = "abs"
    VAR = "var"


PI_RULES = (RuleTag.PI1, RuleTag.PI2, RuleTag.PI3, RuleTag.PI4)
SUB_RULES = (RuleTag.APP, RuleTag.DIST, RuleTag.ABS, RuleTag.VAR)


@dataclass(frozen=True)
class Redex:
    path: tuple
    rule: RuleTag
    aux: object = field(default=None, compare=False)


SUB_FUEL = 100_000


# ---------------------------------------------------------------------------
# matching


def pi_rule_at(s):
    """The permutation rule whose left-hand side matches ``s``, if any."""
    if isinstance(s, Abs) and isinstance(s.body, CUTS):
        if s.binder not in free_vars(s.body.content):
            return RuleTag.PI1
    if isinstance(s, App):
        if isinstance(s.fun, CUTS):
            return RuleTag.PI2
        if isinstance(s.arg, CUTS):
            return RuleTag.PI3
    if isinstance(s, Sub) and isinstance(s.content, CUTS):
        return RuleTag.PI4
    return None


def _pi_rules_at(s):
    out = []
    if isinstance(s, Abs) and isinstance(s.body, CUTS):
        if s.binder not in free_vars(s.body.content):
            out.append(RuleTag.PI1)
    if isinstance(s, App):
        if isinstance(s.fun, CUTS):
            out.append(RuleTag.PI2)
        if isinstance(s.arg, CUTS):
            out.append(RuleTag.PI3)
    if isinstance(s, Sub) and isinstance(s.content, CUTS):
        out.append(RuleTag.PI4)
    return out


def pi_redexes(t) -> list:
    out = []
    for p, s in iter_paths(t):
        for r in _pi_rules_at(s):
            # a distributor must keep an abstraction as its content
            if r is RuleTag.PI1 and p and p[-1] is Sel.CUT_CONTENT and isinstance(subterm(t, p[:-1]), Dist):
                continue
            out.append(Redex(p, r))
    return out


def sub_rule_at(s):
    """The replication rule applying at ``s`` (a cut), or ``None``."""
    if isinstance(s, Sub):
        inner, _ = peel_list(s.content)
        if isinstance(inner, App):
            return RuleTag.APP
        if isinstance(inner, Abs):
            return RuleTag.DIST
        return RuleTag.VAR
    if isinstance(s, Dist) and abs_applicable(s):
        return RuleTag.ABS
    return None


def abs_applicable(s) -> bool:
    got = extract(s.content.body, FreshSupply(set(all_names(s))))
    return got is not None and s.content.binder not in list_fv(got[1])


def is_db_at(s) -> bool:
    return isinstance(s, App) and isinstance(peel_list(s.fun)[0], Abs)


def r_redexes(t, weak: bool = False) -> list:
    out = []
    for path, s in iter_paths(t):
        if is_db_at(s) and not (weak and Sel.ABS_BODY in path):
            out.append(Redex(path, RuleTag.DB))
        rule = sub_rule_at(s)
        if rule is not None:
            out.append(Redex(path, rule))
    return out


def sub_redexes(t) -> list:
    return [r for r in r_redexes(t) if r.rule in SUB_RULES]


# ---------------------------------------------------------------------------
# cut extraction for the abs rule


def extract(u, supply: FreshSupply):
    """Permute the cuts of ``u`` outwards until a pure term is left.

    Returns ``(p, cuts)`` with ``cuts`` inner-to-outer, or ``None`` when an
    abstraction inside ``u`` binds a variable of one of its cut contents, so
    the cut cannot leave it.  Cut contents are left untouched.
    """
    if isinstance(u, Var):
        return u, []
    if isinstance(u, Abs):
        got = extract(u.body, supply)
        if got is None:
            return None
        p, cuts = got
        if u.binder in list_fv(cuts):
            return None
        p, cuts = rename_list_binders(p, cuts, {u.binder}, supply)
        return Abs(u.binder, p), cuts
    if isinstance(u, App):
        ga = extract(u.fun, supply)
        gc = extract(u.arg, supply) if ga is not None else None
        if gc is None:
            return None
        pa, la = ga
        pc, lc = gc
        bad_a = set(free_vars(pc)) | list_fv(lc) | list_dom(lc)
        pa, la = rename_list_binders(pa, la, bad_a, supply)
        bad_c = set(free_vars(pa)) | list_fv(la)
        pc, lc = rename_list_binders(pc, lc, bad_c, supply)
        return App(pa, pc), la + lc
    got = extract(u.body, supply)
    if got is None:
        return None
    p, cuts = got
    return p, cuts + [(u.binder, u.content, type(u))]


def _unwrap(t, n):
    cuts = []
    for _ in range(n):
        cuts.append((t.binder, t.content, type(t)))
        t = t.body
    cuts.reverse()
    return t, cuts


def _free_list(t, cuts, bad, supply):
    """Rename list binders so that the list can float over free names ``bad``."""
    return rename_list_binders(t, cuts, set(bad), supply)


# ---------------------------------------------------------------------------
# contraction


def contract(s, rule: RuleTag, supply: FreshSupply, around=(), names_avoided=False):
    """Contract the redex ``s`` with ``rule``; returns ``(result, witness)``.

    ``around`` lists the names bound above the redex; a dB step renames its
    binder away from them so that traces stay readable.  ``names_avoided``
    tells that the supply already avoids every name of ``s``.
    """
    if not names_avoided:
        supply.avoid(all_names(s))
    if rule in PI_RULES:
        return _contract_pi(s, rule, supply), {}
    if rule is RuleTag.DB:
        if not is_db_at(s):
            raise InvalidRedex("dB needs an abstraction in function position")
        lam, cuts = peel_list(s.fun)
        if lam.binder in around:
            nb = supply.fresh(lam.binder, set(around))
            lam = Abs(nb, rename_free(lam.body, lam.binder, nb, supply))
        lam, cuts = _free_list(lam, cuts, free_vars(s.arg), supply)
        return wrap(Sub(lam.body, lam.binder, s.arg), cuts), {"binder": lam.binder, "cuts": len(cuts)}
    if rule is RuleTag.ABS:
        if not isinstance(s, Dist):
            raise InvalidRedex("abs needs a distributor")
        lam = s.content
        got = extract(lam.body, supply)
        if got is None or lam.binder in list_fv(got[1]):
            raise InvalidRedex("abs: the distributor body keeps a cut on its binder")
        p, cuts = got
        p, cuts = rename_list_binders(p, cuts, {lam.binder}, supply)
        val = Abs(lam.binder, p)
        val, cuts = _free_list(val, cuts, free_vars(s.body) - {s.binder}, supply)
        return wrap(subst_meta(s.body, s.binder, val, supply), cuts), {
            "value": val, "cuts": cuts,
        }
    if not isinstance(s, Sub):
        raise InvalidRedex(f"{rule.value} needs an explicit substitution")
    inner, cuts = peel_list(s.content)
    inner, cuts = _free_list(inner, cuts, free_vars(s.body) - {s.binder}, supply)
    t, x = s.body, s.binder
    if rule is RuleTag.APP:
        if not isinstance(inner, App):
            raise InvalidRedex("app needs an application content")
        avoid = all_names(s)
        y = supply.fresh(x, avoid)
        z = supply.fresh(x, avoid)
        body = subst_meta(t, x, App(Var(y), Var(z)), supply)
        return wrap(Sub(Sub(body, y, inner.fun), z, inner.arg), cuts), {
            "left": y, "right": z, "cuts": len(cuts),
        }
    if rule is RuleTag.DIST:
        if not isinstance(inner, Abs):
            raise InvalidRedex("dist needs an abstraction content")
        z = supply.fresh("z", all_names(s))
        lam = Abs(inner.binder, Sub(Var(z), z, inner.body))
        return wrap(Dist(t, x, lam), cuts), {"cuts": len(cuts)}
    if rule is RuleTag.VAR:
        if not isinstance(inner, Var):
            raise InvalidRedex("var needs a variable content")
        return wrap(subst_meta(t, x, inner, supply), cuts), {"var": inner.name, "cuts": len(cuts)}
    raise InvalidRedex(f"unknown rule {rule}")


def _rename_cut(c, bad, supply):
    if c.binder not in bad:
        return c
    nb = supply.fresh(c.binder, bad)
    return type(c)(rename_free(c.body, c.binder, nb, supply), nb, c.content)


def _contract_pi(s, rule, supply):
    if rule is RuleTag.PI1:
        if not (isinstance(s, Abs) and isinstance(s.body, CUTS)):
            raise InvalidRedex("pi1 needs an abstraction over a cut")
        if s.binder in free_vars(s.body.content):
            raise InvalidRedex("pi1: the abstraction binds a variable of the content")
        c = _rename_cut(s.body, {s.binder}, supply)
        return type(c)(Abs(s.binder, c.body), c.binder, c.content)
    if rule is RuleTag.PI2:
        if not (isinstance(s, App) and isinstance(s.fun, CUTS)):
            raise InvalidRedex("pi2 needs a cut in function position")
        c = _rename_cut(s.fun, free_vars(s.arg), supply)
        return type(c)(App(c.body, s.arg), c.binder, c.content)
    if rule is RuleTag.PI3:
        if not (isinstance(s, App) and isinstance(s.arg, CUTS)):
            raise InvalidRedex("pi3 needs a cut in argument position")
        c = _rename_cut(s.arg, free_vars(s.fun), supply)
        return type(c)(App(s.fun, c.body), c.binder, c.content)
    if not (isinstance(s, Sub) and isinstance(s.content, CUTS)):
        raise InvalidRedex("pi4 needs a substitution whose content is a cut")
    c = _rename_cut(s.content, free_vars(s.body) | {s.binder}, supply)
    return type(c)(Sub(s.body, s.binder, c.body), c.binder, c.content)


def fire(t, r: Redex, supply: FreshSupply):
    """Fire the redex ``r`` of ``t`` and return the new term."""
    return fire_with_witness(t, r, supply)[0]


def fire_with_witness(t, r: Redex, supply: FreshSupply, names_avoided=False):
    try:
        s = subterm(t, r.path)
    except ValueError as exc:
        raise InvalidRedex(str(exc)) from None
    if not names_avoided:
        supply.avoid(all_names(t))
    new, witness = contract(s, r.rule, supply, binders_above(t, r.path), True)
    try:
        return replace_at(t, r.path, new), witness
    except TypeError as exc:
        raise InvalidRedex(str(exc)) from None


# ---------------------------------------------------------------------------
# substitution normal forms


def _first_sub(t, path=()):
    """Leftmost-innermost replication redex."""
    if isinstance(t, Abs):
        return _first_sub(t.body, path + (Sel.ABS_BODY,))
    if isinstance(t, App):
        return _first_sub(t.fun, path + (Sel.APP_FUN,)) or _first_sub(
            t.arg, path + (Sel.APP_ARG,)
        )
    if isinstance(t, CUTS):
        found = _first_sub(t.body, path + (Sel.CUT_BODY,)) or _first_sub(
            t.content, path + (Sel.CUT_CONTENT,)
        )
        if found:
            return found
        rule = sub_rule_at(t)
        if rule is not None:
            return Redex(path, rule)
    return None


def sub_trace(t, supply: FreshSupply, fuel: int = SUB_FUEL) -> Trace:
    trace = Trace(t)
    cur = t
    for _ in range(fuel):
        r = _first_sub(cur)
        if r is None:
            return trace
        cur, w = fire_with_witness(cur, r, supply)
        trace.steps.append(Step(r.rule, r.path, cur, w))
    raise InternalNonTermination("substitution normalization did not stop")


def sub_normalize(t, supply: FreshSupply):
    """The unique normal form for the replication rules (a pure term)."""
    return sub_trace(t, supply).final


def unfold(t, supply: FreshSupply | None = None):
    """Execute every cut as a meta-level substitution."""
    supply = supply or FreshSupply(set(all_names(t)))
    if isinstance(t, Var):
        return t
    if isinstance(t, Abs):
        return Abs(t.binder, unfold(t.body, supply))
    if isinstance(t, App):
        return App(unfold(t.fun, supply), unfold(t.arg, supply))
    return subst_meta(unfold(t.body, supply), t.binder, unfold(t.content, supply), supply)


def beta_expand_step(p, redex, supply: FreshSupply) -> Trace:
    """Simulate one beta step of a pure term by dB followed by replication steps."""
    if not is_pure(p):
        raise NotPure("beta simulation starts from a pure term")
    try:
        s = subterm(p, redex)
    except ValueError:
        raise NotABetaRedex("path does not address a subterm") from None
    if not (isinstance(s, App) and isinstance(s.fun, Abs)):
        raise NotABetaRedex("not a beta redex")
    cur, w = fire_with_witness(p, Redex(tuple(redex), RuleTag.DB), supply)
    trace = Trace(p, [Step(RuleTag.DB, tuple(redex), cur, w)])
    rest = sub_trace(cur, supply)
    trace.steps.extend(rest.steps)
    return trace


def one_step_reducts(t, supply: FreshSupply, weak=False):
    out = []
    for r in r_redexes(t, weak):
        out.append((r, fire(t, r, supply)))
    return out


@dataclass
class ConfluenceReport:
    endpoints: int = 0
    normal_forms: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    inconclusive: int = 0

    @property
    def confluent(self) -> bool:
        return not self.violations


def confluence_probe(t, depth: int, supply: FreshSupply, fuel: int = 1000) -> ConfluenceReport:
    """Explore every reduction of length at most ``depth`` and compare outcomes.

    Each endpoint is unfolded and beta-normalized with bounded fuel; two
    different normal forms are reported as a violation.
    """
    from .errors import FuelExhausted
    from .oracle import beta_normalize

    seen = {alpha_key(t): t}
    frontier = deque([(t, 0)])
    while frontier:
        cur, d = frontier.popleft()
        if d == depth:
            continue
        for _, nxt in one_step_reducts(cur, supply):
            k = alpha_key(nxt)
            if k not in seen:
                seen[k] = nxt
                frontier.append((nxt, d + 1))
    report = ConfluenceReport(endpoints=len(seen))
    for term in seen.values():
        try:
            nf = beta_normalize(unfold(sub_normalize(term, supply), supply), fuel, supply)
        except FuelExhausted:
            report.inconclusive += 1
            continue
        report.normal_forms.setdefault(alpha_key(nf), nf)
    if len(report.normal_forms) > 1:
        report.violations = list(report.normal_forms.values())
    return report


__all__ = [
    "RuleTag", "Redex", "PI_RULES", "SUB_RULES", "pi_redexes", "r_redexes", "sub_redexes",
    "pi_rule_at", "sub_rule_at", "extract", "contract", "fire", "fire_with_witness",
    "sub_trace", "sub_normalize", "unfold", "beta_expand_step", "confluence_probe",
    "ConfluenceReport", "one_step_reducts", "Status",
]
