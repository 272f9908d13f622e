import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import pure_term, same, u_term
from lambdar.errors import InvalidRedex, NotABetaRedex
from lambdar.measures import level
from lambdar.oracle import Reach, beta_reach
from lambdar.rewrite import (
    PI_RULES,
    Redex,
    RuleTag,
    beta_expand_step,
    confluence_probe,
    fire,
    pi_redexes,
    r_redexes,
    sub_normalize,
    sub_redexes,
    unfold,
)
from lambdar.syntax import parse
from lambdar.term_core import (
    FreshSupply,
    Sel,
    Sub,
    Var,
    all_names,
    alpha_eq,
    free_vars,
    in_u,
    is_pure,
    subst_meta,
)

seeds = st.integers(0, 10**6)


def sup(t):
    return FreshSupply(all_names(t))


def rules(t):
    return [r.rule for r in r_redexes(t)]


def test_pi_redex_examples():
    t = parse(r"x[x/w[z1//I] (\y.y[z2/z3])]")
    assert any(r.path[:1] == (Sel.CUT_CONTENT,) for r in pi_redexes(t))
    assert pi_redexes(parse(r"\x.x y")) == []
    # the abstraction binds a variable of the cut content
    t = parse(r"\y.x[x/y]")
    assert RuleTag.PI1 not in [r.rule for r in pi_redexes(t) if r.path == ()]


def test_pi1_not_offered_inside_distributor():
    t = parse(r"x[x//\y.z[z/w]]")
    assert all(r.rule is not RuleTag.PI1 for r in pi_redexes(t))
    with pytest.raises(InvalidRedex):
        fire(t, Redex((Sel.CUT_CONTENT,), RuleTag.PI1), sup(t))


def test_r_redex_examples():
    assert rules(parse(r"(\x.x x) (y z)")) == [RuleTag.DB]
    assert rules(parse(r"(x x)[x/\y.(w w) y]")) == [RuleTag.DIST]
    t = parse(r"(x x)[x//\y.((z3 z2) y)[z3/w][z2/w]]")
    assert RuleTag.ABS in rules(t)


def test_weak_filter_skips_db_under_abstraction():
    t = parse(r"\z.(\x.x) z")
    assert rules(t) == [RuleTag.DB]
    assert r_redexes(t, weak=True) == []


def test_fire_examples():
    t = parse("(x x)[x/y z]")
    assert same(fire(t, Redex((), RuleTag.APP), sup(t)), "((x1 x2) (x1 x2))[x1/y][x2/z]")
    t = parse(r"(x x)[x/\y.(w w) y]")
    assert same(fire(t, Redex((), RuleTag.DIST), sup(t)), r"(x x)[x//\y.z[z/(w w) y]]")
    t = parse(r"(\x.x)[z4/z5] u")
    assert same(fire(t, Redex((), RuleTag.DB), sup(t)), "x[x/u][z4/z5]")


def test_fire_rejects_mismatch():
    t = parse("x y")
    with pytest.raises(InvalidRedex):
        fire(t, Redex((), RuleTag.DB), sup(t))
    with pytest.raises(InvalidRedex):
        fire(t, Redex((Sel.ABS_BODY,), RuleTag.VAR), sup(t))


def test_sub_normalize_and_unfold_examples():
    t = parse("(x x)[x/y[y/z]]")
    assert same(sub_normalize(t, sup(t)), "z z")
    assert same(unfold(parse("x[x/z[y/w]][w/w1]")), "z")
    p = parse(r"\x.x y")
    assert sub_normalize(p, sup(p)) == p and unfold(p) == p


@given(seeds)
def test_sub_normal_form_is_pure_unfolding(seed):
    t = u_term(seed)
    nf = sub_normalize(t, sup(t))
    assert is_pure(nf)
    assert alpha_eq(nf, unfold(t))


@given(seeds, seeds)
def test_full_composition_on_pure_terms(s1, s2):
    t, p = pure_term(s1, 6), pure_term(s2, 4)
    s = FreshSupply(all_names(t) | all_names(p))
    assert alpha_eq(sub_normalize(Sub(t, "x", p), s), subst_meta(t, "x", p, s))


@settings(max_examples=150)
@given(seeds)
def test_pi_and_sub_steps_keep_unfold_and_levels(seed):
    t = u_term(seed, 6 + seed % 8)
    rng = random.Random(seed)
    rs = pi_redexes(t) + sub_redexes(t)
    if not rs:
        return
    r = rng.choice(rs)
    new = fire(t, r, sup(t))
    assert alpha_eq(unfold(new), unfold(t))
    for z in free_vars(t):
        assert level(new, z) <= level(t, z)


@settings(max_examples=150)
@given(seeds)
def test_weak_steps_preserve_u(seed):
    t = u_term(seed, 6 + seed % 8)
    for r in r_redexes(t, weak=True):
        assert in_u(fire(t, r, sup(t)))


@settings(max_examples=80)
@given(seeds)
def test_db_projects_to_beta_reduction(seed):
    t = u_term(seed, 4 + seed % 7)
    for r in r_redexes(t):
        if r.rule is RuleTag.DB:
            new = fire(t, r, sup(t))
            assert beta_reach(unfold(t), unfold(new), 200, sup(t)) is Reach.REACHED


def test_beta_expand_step_examples():
    p = parse(r"(\x.x x) (y z)")
    tr = beta_expand_step(p, (), sup(p))
    assert [s.kind for s in tr.steps] == [RuleTag.DB, RuleTag.APP, RuleTag.VAR, RuleTag.VAR]
    assert same(tr.final, "(y z) (y z)")
    p = parse(r"(\x.z) u")
    assert same(beta_expand_step(p, (), sup(p)).final, "z")
    with pytest.raises(NotABetaRedex):
        beta_expand_step(parse("x y"), (), FreshSupply())


def test_confluence_probe():
    rep = confluence_probe(Var("x"), 2, FreshSupply())
    assert rep.confluent and rep.endpoints == 1
    t = parse(r"(\x.x x) (y z)")
    rep = confluence_probe(t, 2, sup(t))
    assert rep.confluent
    assert [n for n in rep.normal_forms.values()] and all(
        same(n, "(y z) (y z)") for n in rep.normal_forms.values()
    )


@settings(max_examples=40)
@given(seeds)
def test_confluence_probe_on_generated_terms(seed):
    t = u_term(seed, 4 + seed % 5)
    assert confluence_probe(t, 2, sup(t), fuel=200).confluent


def test_pi_rules_listed_in_order():
    assert [r.value for r in PI_RULES] == ["pi1", "pi2", "pi3", "pi4"]
