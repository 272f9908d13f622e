import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import same
from lambdar.errors import FuelExhausted, NotABetaRedex, NotPure
from lambdar.oracle import (
    GenConfig,
    Grammar,
    Reach,
    beta_normalize,
    beta_reach,
    beta_redexes,
    beta_step_at,
    gen_term,
    minimize,
    shrink,
)
from lambdar.rewrite import beta_expand_step
from lambdar.strategies import whr_step
from lambdar.syntax import parse
from lambdar.term_core import FreshSupply, Var, all_names, alpha_eq, check_grammar, free_vars, size

seeds = st.integers(0, 10**6)


def sup(t):
    return FreshSupply(all_names(t))


def test_beta_step_examples():
    t = parse(r"(\x.x x) (y z)")
    assert same(beta_step_at(t, (), sup(t)), "(y z) (y z)")
    t = parse(r"(\x.z) u")
    assert same(beta_step_at(t, (), sup(t)), "z")
    t = parse(r"(\x.x x) (I I)")
    assert same(beta_step_at(t, (), sup(t)), "(I I) (I I)")
    with pytest.raises(NotABetaRedex):
        beta_step_at(parse("x y"), (), FreshSupply())
    with pytest.raises(NotPure):
        beta_step_at(parse("x[x/y]"), (), FreshSupply())


def test_beta_reach_examples():
    p = parse(r"(\x.x x) (y z)")
    assert beta_reach(p, p, 0, sup(p)) is Reach.REACHED
    assert beta_reach(p, parse("(y z) (y z)"), 10, sup(p)) is Reach.REACHED
    assert beta_reach(parse("x"), parse("y"), 10, FreshSupply()) is Reach.NOT_WITHIN_FUEL


def test_beta_normalize():
    t = parse(r"(\x.x) ((\y.y) z)")
    assert beta_normalize(t, 10, sup(t)) == Var("z")
    with pytest.raises(FuelExhausted):
        beta_normalize(parse(r"(\x.x x) (\x.x x)"), 20, FreshSupply())


def test_beta_redexes_are_outermost_leftmost():
    t = parse(r"(\x.(\y.y) x) ((\z.z) w)")
    paths = beta_redexes(t)
    assert paths[0] == ()
    assert len(paths) == 3


def test_generator_basics():
    t = gen_term(GenConfig(seed=5, max_size=1))
    assert isinstance(t, Var) and t.name in ("x", "y", "z", "w")
    cfg = GenConfig(seed=9, max_size=12, grammar=Grammar.U)
    assert gen_term(cfg) == gen_term(cfg)
    assert not free_vars(gen_term(GenConfig(seed=3, max_size=10, closed=True)))
    with pytest.raises(ValueError):
        GenConfig(max_size=0)


def test_u_mode_samples_stay_in_u():
    for s in range(1000):
        t = gen_term(GenConfig(seed=s, max_size=4 + s % 12, grammar=Grammar.U))
        assert check_grammar(t, "U")


@settings(max_examples=150)
@given(seeds)
def test_generated_pure_terms_respect_size(seed):
    n = 1 + seed % 14
    t = gen_term(GenConfig(seed=seed, max_size=n))
    assert check_grammar(t, "Pure")
    assert size(t) <= max(n, 2)


@settings(max_examples=150)
@given(seeds)
def test_expansion_agrees_with_beta_on_every_redex(seed):
    p = gen_term(GenConfig(seed=seed, max_size=3 + seed % 9))
    for path in beta_redexes(p):
        got = beta_expand_step(p, path, sup(p)).final
        assert alpha_eq(got, beta_step_at(p, path, sup(p)))


@settings(max_examples=150)
@given(seeds)
def test_whr_is_a_head_beta_step(seed):
    p = gen_term(GenConfig(seed=seed, max_size=3 + seed % 9))
    got = whr_step(p)
    if got is not None:
        assert any(alpha_eq(got, beta_step_at(p, r, sup(p))) for r in beta_redexes(p))


def test_shrink_and_minimize():
    t = parse(r"(\x.x y) (z w)")
    cands = shrink(t)
    assert cands and all(size(c) < size(t) for c in cands)
    assert shrink(Var("x")) == []
    small = minimize(t, lambda u: "y" in free_vars(u))
    assert small == Var("y")
    assert minimize(t, lambda u: 1 / 0) == t
