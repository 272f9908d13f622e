import itertools
from collections import Counter

from hypothesis import given
from hypothesis import strategies as st

from corpus import pure_term, u_term
from lambdar.measures import (
    A,
    B,
    cl_measure,
    level,
    mul_geq,
    mul_greater,
    mul_less,
    o_greater,
    o_less,
    show_measure,
)
from lambdar.syntax import parse
from lambdar.term_core import FreshSupply, all_names, free_vars, subst_meta

objects = st.one_of(
    st.builds(A, st.integers(0, 3), st.integers(1, 3)),
    st.builds(B, st.integers(0, 3)),
)
multisets = st.lists(objects, max_size=4).map(Counter)


def test_level_examples():
    t = parse("x[x/z[y/w]][w/w1]")
    assert level(t, "z") == 1
    assert level(t, "w1") == 3
    assert level(t, "y") == 0
    assert level(parse(r"\x.x y"), "y") == 0
    assert level(parse("x y"), "q") == 0


def test_object_order():
    assert o_greater(A(2, 1), A(1, 9))
    assert all(o_greater(B(1), A(1, n)) for n in range(1, 6))
    assert not o_greater(A(1, 3), B(1))
    assert o_greater(A(2, 3), B(1))
    assert o_less(A(1, 9), A(2, 1))


def test_multiset_examples():
    assert mul_greater(Counter([A(1, 4)]), Counter([A(1, 1), A(1, 2)]))
    m = Counter([A(1, 1), B(0)])
    assert not mul_less(m, m)
    assert mul_geq(m, m)


def brute_mul_greater(m1, m2):
    """m1 > m2 iff m2 = (m1 - X) + Y with X non-empty and each of Y below some element of X."""
    elems = list(m1.elements())
    for r in range(1, len(elems) + 1):
        for xs in set(itertools.combinations(sorted(elems, key=repr), r)):
            x = Counter(xs)
            rest = m1 - x
            if rest - m2:
                continue
            y = m2 - rest
            if all(any(o_greater(a, b) for a in x) for b in y.elements()):
                return True
    return False


@given(multisets, multisets)
def test_multiset_extension_matches_brute_force(m1, m2):
    assert mul_greater(m1, m2) == brute_mul_greater(m1, m2)


@given(multisets, multisets, multisets)
def test_multiset_order_is_strict(m1, m2, m3):
    assert not mul_greater(m1, m1)
    if mul_greater(m1, m2) and mul_greater(m2, m3):
        assert mul_greater(m1, m3)


def test_cl_examples():
    assert show_measure(cl_measure(parse(r"(y y)[y/(\z.x) w]"))) == "[a(1,4)]"
    assert show_measure(cl_measure(parse(r"((y1 w) (y1 w))[y1//\z.x1[x1/x]]"))) == "[a(1,1), b(0)]"


@given(st.integers(0, 10**6))
def test_cl_of_pure_terms_is_empty(seed):
    p = pure_term(seed)
    assert cl_measure(p) == Counter()
    assert all(level(p, z) == 0 for z in free_vars(p))


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_level_under_pure_substitution(s1, s2):
    t = u_term(s1)
    p = pure_term(s2, 4)
    sup = FreshSupply(all_names(t) | all_names(p))
    x = "x"
    for z in ("y", "z", "w"):
        if z == x:
            continue
        got = level(subst_meta(t, x, p, sup.copy()), z)
        if z not in free_vars(p):
            assert got == level(t, z)
        else:
            assert got == max(level(t, z), level(t, x))
