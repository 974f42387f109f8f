import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbquery.boolean_poly import (
    EnumerationCapError,
    MultilinearPoly,
    RawPoly,
    character_inner,
    cube_values,
    evaluate,
    hat_seq,
    multilinear_reduce,
    orthogonality_check,
    p_norm,
    reduction_exhibit,
    sup_norm,
)
from cbquery.constructions import chsh_form, random_cubic

from oracles import brute_hat, brute_norm, brute_values, cube_points


@st.composite
def polys(draw, max_n=8, integer=False):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(0, 12))
    coeff = st.integers(-5, 5) if integer else st.floats(-3, 3, allow_nan=False)
    terms = {}
    for _ in range(k):
        s = draw(st.sets(st.integers(1, n), max_size=n))
        terms[tuple(sorted(s))] = draw(coeff)
    return MultilinearPoly.from_terms(n, terms)


# -- evaluate -------------------------------------------------------------------------


def test_evaluate_chsh_all_ones():
    assert evaluate(chsh_form(), (1, 1, 1, 1)) == 1


def test_evaluate_zero():
    assert evaluate(MultilinearPoly.zero(3), (1, -1, 1)) == 0


def test_evaluate_monomial():
    assert evaluate(MultilinearPoly.monomial(3, (1, 2, 3)), (-1, 1, 1)) == -1


def test_evaluate_rejects_wrong_length():
    with pytest.raises(ValueError, match="length 2, expected 3"):
        evaluate(MultilinearPoly.monomial(3, (1, 2, 3)), (1, 1))


def test_evaluate_rejects_non_sign():
    with pytest.raises(ValueError):
        evaluate(MultilinearPoly.monomial(2, (1,)), (1, 0))


def test_chsh_is_sign_valued():
    assert {evaluate(chsh_form(), x) for x in cube_points(4)} == {-1.0, 1.0}


@given(polys())
@settings(max_examples=60, deadline=None)
def test_cube_values_match_brute_force(f):
    vals = cube_values(f)
    expected = brute_values(f)
    # cube point z has x_i = -1 iff bit i-1 is set; itertools.product varies the last coordinate fastest
    order = [sum(1 << i for i, xi in enumerate(x) if xi == -1) for x in cube_points(f.n)]
    np.testing.assert_allclose(vals[order], expected, rtol=0, atol=1e-12)


# -- norms ---------------------------------------------------------------------------


def test_chsh_l1_and_l2():
    f = chsh_form()
    assert p_norm(f, 1) == 1.0
    assert p_norm(f, 2) ** 2 == 1.0


def test_monomial_sup():
    assert p_norm(MultilinearPoly.monomial(3, (1, 2, 3)), math.inf) == 1.0


def test_random_cubic_l2_is_sqrt_binomial():
    f = random_cubic(10, 7)
    assert p_norm(f, 2) == pytest.approx(math.sqrt(120), rel=1e-12)


@pytest.mark.parametrize("p", [1, 2, 3, math.inf])
def test_p_norm_against_brute_force(p):
    f = random_cubic(7, 3) + MultilinearPoly.from_terms(7, {(1,): 0.5, (): -1.25})
    assert p_norm(f, p) == pytest.approx(brute_norm(f, p), rel=1e-12)


@given(polys(max_n=10))
@settings(max_examples=80, deadline=None)
def test_parseval(f):
    assert p_norm(f, 2) ** 2 == pytest.approx(f.fourier_weight(), rel=1e-9, abs=1e-12)


@given(polys(max_n=9))
@settings(max_examples=60, deadline=None)
def test_norm_monotonicity(f):
    l1, l2, linf = p_norm(f, 1), p_norm(f, 2), p_norm(f, math.inf)
    assert l1 <= l2 * (1 + 1e-12) + 1e-15
    assert l2 <= linf * (1 + 1e-12) + 1e-15


def test_cap_rejects_exact_request():
    f = MultilinearPoly.monomial(30, (1, 2, 3))
    with pytest.raises(EnumerationCapError):
        p_norm(f, 2)
    with pytest.raises(EnumerationCapError):
        sup_norm(f)


def test_sampling_sup_is_labelled_lower_bound():
    f = random_cubic(30, 1)
    bound = sup_norm(f, sampling=True, seed=3, restarts=16)
    assert not bound.exact and bound.label == "lower bound only"
    assert evaluate(f, bound.argmax) == pytest.approx(bound.value * np.sign(evaluate(f, bound.argmax)))
    assert 0 < bound.value <= math.comb(30, 3)


def test_sampling_finds_exact_max_on_small_form():
    f = random_cubic(9, 4)
    exact = sup_norm(f)
    sampled = sup_norm(f, cap=5, sampling=True, seed=0)
    assert exact.exact and not sampled.exact
    assert sampled.value <= exact.value
    assert sampled.value == exact.value


def test_lower_cap_forces_sampling():
    f = random_cubic(8, 1)
    with pytest.raises(EnumerationCapError):
        sup_norm(f, cap=6)


# -- reduction ------------------------------------------------------------------------


def test_reduce_square_is_one():
    g = RawPoly.from_dict(1, {(2,): 1.0})
    assert multilinear_reduce(g) == MultilinearPoly.from_terms(1, {(): 1.0})


def test_reduce_exhibit_vanishes():
    g = RawPoly.from_dict(2, {(2, 2): 1, (2, 0): -1, (0, 2): -1, (0, 0): 1})
    assert multilinear_reduce(g).is_zero()


def test_reduce_x1sq_x2():
    g = RawPoly.from_dict(2, {(2, 1): 1.0})
    assert multilinear_reduce(g) == MultilinearPoly.monomial(2, (2,))


def test_exhibit_restricts_to_displayed_identity():
    h = reduction_exhibit()
    assert h.coefficient((2, 2, 0, 0)) == 1.0
    r = h.fix_to_one([3, 4])
    assert r == RawPoly.from_dict(2, {(2, 2): 1, (0, 0): 1, (2, 0): -1, (0, 2): -1})
    for x in cube_points(2):
        assert r.evaluate(x) == 0


def test_rawpoly_rejects_duplicates_and_negative_exponents():
    with pytest.raises(ValueError, match="duplicate"):
        RawPoly(1, (((1,), 1.0), ((1,), 2.0)))
    with pytest.raises(ValueError, match="negative"):
        RawPoly(1, (((-1,), 1.0),))


@st.composite
def raw_polys(draw, integer=True):
    n = draw(st.integers(1, 10))
    k = draw(st.integers(0, 10))
    terms = {}
    for _ in range(k):
        alpha = tuple(draw(st.lists(st.integers(0, 4), min_size=n, max_size=n)))
        if sum(alpha) > 4:
            continue
        c = draw(st.integers(-6, 6)) if integer else draw(st.floats(-2, 2, allow_nan=False))
        terms[alpha] = c
    return RawPoly.from_dict(n, terms)


@given(raw_polys())
@settings(max_examples=50, deadline=None)
def test_reduction_soundness_exact(g):
    f = multilinear_reduce(g)
    for x in cube_points(g.n):
        assert evaluate(f, x) == g.evaluate(x)


@given(raw_polys(integer=False))
@settings(max_examples=40, deadline=None)
def test_reduction_soundness_float(g):
    f = multilinear_reduce(g)
    for x in cube_points(g.n):
        assert abs(evaluate(f, x) - g.evaluate(x)) <= 1e-12


# -- hat_seq and orthogonality --------------------------------------------------------


def test_hat_seq_examples():
    phi = MultilinearPoly.monomial(2, (1, 2))
    assert hat_seq(phi, (1, 2)) == 1
    assert hat_seq(phi, (1, 1)) == 0
    assert hat_seq(phi, (1, 3)) == 0
    assert brute_hat(phi, (1, 3)) == 0


def test_hat_seq_rejects_out_of_range():
    with pytest.raises(ValueError):
        hat_seq(MultilinearPoly.monomial(2, (1, 2)), (1, 4))


@given(polys(max_n=5), st.data())
@settings(max_examples=40, deadline=None)
def test_hat_seq_matches_cube_average(phi, data):
    t = data.draw(st.integers(1, 4))
    seq = data.draw(st.lists(st.integers(1, phi.n + 1), min_size=t, max_size=t))
    assert hat_seq(phi, seq) == pytest.approx(brute_hat(phi, seq), abs=1e-12)


@given(polys(max_n=6), st.data())
@settings(max_examples=40, deadline=None)
def test_hat_seq_permutation_invariance(phi, data):
    seq = data.draw(st.lists(st.integers(1, phi.n + 1), min_size=1, max_size=4))
    perm = data.draw(st.permutations(seq))
    assert hat_seq(phi, seq) == hat_seq(phi, perm)


def test_hat_seq_degree_t_form_returns_coefficient():
    f = random_cubic(5, 2)
    for s in itertools.combinations(range(1, 6), 3):
        for perm in itertools.permutations(s):
            assert hat_seq(f, perm) == f.coefficient(s)


def test_character_inner_examples():
    assert character_inner(3, (1, 2), (1, 2)) == 1
    assert character_inner(3, (1,), (2,)) == 0


@pytest.mark.parametrize("n", [0, 1, 4, 7])
def test_orthogonality_scan(n):
    report = orthogonality_check(n)
    assert report.max_deviation == 0.0 and report.passed
    assert report.pairs == 4**n


def test_orthogonality_rejects_large_n():
    with pytest.raises(ValueError):
        orthogonality_check(13)


# -- representation -------------------------------------------------------------------


def test_json_round_trip():
    f = random_cubic(6, 5).scale(0.1)
    assert MultilinearPoly.from_json(f.to_json()) == f


def test_rejects_variables_out_of_range():
    with pytest.raises(ValueError, match="outside"):
        MultilinearPoly.monomial(2, (1, 3))


def test_immutable():
    f = MultilinearPoly.monomial(2, (1,))
    with pytest.raises(TypeError):
        f.coeffs[1] = 2.0
    with pytest.raises(AttributeError):
        f.n = 3


def test_times_monomial_reduces_squares():
    f = MultilinearPoly.monomial(3, (1, 2))
    assert f.times_monomial((2, 3)) == MultilinearPoly.monomial(3, (1, 3))
