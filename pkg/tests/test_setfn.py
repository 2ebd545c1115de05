import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarsfm.setfn import (
    CardinalityFunction,
    FractionalFunction,
    MomentsFunction,
    QuadraticFunction,
    TabularFunction,
    elements,
    evaluate,
    full_mask,
    is_submodular,
    lex_key,
    marginal,
    marginals,
    mask_of,
    modular,
    negate,
    normalize,
    submodularity_slacks,
)

from conftest import random_submodular, tabular_functions


def test_mask_helpers():
    assert mask_of([0, 2]) == 0b101
    assert elements(0b1011) == [0, 1, 3]
    assert full_mask(4) == 15
    assert lex_key(0b110) == (1, 2)
    assert lex_key(0b001) < lex_key(0b011) < lex_key(0b010)


def test_example1_value(ex1):
    assert evaluate(ex1, [0, 1]) == -1.0


def test_quadratic_counts_both_offdiagonal_entries():
    f = QuadraticFunction([[0, -2], [-2, 0]], [0, 0])
    assert f(0b11) == -4.0


def test_quadratic_rejects_diagonal_and_from_matrix_folds_it():
    with pytest.raises(ValueError):
        QuadraticFunction([[1, 0], [0, 0]], [0, 0])
    f = QuadraticFunction.from_matrix([[1, 2], [0, 3]], [1, 1])
    assert f(0b01) == 2.0 and f(0b10) == 4.0 and f(0b11) == 8.0


def test_tabular_needs_full_table():
    with pytest.raises(ValueError):
        TabularFunction(2, [0, 1, 2])


def test_mask_outside_ground_set_rejected(ex1):
    with pytest.raises(ValueError):
        ex1(0b100)


def test_moments_single_element():
    f = MomentsFunction([1], [1], [1], [1], 0.5, 1.0)
    assert f(1) == pytest.approx(-0.5)


def test_fractional_formula():
    f = FractionalFunction([1, 2], [3, 1], [1, 0], omega=0.5)
    assert f(0b11) == pytest.approx(4 / 4 - 0.5)
    with pytest.raises(ValueError):
        FractionalFunction([0, 1], [1, 1], [0, 0])


def test_marginal_examples(ex2):
    h = TabularFunction(2, [0, 2, 3, 4])
    assert marginal(h, 0, 0b10) == 1.0
    assert marginal(ex2, 0, 0b110) == pytest.approx(0.95)
    f = modular([3.0, -1.0, 2.0])
    for S in range(8):
        for i in range(3):
            if not (S >> i) & 1:
                assert marginal(f, i, S) == pytest.approx(f.c[i])


def test_marginal_rejects_member():
    with pytest.raises(ValueError):
        marginal(TabularFunction(2, [0, 2, 3, 4]), 0, 0b01)


def test_marginals_vector(ex2):
    m = marginals(ex2, 0b001)
    assert np.isnan(m[0])
    assert m[1:] == pytest.approx([0.9, 0.9])


def test_normalize():
    f = TabularFunction(2, [5, 6, 7, 9])
    g, off = normalize(f)
    assert off == 5 and g(0) == 0 and g(3) == 4
    card = CardinalityFunction(3, lambda k: k + 3)
    g, off = normalize(card)
    assert off == 3 and [g(S) for S in range(8)] == [bin(S).count("1") for S in range(8)]


def test_normalize_keeps_example1(ex1):
    g, off = normalize(ex1)
    assert off == 0 and g is ex1


def test_is_submodular_examples(ex1, ex2):
    ok, wit = is_submodular(ex2)
    assert not ok
    S, i, j = wit
    # by symmetry every violation pairs two doubletons with N: 3.8 < 3.85
    slack = ex2(S | 1 << i) + ex2(S | 1 << j) - ex2(S | 1 << i | 1 << j) - ex2(S)
    assert slack == pytest.approx(-0.05)
    assert bin(S).count("1") == 1 and not S & (1 << i | 1 << j)
    assert not is_submodular(ex1)[0]
    assert is_submodular(negate(ex1))[0]
    assert is_submodular(modular([1.0, -2.0, 0.5]))[0]


def test_is_submodular_rejects_large_n():
    with pytest.raises(ValueError):
        is_submodular(modular(np.zeros(21)))


def test_submodularity_slacks_count():
    f = random_submodular(np.random.default_rng(0), 5)
    s = submodularity_slacks(f)
    assert s.size == 10 * 8 and s.min() >= -1e-9


@given(tabular_functions(n_max=6, normalized=False))
def test_normalized_value_at_empty_is_zero(f):
    g, off = normalize(f)
    assert g(0) == 0.0
    for S in range(1 << f.n):
        assert g(S) == pytest.approx(f(S) - off, abs=1e-12)


@given(tabular_functions(n_max=6))
def test_modular_iff_sub_and_supermodular(f):
    both = is_submodular(f)[0] and is_submodular(negate(f))[0]
    c = np.array([f(1 << i) for i in range(f.n)])
    is_mod = all(abs(f(S) - c[elements(S)].sum()) <= 1e-8 for S in range(1 << f.n))
    assert both == is_mod


@given(st.integers(0, 2**31), st.integers(1, 6))
def test_modular_tables_pass_both_checks(seed, n):
    c = np.random.default_rng(seed).uniform(-5, 5, n)
    assert is_submodular(modular(c))[0] and is_submodular(negate(modular(c)))[0]


@given(tabular_functions(n_max=5), st.randoms())
def test_marginal_telescoping(f, rnd):
    order = list(range(f.n))
    rnd.shuffle(order)
    S, total = 0, 0.0
    for i in order:
        total += marginal(f, i, S)
        S |= 1 << i
    assert total == pytest.approx(f(full_mask(f.n)), abs=1e-9)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_vectorized_matches_scalar(n):
    rng = np.random.default_rng(n)
    Q = rng.normal(size=(n, n))
    np.fill_diagonal(Q, 0)
    fams = [
        QuadraticFunction(Q, rng.normal(size=n)),
        MomentsFunction(*rng.uniform(0, 2, (4, n)), 0.3, 2.0),
        FractionalFunction(rng.uniform(0.1, 2, n), rng.uniform(0, 2, n), rng.uniform(0, 2, n), 0.7),
    ]
    masks = np.arange(1 << n)
    for f in fams:
        many = f.evaluate_many(masks)
        for S in masks:
            x = (S >> np.arange(n)) & 1
            assert many[S] == pytest.approx(f._eval(x.astype(float)), abs=1e-12)
            assert f(int(S)) == pytest.approx(many[S], abs=1e-12)


def test_evaluate_is_deterministic():
    f = MomentsFunction([1, 2, 3], [0.5, 1, 1], [1, 1, 2], [1, 0, 1], 0.4)
    for S in range(8):
        assert f(S) == f(S)


def test_moments_lambda_one_submodular_and_zero_supermodular():
    rng = np.random.default_rng(3)
    mu = rng.uniform(0, 100, 6)
    sig, gam, kap = (rng.uniform(0, mu) for _ in range(3))
    assert is_submodular(MomentsFunction(mu, sig, gam, kap, 1.0))[0]
    assert is_submodular(negate(MomentsFunction(mu, sig, gam, kap, 0.0)))[0]


def test_all_pairs_local_equals_global_definition():
    f = random_submodular(np.random.default_rng(5), 4)
    for S, T in itertools.product(range(16), repeat=2):
        assert f(S | T) + f(S & T) <= f(S) + f(T) + 1e-9
