import itertools
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from mpcomm.core import (
    U,
    BudgetExceeded,
    FInput,
    HighLowSplit,
    ModFourTriple,
    PromiseViolation,
    TripleVector,
    count_valid_inputs,
    enumerate_valid_inputs,
    f_big,
    f_mod4,
    g_m,
    is_valid_triple,
    sample_valid_input,
    sample_valid_triple_vector,
    toggle_msb,
    unique_completion,
)


@pytest.mark.parametrize("t, valid", [((0, 0, 0), True), ((1, 1, 0), True), ((1, 0, 0), False)])
def test_is_valid_triple(t, valid):
    assert is_valid_triple(ModFourTriple(*t)) is valid
    assert ModFourTriple(*t).is_valid is valid


@pytest.mark.parametrize("t, value", [((0, 0, 0), 0), ((1, 1, 0), 1), ((1, 1, 2), 0)])
def test_f_mod4(t, value):
    assert f_mod4(ModFourTriple(*t)) == value


def test_f_mod4_rejects_odd_sum():
    with pytest.raises(PromiseViolation):
        f_mod4(ModFourTriple(1, 0, 0))


def test_coordinates_outside_u_rejected():
    with pytest.raises(ValueError):
        ModFourTriple(4, 0, 0)


def test_unique_completion_examples():
    assert unique_completion(1, 0) == 1
    assert unique_completion(0, 0) == 2


def test_unique_completion_all_pairs():
    for y, z in itertools.product(U, repeat=2):
        hits = [x for x in U if ModFourTriple(x, y, z).is_valid and f_mod4(ModFourTriple(x, y, z)) == 1]
        assert hits == [unique_completion(y, z)]


def test_g_m_examples():
    assert g_m(TripleVector((1,), (1,), (0,))) == 1
    assert g_m(TripleVector((1, 0), (1, 0), (0, 0))) == 0


@given(st.lists(st.tuples(st.sampled_from(U), st.sampled_from(U)), min_size=1, max_size=8))
def test_g_m_on_unique_completions_is_one(pairs):
    ys, zs = zip(*pairs)
    xs = tuple(unique_completion(y, z) for y, z in pairs)
    assert g_m(TripleVector(xs, ys, zs)) == 1


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_g_m_is_and_of_coordinates(m, seed):
    v = sample_valid_triple_vector(m, seed)
    expected = 1
    for x, y, z in zip(v.xs, v.ys, v.zs):
        if (x + y + z) % 4 != 2:
            expected = 0
    assert g_m(v) == expected


def test_g_m_rejects_invalid_vector():
    v = TripleVector((1, 0), (1, 0), (0, 1))
    assert not v.is_valid
    with pytest.raises(PromiseViolation):
        g_m(v)


def test_triple_vector_lengths_must_match():
    with pytest.raises(ValueError):
        TripleVector((0, 1), (0,), (0, 1))


@pytest.mark.parametrize("m", range(1, 9))
def test_high_low_round_trip_exhaustive(m):
    for v in itertools.product(U, repeat=m):
        split = HighLowSplit.of(v)
        assert split.combine() == v


@given(st.lists(st.sampled_from(U), min_size=1, max_size=8))
def test_high_low_round_trip_property(v):
    split = HighLowSplit.of(v)
    assert split.combine() == tuple(v)
    assert split.high == tuple(x // 2 for x in v)
    assert split.low == tuple(x % 2 for x in v)


@pytest.mark.parametrize(
    "k, n, xs, value",
    [(3, 2, (1, 1, 0), 1), (2, 3, (4, 4), 0), (3, 3, (2, 3, 7), 1)],
)
def test_f_big_examples(k, n, xs, value):
    assert f_big(FInput(k, n, xs)) == value


def test_f_big_n1_is_parity():
    for xs in itertools.product((0, 1), repeat=3):
        inp = FInput(3, 1, xs)
        assert inp.is_valid
        assert f_big(inp) == sum(xs) % 2


def test_f_big_rejects_invalid():
    with pytest.raises(PromiseViolation):
        f_big(FInput(2, 2, (1, 2)))


def test_finput_range_and_width_checks():
    with pytest.raises(ValueError):
        FInput(2, 2, (4, 0))
    with pytest.raises(ValueError):
        FInput(1, 2, (0,))
    with pytest.raises(ValueError):
        FInput(4, 61, (0, 0, 0, 0))
    FInput(3, 61, (0, 0, 0))


def test_canonical_text_form():
    inp = FInput(3, 3, (2, 3, 7))
    assert str(inp) == "k=3 n=3 xs=[2,3,7]"
    assert FInput.parse(str(inp)) == inp


def test_reduction_to_mod4_problem():
    seen = 0
    for inp in enumerate_valid_inputs(3, 2):
        assert f_big(inp) == f_mod4(ModFourTriple(*inp.values))
        seen += 1
    assert seen == 32


def _brute_valid(k, n):
    return [xs for xs in itertools.product(range(2**n), repeat=k) if sum(xs) % 2 ** (n - 1) == 0]


@pytest.mark.parametrize("k, n, count", [(2, 1, 4), (2, 2, 8), (3, 2, 32)])
def test_enumerate_counts(k, n, count):
    got = [inp.values for inp in enumerate_valid_inputs(k, n)]
    assert len(got) == count == count_valid_inputs(k, n)
    assert sorted(got) == sorted(_brute_valid(k, n))


@pytest.mark.parametrize("k, n", [(2, 3), (3, 3), (4, 2), (2, 5), (5, 1)])
def test_enumerate_matches_brute_force(k, n):
    got = [inp.values for inp in enumerate_valid_inputs(k, n)]
    assert len(set(got)) == len(got)
    assert sorted(got) == _brute_valid(k, n)


def test_enumerate_budget():
    with pytest.raises(BudgetExceeded):
        next(enumerate_valid_inputs(4, 8, budget=2**20))


@given(st.integers(2, 12), st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_samples_are_valid_and_deterministic(k, n, seed):
    a = sample_valid_input(k, n, seed)
    assert a.is_valid
    assert a == sample_valid_input(k, n, seed)


def test_sampler_is_uniform_over_valid_set():
    valid = [inp.values for inp in enumerate_valid_inputs(2, 2)]
    counts = Counter(sample_valid_input(2, 2, seed).values for seed in range(10_000))
    assert set(counts) == set(valid)
    observed = [counts[v] for v in valid]
    assert stats.chisquare(observed).pvalue > 0.01


def _msb_cases():
    for k in range(2, 17):
        for n in range(1, 9):
            if n * k <= 16:
                yield k, n


@pytest.mark.parametrize("k, n", list(_msb_cases()))
def test_msb_toggle_flips_f_exhaustive(k, n):
    for inp in enumerate_valid_inputs(k, n):
        value = f_big(inp)
        for i in range(k):
            flipped = toggle_msb(inp, i)
            assert flipped.is_valid
            assert f_big(flipped) == 1 - value


@given(st.integers(2, 30), st.integers(1, 40), st.integers(0, 2**32 - 1), st.data())
def test_msb_toggle_flips_f_sampled(k, n, seed, data):
    inp = sample_valid_input(k, n, seed)
    i = data.draw(st.integers(0, k - 1))
    flipped = toggle_msb(inp, i)
    assert flipped.is_valid and f_big(flipped) == 1 - f_big(inp)


def test_values_are_immutable():
    inp = FInput(2, 2, (1, 3))
    with pytest.raises(AttributeError):
        inp.values = (0, 0)
