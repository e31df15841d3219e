import json
from functools import reduce

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpcomm import qsim
from mpcomm.core import FInput, enumerate_valid_inputs, f_big, sample_valid_input
from mpcomm.qsim import ExactBackendRefused, Stage, StageError

H1 = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def kron_hadamard(k):
    return reduce(np.kron, [H1] * k)


def phased(xs, n, vector=True):
    r = qsim.make_cat_state(len(xs), n, vector=vector)
    for i, x in enumerate(xs):
        qsim.apply_phase(r, i, x)
    return r


def test_cat_state_k2():
    r = qsim.make_cat_state(2, 3, vector=True)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(r.amplitudes, [s, 0, 0, s])
    assert r.accumulated_phase == 0
    assert r.stage is Stage.SHARED


def test_cat_state_k3_two_nonzero():
    r = qsim.make_cat_state(3, 2, vector=True)
    assert np.count_nonzero(r.amplitudes) == 2


@pytest.mark.parametrize("k", [1, 21])
def test_cat_state_k_range(k):
    with pytest.raises(ValueError):
        qsim.make_cat_state(k, 2, vector=True)


def test_exact_backend_has_no_qubit_limit():
    r = qsim.make_cat_state(64, 8)
    assert r.amplitudes is None


def test_zero_phase_is_identity():
    r = qsim.make_cat_state(3, 2, vector=True)
    before = r.amplitudes.copy()
    qsim.apply_phase(r, 1, 0)
    np.testing.assert_array_equal(r.amplitudes, before)
    assert r.accumulated_phase == 0


def test_phase_example_k2_n2():
    r = phased((1, 3), 2)
    assert r.accumulated_phase == 0
    assert r.amplitudes[-1] / r.amplitudes[0] == pytest.approx(1)
    assert f_big(FInput(2, 2, (1, 3))) == 0


@pytest.mark.parametrize("k, n", [(2, 1), (2, 3), (3, 2), (4, 3), (5, 2)])
def test_relative_phase_is_sign_of_f(k, n):
    for inp in enumerate_valid_inputs(k, n):
        r = phased(inp.values, n)
        sign = (-1) ** f_big(inp)
        assert r.accumulated_phase == f_big(inp) * 2 ** (n - 1)
        assert r.amplitudes[-1] / r.amplitudes[0] == pytest.approx(sign, abs=1e-12)


def test_phase_input_range_and_stage():
    r = qsim.make_cat_state(2, 2)
    with pytest.raises(ValueError):
        qsim.apply_phase(r, 0, 4)
    with pytest.raises(IndexError):
        qsim.apply_phase(r, 2, 0)
    qsim.apply_phase(r, 0, 1)
    qsim.apply_phase(r, 1, 1)
    qsim.apply_hadamard_all(r)
    with pytest.raises(StageError):
        qsim.apply_phase(r, 0, 0)


def test_hadamard_requires_phased_stage():
    with pytest.raises(StageError):
        qsim.apply_hadamard_all(qsim.make_cat_state(2, 2))


def test_double_measurement_refused():
    r = qsim.apply_hadamard_all(phased((0, 0), 2, vector=False))
    qsim.measure(r, 1)
    with pytest.raises(StageError):
        qsim.measure(r, 1)


@pytest.mark.parametrize("k", range(1, 9))
def test_fast_hadamard_matches_kronecker(k):
    rng = np.random.default_rng(k)
    v = rng.normal(size=2**k) + 1j * rng.normal(size=2**k)
    np.testing.assert_allclose(qsim.hadamard_all(v), kron_hadamard(k) @ v, atol=1e-12)


def test_k2_distributions_by_hand():
    # (|00> + |11>)/sqrt2 -> (|00> + |11>)/sqrt2 ; (|00> - |11>)/sqrt2 -> (|01> + |10>)/sqrt2
    plus = qsim.apply_hadamard_all(phased((0, 0), 2))
    minus = qsim.apply_hadamard_all(phased((1, 1), 2))
    for r, expected in ((plus, [0.5, 0, 0, 0.5]), (minus, [0, 0.5, 0.5, 0])):
        np.testing.assert_allclose(qsim.outcome_distribution(r, "vector"), expected, atol=1e-12)
        np.testing.assert_allclose(qsim.outcome_distribution(r, "exact"), expected)


@pytest.mark.parametrize("k", range(2, 11))
@pytest.mark.parametrize("parity", [0, 1])
def test_backends_agree_in_total_variation(k, parity):
    n = 3
    xs = [0] * k
    xs[0] = parity * 4
    r = qsim.apply_hadamard_all(phased(xs, n))
    tv = qsim.total_variation(qsim.outcome_distribution(r, "exact"), qsim.outcome_distribution(r, "vector"))
    assert tv <= 1e-9


def test_exact_backend_refuses_outside_promise():
    r = phased((1, 0), 2, vector=False)
    with pytest.raises(ExactBackendRefused):
        qsim.apply_hadamard_all(r)


def test_vector_backend_handles_outside_promise():
    r = qsim.apply_hadamard_all(phased((1, 0), 2, vector=True))
    probs = qsim.outcome_distribution(r)
    assert probs.sum() == pytest.approx(1)
    expected = np.abs(kron_hadamard(2) @ (np.array([1, 0, 0, 1j]) / np.sqrt(2))) ** 2
    np.testing.assert_allclose(probs, expected, atol=1e-12)
    rec = qsim.measure(r, 3)
    assert len(rec.bits) == 2


@pytest.mark.parametrize("xs, n, parity", [((0, 0, 0), 2, 0), ((1, 1, 0), 2, 1), ((2, 3, 7), 3, 1)])
def test_measured_parity_examples(xs, n, parity):
    for seed in range(50):
        assert qsim.run_pipeline(xs, n, seed).parity == parity
        assert qsim.run_pipeline(xs, n, seed, vector=True, backend="vector").parity == parity


def test_measure_is_deterministic_in_seed():
    a = qsim.run_pipeline((2, 3, 7), 3, seed=11, vector=True, backend="vector")
    b = qsim.run_pipeline((2, 3, 7), 3, seed=11, vector=True, backend="vector")
    assert a == b
    assert qsim.run_pipeline((2, 3, 7), 3, 5) == qsim.run_pipeline((2, 3, 7), 3, 5)


def _parity_grid():
    for k in range(2, 11):
        for n in range(1, 11):
            if n * k <= 20:
                yield k, n


@pytest.mark.slow
@pytest.mark.parametrize("k, n", list(_parity_grid()))
def test_parity_law_exhaustive(k, n):
    for i, inp in enumerate(enumerate_valid_inputs(k, n, budget=2**20)):
        assert qsim.run_pipeline(inp.values, n, seed=i).parity == f_big(inp)


@given(st.integers(2, 40), st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_parity_law_sampled(k, n, seed):
    inp = sample_valid_input(k, n, seed)
    assert qsim.run_pipeline(inp.values, n, seed).parity == f_big(inp)


@pytest.mark.parametrize("k, n", [(2, 2), (3, 3), (4, 2), (5, 2)])
def test_vector_parities_match_exact_on_all_valid_inputs(k, n):
    for i, inp in enumerate(enumerate_valid_inputs(k, n)):
        exact = qsim.run_pipeline(inp.values, n, seed=i)
        vec = qsim.run_pipeline(inp.values, n, seed=i, vector=True, backend="vector")
        assert exact.parity == vec.parity == f_big(inp)


@given(st.integers(2, 7), st.integers(1, 5), st.integers(0, 2**32 - 1), st.randoms())
def test_phase_order_independent(k, n, seed, rnd):
    inp = sample_valid_input(k, n, seed)
    order = list(range(k))
    rnd.shuffle(order)
    a = phased(inp.values, n)
    b = qsim.make_cat_state(k, n, vector=True)
    for i in order:
        qsim.apply_phase(b, i, inp.values[i])
    assert a.accumulated_phase == b.accumulated_phase
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)
    qsim.apply_hadamard_all(a)
    qsim.apply_hadamard_all(b)
    np.testing.assert_allclose(qsim.outcome_distribution(a, "vector"), qsim.outcome_distribution(b, "vector"), atol=1e-12)


@given(st.integers(2, 10), st.integers(1, 6), st.lists(st.integers(0, 63), min_size=10, max_size=10))
def test_norm_preserved(k, n, raw):
    r = qsim.make_cat_state(k, n, vector=True)
    assert abs(np.linalg.norm(r.amplitudes) - 1) <= 1e-12
    for i in range(k):
        qsim.apply_phase(r, i, raw[i] % 2**n)
        assert abs(np.linalg.norm(r.amplitudes) - 1) <= 1e-12
    qsim.apply_hadamard_all(r)
    assert abs(np.linalg.norm(r.amplitudes) - 1) <= 1e-12


@pytest.mark.parametrize("backend", ["exact", "vector"])
def test_single_bit_marginals_uniform(backend):
    xs, n = (2, 3, 7, 0, 4), 3
    counts = np.zeros(len(xs))
    seeds = 10_000
    for seed in range(seeds):
        counts += qsim.run_pipeline(xs, n, seed, vector=backend == "vector", backend=backend).bits
    freq_zero = 1 - counts / seeds
    assert np.all(np.abs(freq_zero - 0.5) <= 0.02)


def test_register_json_dump():
    r = phased((1, 1), 2)
    dump = json.loads(json.dumps(r.to_json()))
    assert dump["k"] == 2 and dump["n"] == 2 and dump["stage"] == "Phased"
    assert dump["accumulated_phase"] == 2
    assert len(dump["amplitudes"]) == 4 and all(len(a) == 2 for a in dump["amplitudes"])
    assert "amplitudes" not in phased((1, 1), 2, vector=False).to_json()


def test_measurement_record_keeps_seed():
    rec = qsim.run_pipeline((1, 1), 2, seed=[4, 2])
    assert rec.seed == [4, 2]
    assert set(rec.bits) <= {0, 1}
