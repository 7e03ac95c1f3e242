import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from timo_pinn.network import (LayerSpec, NetworkParams, evaluate_values,
                               forward, init_params, param_count)

from oracles import fd_partials_richardson, mlp_values


def test_default_parameter_count():
    assert init_params(seed=0).flat.size == 41104
    assert LayerSpec().n_params == 2 * 100 + 100 + 4 * (100 * 100 + 100) + 100 * 4 + 4


def test_smallest_network():
    assert init_params((2, 4), seed=3).flat.size == 12


@settings(max_examples=40)
@given(st.lists(st.integers(1, 12), min_size=0, max_size=4))
def test_param_count_formula(hidden):
    sizes = (2, *hidden, 4)
    p = init_params(sizes, seed=0)
    assert p.flat.size == param_count(sizes)
    # flatten / unflatten round trip
    again = NetworkParams.from_layers(p.unflatten())
    np.testing.assert_array_equal(again.flat, p.flat)
    assert again.sizes == p.sizes


def test_init_is_deterministic_and_glorot():
    a, b = init_params(seed=42), init_params(seed=42)
    np.testing.assert_array_equal(a.flat, b.flat)
    assert not np.array_equal(a.flat, init_params(seed=43).flat)
    for W, bias in a.unflatten():
        bound = np.sqrt(6.0 / (W.shape[0] + W.shape[1]))
        assert np.all(np.abs(W) <= bound)
        np.testing.assert_array_equal(bias, 0.0)


def test_layer_spec_validation():
    with pytest.raises(ValueError):
        LayerSpec((3, 10, 4))
    with pytest.raises(ValueError):
        LayerSpec((2, 0, 4))
    with pytest.raises(ValueError):
        NetworkParams((2, 4), np.zeros(11))


def test_constant_network():
    p = init_params((2, 5, 4), seed=0)
    p.flat[:] = 0.0
    (_, _), (_, b_out) = p.unflatten()
    b_out[:] = [1.0, 2.0, 3.0, 4.0]
    fe = forward(p, 0.3, 0.8)
    assert [j.val for j in fe] == [1.0, 2.0, 3.0, 4.0]
    for j in fe:
        assert j.as_tuple()[1:] == (0.0,) * 5


def test_partials_match_extended_precision_differences():
    p = init_params((2, 16, 16, 4), seed=7)
    layers = p.unflatten()
    rng = np.random.default_rng(0)
    x, t = rng.uniform(0.05, 0.95, 20), rng.uniform(0.05, 0.95, 20)
    fe = forward(p, x, t)
    ref = fd_partials_richardson(lambda a, b: mlp_values(layers, a, b),
                                 x.astype(np.longdouble), t.astype(np.longdouble))
    for j, jet in enumerate(fe):
        got = np.array([np.asarray(c) for c in jet.as_tuple()])
        want = np.array([np.asarray(r[:, j], dtype=float) for r in ref])
        np.testing.assert_allclose(got, want, rtol=1e-5, atol=1e-8)


def test_forward_independent_of_batch():
    p = init_params(seed=1)
    x = np.array([0.1, 0.5, 0.9, 0.33])
    t = np.array([0.2, 0.7, 0.4, 0.05])
    batch = forward(p, x, t)
    for i in range(x.size):
        alone = forward(p, float(x[i]), float(t[i]))
        for jb, ja in zip(batch, alone):
            assert [c[i] for c in jb.as_tuple()] == list(ja.as_tuple())


def test_truncated_orders_agree_with_full_jets():
    p = init_params((2, 8, 8, 4), seed=2)
    x, t = np.array([0.2, 0.6]), np.array([0.1, 0.3])
    full = forward(p, x, t, order=2)
    for order, n in ((0, 1), (1, 3)):
        part = forward(p, x, t, order=order)
        for jf, jp in zip(full, part):
            for cf, cp in zip(jf.as_tuple()[:n], jp.as_tuple()[:n]):
                np.testing.assert_array_equal(cf, cp)
            assert all(c is None for c in jp.as_tuple()[n:])
    np.testing.assert_array_equal(evaluate_values(p, x, t)[:, 0], full.phi.val)


def test_checkpoint_round_trip_is_bit_exact(tmp_path):
    p = init_params((2, 7, 4), seed=9)
    p.flat += np.random.default_rng(0).normal(size=p.flat.size) * 1e-3
    p.epoch = 12
    path = tmp_path / "ckpt.json"
    p.save(path)
    q = NetworkParams.load(path)
    np.testing.assert_array_equal(q.flat, p.flat)
    assert (q.sizes, q.seed, q.epoch) == (p.sizes, 9, 12)


@settings(max_examples=30)
@given(st.floats(-50, 50), st.floats(-50, 50))
def test_outputs_are_finite(x, t):
    fe = forward(init_params((2, 10, 10, 4), seed=0), x, t)
    assert all(np.isfinite(c) for j in fe for c in j.as_tuple())
