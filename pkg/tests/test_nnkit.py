import math

import numpy as np
import pytest

from gradcheck import check_params, rel_error
from tsstn.nnkit import (Adam, Dense, Dropout, Embedding, LeakyReLU, NotForwardedError, Param, Sequential,
                         SlotEmbedding, Tanh, adam_step, bce_loss, dropout, glorot_bound, init_params, leaky_relu,
                         softmax, softmax_backward, tanh_act)


def test_dense_identity_and_bias():
    rng = np.random.default_rng(0)
    d = Dense(3, 3, rng)
    d.W.value[...] = np.eye(3)
    x = np.array([[1.0, -2.0, 3.0]])
    np.testing.assert_array_equal(d.forward(x), x)
    d2 = Dense(4, 2, rng)
    d2.W.value[...] = 0.0
    d2.b.value[...] = (1.0, 2.0)
    np.testing.assert_array_equal(d2.forward(np.ones((1, 4))), [[1.0, 2.0]])


def test_dense_matches_naive_loops():
    rng = np.random.default_rng(1)
    d = Dense(7, 5, rng)
    d.b.value[...] = rng.normal(size=5)
    x = rng.normal(size=(4, 7))
    y = d.forward(x)
    for n in range(4):
        for o in range(5):
            ref = d.b.value[o] + sum(d.W.value[o, i] * x[n, i] for i in range(7))
            assert abs(y[n, o] - ref) < 1e-12


def test_dense_shape_mismatch_and_nonfinite():
    d = Dense(3, 2, np.random.default_rng(0))
    with pytest.raises(ValueError):
        d.forward(np.ones((1, 4)))
    with pytest.raises(FloatingPointError):
        d.forward(np.array([[np.nan, 0.0, 0.0]]))


def test_activation_values():
    assert leaky_relu(-2.0) == pytest.approx(-0.02, abs=0)
    assert leaky_relu(3.0) == 3.0
    assert tanh_act(0.5) == math.tanh(0.5)


def test_dropout_eval_is_identity_and_training_is_unbiased():
    x = np.linspace(-1, 1, 8)
    np.testing.assert_array_equal(dropout(x, 0.2, training=False), x)
    rng = np.random.default_rng(2)
    draws = np.stack([dropout(x, 0.2, True, rng) for _ in range(100_000)])
    np.testing.assert_allclose(draws.mean(axis=0), x, rtol=0.02, atol=0.002)
    assert set(np.unique(draws[:, -1])) == {0.0, 1.0 / 0.8}
    with pytest.raises(ValueError):
        Dropout(1.0)
    with pytest.raises(ValueError):
        Dropout(0.2).forward(x, training=True)


def test_softmax_examples():
    np.testing.assert_allclose(softmax(np.zeros(6)), np.full(6, 1 / 6), rtol=0, atol=1e-15)
    for c in (-50.0, 0.0, 3.7, 800.0):
        np.testing.assert_allclose(softmax([c, c + math.log(2.0)]), [1 / 3, 2 / 3], rtol=1e-12)
    w = softmax([0.0, 1000.0, 1.0])
    assert np.isfinite(w).all() and w[1] == pytest.approx(1.0)


def test_bce_examples():
    loss, _ = bce_loss(0.5, 1)
    assert loss == pytest.approx(math.log(2.0), rel=1e-15)
    for y in (0, 1):
        loss, _ = bce_loss(float(y), y)
        assert loss <= -math.log(1 - 1e-6) + 1e-15


def test_bce_gradient_matches_finite_difference():
    h = 1e-6
    for p in (0.01, 0.3, 0.5, 0.77, 0.99):
        for y in (0, 1):
            _, g = bce_loss(p, y)
            num = (bce_loss(p + h, y)[0] - bce_loss(p - h, y)[0]) / (2 * h)
            assert rel_error(g, num) < 1e-5


def test_softmax_backward_matches_finite_difference():
    rng = np.random.default_rng(3)
    theta = rng.normal(size=6)
    up = rng.normal(size=6)
    g = softmax_backward(softmax(theta), up)
    h = 1e-6
    for i in range(6):
        e = np.zeros(6)
        e[i] = h
        num = (softmax(theta + e) @ up - softmax(theta - e) @ up) / (2 * h)
        assert rel_error(g[i], num) < 1e-6


def _net(rng):
    return Sequential(Dense(5, 4, rng, "d1"), LeakyReLU(), Dropout(0.2), Dense(4, 3, rng, "d2"), Tanh(),
                      Dense(3, 1, rng, "d3"), Tanh())


def test_dense_tanh_gradients_match_finite_difference():
    rng = np.random.default_rng(4)
    net = _net(rng)
    for p in net.params():
        p.value += 0.1 * rng.normal(size=p.shape)  # non-zero biases
    x = rng.normal(size=(6, 5))
    up = rng.normal(size=(6, 1))

    def loss():
        return float((net.forward(x) * up).sum())

    loss()
    net.backward(up)
    results = check_params(loss, net.params(), rng)
    assert len(results) == sum(p.value.size for p in net.params())
    assert max(r[-1] for r in results) < 1e-6


def test_embedding_gradients_only_on_gathered_rows():
    rng = np.random.default_rng(5)
    emb = Embedding(10, 3, rng)
    idx = np.array([[1, 4], [4, 7]])
    emb.forward(idx)
    emb.backward(np.ones((2, 2, 3)))
    rows = np.flatnonzero(np.abs(emb.table.grad).sum(axis=1))
    assert rows.tolist() == [1, 4, 7]
    np.testing.assert_array_equal(emb.table.grad[4], [2.0, 2.0, 2.0])
    with pytest.raises(IndexError):
        emb.forward(np.array([10]))


def test_slot_embedding_equals_separate_tables():
    rng = np.random.default_rng(6)
    se = SlotEmbedding(3, 4, 2, rng)
    idx = np.array([[0, 3, 1], [2, 2, 2]])
    out = se.forward(idx)
    tab = se.emb.table.value.reshape(3, 4, 2)
    for n in range(2):
        ref = np.concatenate([tab[s, idx[n, s]] for s in range(3)])
        np.testing.assert_array_equal(out[n], ref)


def test_zero_upstream_gradient_gives_zero_parameter_gradients():
    rng = np.random.default_rng(7)
    net = _net(rng)
    net.forward(rng.normal(size=(3, 5)), training=True, rng=rng)
    net.backward(np.zeros((3, 1)))
    assert all(not p.grad.any() for p in net.params())


def test_backward_without_forward_raises():
    rng = np.random.default_rng(8)
    for layer in (Dense(2, 2, rng), Embedding(3, 2, rng), LeakyReLU(), Tanh(), Dropout(0.1)):
        with pytest.raises(NotForwardedError):
            layer.backward(np.zeros((1, 2)))
    d = Dense(2, 2, rng)
    d.forward(np.ones((1, 2)))
    d.backward(np.ones((1, 2)))
    with pytest.raises(NotForwardedError):
        d.backward(np.ones((1, 2)))


def test_adam_zero_gradient_leaves_params():
    p = Param("w", np.array([1.0, -2.0]))
    opt = Adam([p], lr=0.1)
    for _ in range(5):
        opt.zero_grad()
        opt.step()
    np.testing.assert_array_equal(p.value, [1.0, -2.0])
    assert opt.t == 5


def test_adam_descends_and_is_deterministic():
    def run():
        p = Param("w", np.zeros(3))
        opt = Adam([p], lr=0.01)
        for _ in range(50):
            adam_step(opt, [p], [np.array([1.0, -1.0, 0.5])])
        return p.value

    a, b = run(), run()
    assert a.tobytes() == b.tobytes()
    assert a[0] < 0 and a[1] > 0 and a[2] < 0
    # bias correction makes the first step exactly lr in magnitude
    p = Param("w", np.zeros(1))
    adam_step(Adam([p], lr=0.01), grads=[np.array([3.0])])
    assert p.value[0] == pytest.approx(-0.01, rel=1e-6)


def test_adam_rejects_mismatched_shapes():
    p = Param("w", np.zeros(3))
    with pytest.raises(ValueError):
        adam_step(Adam([p]), grads=[np.zeros(2)])


def test_init_schemes():
    rng = np.random.default_rng(9)
    w = init_params((64, 32), "glorot", rng)
    b = glorot_bound(32, 64)
    assert np.abs(w).max() <= b and np.abs(w).max() > 0.9 * b
    assert not init_params((5,), "zeros").any()
    e = init_params((100, 8), "embedding", rng)
    assert np.abs(e).max() <= 0.05
    assert not Dense(3, 4, rng).b.value.any()
    with pytest.raises(ValueError):
        init_params((2,), "xavier", rng)
