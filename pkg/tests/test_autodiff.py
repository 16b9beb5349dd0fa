"""Op-level checks of the reverse-mode tape against central differences."""

import numpy as np
import pytest

from actsum import autodiff as ad
from actsum.errors import NotPositiveDefinite

from conftest import random_psd


def numeric_grad(build, x0, eps=1e-6):
    """Central-difference gradient of a scalar graph over a flat input."""
    g = np.zeros(x0.size)
    for i in range(x0.size):
        step = np.zeros(x0.size)
        step[i] = eps
        g[i] = (build(x0 + step) - build(x0 - step)) / (2 * eps)
    return g


def tape_grad(graph_fn, x0, shape):
    t = ad.parameter(x0.reshape(shape))
    loss = graph_fn(t)
    ad.backward(loss)
    return t.grad.ravel()


CASES = {
    "add_mul": (lambda t: ad.tsum(t * t + 2.0 * t), (3, 4)),
    "matmul": (lambda t: ad.tsum((t @ np.arange(12.0).reshape(4, 3)) * 0.3), (5, 4)),
    "sigmoid": (lambda t: ad.tsum(ad.sigmoid(t) * np.arange(6.0).reshape(2, 3)), (2, 3)),
    "tanh": (lambda t: ad.tsum(ad.tanh(t) * 1.7), (3, 3)),
    "gram": (lambda t: ad.tsum(ad.gram(t) * np.arange(9.0).reshape(3, 3)), (3, 5)),
    "submatrix": (lambda t: ad.tsum(ad.submatrix(ad.gram(t), [0, 2]) * 1.3), (4, 4)),
    "log_softmax": (
        lambda t: ad.tsum(ad.log_softmax_rows(t) * np.arange(8.0).reshape(2, 4)),
        (2, 4),
    ),
    "take_stack": (
        lambda t: ad.tsum(
            ad.stack_rows([ad.take_row(t, 2), ad.take_row(t, 0)]) * 0.7
        ),
        (4, 3),
    ),
    "hconcat": (
        lambda t: ad.tsum(ad.hconcat([t, t * 2.0]) * np.arange(12.0).reshape(2, 6)),
        (2, 3),
    ),
    "broadcast_bias": (lambda t: ad.tsum(ad.tanh(t + np.array([0.3, -0.2]))), (4, 2)),
}


@pytest.mark.parametrize("name", sorted(CASES))
def test_op_gradients_match_finite_differences(name):
    graph_fn, shape = CASES[name]
    rng = np.random.default_rng(hash(name) % 2**32)
    x0 = rng.normal(size=int(np.prod(shape)))

    def value(x):
        return float(graph_fn(ad.constant(x.reshape(shape))).value)

    analytic = tape_grad(graph_fn, x0, shape)
    numeric = numeric_grad(value, x0)
    assert np.allclose(analytic, numeric, rtol=1e-6, atol=1e-8)


def test_logdet_gradient_matches_finite_differences():
    rng = np.random.default_rng(5)
    base = random_psd(rng, 4, jitter=0.5)
    t = ad.parameter(base)
    ad.backward(ad.logdet_psd(t))
    grad = t.grad
    # perturb symmetric pairs so the matrix stays in the symmetric domain
    eps = 1e-6
    for i in range(4):
        for j in range(i, 4):
            bump = np.zeros((4, 4))
            bump[i, j] += eps
            bump[j, i] += eps
            hi = float(ad.logdet_psd(ad.constant(base + bump)).value)
            lo = float(ad.logdet_psd(ad.constant(base - bump)).value)
            numeric = (hi - lo) / (2 * eps)
            assert numeric == pytest.approx(grad[i, j] + grad[j, i], rel=1e-5, abs=1e-8)


def test_logdet_raises_on_singular():
    with pytest.raises(NotPositiveDefinite):
        ad.logdet_psd(ad.constant(np.zeros((2, 2))))


def test_gradient_accumulates_over_reuse():
    t = ad.parameter(np.array([[1.0, 2.0]]))
    loss = ad.tsum(t * 3.0 + t * t)
    ad.backward(loss)
    assert np.allclose(t.grad, 3.0 + 2.0 * t.value)


def test_constants_get_no_gradient():
    c = ad.constant(np.ones((2, 2)))
    p = ad.parameter(np.ones((2, 2)))
    ad.backward(ad.tsum(c * p))
    assert c.grad is None
    assert np.allclose(p.grad, 1.0)


def test_deep_chain_does_not_hit_recursion_limit():
    t = ad.parameter(np.ones((1, 1)) * 0.01)
    node = t
    for _ in range(5000):
        node = node + t * 0.0001
    ad.backward(ad.tsum(node))
    assert np.isfinite(t.grad).all()
