"""Adam update against hand-evaluated recurrences."""

import numpy as np
import pytest

from mstdim import numerics as nm
from mstdim.errors import TrainingError
from mstdim.seeding import new_rng


def scalar_adam_oracle(grads, lr=3e-4, b1=0.9, b2=0.999, eps=1e-8, theta0=0.0):
    """Direct evaluation of the Adam recurrences for one scalar parameter."""
    m = v = 0.0
    theta = theta0
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        theta -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return theta


def test_zero_gradients_leave_params_unchanged():
    rng = new_rng("adam-zero")
    p = nm.parameter(rng.standard_normal((3, 2)), np.float64)
    before = p.data.copy()
    state = nm.AdamState.for_params([p])
    nm.adam_step([p], [np.zeros_like(p.data)], state)
    np.testing.assert_array_equal(p.data, before)
    assert state.step_count == 1


def test_first_step_is_minus_lr():
    p = nm.parameter(np.array([1.0]), np.float64)
    state = nm.AdamState.for_params([p], lr=3e-4)
    nm.adam_step([p], [np.array([1.0])], state)
    # bias-corrected first step: m_hat = v_hat = 1, delta = -lr / (1 + eps)
    expected = 1.0 - 3e-4 / (1.0 + 1e-8)
    assert abs(float(p.data[0]) - expected) < 1e-15


def test_two_identical_gradients_match_recurrence_oracle():
    p = nm.parameter(np.array([0.5]), np.float64)
    state = nm.AdamState.for_params([p], lr=1e-2)
    for _ in range(2):
        nm.adam_step([p], [np.array([0.7])], state)
    expected = scalar_adam_oracle([0.7, 0.7], lr=1e-2, theta0=0.5)
    assert abs(float(p.data[0]) - expected) < 1e-10


def test_long_run_matches_oracle():
    rng = new_rng("adam-long")
    grads = rng.standard_normal(20)
    p = nm.parameter(np.array([0.0]), np.float64)
    state = nm.AdamState.for_params([p], lr=5e-3)
    for g in grads:
        nm.adam_step([p], [np.array([g])], state)
    expected = scalar_adam_oracle(list(grads), lr=5e-3)
    assert abs(float(p.data[0]) - expected) < 1e-10
    assert state.step_count == 20


def test_non_finite_gradient_reports_step_index():
    p = nm.parameter(np.array([0.0]), np.float64)
    state = nm.AdamState.for_params([p])
    nm.adam_step([p], [np.array([1.0])], state)
    with pytest.raises(TrainingError, match="step 2"):
        nm.adam_step([p], [np.array([np.nan])], state)


def test_uses_param_grad_buffers_by_default():
    p = nm.parameter(np.array([2.0]), np.float64)
    loss = nm.mul(p, p)
    loss.backward()
    state = nm.AdamState.for_params([p], lr=1e-3)
    nm.adam_step([p], None, state)
    expected = scalar_adam_oracle([4.0], lr=1e-3, theta0=2.0)
    assert abs(float(p.data[0]) - expected) < 1e-12
