import math

import mpmath
import numpy as np
import pytest

from nqs_uat import activations as acts
from nqs_uat.activations import Activation, get_activation, log_derivatives
from nqs_uat.errors import UnsupportedActivationError

MP = {
    "sigmoid": lambda x: 1 / (1 + mpmath.exp(-x)),
    "tanh": mpmath.tanh,
    "cos": mpmath.cos,
    "sin": mpmath.sin,
    "exp": mpmath.exp,
}


@pytest.mark.parametrize("name", sorted(MP))
@pytest.mark.parametrize("x", [-0.7, 0.2, 1.1])
def test_closed_form_derivatives(name, x):
    act = get_activation(name)
    for order in range(0, 7):
        want = float(mpmath.diff(MP[name], x, order))
        assert act.nth_derivative(order, x) == pytest.approx(want, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("name,x", [("cos", 0.2), ("cos", -1.1), ("sigmoid", 0.4), ("exp", 0.3), ("tanh", 0.8)])
def test_log_derivatives(name, x):
    kappa = get_activation(name).log
    f = MP[name]
    for order in range(0, 9):
        want = float(mpmath.diff(lambda y: mpmath.log(f(y)), x, order))
        assert kappa.nth_derivative(order, x) == pytest.approx(want, rel=1e-8, abs=1e-8)


def test_log_derivatives_recurrence_exp():
    # phi = exp(x): every phi derivative equals phi, kappa = x
    out = log_derivatives([math.e] * 6)
    assert out[0] == pytest.approx(1.0)
    assert out[1] == pytest.approx(1.0)
    assert np.allclose(out[2:], 0.0, atol=1e-14)


def test_exp_poly():
    act = get_activation("exp-poly:2")
    assert act.log_degree == 2
    x = 0.37
    assert float(act(x)) == pytest.approx(math.exp(x + x * x / 2))
    f = lambda y: mpmath.exp(y + y**2 / 2)
    for order in range(6):
        assert act.nth_derivative(order, x) == pytest.approx(float(mpmath.diff(f, x, order)), rel=1e-10)
    assert act.log.nth_derivative(2, x) == 1.0
    assert act.log.nth_derivative(3, x) == 0.0
    assert get_activation("exp-poly:0").log_degree == 0
    custom = get_activation("exp-poly[0,0,1]")
    assert custom.log_degree == 2 and float(custom(0.5)) == pytest.approx(math.exp(0.25))


@pytest.mark.parametrize("name", ["sigmoid", "tanh"])
def test_saturation_flag(name):
    act = get_activation(name)
    assert act.saturates_to_one
    # float64 rounds to the limits beyond |x| ~ 18
    x = np.linspace(-15, 15, 301)
    v = act(x)
    assert np.all((v > -1) & (v < 1))
    assert abs(float(act(50.0)) - 1.0) <= 1e-10


@pytest.mark.parametrize("name", ["cos", "sin", "tanh"])
def test_sign_change_metadata(name):
    act = get_activation(name)
    x0, o = act.sign_change, act.sign_orientation
    eps = 1e-3
    left, right = float(act(x0 - eps)), float(act(x0 + eps))
    assert (left > 0 and right < 0) if o == 1 else (left < 0 and right > 0)


def test_no_sign_change():
    for name in ["relu", "exp", "sigmoid", "exp-poly:2"]:
        assert not get_activation(name).changes_sign


def test_custom_activation_finite_differences():
    act = Activation("cube", func=lambda x: x**3 + x)
    assert act.nth_derivative(1, 0.5) == pytest.approx(3 * 0.25 + 1, rel=1e-6)
    assert act.nth_derivative(2, 0.5) == pytest.approx(3.0, rel=1e-4)
    with pytest.raises(UnsupportedActivationError):
        act.nth_derivative(7, 0.5)


def test_unknown_name():
    with pytest.raises(ValueError):
        get_activation("swish")


def test_relu_derivatives():
    r = acts.relu()
    assert r.nth_derivative(1, 2.0) == 1.0 and r.nth_derivative(1, -2.0) == 0.0
    assert r.nth_derivative(3, 2.0) == 0.0
