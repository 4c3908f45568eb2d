import numpy as np
import pytest

from priorlab.errors import NonFiniteError
from priorlab.gradcore import (
    Tensor,
    check_gradients,
    finite_difference_gradient,
    relative_error,
    run_gradcheck_suite,
)


def test_primitive_suite_passes():
    """Every primitive agrees with central differences."""
    results = run_gradcheck_suite(seed=0)
    assert len(results) >= 19
    failed = [r.name for r in results if not r.passed]
    assert failed == []


def test_finite_difference_of_square():
    """d/dx sum(x^2) = 2x."""
    x = Tensor([1.0, -2.0, 0.5])
    grad = finite_difference_gradient(lambda t: t.square().sum(), x)
    assert np.allclose(grad, [2.0, -4.0, 1.0], atol=1e-6)
    assert np.allclose(x.data, [1.0, -2.0, 0.5])


def test_finite_difference_rejects_bad_step():
    """h must be positive."""
    with pytest.raises(ValueError):
        finite_difference_gradient(lambda t: t.sum(), Tensor([1.0]), 0)


def test_finite_difference_non_finite():
    """A non-finite objective raises NonFiniteError."""
    x = Tensor([0.0])
    with pytest.raises(NonFiniteError):
        finite_difference_gradient(lambda t: float("nan"), x)


def test_relative_error_floor():
    """Two zero gradients compare as equal."""
    assert relative_error(np.zeros(3), np.zeros(3)) == 0.0
    assert relative_error(np.ones(2), np.ones(2)) == 0.0


def test_check_gradients_flags_wrong_backward():
    """A detached factor makes the analytic gradient disagree."""
    x = Tensor([1.5, -0.5], requires_grad=True)

    def objective():
        return (x * x.detach()).sum()

    result = check_gradients("half", objective, [x])
    assert not result.passed
    assert result.relative_error > 0.1
