from priorlab.gradcore import functional  # noqa: F401  (registers ops)
from priorlab.gradcore.autograd import Graph, GradMap, backward
from priorlab.gradcore.gradcheck import (
    GradCheckResult,
    check_gradients,
    finite_difference_gradient,
    relative_error,
    run_gradcheck_suite,
)
from priorlab.gradcore.optim import Adam, AdamState, adam_step
from priorlab.gradcore.tensor import (
    Function,
    Tensor,
    checked,
    concat,
    default_dtype,
    is_grad_enabled,
    no_grad,
    op_apply,
    registered_kinds,
)

__all__ = [
    "Adam",
    "AdamState",
    "Function",
    "GradCheckResult",
    "GradMap",
    "Graph",
    "Tensor",
    "adam_step",
    "backward",
    "check_gradients",
    "checked",
    "concat",
    "default_dtype",
    "finite_difference_gradient",
    "is_grad_enabled",
    "no_grad",
    "op_apply",
    "registered_kinds",
    "relative_error",
    "run_gradcheck_suite",
]
