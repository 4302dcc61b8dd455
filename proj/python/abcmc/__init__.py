"""ABC samplers over simulation models.

The heavy lifting lives in the compiled extension; this package is a thin
re-export so `import abcmc` works both from an installed wheel and from a
build tree on PYTHONPATH.
"""

from abcmc._core import (
    BudgetError,
    ConfigError,
    ContractViolation,
    ess,
    exact_posterior,
    model_names,
    run,
)

__all__ = [
    "BudgetError",
    "ConfigError",
    "ContractViolation",
    "ess",
    "exact_posterior",
    "model_names",
    "run",
]
