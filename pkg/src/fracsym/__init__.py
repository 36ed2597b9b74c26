"""fracsym: symbolic-numeric Lie symmetry analysis for time-fractional
K(m,n) equations with a variable coefficient g(t).

The package classifies point symmetries of

    D^a_t u + zeta*(u^m)_x + g(t)*(u^n)_xxx = 0,    0 < a <= 1,

derives the similarity reductions to fractional ODEs in h(r), and checks
every symbolic claim against an independent numerical fractional-calculus
oracle (Riemann-Liouville power rule plus a Grünwald-Letnikov scheme).
"""

__version__ = "0.1.0"

from .calculus import JetContext, collect_terms, diff, total_derivative_t
from .expr import (
    Expr, Rational,
    add, eval_numeric, fderiv, func, gammaf, mul, num, pow_, simplify,
    substitute, sym, to_text,
)
from .fracnum import (
    FracConfig, GL_BACKEND, Grid, gamma_fn, gl_rl_derivative,
    fode_residual_on_grid, pde_residual_on_grid, rl_power_rule,
)
from .parser import parse_expression
from .pde import (
    CoeffForm, CoeffTag, Generator, PdeSpec, ScalingWeights,
    pde_residual, scaling_invariance_check, term_weights,
)
from .reduction import (
    SimilarityReduction, characteristic_invariants, compare_reduced_forms,
    kernel_solution, reduced_residual_identity_check, similarity_substitute,
)
from .symmetry import (
    classify, determining_system, eta_alpha, integer_prolongations,
    invariance_residual,
)

__all__ = [
    "__version__",
    # expressions
    "Expr", "Rational", "add", "mul", "pow_", "num", "sym", "func",
    "gammaf", "fderiv", "simplify", "substitute", "eval_numeric", "to_text",
    "parse_expression",
    # calculus
    "JetContext", "diff", "total_derivative_t", "collect_terms",
    # model
    "PdeSpec", "CoeffForm", "CoeffTag", "Generator", "ScalingWeights",
    "pde_residual", "term_weights", "scaling_invariance_check",
    # symmetry
    "classify", "determining_system", "eta_alpha", "integer_prolongations",
    "invariance_residual",
    # reduction
    "SimilarityReduction", "characteristic_invariants",
    "similarity_substitute", "compare_reduced_forms",
    "reduced_residual_identity_check", "kernel_solution",
    # numerics
    "Grid", "FracConfig", "GL_BACKEND", "gamma_fn", "rl_power_rule",
    "gl_rl_derivative", "pde_residual_on_grid", "fode_residual_on_grid",
]
