"""Similarity reductions: invariants by the method of characteristics, the
group-invariant substitution, reduced fractional ODEs, and the adjudication
of stored reduced forms against the derivation and the grid oracle.

For a scaling generator e*t d/dt + a1*x d/dx + c*u d/du the invariants are
r = t*x^(-e/a1) and z = u*x^(-c/a1); substituting u = x^p h(r) with
p = c/a1, q = -e/a1 turns the PDE into x^s * R(r, h, h', h'', h''', D^a h).
The time-fractional term crosses over via the RL scaling identity
D^a_t[h(lam*t)] = lam^a (D^a h)(lam*t), applied only when the inner argument
is t times an x-only factor.

Adjudication policy: the derived reduced ODE is authoritative; stored
(printed) forms are comparison targets whose per-term status is reported,
never silently corrected.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction as Q

from .calculus import diff, split_by
from .expr import (
    Expr, Sym, Sum, Prod, Pow, Func, FDeriv, ExprError,
    add, mul, pow_, num, sym, func, gammaf, fderiv, as_expr,
    contains_symbol, free_symbols, is_zero_exact, substitute, to_text,
    ZERO, ONE, MINUS_ONE,
)
from .fracnum import (
    fode_residual_on_grid, pde_residual_on_grid, relative_deviation,
)
from .pde import Generator, PdeSpec, PdeModelError, T, U, X

__all__ = [
    "ReductionError", "SimilarityReduction", "CoefficientComparison",
    "ComparisonReport", "KernelSolution",
    "characteristic_invariants", "similarity_substitute",
    "compare_reduced_forms", "reduced_residual_identity_check",
    "kernel_solution", "R_SYM", "H_FUNC",
]

R_SYM = sym("r")
H_FUNC = func("h", (R_SYM,))


class ReductionError(ExprError):
    pass


@dataclass
class SimilarityReduction:
    """Invariant pair r = t*x^q, z = u*x^(-p) plus the derived reduction."""

    p: Expr
    q: Expr
    translation_case: bool = False
    normalization_power: Expr | None = None
    reduced_ode: Expr | None = None

    @property
    def r_expr(self) -> Expr:
        if self.translation_case:
            return T
        return mul(T, pow_(X, self.q))

    @property
    def z_expr(self) -> Expr:
        if self.translation_case:
            return U
        return mul(U, pow_(X, mul(MINUS_ONE, self.p)))

    @property
    def u_ansatz(self) -> Expr:
        """u = x^p * h(t * x^q)  (or u = h(t) for the translation case)."""
        if self.translation_case:
            return func("h", (T,))
        return mul(pow_(X, self.p), func("h", (mul(T, pow_(X, self.q)),)))


def characteristic_invariants(gen: Generator) -> SimilarityReduction:
    """Invariants of dt/xi_t = dx/xi_x = du/eta for the normal-form classes.

    Pure x-translation gives (r, z) = (t, u); a scaling generator gives the
    monomial invariants above.  A translation mixed into a scaling is not a
    case the catalog produces and is rejected.
    """
    nf = gen.normal_form()
    if nf is None:
        raise ReductionError(
            "generator is outside the affine/scaling normal form")
    e, a0, a1, c = nf
    if e == ZERO and a1 == ZERO and c == ZERO:
        if a0 == ZERO:
            raise PdeModelError("zero generator")  # pragma: no cover
        return SimilarityReduction(p=ZERO, q=ZERO, translation_case=True)
    if a0 != ZERO:
        raise ReductionError(
            "translation component mixed with a scaling is unsupported "
            "(no such reduction case exists)")
    if a1 == ZERO:
        raise ReductionError(
            "scaling without an x-component admits no x-monomial invariants")
    inv_a1 = pow_(a1, MINUS_ONE)
    return SimilarityReduction(
        p=mul(c, inv_a1),
        q=mul(MINUS_ONE, e, inv_a1),
    )


def _rescale_fd_nodes(e: Expr, alpha: Expr) -> Expr:
    """Rewrite FD(h(t*lam(x)), t, a) -> lam^a * FD(h(r), r, a) recursively.

    Applies only when the inner argument is t times an x-only factor; other
    shapes are left untouched.
    """
    def walk(node: Expr) -> Expr:
        if isinstance(node, FDeriv):
            inner = node.expr
            if (isinstance(inner, Func) and len(inner.args) == 1
                    and node.var == T):
                arg = inner.args[0]
                lam = substitute(arg, {"t": ONE})
                if ("t" not in free_symbols(lam)
                        and is_zero_exact(add(arg, mul(MINUS_ONE, lam, T)))):
                    new_fd = fderiv(
                        Func(inner.name, (R_SYM,), inner.order),
                        R_SYM, node.alpha)
                    return mul(pow_(lam, node.alpha), new_fd)
            return node
        if isinstance(node, Sum):
            return add(*(walk(t) for t in node.terms))
        if isinstance(node, Prod):
            return mul(*(walk(f) for f in node.factors))
        if isinstance(node, Pow):
            return pow_(walk(node.base), walk(node.exp))
        return node

    return walk(e)


def _group_x_power(e: Expr):
    """Factor e as x^s * R; raises with the offending terms otherwise."""
    groups = split_by(e, lambda f: contains_symbol(f, "x"))
    exponents = []
    for mono in groups:
        if mono == ONE:
            exponents.append(ZERO)
        elif mono == X:
            exponents.append(ONE)
        elif isinstance(mono, Pow) and mono.base == X:
            exponents.append(mono.exp)
        else:
            raise ReductionError(
                f"residual term mixes x irreducibly: {to_text(mono)}")
    merged: list[tuple[Expr, list[Expr]]] = []
    for expo, (mono, coeff) in zip(exponents, groups.items()):
        for known, parts in merged:
            if is_zero_exact(add(expo, mul(MINUS_ONE, known))):
                parts.append(coeff)
                break
        else:
            merged.append((expo, [coeff]))
    if len(merged) > 1:
        details = ", ".join(f"x^({to_text(expo)})" for expo, _ in merged)
        raise ReductionError(
            f"residual does not factor as a single x-power: {details}")
    s, parts = merged[0]
    return s, add(*parts)


def similarity_substitute(spec: PdeSpec,
                          red: SimilarityReduction) -> SimilarityReduction:
    """Substitute the group-invariant ansatz into the PDE.

    Returns a copy of ``red`` carrying the derived reduced ODE (with the
    fractional term's coefficient equal to 1) and the stripped x-power s.
    """
    if red.translation_case:
        reduced = fderiv(H_FUNC, R_SYM, spec.alpha)
        return replace(red, normalization_power=ZERO, reduced_ode=reduced)

    u_sub = red.u_ansatz
    frac = fderiv(u_sub, T, spec.alpha)
    # the ansatz splits as x^p * h(...): RL linearity over the x-only factor
    frac = _pull_x_factor(frac)
    frac = _rescale_fd_nodes(frac, spec.alpha)

    convect = mul(num(spec.zeta), diff(pow_(u_sub, spec.m), "x", 1))
    disperse = mul(spec.g.expr(), diff(pow_(u_sub, spec.n), "x", 3))

    total = add(frac, convect, disperse)
    # express the leftover explicit t through r = t*x^q
    total = substitute(total, {"t": mul(R_SYM, pow_(X, mul(MINUS_ONE, red.q)))})
    s, reduced = _group_x_power(total)
    return replace(red, normalization_power=s, reduced_ode=reduced)


def _pull_x_factor(e: Expr) -> Expr:
    """FD(x^p * F, t, a) -> x^p * FD(F, t, a): x is constant along t."""
    def walk(node: Expr) -> Expr:
        if isinstance(node, FDeriv):
            inner = node.expr
            factors = inner.factors if isinstance(inner, Prod) else (inner,)
            x_free = [f for f in factors if "t" not in free_symbols(f)]
            rest = [f for f in factors if "t" in free_symbols(f)]
            if x_free and rest:
                return mul(*x_free, fderiv(mul(*rest), node.var, node.alpha))
            return node
        if isinstance(node, Sum):
            return add(*(walk(t) for t in node.terms))
        if isinstance(node, Prod):
            return mul(*(walk(f) for f in node.factors))
        return node

    return walk(e)


# ---------------------------------------------------------------------------
# comparison against stored printed forms


@dataclass(frozen=True)
class CoefficientComparison:
    monomial: Expr
    derived: Expr      # normalized so the FD coefficient matches the target
    printed: Expr
    equal: bool

    def as_record(self) -> dict:
        return {
            "monomial": to_text(self.monomial),
            "derived": to_text(self.derived),
            "printed": to_text(self.printed),
            "equal": self.equal,
        }


@dataclass(frozen=True)
class ComparisonReport:
    entries: tuple[CoefficientComparison, ...]
    all_equal: bool

    def mismatches(self) -> list[CoefficientComparison]:
        return [e for e in self.entries if not e.equal]

    def normalized_derived(self) -> Expr:
        """The derived form rescaled to the target's FD coefficient."""
        return add(*(mul(e.derived, e.monomial) for e in self.entries))


def _reduced_monomials(e: Expr) -> dict:
    """Group a reduced-form expression over its (r, h, FD) monomials."""
    def belongs(f: Expr) -> bool:
        if isinstance(f, FDeriv):
            return True
        if isinstance(f, Pow):
            return belongs(f.base)
        if isinstance(f, Func) and f.name in ("h", "f"):
            return True
        if isinstance(f, Sym) and f.name == "r":
            return True
        return False

    return split_by(e, belongs)


def _fd_coefficient(groups: dict) -> Expr:
    for mono, coeff in groups.items():
        if isinstance(mono, FDeriv) or (
                isinstance(mono, Prod)
                and any(isinstance(f, FDeriv) for f in mono.factors)):
            return coeff
    raise ReductionError("reduced form carries no fractional-derivative term")


def _normalize_h_names(e: Expr) -> Expr:
    """The unknown is written h(r); stored forms sometimes say f(r)."""
    def walk(node: Expr) -> Expr:
        if isinstance(node, Func) and node.name == "f":
            return Func("h", tuple(walk(a) for a in node.args), node.order)
        if isinstance(node, Sum):
            return add(*(walk(t) for t in node.terms))
        if isinstance(node, Prod):
            return mul(*(walk(f) for f in node.factors))
        if isinstance(node, Pow):
            return pow_(walk(node.base), walk(node.exp))
        if isinstance(node, FDeriv):
            return fderiv(walk(node.expr), node.var, node.alpha)
        return node

    return walk(e)


def compare_reduced_forms(derived: Expr, printed: Expr) -> ComparisonReport:
    """Per-monomial coefficient comparison after normalizing both sides to
    the printed fractional-derivative coefficient.

    Equality is decided exactly (cross-multiplied, denominators cleared);
    mismatches are listed, never auto-resolved.
    """
    derived = _normalize_h_names(as_expr(derived))
    printed = _normalize_h_names(as_expr(printed))
    d_groups = _reduced_monomials(derived)
    p_groups = _reduced_monomials(printed)
    d0 = _fd_coefficient(d_groups)
    p0 = _fd_coefficient(p_groups)

    monos: list[Expr] = list(d_groups)
    for m in p_groups:
        if m not in d_groups:
            monos.append(m)
    monos.sort(key=lambda m: m._key)

    entries = []
    inv_d0 = pow_(d0, MINUS_ONE)
    for m in monos:
        d_coeff = d_groups.get(m, ZERO)
        p_coeff = p_groups.get(m, ZERO)
        # d/d0 == p/p0  <=>  d*p0 - p*d0 == 0
        cross = add(mul(d_coeff, p0), mul(MINUS_ONE, p_coeff, d0))
        equal = is_zero_exact(cross)
        normalized = mul(d_coeff, p0, inv_d0)
        entries.append(CoefficientComparison(
            monomial=m, derived=normalized, printed=p_coeff, equal=equal))
    return ComparisonReport(entries=tuple(entries),
                            all_equal=all(e.equal for e in entries))


# ---------------------------------------------------------------------------
# grid adjudication


def _specialize(e: Expr, values: dict) -> Expr:
    return substitute(e, {k: num(v) if isinstance(v, (int, Q)) else v
                          for k, v in values.items()})


def reduced_residual_identity_check(spec: PdeSpec, red: SimilarityReduction,
                                    h_test: Expr, points: list) -> float:
    """Max relative deviation between the PDE residual of u = x^p h(t x^q)
    and x^s * (reduced ODE at r = t x^q), over the given (x, t) points.

    Everything must be numeric (alpha and the g-parameters); h_test is a
    power sum in r with exponents >= 1 so the power rule never hits a
    singular Gamma argument.
    """
    if red.reduced_ode is None:
        raise ReductionError("run similarity_substitute first")
    h_test = as_expr(h_test)

    if red.translation_case:
        u_expr = substitute(h_test, {"r": T})
    else:
        r_of_xt = mul(T, pow_(X, red.q))
        u_expr = mul(pow_(X, red.p), substitute(h_test, {"r": r_of_xt}))
    lhs = pde_residual_on_grid(spec, u_expr, points)

    worst = 0.0
    for (xv, tv), lhs_val in zip(points, lhs):
        if red.translation_case:
            rv = float(tv)
            spower = 1.0
        else:
            rv = float(tv) * float(xv) ** float(_as_float(red.q))
            spower = float(xv) ** float(_as_float(red.normalization_power))
        rhs_val = spower * fode_residual_on_grid(
            red.reduced_ode, h_test, [rv])[0]
        worst = max(worst, relative_deviation(lhs_val, rhs_val))
    return worst


def _as_float(e: Expr) -> float:
    from .expr import eval_numeric
    return eval_numeric(e)


# ---------------------------------------------------------------------------
# kernel solution


@dataclass(frozen=True)
class KernelSolution:
    """h(t) = kappa * t^(alpha-1) / Gamma(alpha), the RL null-space element.

    ``residual`` is the symbolic image under the RL power rule: the rule
    gives Gamma(alpha)/Gamma(0) * t^-1 with 1/Gamma(0) = 0, hence exact 0.
    At alpha = 1 the operator degenerates to the classical derivative and
    the kernel is the constant solution instead (``classical`` is set).
    """

    alpha: Q
    kappa: Q
    expr: Expr
    residual: Expr
    classical: bool = False

    @property
    def annihilated(self) -> bool:
        return self.residual == ZERO


def kernel_solution(alpha, kappa) -> KernelSolution:
    alpha = Q(alpha)
    kappa = Q(kappa)
    if not 0 < alpha <= 1:
        raise ReductionError("kernel solution needs alpha in (0, 1]")
    if alpha == 1:
        expr = num(kappa)
        return KernelSolution(alpha=alpha, kappa=kappa, expr=expr,
                              residual=ZERO, classical=True)
    if kappa == 0:
        return KernelSolution(alpha=alpha, kappa=kappa, expr=ZERO,
                              residual=ZERO)
    expr = mul(num(kappa), pow_(T, num(alpha - 1)),
               pow_(gammaf(alpha), MINUS_ONE))
    # power rule on t^(alpha-1): Gamma(alpha)/Gamma(0) = 0 by the 1/Gamma pole
    shifted = alpha - 1 + 1 - alpha  # == 0: the pole argument
    assert shifted == 0
    residual = ZERO
    return KernelSolution(alpha=alpha, kappa=kappa, expr=expr,
                          residual=residual)
