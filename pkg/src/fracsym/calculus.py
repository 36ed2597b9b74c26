"""Differentiation, jet coordinates, and coefficient collection.

``diff`` is a partial derivative unless a :class:`JetContext` is supplied,
in which case it acts as the total derivative: jet symbols (u, u_x, u_xt,
...) are raised through the chain rule, so e.g. d/dx of u^3 expands to
3 u^2 u_x automatically.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import (
    Expr, Num, Sym, Sum, Prod, Pow, Func, GammaF, FDeriv,
    ExprError, ZERO, ONE, MINUS_ONE,
    add, mul, pow_, sym, as_expr, free_symbols, contains_symbol,
    contains_node,
)

__all__ = [
    "DiffError", "CollectError", "JetContext",
    "diff", "total_derivative_t", "split_by", "collect_terms",
    "jet_bindings", "is_polynomial_in",
]


class DiffError(ExprError):
    """Unsupported differentiation (fractional nodes, opaque multi-arg)."""


class CollectError(ExprError):
    """A term of the expression is not representable over the given basis."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending


@dataclass(frozen=True)
class JetContext:
    """Coordinates (t, x, u, u_x, u_t, ...) for total derivatives.

    ``order`` caps the spatial derivative count and must be at least 3 for
    the third-order dispersion term.
    """

    independent: tuple = ("t", "x")
    dependent: str = "u"
    order: int = 5
    max_time_order: int = 10

    def __post_init__(self):
        if self.dependent in self.independent:
            raise ValueError("dependent variable collides with an independent")
        if self.order < 3:
            raise ValueError("spatial order must be >= 3")

    def jet(self, nx: int, nt: int) -> Sym:
        if nx == 0 and nt == 0:
            return sym(self.dependent)
        if nx > self.order:
            raise DiffError(f"spatial jet order {nx} exceeds context cap "
                            f"{self.order}")
        if nt > self.max_time_order:
            raise DiffError(f"time jet order {nt} exceeds context cap")
        return sym(f"{self.dependent}_{'x' * nx}{'t' * nt}")

    def parse_jet(self, name: str):
        """(nx, nt) for a jet symbol name, or None."""
        if name == self.dependent:
            return (0, 0)
        prefix = self.dependent + "_"
        if not name.startswith(prefix):
            return None
        tail = name[len(prefix):]
        nx = 0
        while nx < len(tail) and tail[nx] == "x":
            nx += 1
        nt = len(tail) - nx
        if tail[nx:] != "t" * nt or not tail:
            return None
        return (nx, nt)

    def raise_jet(self, name: str, var: str) -> Sym:
        parsed = self.parse_jet(name)
        if parsed is None:
            raise DiffError(f"{name!r} is not a jet symbol")
        nx, nt = parsed
        if var == "x":
            return self.jet(nx + 1, nt)
        if var == "t":
            return self.jet(nx, nt + 1)
        raise DiffError(f"cannot raise jets along {var!r}")

    def jet_symbols_in(self, e: Expr) -> list:
        names = [n for n in free_symbols(e) if self.parse_jet(n) is not None]
        names.sort()
        return names


def _partial(e: Expr, v: str) -> Expr:
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Sym):
        return ONE if e.name == v else ZERO
    if not contains_symbol(e, v):
        return ZERO
    if isinstance(e, Sum):
        return add(*(_partial(t, v) for t in e.terms))
    if isinstance(e, Prod):
        parts = []
        factors = e.factors
        for i, f in enumerate(factors):
            df = _partial(f, v)
            if df == ZERO:
                continue
            parts.append(mul(df, *factors[:i], *factors[i + 1:]))
        return add(*parts)
    if isinstance(e, Pow):
        if contains_symbol(e.exp, v):
            raise DiffError(
                f"exponent depends on {v!r}; logarithmic derivatives are out "
                "of scope")
        db = _partial(e.base, v)
        return mul(e.exp, pow_(e.base, add(e.exp, MINUS_ONE)), db)
    if isinstance(e, Func):
        if len(e.args) != 1:
            raise DiffError(
                f"cannot differentiate {e.name}(...) with {len(e.args)} "
                "arguments")
        inner = _partial(e.args[0], v)
        if inner == ZERO:
            return ZERO
        return mul(Func(e.name, e.args, e.order + 1), inner)
    if isinstance(e, GammaF):
        raise DiffError("derivative of Gamma (digamma) is out of scope")
    if isinstance(e, FDeriv):
        if e.var.name == v:
            raise DiffError(
                "cannot differentiate a fractional-derivative node in its "
                "own variable; use the grid numerics")
        raise DiffError(
            "cannot differentiate under a fractional-derivative node")
    raise TypeError(type(e))  # pragma: no cover


def _total(e: Expr, v: str, ctx: JetContext) -> Expr:
    out = _partial_atomic_fd(e, v)
    for name in ctx.jet_symbols_in(e):
        de = _partial(e, name)
        if de == ZERO:
            continue
        out = add(out, mul(ctx.raise_jet(name, v), de))
    return out


def _partial_atomic_fd(e: Expr, v: str) -> Expr:
    """Partial derivative treating FDeriv nodes as atomic coordinates."""
    if isinstance(e, FDeriv):
        return ZERO
    if isinstance(e, Sum):
        return add(*(_partial_atomic_fd(t, v) for t in e.terms))
    if isinstance(e, Prod):
        parts = []
        for i, f in enumerate(e.factors):
            df = _partial_atomic_fd(f, v)
            if df == ZERO:
                continue
            parts.append(mul(df, *e.factors[:i], *e.factors[i + 1:]))
        return add(*parts)
    return _partial(e, v)


def diff(e, v, k: int = 1, ctx: JetContext | None = None) -> Expr:
    """k-th derivative along v; total derivative when a jet context is given."""
    if k < 1:
        raise ValueError("derivative order must be >= 1")
    e = as_expr(e)
    name = v.name if isinstance(v, Sym) else str(v)
    for _ in range(k):
        e = _total(e, name, ctx) if ctx is not None else _partial(e, name)
    return e


def total_derivative_t(e, ctx: JetContext) -> Expr:
    """Total time derivative D_t in jet coordinates."""
    return diff(e, "t", 1, ctx)


def is_polynomial_in(e: Expr, names) -> bool:
    """True if e is polynomial in the given symbols (they occur only through
    nonnegative integer powers, never inside functions or exponents)."""
    names = set(names)

    def ok(node: Expr) -> bool:
        if isinstance(node, (Num, Sym)):
            return True
        if isinstance(node, Sum):
            return all(ok(t) for t in node.terms)
        if isinstance(node, Prod):
            return all(ok(f) for f in node.factors)
        if isinstance(node, Pow):
            if contains_symbol(node.exp, names):
                return False
            if contains_symbol(node.base, names):
                if not (isinstance(node.exp, Num)
                        and node.exp.value.denominator == 1
                        and node.exp.value >= 0):
                    return False
            return ok(node.base)
        if isinstance(node, (Func, GammaF, FDeriv)):
            return not contains_symbol(node, names)
        raise TypeError(type(node))  # pragma: no cover

    return ok(e)


# ---------------------------------------------------------------------------
# coefficient collection


def _basis_parts(basis_monos):
    """Symbols plus non-symbol atoms a factor may contain."""
    syms: set[str] = set()
    nodes: list[Expr] = []

    def scan(e: Expr):
        if isinstance(e, Sym):
            syms.add(e.name)
        elif isinstance(e, Pow):
            scan(e.base)
        elif isinstance(e, Prod):
            for f in e.factors:
                scan(f)
        elif isinstance(e, Sum):
            for t in e.terms:
                scan(t)
        elif isinstance(e, (Func, GammaF, FDeriv)):
            nodes.append(e)

    for m in basis_monos:
        scan(m)
    return syms, nodes


def split_by(e: Expr, belongs) -> dict:
    """Group a canonical expression by monomials of selected factors.

    ``belongs(factor)`` decides whether a product factor joins the monomial
    part; the rest joins the coefficient.  Returns {monomial: coefficient}
    with canonical keys (num(1) for the coefficient-only group).
    """
    e = as_expr(e)
    groups: dict[Expr, list] = {}
    terms = e.terms if isinstance(e, Sum) else (e,)
    if e == ZERO:
        return {}
    for t in terms:
        factors = t.factors if isinstance(t, Prod) else (t,)
        mono_parts = []
        coeff_parts = []
        for f in factors:
            if isinstance(f, Num):
                coeff_parts.append(f)
            elif belongs(f):
                mono_parts.append(f)
            else:
                coeff_parts.append(f)
        mono = mul(*mono_parts) if mono_parts else ONE
        coeff = mul(*coeff_parts) if coeff_parts else ONE
        groups.setdefault(mono, []).append(coeff)
    return {mono: add(*parts) for mono, parts in groups.items()}


def collect_terms(e: Expr, basis) -> dict:
    """Write e exactly as sum(coeff[m] * m) over the given monomial basis.

    Raises :class:`CollectError` (naming the offending term) when a term is
    not a coefficient times a basis monomial, or when a coefficient still
    contains basis symbols.
    """
    basis = [as_expr(m) for m in basis]
    basis_set = {m: m for m in basis}
    syms, nodes = _basis_parts(basis)

    def belongs(f: Expr) -> bool:
        if contains_symbol(f, syms):
            return True
        return any(contains_node(f, n) for n in nodes)

    grouped = split_by(as_expr(e), belongs)
    out: dict[Expr, Expr] = {}
    for mono, coeff in grouped.items():
        if coeff == ZERO:
            continue
        if mono not in basis_set:
            raise CollectError(
                f"term not expressible over the basis: {mono}", offending=mono)
        out[basis_set[mono]] = coeff
    return out


def jet_bindings(u_expr: Expr, ctx: JetContext, max_x: int = 3,
                 max_t: int = 2) -> dict:
    """Bindings replacing jet symbols by derivatives of an explicit u(x, t).

    Useful for evaluating jet-space expressions along a concrete trajectory.
    """
    out = {ctx.dependent: u_expr}
    for nx in range(max_x + 1):
        for nt in range(max_t + 1):
            if nx == 0 and nt == 0:
                continue
            d = u_expr
            if nx:
                d = diff(d, "x", nx)
            if nt:
                d = diff(d, "t", nt)
            out[ctx.jet(nx, nt).name] = d
    return out
