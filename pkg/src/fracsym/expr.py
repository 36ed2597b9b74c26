"""Immutable symbolic expressions with exact rational coefficients.

Canonical form
--------------
Every public constructor returns a canonicalized tree:

* sums and products are flattened and sorted under a fixed total ordering
  (numbers < symbols < powers < products < sums < function-like nodes);
* numeric constants fold exactly (``Fraction`` arithmetic) and sit first in
  a product;
* like terms in a sum and like bases in a product are merged;
* integer powers of sums and products expand, so polynomial expressions are
  held in expanded normal form;
* ``Gamma`` arguments are shifted into ``[0, 1)`` + polynomial prefactors via
  the recurrence, so ratios of Gammas at integer offsets cancel exactly.

Structural equality of canonical trees therefore decides equality for
polynomial expressions over the atoms.  Rational-function identities are
decided by :func:`is_zero_exact`, which clears negative integer powers and
re-tests; there is deliberately no multivariate gcd machinery.

Powers with fractional or symbolic exponents assume positive-valued bases
(the application domain has t, x, r > 0), so ``(b^p)^q -> b^(p*q)`` is
applied unconditionally.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

from .special import GammaPoleError, gamma_fn

Q = Fraction
Rational = Fraction  # exact coefficient type: lowest terms, positive denominator

__all__ = [
    "Rational",
    "Expr", "Num", "Sym", "Sum", "Prod", "Pow", "Func", "GammaF", "FDeriv",
    "ExprError", "SimplifyError", "EvalError", "SubstitutionError",
    "num", "sym", "add", "mul", "pow_", "func", "gammaf", "fderiv",
    "as_expr", "simplify", "substitute", "replace_node",
    "free_symbols", "contains_symbol", "contains_node",
    "eval_numeric", "is_zero_exact", "clear_denominators", "to_text",
    "ZERO", "ONE", "MINUS_ONE",
]


class ExprError(Exception):
    """Base for symbolic-engine errors."""


class SimplifyError(ExprError):
    """Raised when constant folding hits an undefined value (e.g. 0^-1)."""


class EvalError(ExprError):
    """Raised by numeric evaluation (unbound symbol, pole, opaque node)."""


class SubstitutionError(ExprError):
    """Raised for cyclic or ill-typed substitutions."""


_MAX_SUM_POWER_EXPANSION = 16
_GAMMA_FOLD_LIMIT = 64


class Expr:
    """Base class; all nodes are immutable and hash-cached."""

    __slots__ = ("_key", "_hash")

    def _set_key(self, key):
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"<expr {to_text(self)}>"

    def __str__(self):
        return to_text(self)

    # arithmetic sugar -----------------------------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, mul(MINUS_ONE, as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), mul(MINUS_ONE, self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, pow_(as_expr(other), MINUS_ONE))

    def __rtruediv__(self, other):
        return mul(as_expr(other), pow_(self, MINUS_ONE))

    def __pow__(self, other):
        return pow_(self, as_expr(other))

    def __neg__(self):
        return mul(MINUS_ONE, self)


class Num(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Q):
        object.__setattr__(self, "value", value)
        self._set_key((0, value))


class Sym(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        self._set_key((1, name))


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: Expr):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", exp)
        self._set_key((2, base._key, exp._key))


class Prod(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        object.__setattr__(self, "factors", factors)
        self._set_key((3, tuple(f._key for f in factors)))


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        object.__setattr__(self, "terms", terms)
        self._set_key((4, tuple(t._key for t in terms)))


class Func(Expr):
    """Named function application; ``order`` counts derivatives (h'' etc.)."""

    __slots__ = ("name", "args", "order")

    def __init__(self, name: str, args: tuple, order: int = 0):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "order", order)
        self._set_key((5, name, order, tuple(a._key for a in args)))


class GammaF(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        object.__setattr__(self, "arg", arg)
        self._set_key((6, arg._key))


class FDeriv(Expr):
    """Riemann-Liouville derivative node: FD(expr, var, alpha)."""

    __slots__ = ("expr", "var", "alpha")

    def __init__(self, expr: Expr, var: Sym, alpha: Expr):
        object.__setattr__(self, "expr", expr)
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "alpha", alpha)
        self._set_key((7, expr._key, var._key, alpha._key))


# ---------------------------------------------------------------------------
# constructors


_NUM_CACHE: dict[Q, Num] = {}
_SYM_CACHE: dict[str, Sym] = {}


def num(value) -> Num:
    v = value if isinstance(value, Q) else Q(value)
    node = _NUM_CACHE.get(v)
    if node is None:
        node = _NUM_CACHE.setdefault(v, Num(v))
    return node


def sym(name: str) -> Sym:
    node = _SYM_CACHE.get(name)
    if node is None:
        node = _SYM_CACHE.setdefault(name, Sym(name))
    return node


ZERO = num(0)
ONE = num(1)
MINUS_ONE = num(-1)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Q)):
        return num(x)
    if isinstance(x, str):
        return sym(x)
    raise TypeError(f"cannot interpret {x!r} as an expression")


def _coeff_mono(term: Expr):
    """Split a canonical term into (rational coefficient, monomial-or-None)."""
    if isinstance(term, Num):
        return term.value, None
    if isinstance(term, Prod) and isinstance(term.factors[0], Num):
        rest = term.factors[1:]
        mono = rest[0] if len(rest) == 1 else Prod(rest)
        return term.factors[0].value, mono
    return Q(1), term


def _term_from(coeff: Q, mono: Expr) -> Expr:
    if coeff == 1:
        return mono
    c = num(coeff)
    if isinstance(mono, Prod):
        return Prod((c,) + mono.factors)
    return Prod((c, mono))


def add(*terms) -> Expr:
    flat: list[Expr] = []
    stack = [as_expr(t) for t in terms]
    for t in stack:
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    const = Q(0)
    table: dict[tuple, list] = {}
    for t in flat:
        coeff, mono = _coeff_mono(t)
        if mono is None:
            const += coeff
            continue
        entry = table.get(mono._key)
        if entry is None:
            table[mono._key] = [coeff, mono]
        else:
            entry[0] += coeff
    out = [_term_from(c, m) for c, m in
           sorted(table.values(), key=lambda e: e[1]._key) if c != 0]
    if const != 0:
        out.insert(0, num(const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


def _base_exp(f: Expr):
    if isinstance(f, Pow):
        return f.base, f.exp
    return f, ONE


def mul(*factors) -> Expr:
    flat: list[Expr] = []
    for f in factors:
        f = as_expr(f)
        if isinstance(f, Prod):
            flat.extend(f.factors)
        else:
            flat.append(f)

    for _ in range(32):
        coeff = Q(1)
        powers: dict[tuple, list] = {}
        for f in flat:
            if isinstance(f, Num):
                coeff *= f.value
                continue
            base, exp = _base_exp(f)
            # key sum bases by their monic form (integer exponents only) so
            # e.g. (b-a) and (a-b)^-1 cancel structurally
            if (isinstance(base, Sum)
                    and isinstance(exp, Num) and exp.value.denominator == 1):
                lead, monic = _monic_sum(base)
                if lead != 1:
                    coeff *= lead ** int(exp.value)
                    base = monic
            entry = powers.get(base._key)
            if entry is None:
                powers[base._key] = [base, [exp]]
            else:
                entry[1].append(exp)
        if coeff == 0:
            return ZERO
        pieces: list[Expr] = []
        reflatten = False
        for base, exps in powers.values():
            resolved = pow_(base, add(*exps) if len(exps) > 1 else exps[0])
            if isinstance(resolved, Num):
                coeff *= resolved.value
                if coeff == 0:
                    return ZERO
            elif isinstance(resolved, Prod):
                pieces.extend(resolved.factors)
                reflatten = True
            else:
                pieces.append(resolved)
        if not reflatten:
            break
        flat = ([num(coeff)] if coeff != 1 else []) + pieces
    else:  # pragma: no cover - merge loop is strictly reducing
        raise SimplifyError("product canonicalization did not converge")

    sums = [p for p in pieces if isinstance(p, Sum)]
    if sums:
        first = sums[0]
        rest = [p for p in pieces if p is not first]
        c = num(coeff)
        return add(*(mul(c, t, *rest) for t in first.terms))

    pieces.sort(key=lambda p: p._key)
    if coeff != 1:
        pieces.insert(0, num(coeff))
    if not pieces:
        return ONE
    if len(pieces) == 1:
        return pieces[0]
    return Prod(tuple(pieces))


def _nth_root_exact(n: int, d: int):
    """Integer d-th root of n >= 0, or None if inexact."""
    if n in (0, 1):
        return n
    r = round(n ** (1.0 / d))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** d == n:
            return cand
    return None


def _fold_num_power(b: Q, e: Q):
    """Exact value of b**e, or None if it is not rational."""
    if e.denominator == 1:
        k = int(e)
        if b == 0:
            if k < 0:
                raise SimplifyError("division by zero in constant folding")
            return Q(1) if k == 0 else Q(0)
        return b ** k
    if b == 0:
        if e > 0:
            return Q(0)
        raise SimplifyError("division by zero in constant folding")
    if b == 1:
        return Q(1)
    if b < 0:
        return None
    root_n = _nth_root_exact(b.numerator, e.denominator)
    root_d = _nth_root_exact(b.denominator, e.denominator)
    if root_n is None or root_d is None:
        return None
    return Q(root_n, root_d) ** e.numerator


def _monic_sum(s: Sum):
    """(lead, s / lead) where lead is the first term's rational coefficient.

    Dividing out the leading coefficient gives sums a canonical scale, so
    e.g. (1/2 - b)^-1 and 2*(1 - 2b)^-1 meet in one representation.  Only
    valid to apply under integer exponents.
    """
    lead, _ = _coeff_mono(s.terms[0])
    out = []
    for term in s.terms:
        coeff, mono = _coeff_mono(term)
        scaled = coeff / lead
        out.append(num(scaled) if mono is None else _term_from(scaled, mono))
    return lead, add(*out)


def _expand_sum_power(s: Sum, k: int) -> Expr:
    """(t1 + ... + tn)^k by direct distribution over the terms.

    Multiplies term-by-term so the product canonicalizer never sees two
    identical Sum factors (which it would just merge back into a power).
    """
    out: Expr = s
    for _ in range(k - 1):
        out_terms = out.terms if isinstance(out, Sum) else (out,)
        out = add(*(mul(a, b) for a in out_terms for b in s.terms))
    return out


def pow_(base, exp) -> Expr:
    base = as_expr(base)
    exp = as_expr(exp)
    if exp == ZERO:
        return ONE
    if exp == ONE:
        return base
    if isinstance(base, Num):
        if isinstance(exp, Num):
            folded = _fold_num_power(base.value, exp.value)
            if folded is not None:
                return num(folded)
        if base.value == 1:
            return ONE
        return Pow(base, exp)
    if isinstance(base, Pow):
        return pow_(base.base, mul(base.exp, exp))
    if isinstance(base, Prod):
        if isinstance(exp, Num) and exp.value.denominator == 1:
            return mul(*(pow_(f, exp) for f in base.factors))
        # fractional/symbolic exponent: distribute only when the numeric
        # coefficient is positive (bases are positive in-domain)
        coeff, _ = _coeff_mono(base)
        if coeff > 0:
            return mul(*(pow_(f, exp) for f in base.factors))
    if isinstance(base, Sum) and isinstance(exp, Num) and exp.value.denominator == 1:
        k = int(exp.value)
        if 2 <= k <= _MAX_SUM_POWER_EXPANSION:
            return _expand_sum_power(base, k)
        if k < 0:
            lead, monic = _monic_sum(base)
            if lead != 1:
                return mul(num(lead ** k), Pow(monic, exp))
    return Pow(base, exp)


def func(name: str, args: Iterable, order: int = 0) -> Expr:
    return Func(name, tuple(as_expr(a) for a in args), order)


def gammaf(arg) -> Expr:
    """Gamma node with argument normalized by the recurrence.

    Positive integer arguments fold to factorials; arguments whose constant
    part is >= 1 are shifted down so that e.g. Gamma(2-a) and Gamma(1-a)
    share the atom Gamma(-a) and cancel exactly in ratios.
    """
    arg = as_expr(arg)
    if isinstance(arg, Num):
        v = arg.value
        if v.denominator == 1:
            n = int(v)
            if n <= 0:
                raise SimplifyError(f"gamma pole at {n}")
            if n <= _GAMMA_FOLD_LIMIT:
                return num(math.factorial(n - 1))
            return GammaF(arg)
        shift = math.floor(v)
        if shift >= 1:
            small = arg.value - shift
            prefactor = mul(*(num(small + j) for j in range(shift)))
            return mul(prefactor, GammaF(num(small)))
        return GammaF(arg)
    const = Q(0)
    if isinstance(arg, Sum):
        first, rest = _coeff_mono(arg.terms[0])
        if rest is None:
            const = first
    shift = math.floor(const)
    if shift >= 1:
        small = add(arg, num(-shift))
        prefactor = mul(*(add(small, num(j)) for j in range(shift)))
        return mul(prefactor, GammaF(small))
    return GammaF(arg)


def fderiv(expr, var, alpha) -> Expr:
    """RL-derivative node; linear over sums and rational coefficients."""
    expr = as_expr(expr)
    var = as_expr(var)
    alpha = as_expr(alpha)
    if not isinstance(var, Sym):
        raise ExprError("fractional-derivative variable must be a symbol")
    if expr == ZERO:
        return ZERO
    if isinstance(expr, Sum):
        return add(*(fderiv(t, var, alpha) for t in expr.terms))
    coeff, mono = _coeff_mono(expr)
    if mono is None:
        # constant payload stays symbolic: RL of a constant is *not* zero
        return _term_from(coeff, FDeriv(ONE, var, alpha)) if coeff != 0 else ZERO
    if coeff != 1:
        return _term_from(coeff, FDeriv(mono, var, alpha))
    return FDeriv(expr, var, alpha)


# ---------------------------------------------------------------------------
# structure queries


_FREE_CACHE: dict[tuple, frozenset] = {}


def free_symbols(e: Expr) -> frozenset:
    got = _FREE_CACHE.get(e._key)
    if got is not None:
        return got
    if isinstance(e, Num):
        out = frozenset()
    elif isinstance(e, Sym):
        out = frozenset((e.name,))
    elif isinstance(e, Pow):
        out = free_symbols(e.base) | free_symbols(e.exp)
    elif isinstance(e, (Sum, Prod)):
        parts = e.terms if isinstance(e, Sum) else e.factors
        out = frozenset().union(*(free_symbols(p) for p in parts))
    elif isinstance(e, Func):
        out = frozenset().union(*(free_symbols(a) for a in e.args)) if e.args else frozenset()
    elif isinstance(e, GammaF):
        out = free_symbols(e.arg)
    elif isinstance(e, FDeriv):
        out = free_symbols(e.expr) | free_symbols(e.alpha) | {e.var.name}
    else:  # pragma: no cover
        raise TypeError(type(e))
    _FREE_CACHE[e._key] = out
    return out


def contains_symbol(e: Expr, names) -> bool:
    if isinstance(names, str):
        names = (names,)
    return not free_symbols(e).isdisjoint(names)


def contains_node(e: Expr, target: Expr) -> bool:
    if e == target:
        return True
    if isinstance(e, Pow):
        return contains_node(e.base, target) or contains_node(e.exp, target)
    if isinstance(e, (Sum, Prod)):
        parts = e.terms if isinstance(e, Sum) else e.factors
        return any(contains_node(p, target) for p in parts)
    if isinstance(e, Func):
        return any(contains_node(a, target) for a in e.args)
    if isinstance(e, GammaF):
        return contains_node(e.arg, target)
    if isinstance(e, FDeriv):
        return (contains_node(e.expr, target) or contains_node(e.alpha, target)
                or e.var == target)
    return False


# ---------------------------------------------------------------------------
# rewriting


def simplify(e: Expr) -> Expr:
    """Re-canonicalize an expression (idempotent by construction)."""
    e = as_expr(e)
    if isinstance(e, (Num, Sym)):
        return e
    if isinstance(e, Sum):
        return add(*(simplify(t) for t in e.terms))
    if isinstance(e, Prod):
        return mul(*(simplify(f) for f in e.factors))
    if isinstance(e, Pow):
        return pow_(simplify(e.base), simplify(e.exp))
    if isinstance(e, Func):
        return Func(e.name, tuple(simplify(a) for a in e.args), e.order)
    if isinstance(e, GammaF):
        return gammaf(simplify(e.arg))
    if isinstance(e, FDeriv):
        return fderiv(simplify(e.expr), e.var, simplify(e.alpha))
    raise TypeError(type(e))  # pragma: no cover


def substitute(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous substitution of symbols, then canonicalization."""
    table: dict[str, Expr] = {}
    for key, value in bindings.items():
        name = key.name if isinstance(key, Sym) else str(key)
        table[name] = as_expr(value)

    # reject cyclic bindings (x -> y, y -> x has no simultaneous fixpoint
    # under repeated application semantics; we only apply once, but a cycle
    # almost always indicates caller error)
    def reaches(name, target, seen):
        if name in seen:
            return False
        seen.add(name)
        value = table.get(name)
        if value is None:
            return False
        frees = free_symbols(value)
        if target in frees:
            return True
        return any(reaches(f, target, seen) for f in frees if f in table)

    for name in table:
        if name in free_symbols(table[name]):
            continue  # x -> x + 1 style self-reference is fine: applied once
        if reaches(name, name, set()):
            raise SubstitutionError(f"cyclic binding through {name!r}")

    def walk(node: Expr) -> Expr:
        if isinstance(node, Num):
            return node
        if isinstance(node, Sym):
            return table.get(node.name, node)
        if free_symbols(node).isdisjoint(table):
            return node
        if isinstance(node, Sum):
            return add(*(walk(t) for t in node.terms))
        if isinstance(node, Prod):
            return mul(*(walk(f) for f in node.factors))
        if isinstance(node, Pow):
            return pow_(walk(node.base), walk(node.exp))
        if isinstance(node, Func):
            return Func(node.name, tuple(walk(a) for a in node.args), node.order)
        if isinstance(node, GammaF):
            return gammaf(walk(node.arg))
        if isinstance(node, FDeriv):
            new_var = node.var
            if node.var.name in table:
                replacement = table[node.var.name]
                if not isinstance(replacement, Sym):
                    raise SubstitutionError(
                        "fractional-derivative variable can only be renamed "
                        "to another symbol")
                new_var = replacement
            return fderiv(walk(node.expr), new_var, walk(node.alpha))
        raise TypeError(type(node))  # pragma: no cover

    return walk(e)


def replace_node(e: Expr, target: Expr, replacement: Expr) -> Expr:
    """Replace every occurrence of a canonical subtree by another expression."""
    replacement = as_expr(replacement)

    def walk(node: Expr) -> Expr:
        if node == target:
            return replacement
        if isinstance(node, (Num, Sym)):
            return node
        if isinstance(node, Sum):
            return add(*(walk(t) for t in node.terms))
        if isinstance(node, Prod):
            return mul(*(walk(f) for f in node.factors))
        if isinstance(node, Pow):
            return pow_(walk(node.base), walk(node.exp))
        if isinstance(node, Func):
            return Func(node.name, tuple(walk(a) for a in node.args), node.order)
        if isinstance(node, GammaF):
            return gammaf(walk(node.arg))
        if isinstance(node, FDeriv):
            return fderiv(walk(node.expr), node.var, walk(node.alpha))
        raise TypeError(type(node))  # pragma: no cover

    return walk(e)


# ---------------------------------------------------------------------------
# zero testing


def _negative_power_clearers(e: Expr) -> dict:
    """Map base-key -> (base, most-negative Num exponent) over all terms."""
    found: dict[tuple, list] = {}

    def scan_factor(f: Expr):
        if isinstance(f, Pow) and isinstance(f.exp, Num) and f.exp.value < 0:
            entry = found.get(f.base._key)
            if entry is None:
                found[f.base._key] = [f.base, f.exp.value]
            else:
                entry[1] = min(entry[1], f.exp.value)

    terms = e.terms if isinstance(e, Sum) else (e,)
    for t in terms:
        factors = t.factors if isinstance(t, Prod) else (t,)
        for f in factors:
            scan_factor(f)
    return found


def clear_denominators(e: Expr) -> Expr:
    """Multiply through by enough positive powers to remove Num-exponent
    negative powers.  Preserves zero-ness (bases are assumed nonzero).

    The clearing factors are injected as raw ``Pow`` atoms so the product
    merger cancels them against the negative powers *before* any expansion.
    """
    for _ in range(8):
        found = _negative_power_clearers(e)
        if not found:
            return e
        clearers = [Pow(base, num(-exp)) for base, exp in found.values()]
        terms = e.terms if isinstance(e, Sum) else (e,)
        e = add(*(mul(t, *clearers) for t in terms))
    return e


def is_zero_exact(e: Expr) -> bool:
    """Exact zero test: canonical zero, or zero after clearing denominators."""
    e = as_expr(e)
    if e == ZERO:
        return True
    if isinstance(e, Num):
        return False
    return clear_denominators(e) == ZERO


# ---------------------------------------------------------------------------
# numeric evaluation


_KNOWN_FUNCS = {"exp", "sin", "cos", "log"}


def _eval_known_func(name: str, order: int, x: float) -> float:
    if name == "exp":
        return math.exp(x)
    if name == "sin":
        return (math.sin, math.cos, lambda v: -math.sin(v),
                lambda v: -math.cos(v))[order % 4](x)
    if name == "cos":
        return (math.cos, lambda v: -math.sin(v), lambda v: -math.cos(v),
                math.sin)[order % 4](x)
    if name == "log":
        if order == 0:
            return math.log(x)
        raise EvalError("derivatives of log are not evaluated")
    raise EvalError(f"unknown function {name!r}")  # pragma: no cover


def eval_numeric(e: Expr, point: Mapping | None = None, *,
                 funcs: Mapping | None = None, fd_handler=None) -> float:
    """IEEE-double evaluation at a point binding every free symbol.

    ``funcs`` may supply callables ``f(x, order) -> float`` for opaque named
    functions; ``fd_handler(node) -> float`` resolves fractional-derivative
    nodes (otherwise they are an error: grid numerics own that).
    """
    point = point or {}

    def ev(node: Expr) -> float:
        if isinstance(node, Num):
            return float(node.value)
        if isinstance(node, Sym):
            try:
                return float(point[node.name])
            except KeyError:
                raise EvalError(f"unbound symbol {node.name!r}") from None
        if isinstance(node, Sum):
            return math.fsum(ev(t) for t in node.terms)
        if isinstance(node, Prod):
            out = 1.0
            for f in node.factors:
                out *= ev(f)
            return out
        if isinstance(node, Pow):
            b = ev(node.base)
            x = ev(node.exp)
            try:
                return b ** x
            except (ValueError, ZeroDivisionError, OverflowError) as exc:
                raise EvalError(f"power evaluation failed: {b}**{x}") from exc
        if isinstance(node, GammaF):
            try:
                return gamma_fn(ev(node.arg))
            except GammaPoleError as exc:
                raise EvalError(str(exc)) from exc
        if isinstance(node, Func):
            if funcs and node.name in funcs:
                if len(node.args) != 1:
                    raise EvalError("only unary opaque functions are supported")
                return funcs[node.name](ev(node.args[0]), node.order)
            if node.name in _KNOWN_FUNCS and len(node.args) == 1:
                return _eval_known_func(node.name, node.order, ev(node.args[0]))
            raise EvalError(f"cannot evaluate function {node.name!r}")
        if isinstance(node, FDeriv):
            if fd_handler is not None:
                return fd_handler(node)
            raise EvalError(
                "unresolved fractional-derivative node; use the grid numerics")
        raise TypeError(type(node))  # pragma: no cover

    return ev(as_expr(e))


# ---------------------------------------------------------------------------
# printing (grammar shared with fracsym.parser)


def _print_pow(e: Pow) -> str:
    base = e.base
    if isinstance(base, (Sym,)) or (
            isinstance(base, Num) and base.value.denominator == 1
            and base.value >= 0):
        bt = to_text(base)
    elif isinstance(base, (Func, GammaF, FDeriv)):
        bt = to_text(base)
    else:
        bt = f"({to_text(base)})"
    ex = e.exp
    if isinstance(ex, Sym) or (isinstance(ex, Num) and ex.value.denominator == 1
                               and ex.value >= 0):
        et = to_text(ex)
    else:
        et = f"({to_text(ex)})"
    return f"{bt}^{et}"


def _print_factor(f: Expr) -> str:
    if isinstance(f, (Sum,)):
        return f"({to_text(f)})"
    if isinstance(f, Num) and (f.value < 0):
        return f"({to_text(f)})"
    return to_text(f)


def _print_product(coeff: Q, factors: tuple) -> str:
    parts = [_print_factor(f) for f in factors]
    if coeff == 1:
        lead = ""
    elif coeff == -1:
        lead = "-"
    else:
        lead = _print_num(coeff)
        if parts:
            lead += "*"
    return lead + "*".join(parts)


def _print_num(v: Q) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def to_text(e: Expr) -> str:
    """Render in the CLI expression grammar; parse(to_text(e)) == e."""
    e = as_expr(e)
    if isinstance(e, Num):
        return _print_num(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Pow):
        return _print_pow(e)
    if isinstance(e, Prod):
        coeff, mono = _coeff_mono(e)
        factors = (mono.factors if isinstance(mono, Prod)
                   else (mono,) if mono is not None else ())
        return _print_product(coeff, factors)
    if isinstance(e, Sum):
        out = [to_text(e.terms[0])]
        for t in e.terms[1:]:
            coeff, mono = _coeff_mono(t)
            if coeff < 0:
                out.append(" - ")
                out.append(to_text(_term_from(-coeff, mono) if mono is not None
                                   else num(-coeff)))
            else:
                out.append(" + ")
                out.append(to_text(t))
        return "".join(out)
    if isinstance(e, Func):
        inner = f"{e.name}({', '.join(to_text(a) for a in e.args)})"
        if e.order == 0:
            return inner
        if len(e.args) == 1 and isinstance(e.args[0], Sym):
            base = f"{e.name}({to_text(e.args[0])})"
            return f"diff({base}, {e.args[0].name}, {e.order})"
        # diagnostic-only form: derivatives at composite arguments occur in
        # intermediate chain-rule states, never in emitted reports
        return f"{e.name}{'~' * e.order}({', '.join(to_text(a) for a in e.args)})"
    if isinstance(e, GammaF):
        return f"Gamma({to_text(e.arg)})"
    if isinstance(e, FDeriv):
        return f"fdiff({to_text(e.expr)}, {e.var.name}, {to_text(e.alpha)})"
    raise TypeError(type(e))  # pragma: no cover
