"""Expression-core tests: canonicalization, substitution, evaluation."""

import math
import random
from fractions import Fraction as Q

import pytest

from conftest import random_expr, random_point, random_rational
from fracsym.expr import (
    EvalError, SimplifyError, SubstitutionError, ZERO, ONE, MINUS_ONE,
    add, clear_denominators, eval_numeric, fderiv, func, gammaf,
    is_zero_exact, mul, num, pow_, simplify, substitute, sym, to_text,
)

x, t, u, r, h = sym("x"), sym("t"), sym("u"), sym("r"), sym("h")
alpha, b = sym("alpha"), sym("b")


class TestSimplify:
    def test_additive_identity(self):
        e = add(mul(2, u, sym("u_x")), ZERO)
        assert e == mul(2, u, sym("u_x"))

    def test_power_merge(self):
        assert mul(pow_(x, 1), pow_(x, 2)) == pow_(x, 3)

    def test_opposite_coefficients_cancel(self, rng):
        # oracle first: the two terms are numeric negatives of each other
        lhs = mul(add(alpha, -b), x)
        rhs = mul(add(b, -alpha), x)
        for _ in range(5):
            point = {"alpha": rng.uniform(0.1, 0.9),
                     "b": rng.uniform(-2, 2), "x": rng.uniform(0.5, 2)}
            assert eval_numeric(lhs, point) + eval_numeric(rhs, point) \
                == pytest.approx(0.0, abs=1e-12)
        assert add(lhs, rhs) == ZERO

    def test_mul_by_zero_and_one(self):
        assert mul(0, u, x) == ZERO
        assert mul(1, u) == u
        assert pow_(x, 0) == ONE

    def test_idempotent_on_random_corpus(self):
        rng = random.Random(99)
        for _ in range(1000):
            e = random_expr(rng, depth=6)
            s = simplify(e)
            assert simplify(s) == s

    def test_numeric_agreement_after_simplify(self, rng):
        for _ in range(50):
            e = random_expr(rng, depth=5)
            s = simplify(e)
            point = random_point(rng)
            try:
                v1 = eval_numeric(e, point)
                v2 = eval_numeric(s, point)
            except EvalError:
                continue
            if math.isfinite(v1) and abs(v1) < 1e12:
                assert v2 == pytest.approx(v1, rel=1e-9, abs=1e-9)

    def test_division_by_zero_folding(self):
        with pytest.raises(SimplifyError):
            pow_(num(0), MINUS_ONE)

    def test_sum_power_expansion(self):
        e = pow_(add(x, 1), 2)
        assert e == add(pow_(x, 2), mul(2, x), ONE)

    def test_inverse_power_cancellation(self):
        base = add(alpha, -b)
        assert mul(base, pow_(base, MINUS_ONE)) == ONE

    def test_sign_normalized_integer_powers(self):
        # (b - alpha)^-1 == -(alpha - b)^-1 so the product with (alpha - b)
        # cancels up to sign
        e = mul(add(b, -alpha), pow_(add(alpha, -b), MINUS_ONE))
        assert e == MINUS_ONE


class TestGammaNode:
    def test_integer_folding(self):
        assert gammaf(5) == num(24)
        assert gammaf(1) == ONE

    def test_pole_rejected(self):
        with pytest.raises(SimplifyError):
            gammaf(0)
        with pytest.raises(SimplifyError):
            gammaf(-3)

    def test_recurrence_normalization(self):
        # Gamma(2 - a) = (1 - a) * (-a) * Gamma(-a): shares the Gamma(-a) atom
        g2 = gammaf(add(2, mul(-1, alpha)))
        g1 = gammaf(add(1, mul(-1, alpha)))
        ratio_atoms = mul(g2, pow_(g1, MINUS_ONE))
        assert is_zero_exact(add(ratio_atoms, mul(-1, add(1, mul(-1, alpha)))))

    def test_half_integer_shift(self):
        assert gammaf(Q(5, 2)) == mul(num(Q(3, 4)), gammaf(Q(1, 2)))


class TestSubstitute:
    def test_direct_replacement(self):
        assert substitute(pow_(u, 2), {"u": mul(pow_(x, 2), h)}) \
            == mul(pow_(x, 4), pow_(h, 2))

    def test_printed_invariant_stays_fixed(self):
        # r -> t*x^(1/(alpha-b)) has no r left to replace afterwards
        target = mul(t, pow_(x, pow_(add(alpha, -b), MINUS_ONE)))
        assert substitute(r, {"r": target}) == target

    def test_fd_node_rewrap(self):
        e = fderiv(u, t, alpha)
        assert substitute(e, {"u": func("h", (t,))}) \
            == fderiv(func("h", (t,)), t, alpha)

    def test_unbound_symbols_unchanged(self):
        e = add(u, x)
        assert substitute(e, {"u": t}) == add(t, x)

    def test_cyclic_binding_rejected(self):
        with pytest.raises(SubstitutionError):
            substitute(add(x, t), {"x": t, "t": x})

    def test_commutes_with_evaluation(self, rng):
        for _ in range(20):
            e = random_expr(rng, depth=4)
            binding = {"x": add(t, num(random_rational(rng)))}
            point = random_point(rng)
            composed = dict(point)
            try:
                composed["x"] = eval_numeric(binding["x"], point)
                v1 = eval_numeric(substitute(e, binding), point)
                v2 = eval_numeric(e, composed)
            except EvalError:
                continue
            if math.isfinite(v1) and abs(v1) < 1e10:
                assert v1 == pytest.approx(v2, rel=1e-12, abs=1e-12)


class TestEval:
    def test_square(self):
        assert eval_numeric(pow_(t, 2), {"t": 3}) == 9.0

    def test_gamma_half_by_reflection_oracle(self):
        # Gamma(1/2)^2 == pi
        value = eval_numeric(gammaf(Q(1, 2)))
        assert value ** 2 == pytest.approx(math.pi, rel=1e-12)
        assert value == pytest.approx(1.7724538509, abs=1e-9)

    def test_unbound_symbol(self):
        with pytest.raises(EvalError, match="unbound"):
            eval_numeric(sym("u_x"), {})

    def test_unresolved_fd_node(self):
        with pytest.raises(EvalError, match="fractional"):
            eval_numeric(fderiv(u, t, num(Q(1, 2))), {"u": 1, "t": 1})

    def test_known_functions(self):
        e = func("sin", (x,))
        assert eval_numeric(e, {"x": 0.3}) == pytest.approx(math.sin(0.3))
        de = func("sin", (x,), order=1)
        assert eval_numeric(de, {"x": 0.3}) == pytest.approx(math.cos(0.3))
        assert eval_numeric(func("exp", (x,), order=2), {"x": 0.4}) \
            == pytest.approx(math.exp(0.4))


class TestZeroDetection:
    def test_rational_function_identity(self):
        X1 = pow_(add(alpha, -b), MINUS_ONE)
        e = add(ONE, mul(MINUS_ONE, alpha, X1), mul(b, X1))
        assert e != ZERO  # not structurally zero
        assert is_zero_exact(e)

    def test_nonzero_stays_nonzero(self):
        X1 = pow_(add(alpha, -b), MINUS_ONE)
        e = add(ONE, mul(alpha, X1))
        assert not is_zero_exact(e)

    def test_clear_denominators_is_polynomial(self):
        X1 = pow_(add(alpha, -b), MINUS_ONE)
        cleared = clear_denominators(add(mul(alpha, X1), b))
        assert "(" not in to_text(cleared) or "^(-" not in to_text(cleared)


class TestPrinting:
    def test_rational_forms(self):
        assert to_text(num(Q(-3, 4))) == "-3/4"
        assert to_text(mul(Q(3, 4), x)) == "3/4*x"

    def test_fraction_base_parenthesized(self):
        assert to_text(pow_(num(Q(3, 4)), x)) == "(3/4)^x"

    def test_sum_with_negative_terms(self):
        assert to_text(add(x, mul(-1, t))) in ("x - t", "-t + x")
