"""Catalog of classification cases and their similarity reductions.

Classification keys follow the symmetry table (1.1 .. 3.3); reduction keys
follow the reduction sections (1 for the translation, then 2.1, 2.2, 3.1,
3.2, 4.1, 4.2 for the scaling reductions).  Stored reduced forms live in
``data/reduced_forms`` in the CLI expression grammar, one expression per
line with '#' comments.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Q
from importlib import resources

from .expr import Expr, as_expr, sym
from .parser import parse_expression
from .pde import CoeffForm, CoeffTag, PdeSpec

__all__ = [
    "ClassificationCase", "CLASSIFICATION_CASES", "REDUCTION_FORM_FILES",
    "classification_case", "spec_for_case", "reduction_key_for",
    "load_printed_form", "TRANSLATION_REDUCTION_KEY",
]

ALPHA = sym("alpha")

TRANSLATION_REDUCTION_KEY = "1"


@dataclass(frozen=True)
class ClassificationCase:
    key: str
    alpha: object            # "generic" | Fraction
    tag: CoeffTag
    scaling_reduction: str | None  # reduction key of the scaling generator

    def spec(self, m: int = 2, n: int = 3, zeta: int = 1,
             k=None, b=None) -> PdeSpec:
        kwargs = {}
        if k is not None:
            kwargs["k"] = as_expr(k)
        if b is not None:
            kwargs["b"] = as_expr(b)
        g = CoeffForm(self.tag, **kwargs)
        alpha = ALPHA if self.alpha == "generic" else as_expr(self.alpha)
        return PdeSpec(alpha=alpha, m=m, n=n, zeta=zeta, g=g)


CLASSIFICATION_CASES: dict[str, ClassificationCase] = {
    "1.1": ClassificationCase("1.1", "generic", CoeffTag.ARBITRARY, None),
    "1.2": ClassificationCase("1.2", "generic", CoeffTag.POWER, "2.1"),
    "1.3": ClassificationCase("1.3", "generic", CoeffTag.CONSTANT, "2.2"),
    "2.1": ClassificationCase("2.1", Q(1, 2), CoeffTag.EXPONENTIAL, None),
    "2.2": ClassificationCase("2.2", Q(1, 2), CoeffTag.POWER, "3.1"),
    "2.3": ClassificationCase("2.3", Q(1, 2), CoeffTag.CONSTANT, "3.2"),
    "3.1": ClassificationCase("3.1", Q(1, 3), CoeffTag.SHIFTED_POWER_23, None),
    "3.2": ClassificationCase("3.2", Q(1, 3), CoeffTag.POWER, "4.1"),
    "3.3": ClassificationCase("3.3", Q(1, 3), CoeffTag.CONSTANT, "4.2"),
}

REDUCTION_FORM_FILES = {
    "1": "case_1.txt",
    "2.1": "case_2_1.txt",
    "2.2": "case_2_2.txt",
    "3.1": "case_3_1.txt",
    "3.2": "case_3_2.txt",
    "4.1": "case_4_1.txt",
    "4.2": "case_4_2.txt",
}


def classification_case(key: str) -> ClassificationCase:
    try:
        return CLASSIFICATION_CASES[key]
    except KeyError:
        raise KeyError(
            f"unknown classification case {key!r}; valid keys: "
            f"{', '.join(sorted(CLASSIFICATION_CASES))}") from None


def spec_for_case(key: str, **kwargs) -> PdeSpec:
    return classification_case(key).spec(**kwargs)


def resolve_case_key(spec: PdeSpec) -> str | None:
    """Classification key matching a spec's (alpha, g-form), if any.

    Forms that do not appear verbatim in the table (e.g. an exponential g at
    generic alpha) fall back to the arbitrary-coefficient case key when the
    classification degenerates to the translation alone.
    """
    from .expr import Num
    if isinstance(spec.alpha, Num):
        a = spec.alpha.value
        kind = {Q(1, 2): "1/2", Q(1, 3): "1/3"}.get(a, "other")
    else:
        kind = "generic"
    table = {
        ("generic", CoeffTag.ARBITRARY): "1.1",
        ("generic", CoeffTag.POWER): "1.2",
        ("generic", CoeffTag.CONSTANT): "1.3",
        ("1/2", CoeffTag.EXPONENTIAL): "2.1",
        ("1/2", CoeffTag.POWER): "2.2",
        ("1/2", CoeffTag.CONSTANT): "2.3",
        ("1/3", CoeffTag.SHIFTED_POWER_23): "3.1",
        ("1/3", CoeffTag.QUAD_POWER_13): "3.1",
        ("1/3", CoeffTag.EXPONENTIAL): "3.1",
        ("1/3", CoeffTag.POWER): "3.2",
        ("1/3", CoeffTag.CONSTANT): "3.3",
    }
    hit = table.get((kind, spec.g.tag))
    if hit:
        return hit
    if spec.g.tag in (CoeffTag.ARBITRARY, CoeffTag.EXPONENTIAL):
        return "1.1"
    if spec.g.tag is CoeffTag.POWER:
        return "1.2"
    if spec.g.tag is CoeffTag.CONSTANT:
        return "1.3"
    return None


def reduction_key_for(classification_key: str, translation: bool) -> str | None:
    if translation:
        return TRANSLATION_REDUCTION_KEY
    return classification_case(classification_key).scaling_reduction


def load_printed_form(reduction_key: str) -> Expr:
    """Parse the stored reduced ODE for a reduction case."""
    try:
        fname = REDUCTION_FORM_FILES[reduction_key]
    except KeyError:
        raise KeyError(f"no stored reduced form for case {reduction_key!r}") \
            from None
    text = (resources.files("fracsym.data.reduced_forms") / fname).read_text()
    lines = [ln.strip() for ln in text.splitlines()]
    exprs = [parse_expression(ln) for ln in lines
             if ln and not ln.startswith("#")]
    if len(exprs) != 1:
        raise ValueError(f"{fname} must contain exactly one expression")
    return exprs[0]
