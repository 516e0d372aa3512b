"""Cubic Kolmogorov vector fields and exact invariant-sphere certification.

A Kolmogorov field has components x_i * G_i(x1, x2, x3).  For the general
cubic family, the unit sphere is invariant exactly when a finite list of
coefficient equalities holds; in that case dF/dt along the flow factors as
F * K with F the sphere polynomial and K the (quadratic) cofactor.  The
certificate is binary because everything is computed over Q.

The six-parameter canonical family (growth rates alpha_i, couplings d_i) is
the subfamily in which the sphere attracts all of R^3 minus the origin when
every alpha_i is positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import Dict, Sequence, Tuple, Union

import numpy as np

from .poly import SparsePoly, sphere_polynomial

Rational = Union[int, Fraction]
Number = Union[int, float, Fraction]

_QUAD_KEYS = ((1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3))


def to_fraction(value: Number) -> Fraction:
    """Exact rational for ints/Fractions; nearest rational of the decimal
    literal for floats (0.1 -> 1/10, not the binary expansion)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite parameter {value!r}")
        return Fraction(Decimal(repr(value)))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def _triple(values, name: str) -> Tuple[Fraction, Fraction, Fraction]:
    vals = tuple(to_fraction(v) for v in values)
    if len(vals) != 3:
        raise ValueError(f"{name} must have exactly 3 entries")
    return vals


def _quad(mapping, name: str) -> Dict[Tuple[int, int], Fraction]:
    out = {k: Fraction(0) for k in _QUAD_KEYS}
    for key, val in dict(mapping).items():
        k = tuple(int(v) for v in key)
        if k not in out:
            raise ValueError(f"{name} key must be upper-triangular (i,j), 1<=i<=j<=3; got {key!r}")
        out[k] = to_fraction(val)
    return out


@dataclass
class GeneralCubicCoeffs:
    """Coefficients of the general cubic Kolmogorov field.

    Component i is x_i * (r_i + sum_k lin_k x_k + sum_{k<=l} quad_kl x_k x_l)
    with (lin, quad) drawn from (a, a2), (b, b2), (c, c2) for i = 1, 2, 3.
    """

    r: Tuple[Fraction, Fraction, Fraction] = (Fraction(0),) * 3
    a: Tuple[Fraction, Fraction, Fraction] = (Fraction(0),) * 3
    b: Tuple[Fraction, Fraction, Fraction] = (Fraction(0),) * 3
    c: Tuple[Fraction, Fraction, Fraction] = (Fraction(0),) * 3
    a2: Dict[Tuple[int, int], Fraction] = field(default_factory=dict)
    b2: Dict[Tuple[int, int], Fraction] = field(default_factory=dict)
    c2: Dict[Tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        self.r = _triple(self.r, "r")
        self.a = _triple(self.a, "a")
        self.b = _triple(self.b, "b")
        self.c = _triple(self.c, "c")
        self.a2 = _quad(self.a2, "a2")
        self.b2 = _quad(self.b2, "b2")
        self.c2 = _quad(self.c2, "c2")

    def linear(self, i: int) -> Tuple[Fraction, ...]:
        return (self.a, self.b, self.c)[i - 1]

    def quadratic(self, i: int) -> Dict[Tuple[int, int], Fraction]:
        return (self.a2, self.b2, self.c2)[i - 1]

    def growth_poly(self, i: int) -> SparsePoly:
        """G_i as an exact polynomial."""
        terms = {(0, 0, 0): self.r[i - 1]}
        for k, lv in enumerate(self.linear(i)):
            e = [0, 0, 0]
            e[k] = 1
            terms[tuple(e)] = lv
        for (k, l), qv in self.quadratic(i).items():
            e = [0, 0, 0]
            e[k - 1] += 1
            e[l - 1] += 1
            terms[tuple(e)] = terms.get(tuple(e), Fraction(0)) + qv
        return SparsePoly(terms)

    def max_quadratic_degree(self) -> int:
        if any(v for q in (self.a2, self.b2, self.c2) for v in q.values()):
            return 2
        if any(v for lin in (self.a, self.b, self.c) for v in lin):
            return 1
        return 0


@dataclass
class ModelParams:
    """Canonical six-parameter system: growth rates alpha, couplings d.

    Entries may be ints, floats or Fractions; simulation converts to float,
    certification re-expresses them exactly via `as_fractions`.  Positivity
    of alpha is required only by attractivity-dependent operations and is
    checked at those call sites.
    """

    alpha: Tuple[Number, Number, Number]
    d: Tuple[Number, Number, Number]

    def __post_init__(self):
        self.alpha = tuple(self.alpha)
        self.d = tuple(self.d)
        if len(self.alpha) != 3 or len(self.d) != 3:
            raise ValueError("alpha and d must each have 3 entries")
        for v in (*self.alpha, *self.d):
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError("parameters must be finite")

    def as_fractions(self) -> Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]:
        return (tuple(to_fraction(v) for v in self.alpha),
                tuple(to_fraction(v) for v in self.d))

    def alpha_floats(self) -> Tuple[float, float, float]:
        return tuple(float(v) for v in self.alpha)

    def d_floats(self) -> Tuple[float, float, float]:
        return tuple(float(v) for v in self.d)


@dataclass
class CubicField:
    """A Kolmogorov field: three components, each divisible by its own x_i."""

    components: Tuple[SparsePoly, SparsePoly, SparsePoly]

    def __post_init__(self):
        self.components = tuple(self.components)
        if len(self.components) != 3:
            raise ValueError("a field has exactly 3 components")
        for i, comp in enumerate(self.components, start=1):
            if any(e[i - 1] == 0 for e in comp.terms):
                raise ValueError(f"component {i} is not divisible by x{i} (not Kolmogorov form)")

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)

    def evaluate(self, point: Sequence[float]) -> Tuple[float, float, float]:
        return tuple(c.evaluate(point) for c in self.components)

    def evaluate_exact(self, point) -> Tuple[Fraction, Fraction, Fraction]:
        return tuple(c.evaluate_exact(point) for c in self.components)


class CertStatus(Enum):
    NOT_INVARIANT = "not_invariant"
    INVARIANT_ISOLATED = "invariant_isolated"
    INVARIANT_FIRST_INTEGRAL = "invariant_first_integral"


@dataclass
class SphereCertificate:
    status: CertStatus
    cofactor: SparsePoly | None = None
    violations: Tuple[str, ...] = ()

    @property
    def is_invariant(self) -> bool:
        return self.status is not CertStatus.NOT_INVARIANT


@dataclass
class DegreeBoundReport:
    """Outcome of the residual test on a field of degree at most two."""

    status: CertStatus
    cofactor: SparsePoly
    remainder: SparsePoly


def build_general(coeffs: GeneralCubicCoeffs) -> CubicField:
    """Assemble the cubic Kolmogorov field x_i * G_i from its coefficients."""
    comps = tuple(
        SparsePoly.variable(i) * coeffs.growth_poly(i) for i in (1, 2, 3)
    )
    return CubicField(comps)


def darboux_residual(field: CubicField) -> Tuple[SparsePoly, SparsePoly]:
    """Divide d/dt of the sphere polynomial along the field by the sphere.

    Returns (quotient, remainder) of sum_i dF/dx_i * x_i G_i by
    F = x1^2 + x2^2 + x3^2 - 1.  Remainder zero certifies invariance and the
    quotient is then the cofactor.
    """
    F = sphere_polynomial()
    P = SparsePoly.zero()
    for i in (1, 2, 3):
        P = P + F.partial(i) * field.components[i - 1]
    return P.divide(F)


def _snc_residuals(coeffs: GeneralCubicCoeffs) -> list[tuple[str, Fraction]]:
    """Named residuals of the invariance equalities; all zero iff invariant."""
    r1, r2, r3 = coeffs.r
    eqs: list[tuple[str, Fraction]] = []
    for name, lin in (("a", coeffs.a), ("b", coeffs.b), ("c", coeffs.c)):
        for i, v in enumerate(lin, start=1):
            eqs.append((f"{name}_{i} = 0", v))
    for name, quad in (("a", coeffs.a2), ("b", coeffs.b2), ("c", coeffs.c2)):
        for (i, j) in ((1, 2), (1, 3), (2, 3)):
            eqs.append((f"{name}_{i}{j} = 0", quad[(i, j)]))
    eqs.append(("a_11 = -r_1", coeffs.a2[(1, 1)] + r1))
    eqs.append(("a_22 = -(r_1+r_2+b_11)", coeffs.a2[(2, 2)] + r1 + r2 + coeffs.b2[(1, 1)]))
    eqs.append(("b_22 = -r_2", coeffs.b2[(2, 2)] + r2))
    eqs.append(("b_33 = -(r_2+r_3+c_22)", coeffs.b2[(3, 3)] + r2 + r3 + coeffs.c2[(2, 2)]))
    eqs.append(("c_11 = -(r_1+r_3+a_33)", coeffs.c2[(1, 1)] + r1 + r3 + coeffs.a2[(3, 3)]))
    eqs.append(("c_33 = -r_3", coeffs.c2[(3, 3)] + r3))
    return eqs


def cofactor_from_rates(r: Sequence[Rational]) -> SparsePoly:
    """The quadratic cofactor -2 r1 x1^2 - 2 r2 x2^2 - 2 r3 x3^2."""
    r1, r2, r3 = (to_fraction(v) for v in r)
    return SparsePoly({(2, 0, 0): -2 * r1, (0, 2, 0): -2 * r2, (0, 0, 2): -2 * r3})


def check_sphere_conditions(coeffs: GeneralCubicCoeffs) -> SphereCertificate:
    """Exact coefficient-level test for invariance of the unit sphere.

    Invariant iff every equality holds; the first-integral case (cofactor
    identically zero) occurs exactly when r1 = r2 = r3 = 0.
    """
    violations = tuple(name for name, resid in _snc_residuals(coeffs) if resid != 0)
    if violations:
        return SphereCertificate(CertStatus.NOT_INVARIANT, None, violations)
    if all(v == 0 for v in coeffs.r):
        return SphereCertificate(CertStatus.INVARIANT_FIRST_INTEGRAL, SparsePoly.zero())
    return SphereCertificate(CertStatus.INVARIANT_ISOLATED, cofactor_from_rates(coeffs.r))


def degree_bound_witness(coeffs: GeneralCubicCoeffs) -> DegreeBoundReport:
    """Residual test for a Kolmogorov field of degree at most two.

    Such a field can never have the sphere as an isolated invariant surface:
    the observed status is always NOT_INVARIANT or (for the zero field)
    INVARIANT_FIRST_INTEGRAL.
    """
    if coeffs.max_quadratic_degree() > 1:
        raise ValueError("degree bound witness requires all quadratic coefficients zero")
    quotient, remainder = darboux_residual(build_general(coeffs))
    if not remainder.is_zero:
        status = CertStatus.NOT_INVARIANT
    elif quotient.is_zero:
        status = CertStatus.INVARIANT_FIRST_INTEGRAL
    else:
        status = CertStatus.INVARIANT_ISOLATED
    return DegreeBoundReport(status, quotient, remainder)


def canonical_coeffs(params: ModelParams) -> GeneralCubicCoeffs:
    """General coefficients induced by the canonical six-parameter system."""
    (a1, a2, a3), (d1, d2, d3) = params.as_fractions()
    return GeneralCubicCoeffs(
        r=(a1, a2, a3),
        a2={(1, 1): -a1, (2, 2): -(a1 + a2 + d1), (3, 3): d2},
        b2={(1, 1): d1, (2, 2): -a2, (3, 3): -(a2 + a3 + d3)},
        c2={(1, 1): -(a1 + a3 + d2), (2, 2): d3, (3, 3): -a3},
    )


def canonical_field(params: ModelParams) -> CubicField:
    """The canonical system as an exact cubic field."""
    return build_general(canonical_coeffs(params))


def det_quantities(params: ModelParams) -> Tuple[Number, Number]:
    """The two scalar combinations governing the interior equilibrium.

    S1 = alpha1 (alpha3+d3) + alpha2 (alpha1+d2) + alpha3 (alpha2+d1)
    S2 = sum_i (alpha_i + d_i)

    Exact when the parameters are exact.
    """
    a1, a2, a3 = params.alpha
    d1, d2, d3 = params.d
    S1 = a1 * (a3 + d3) + a2 * (a1 + d2) + a3 * (a2 + d1)
    S2 = (a1 + d1) + (a2 + d2) + (a3 + d3)
    return S1, S2


def interaction_signs(params: ModelParams) -> Tuple[Number, Number, Number]:
    """(alpha1+d2, alpha2+d1, alpha3+d3): the three sign quantities that
    decide existence of the interior equilibrium and the global regime."""
    a1, a2, a3 = params.alpha
    d1, d2, d3 = params.d
    return (a1 + d2, a2 + d1, a3 + d3)


def growth_matrix(params: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    """Float (alpha, B) with drift component i = x_i (alpha_i + sum_j B_ij x_j^2)."""
    a1, a2, a3 = params.alpha_floats()
    d1, d2, d3 = params.d_floats()
    alpha = np.array([a1, a2, a3])
    B = np.array([
        [-a1, -(a1 + a2 + d1), d2],
        [d1, -a2, -(a2 + a3 + d3)],
        [-(a1 + a3 + d2), d3, -a3],
    ])
    return alpha, B
