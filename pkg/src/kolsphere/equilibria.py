"""Equilibria of the canonical system and the deterministic global regime.

In the closed positive octant the canonical system has the origin, the three
axis points e_i, and (when the three quantities alpha1+d2, alpha2+d1,
alpha3+d3 share one strict sign) an interior point Qstar on the sphere.
Eigenvalues at all of them are available in closed form; an exact-derivative
Jacobian provides the independent cross-check.

With all alpha_i > 0 the global picture splits in two: either the positive
sphere octant is foliated by periodic orbits around Qstar (a center, with a
conserved quantity H on the octant), or exactly one axis point e_i attracts
the whole open octant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .model import CubicField, ModelParams, canonical_field, det_quantities, interaction_signs
from .poly import SparsePoly

LABELS = ("O", "e1", "e2", "e3", "Qstar")


@dataclass
class Equilibrium:
    label: str
    position: Tuple[float, float, float]
    eigenvalues: Tuple[complex, complex, complex]


@dataclass
class DetRegime:
    """Global classification: 'center_on_sphere', 'boundary_attractor' or
    'not_covered' (some alpha_i <= 0, outside the attractivity theory)."""

    kind: str
    attractor: Optional[str] = None
    details: Dict[str, float] = field(default_factory=dict)


class DegenerateEquilibriaError(ValueError):
    pass


def _check_isolated(params: ModelParams) -> Tuple:
    u, v, w = interaction_signs(params)
    if u == 0 or v == 0 or w == 0:
        raise DegenerateEquilibriaError(
            "non-isolated equilibria: (alpha1+d2)(alpha2+d1)(alpha3+d3) must be nonzero"
        )
    return u, v, w


def has_interior_equilibrium(params: ModelParams) -> bool:
    u, v, w = _check_isolated(params)
    return (u > 0) == (v > 0) == (w > 0)


def qstar_position(params: ModelParams) -> Tuple[float, float, float]:
    """Interior equilibrium (sqrt((a3+d3)/S2), sqrt((a1+d2)/S2), sqrt((a2+d1)/S2))."""
    u, v, w = _check_isolated(params)
    if not ((u > 0) == (v > 0) == (w > 0)):
        raise ValueError("no interior equilibrium: sign quantities differ")
    _, S2 = det_quantities(params)
    return (math.sqrt(float(w) / float(S2)),
            math.sqrt(float(u) / float(S2)),
            math.sqrt(float(v) / float(S2)))


def eigenvalues_closed_form(params: ModelParams, label: str) -> Tuple[complex, complex, complex]:
    """Closed-form eigenvalues of the linearization at a named equilibrium."""
    a1, a2, a3 = (float(v) for v in params.alpha)
    u, v, w = (float(q) for q in interaction_signs(params))
    if label == "O":
        return (complex(a1), complex(a2), complex(a3))
    if label == "e1":
        return (complex(-2 * a1), complex(v), complex(-u))
    if label == "e2":
        return (complex(-v), complex(-2 * a2), complex(w))
    if label == "e3":
        return (complex(u), complex(-w), complex(-2 * a3))
    if label == "Qstar":
        if not has_interior_equilibrium(params):
            raise ValueError("Qstar absent: sign quantities do not share a sign")
        S1, S2 = det_quantities(params)
        lam = 2.0 * math.sqrt(u * v * w / float(S2))
        return (complex(0.0, lam), complex(0.0, -lam), complex(-2.0 * float(S1) / float(S2)))
    raise ValueError(f"unknown equilibrium label {label!r}")


def enumerate_equilibria(params: ModelParams) -> List[Equilibrium]:
    """Isolated equilibria in the closed positive octant.

    Always O, e1, e2, e3; Qstar is appended when the three sign quantities
    share a strict sign.  Raises when some alpha_i + d_j factor vanishes.
    """
    _check_isolated(params)
    eqs = [
        Equilibrium("O", (0.0, 0.0, 0.0), eigenvalues_closed_form(params, "O")),
        Equilibrium("e1", (1.0, 0.0, 0.0), eigenvalues_closed_form(params, "e1")),
        Equilibrium("e2", (0.0, 1.0, 0.0), eigenvalues_closed_form(params, "e2")),
        Equilibrium("e3", (0.0, 0.0, 1.0), eigenvalues_closed_form(params, "e3")),
    ]
    if has_interior_equilibrium(params):
        eqs.append(Equilibrium("Qstar", qstar_position(params),
                               eigenvalues_closed_form(params, "Qstar")))
    return eqs


def numerical_jacobian(field: CubicField, point: Sequence[float]) -> np.ndarray:
    """Jacobian at a point via exact symbolic differentiation of each
    component (evaluated in floating point; not finite differences)."""
    J = np.empty((3, 3))
    for i in (1, 2, 3):
        comp = field.components[i - 1]
        for j in (1, 2, 3):
            J[i - 1, j - 1] = comp.partial(j).evaluate(point)
    return J


def classify_regime_det(params: ModelParams) -> DetRegime:
    """Two-way global classification for positive growth rates.

    'center_on_sphere' when alpha1+d2, alpha2+d1, alpha3+d3 share one strict
    sign; otherwise 'boundary_attractor' with the unique e_i whose closed-form
    eigenvalues all have negative real part.  Non-positive alpha falls outside
    the attractivity theory and returns 'not_covered'.
    """
    u, v, w = _check_isolated(params)
    details = {"alpha1+d2": float(u), "alpha2+d1": float(v), "alpha3+d3": float(w)}
    if not all(float(a) > 0 for a in params.alpha):
        return DetRegime("not_covered", None, details)
    if (u > 0) == (v > 0) == (w > 0):
        return DetRegime("center_on_sphere", None, details)
    stable = [
        lbl for lbl in ("e1", "e2", "e3")
        if all(ev.real < 0 for ev in eigenvalues_closed_form(params, lbl))
    ]
    if len(stable) != 1:
        # cannot happen for nonzero sign quantities; guard against misuse
        raise RuntimeError(f"expected exactly one attracting axis point, found {stable}")
    return DetRegime("boundary_attractor", stable[0], details)


def first_integral_log_h(params: ModelParams, point: Sequence[float]) -> float:
    """log|H| at a point of the open sphere octant, in chart coordinates.

    H = x1^(2(a3+d3)) * x2^(2(a1+d2)) * (x1^2+x2^2-1)^(a2+d1) is conserved by
    the flow restricted to the sphere octant.  The last factor is evaluated
    as (1 - x1^2 - x2^2), which flips H by a constant sign and keeps the
    logarithm real on the interior chart:

        log|H| = 2(a3+d3) log x1 + 2(a1+d2) log x2 + (a2+d1) log(1-x1^2-x2^2)

    Accepts a chart pair (x1, x2) or a full triple on the sphere.
    """
    pt = tuple(float(v) for v in point)
    if len(pt) == 3:
        x1, x2, x3 = pt
        if abs(x1 * x1 + x2 * x2 + x3 * x3 - 1.0) > 1e-9:
            raise ValueError("point is not on the unit sphere")
    elif len(pt) == 2:
        x1, x2 = pt
    else:
        raise ValueError("point must be a chart pair or a triple on the sphere")
    rad = 1.0 - x1 * x1 - x2 * x2
    if x1 <= 0.0 or x2 <= 0.0 or rad <= 0.0:
        raise ValueError("H degenerate on the octant boundary")
    u, v, w = (float(q) for q in interaction_signs(params))
    return 2.0 * w * math.log(x1) + 2.0 * u * math.log(x2) + v * math.log(rad)
