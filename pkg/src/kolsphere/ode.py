"""Deterministic integration of the canonical system with monitors.

Two integrators: a classical fixed-step RK4 (bulk runs, bitwise-reproducible
symmetry checks, convergence-order tests) and adaptive RK45 via scipy
(conservation runs near the slow boundary dynamics, where adaptivity keeps
the drift of the conserved quantity bounded).

Monitors attached to trajectories: the sphere defect L = |x|^2 - 1, the
conserved quantity log|H| on the sphere chart (NaN off-chart), and the norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .equilibria import enumerate_equilibria, interaction_signs
from .model import CubicField, ModelParams, growth_matrix
from .poly import SparsePoly


class StepSizeUnderflow(RuntimeError):
    """Adaptive stepping failed; carries the last valid state."""

    def __init__(self, message: str, last_t: float, last_state: np.ndarray):
        super().__init__(message)
        self.last_t = last_t
        self.last_state = last_state


@dataclass
class IntegratorConfig:
    """Step control for `integrate_ode` / `integrate_params`.

    method 'rk4' uses fixed step dt; 'rk45' uses adaptive stepping with
    (rtol, atol).  `record_every` thins fixed-step output; `t_eval_step`
    requests equally spaced adaptive output (None keeps solver steps).
    """

    method: str = "rk45"
    T: float = 50.0
    dt: float = 1e-3
    rtol: float = 1e-10
    atol: float = 1e-12
    record_every: int = 1
    t_eval_step: Optional[float] = None
    channels: bool = True

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.T <= 0 or self.dt <= 0 or self.rtol <= 0 or self.atol <= 0:
            raise ValueError("T, dt, rtol, atol must all be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class Trajectory:
    """Time-stamped state path with optional monitor channels."""

    times: np.ndarray
    states: np.ndarray
    channels: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.times.ndim != 1 or self.states.shape[0] != self.times.shape[0]:
            raise ValueError("times and states must have matching lengths")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def sphere_defect(x: Sequence[float]) -> float:
    """x1^2 + x2^2 + x3^2 - 1."""
    x1, x2, x3 = (float(v) for v in x)
    return x1 * x1 + x2 * x2 + x3 * x3 - 1.0


def compile_field(field_: CubicField) -> Callable[[float, np.ndarray], np.ndarray]:
    """Fast float evaluator f(t, x) for an arbitrary exact field."""
    comp_data = []
    for comp in field_.components:
        exps = np.array(list(comp.terms.keys()), dtype=np.int64).reshape(-1, 3)
        coeffs = np.array([float(c) for c in comp.terms.values()])
        comp_data.append((exps, coeffs))

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        out = np.empty(3)
        for i, (exps, coeffs) in enumerate(comp_data):
            if coeffs.size == 0:
                out[i] = 0.0
            else:
                out[i] = float(coeffs @ np.prod(np.asarray(x, dtype=float) ** exps, axis=1))
        return out

    return rhs


def canonical_rhs(params: ModelParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """Closed-form drift of the canonical system, f(t, x) -> dx/dt."""
    alpha, B = growth_matrix(params)
    a1, a2, a3 = alpha
    (b11, b12, b13), (b21, b22, b23), (b31, b32, b33) = B

    def rhs(t: float, x) -> np.ndarray:
        x1, x2, x3 = x
        s1 = x1 * x1
        s2 = x2 * x2
        s3 = x3 * x3
        return np.array([
            x1 * (a1 + b11 * s1 + b12 * s2 + b13 * s3),
            x2 * (a2 + b21 * s1 + b22 * s2 + b23 * s3),
            x3 * (a3 + b31 * s1 + b32 * s2 + b33 * s3),
        ])

    return rhs


def _rk4_path(rhs, x0: np.ndarray, T: float, dt: float, record_every: int):
    n = max(1, math.ceil(T / dt - 1e-9))
    x = np.asarray(x0, dtype=float).copy()
    times = [0.0]
    states = [x.copy()]
    h = dt
    for k in range(n):
        t = k * h
        k1 = rhs(t, x)
        k2 = rhs(t + h / 2, x + (h / 2) * k1)
        k3 = rhs(t + h / 2, x + (h / 2) * k2)
        k4 = rhs(t + h, x + h * k3)
        x = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if (k + 1) % record_every == 0 or k == n - 1:
            times.append((k + 1) * h)
            states.append(x.copy())
    return np.array(times), np.array(states)


def _rk45_path(rhs, x0: np.ndarray, cfg: IntegratorConfig):
    t_eval = None
    if cfg.t_eval_step is not None:
        n = max(1, math.ceil(cfg.T / cfg.t_eval_step - 1e-9))
        t_eval = np.linspace(0.0, cfg.T, n + 1)
    sol = solve_ivp(rhs, (0.0, cfg.T), np.asarray(x0, dtype=float), method="RK45",
                    rtol=cfg.rtol, atol=cfg.atol, t_eval=t_eval, dense_output=False)
    if not sol.success:
        raise StepSizeUnderflow(f"adaptive integration failed: {sol.message}",
                                float(sol.t[-1]), sol.y[:, -1].copy())
    return sol.t.copy(), sol.y.T.copy()


def attach_channels(traj: Trajectory, params: Optional[ModelParams]) -> Trajectory:
    """Fill the L / H / norm monitor channels in place.

    H (in log form) needs chart coordinates inside the open octant disc;
    samples outside get NaN.
    """
    X = traj.states
    L = np.einsum("ij,ij->i", X, X) - 1.0
    traj.channels["L"] = L
    traj.channels["norm"] = np.sqrt(L + 1.0)
    H = np.full(len(X), np.nan)
    if params is not None:
        u, v, w = (float(q) for q in interaction_signs(params))
        x1, x2 = X[:, 0], X[:, 1]
        rad = 1.0 - x1 * x1 - x2 * x2
        ok = (x1 > 0) & (x2 > 0) & (rad > 0)
        H[ok] = (2.0 * w * np.log(x1[ok]) + 2.0 * u * np.log(x2[ok])
                 + v * np.log(rad[ok]))
    traj.channels["H"] = H
    return traj


def integrate_ode(field_: CubicField, x0: Sequence[float], cfg: IntegratorConfig,
                  params: Optional[ModelParams] = None) -> Trajectory:
    """Integrate an arbitrary exact field (generic compiled evaluator)."""
    rhs = compile_field(field_)
    return _integrate(rhs, x0, cfg, params)


def integrate_params(params: ModelParams, x0: Sequence[float],
                     cfg: IntegratorConfig) -> Trajectory:
    """Integrate the canonical system with its closed-form drift."""
    return _integrate(canonical_rhs(params), x0, cfg, params)


def _integrate(rhs, x0, cfg: IntegratorConfig, params) -> Trajectory:
    if cfg.method == "rk4":
        times, states = _rk4_path(rhs, np.asarray(x0, dtype=float), cfg.T, cfg.dt,
                                  cfg.record_every)
    else:
        times, states = _rk45_path(rhs, np.asarray(x0, dtype=float), cfg)
    traj = Trajectory(times, states)
    if cfg.channels:
        attach_channels(traj, params)
    return traj


def reduce_to_sphere_chart(params: ModelParams) -> Tuple[SparsePoly, SparsePoly]:
    """The flow restricted to the sphere, in the (x1, x2) chart, exactly.

    Substituting x3^2 = 1 - x1^2 - x2^2 into the first two components gives

        dx1/dt = x1 ( (a1+d2) - (a1+d2) x1^2 - (a1+a2+d1+d2) x2^2 )
        dx2/dt = x2 ( -(a3+d3) + (a2+a3+d1+d3) x1^2 + (a3+d3) x2^2 )

    returned as polynomials in x1, x2 (third exponent zero).
    """
    (a1, a2, a3), (d1, d2, d3) = params.as_fractions()
    u = a1 + d2
    v = a2 + d1
    w = a3 + d3
    p1 = SparsePoly({(1, 0, 0): u, (3, 0, 0): -u, (1, 2, 0): -(u + v)})
    p2 = SparsePoly({(0, 1, 0): -w, (2, 1, 0): v + w, (0, 3, 0): w})
    return p1, p2


def chart_rhs(params: ModelParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """Float evaluator of the on-sphere chart field."""
    u, v, w = (float(q) for q in interaction_signs(params))

    def rhs(t: float, x) -> np.ndarray:
        x1, x2 = x
        s1 = x1 * x1
        s2 = x2 * x2
        return np.array([
            x1 * (u - u * s1 - (u + v) * s2),
            x2 * (-w + (v + w) * s1 + w * s2),
        ])

    return rhs


@dataclass
class LyapunovReport:
    """Empirical check of the sphere-defect decay law along a trajectory.

    The defect satisfies dL/dt = -2 (a1 x1^2 + a2 x2^2 + a3 x3^2) L pointwise;
    the report compares finite differences of the sampled L channel to that
    identity, fits the empirical exponential decay rate of |L|, and reports
    the a-priori bound 2 min(alpha) inf_t |x|^2.
    """

    status: str                      # "ok", "on_sphere" or "inconclusive"
    monotone: bool
    empirical_rate: Optional[float]
    rate_bound: float
    min_norm: float
    max_identity_residual: float


def lyapunov_decay_report(traj: Trajectory, params: ModelParams, *,
                          shell: float = 0.1, floor: float = 1e-12) -> LyapunovReport:
    """Verify the defect decay law along a sampled trajectory.

    Monotonicity of |L| is asserted from the first sample with |x| >= shell
    onward, down to a floor below which rounding noise dominates.  Requires
    positive growth rates.
    """
    a = params.alpha_floats()
    if min(a) <= 0:
        raise ValueError("decay law requires positive growth rates")
    X = traj.states
    t = traj.times
    L = np.einsum("ij,ij->i", X, X) - 1.0
    norms = np.sqrt(L + 1.0)
    min_norm = float(norms.min())
    bound = 2.0 * min(a) * min_norm**2

    if np.all(np.abs(L) < floor):
        return LyapunovReport("on_sphere", True, None, bound, min_norm, 0.0)
    if min_norm < 1e-12:
        return LyapunovReport("inconclusive", False, None, bound, min_norm, math.inf)

    # pointwise identity via central differences on the sampled channel
    dL = np.gradient(L, t)
    weights = a[0] * X[:, 0]**2 + a[1] * X[:, 1]**2 + a[2] * X[:, 2]**2
    resid = np.abs(dL + 2.0 * weights * L)
    max_resid = float(resid.max())

    start = int(np.argmax(norms >= shell)) if np.any(norms >= shell) else 0
    absL = np.abs(L[start:])
    live = absL > floor
    monotone = bool(np.all(np.diff(absL)[live[:-1] & live[1:]] <= 0))

    rate = None
    fit = live & (absL > 0)
    if fit.sum() >= 3:
        slope = np.polyfit(t[start:][fit], np.log(absL[fit]), 1)[0]
        rate = float(-slope)
    return LyapunovReport("ok", monotone, rate, bound, min_norm, max_resid)


@dataclass
class OmegaLabel:
    kind: str                        # periodic_on_sphere / equilibrium / polycycle_approach / undetermined
    equilibrium: Optional[str] = None
    diagnostics: Dict[str, float] = field(default_factory=dict)


def omega_limit_classify(traj: Trajectory, params: ModelParams, *,
                         sphere_tol: float = 1e-6,
                         recurrence_tol: float = 1e-3,
                         diameter_tol: float = 1e-6,
                         variance_floor: float = 1e-6,
                         boundary_tol: float = 1e-3,
                         tail_fraction: float = 0.3,
                         exclusion_time: float = 2.0) -> OmegaLabel:
    """Classify the tail of a trajectory that has reached the sphere.

    equilibrium: tail diameter below diameter_tol near a known equilibrium;
    periodic_on_sphere: the tail returns within recurrence_tol of a reference
    late state (outside a short exclusion window) while the positional
    variance exceeds variance_floor; polycycle_approach: the tail dwells near
    the octant boundary with lengthening dwell episodes; otherwise
    undetermined.
    """
    if abs(sphere_defect(traj.final_state)) >= sphere_tol:
        raise ValueError("not yet on sphere: |L| at the final sample exceeds tolerance")
    t = traj.times
    X = traj.states
    t_tail = t[-1] - tail_fraction * (t[-1] - t[0])
    sel = t >= t_tail
    tt, tx = t[sel], X[sel]

    diag: Dict[str, float] = {}
    mean = tx.mean(axis=0)
    diameter = float(np.linalg.norm(tx.max(axis=0) - tx.min(axis=0)))
    variance = float(np.mean(np.sum((tx - mean) ** 2, axis=1)))
    diag["tail_diameter"] = diameter
    diag["tail_variance"] = variance

    if diameter < diameter_tol:
        best, dist = None, math.inf
        for eq in enumerate_equilibria(params):
            dd = float(np.linalg.norm(np.abs(mean) - np.array(eq.position)))
            if dd < dist:
                best, dist = eq.label, dd
        diag["equilibrium_distance"] = dist
        if dist < 1e-3:
            return OmegaLabel("equilibrium", best, diag)
        return OmegaLabel("undetermined", None, diag)

    later = tt > tt[0] + exclusion_time
    if np.any(later):
        rec = float(np.min(np.linalg.norm(tx[later] - tx[0], axis=1)))
        diag["recurrence"] = rec
        if rec < recurrence_tol and variance > variance_floor:
            return OmegaLabel("periodic_on_sphere", None, diag)

    min_coord = np.min(np.abs(tx), axis=1)
    diag["min_coordinate"] = float(min_coord.min())
    if min_coord.min() < boundary_tol:
        near = min_coord < 10 * boundary_tol
        # dwell episodes: runs of consecutive near-boundary samples
        edges = np.flatnonzero(np.diff(near.astype(int)))
        runs = np.split(near, edges + 1)
        lengths = [len(r) for r in runs if r.size and r[0]]
        diag["dwell_episodes"] = float(len(lengths))
        if len(lengths) >= 2 and lengths[-1] > lengths[0]:
            return OmegaLabel("polycycle_approach", None, diag)
    return OmegaLabel("undetermined", None, diag)
