"""Decay of the homogeneous problem and the long-time representation.

With time-periodic data of common period ``T`` the solution splits as
``u = q + v``, where ``q`` is the time-periodic solution and ``v`` solves the
homogeneous problem started from ``V = U - q(., 0)``.  ``v`` decays in time,
so ``q`` is the long-time approximation and ``v`` the finite-time correction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .invp_solver import SolutionField, SolverConfig, solve_invp
from .periodic_solver import eval_periodic, solve_coefficients
from .spectral_core import DataError, FunctionSpec, ProblemData, weighted_integral

V_SAMPLES = 401
COMPAT_WARN = 1e-8
COMPAT_FAIL = 1e-6


@dataclass
class DecayReport:
    """``scaled = t * sup_x |v(x, t)|`` over increasing sample times.

    ``noise_floor`` holds the largest error estimate per time.  A sup norm
    at or below its floor is indistinguishable from zero and counts as zero
    when ``bounded_flag`` is formed.
    """

    t_samples: np.ndarray
    sup_norms: np.ndarray
    scaled: np.ndarray
    bounded_flag: bool
    noise_floor: np.ndarray | None = None

    def __post_init__(self):
        self.t_samples = np.asarray(self.t_samples, dtype=float)
        self.sup_norms = np.asarray(self.sup_norms, dtype=float)
        self.scaled = np.asarray(self.scaled, dtype=float)
        if self.noise_floor is None:
            self.noise_floor = np.zeros_like(self.sup_norms)
        self.noise_floor = np.asarray(self.noise_floor, dtype=float)
        shapes = {a.shape for a in (self.t_samples, self.sup_norms, self.scaled, self.noise_floor)}
        if len(shapes) != 1:
            raise ValueError("decay report arrays must be aligned")
        if np.any(self.sup_norms < 0):
            raise ValueError("sup norms must be nonnegative")

    @classmethod
    def from_sup_norms(cls, t_samples, sup_norms, noise_floor=None) -> "DecayReport":
        t = np.asarray(t_samples, dtype=float)
        s = np.asarray(sup_norms, dtype=float)
        floor = np.zeros_like(s) if noise_floor is None else np.asarray(noise_floor, dtype=float)
        scaled = t * s
        resolved = np.where(s > floor, scaled, 0.0)
        return cls(t, s, scaled, bounded_tail(resolved), floor)

    @property
    def resolved(self) -> np.ndarray:
        """Sup norms above their noise floor; the rest are zero."""
        return np.where(self.sup_norms > self.noise_floor, self.sup_norms, 0.0)


def bounded_tail(scaled) -> bool:
    """True when the tail half of ``scaled`` stays within a factor 4 of its minimum."""
    scaled = np.asarray(scaled, dtype=float)
    if scaled.size == 0:
        return True
    tail = scaled[scaled.size // 2:]
    return bool(np.max(tail) <= 4 * np.min(tail))


def homogeneous_data(V: FunctionSpec, K: FunctionSpec, tol: float = COMPAT_FAIL) -> ProblemData:
    """Problem data with zero boundary and nonlocal data, after a compatibility check."""
    res = homogeneous_residuals(V, K)
    worst = max(res.values())
    if worst > tol:
        names = ", ".join(f"{k}={v:.3g}" for k, v in res.items())
        raise DataError(f"initial datum incompatible with zero data ({names})")
    if worst > COMPAT_WARN:
        warnings.warn(f"homogeneous compatibility residual {worst:.3g}", RuntimeWarning,
                      stacklevel=3)
    z = FunctionSpec.zero((0.0, np.inf))
    return ProblemData(V, K, z, z, z, check=False)


def homogeneous_residuals(V: FunctionSpec, K: FunctionSpec) -> dict:
    one = np.array([1.0])
    return {"V(1)": abs(complex(V.evaluate(one)[0])),
            "V'(1)": abs(complex(V.evaluate(one, 1)[0])),
            "int K V": abs(weighted_integral(K, V))}


def solve_homogeneous(V: FunctionSpec, K: FunctionSpec, cfg: SolverConfig | None,
                      points) -> SolutionField:
    """Solve the problem with ``h0 = h1 = h2 = 0`` and initial datum ``V``."""
    return solve_invp(homogeneous_data(V, K), cfg, points)


def measure_decay(V: FunctionSpec, K: FunctionSpec, cfg: SolverConfig | None, t_list,
                  x_grid) -> DecayReport:
    """Sup norms of the homogeneous solution on ``x_grid`` at each ``t``."""
    t = np.asarray(t_list, dtype=float)
    if t.size and (np.any(t < 1) or np.any(np.diff(t) <= 0)):
        raise ValueError("t_list must be increasing with entries >= 1")
    xs = np.asarray(x_grid, dtype=float)
    data = homogeneous_data(V, K)
    sups, floors = [], []
    for tk in t:
        field = solve_invp(data, cfg, [(x, tk) for x in xs])
        sups.append(float(np.max(np.abs(field.values))) if xs.size else 0.0)
        floors.append(float(np.max(field.est_abs_error)) if xs.size else 0.0)
    return DecayReport.from_sup_norms(t, sups, floors)


def initial_difference(data: ProblemData, n_max: int, cfg: SolverConfig | None = None,
                       n_samples: int = V_SAMPLES, coeffs=None):
    """``V = U - q(., 0)`` as a cubic sampled function, with an interpolation error bound.

    Interior samples come from the periodic evaluator; the endpoints use the
    exact traces ``q(1, 0) = h0(0)`` and ``q(0, 0) = sum_n G0_n``.
    """
    cfg = cfg or SolverConfig()
    C = coeffs if coeffs is not None else solve_coefficients(data, n_max)
    x = np.linspace(0.0, 1.0, n_samples)
    mids = 0.5 * (x[1:] + x[:-1])[::20]
    inner = x[1:-1]
    q = eval_periodic(data, n_max, cfg.quad, [(xi, 0.0) for xi in np.r_[inner, mids]], coeffs=C)
    qi = q.values[:inner.size]
    qm = q.values[inner.size:]
    q0 = complex(np.sum(C.G0))
    q1 = complex(data.boundary0.evaluate(np.array([0.0]))[0])
    qs = np.r_[q0, qi, q1]
    V = FunctionSpec.samples(data.initial.evaluate(x) - qs, 3)
    exact_mid = data.initial.evaluate(mids) - qm
    interp = float(np.max(np.abs(V.evaluate(mids) - exact_mid))) if mids.size else 0.0
    return V, interp + float(np.max(q.est_abs_error)), C


def eval_longtime(data: ProblemData, n_max: int = 64, cfg: SolverConfig | None = None,
                  points=(), correction: bool = True) -> SolutionField:
    """``q`` from the periodic solver, plus the decaying correction ``v`` when requested."""
    if data.period is None:
        raise DataError("period required for long-time evaluation")
    cfg = cfg or SolverConfig()
    pts = [(float(x), float(t)) for x, t in points]
    C = solve_coefficients(data, n_max)
    q = eval_periodic(data, n_max, cfg.quad, pts, coeffs=C)
    diag = {"parts": ["q"], "periodic": q.diagnostics}
    if not correction:
        return SolutionField(q.points, q.values, q.est_abs_error, diag)
    V, v_err, _ = initial_difference(data, n_max, cfg, coeffs=C)
    v = solve_homogeneous(V, data.weight, cfg, pts)
    diag["parts"].append("v")
    diag["homogeneous"] = v.diagnostics
    diag["V_representation_error"] = v_err
    diag["V_residuals"] = homogeneous_residuals(V, data.weight)
    # the homogeneous evolution is treated as non-amplifying for the V error
    errs = q.est_abs_error + v.est_abs_error + v_err
    return SolutionField(q.points, q.values + v.values, errs, diag)
