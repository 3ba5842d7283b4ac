"""Solution of the initial-boundary value problem on the D or E contours.

The integrands are split before truncation.  Every term carries a time
factor ``e^{i lam^3 tau}``: terms with ``tau > 0`` decay into the E sectors
and the rest decay (or are neutral) into the D sectors.  Beyond ``R_s`` each
canonical ray is replaced by two straight rays, one per class, tilted so the
class decays; the arcs are taken at a radius small enough that
``e^{rho^3 tau}`` stays moderate.  Both moves are justified by Cauchy's
theorem once the swept wedges and annuli are certified free of zeros of
``Delta`` (checked before any integration).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .contour_quadrature import (
    ARC_NODES,
    EPS,
    PANEL_NODES,
    QuadratureSpec,
    SECTORS,
    SpectralEval,
    gauss_legendre,
    panel_tail_estimate,
)
from .spectral_core import (
    CANCEL_FACTOR,
    DataError,
    ProblemData,
    SpectralBundle,
    TimeKnots,
    combination_coefficients,
    fourier_array,
    right_combination_array,
    spectral_bundle,
    time_knots,
    time_transform_array,
    kappa_hat_array,
)

VARIANTS = ("theorem_D", "corollary_E")
END_TILT = np.pi / 6


class ZeroGateError(RuntimeError):
    """The contour deformation would cross (or pass near) a zero of Delta."""


@dataclass(frozen=True)
class SolverConfig:
    """Contour radius, quadrature budget, choice of ``t'`` and contour variant.

    ``t_prime_policy`` is ``"equal_to_t"`` or a fixed number ``>= t``.
    ``tilt`` is the angle by which rays are turned into the E sectors;
    ``arc_exponent`` bounds ``rho^3 max(t, t'-t)`` on the arcs.
    """

    R: float = 3.0
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    t_prime_policy: object = "equal_to_t"
    contour_variant: str = "corollary_E"
    tilt: float = np.pi / 12
    arc_exponent: float = 2.0
    check_zeros: bool = True

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")
        if self.contour_variant not in VARIANTS:
            raise ValueError(f"contour_variant must be one of {VARIANTS}")
        if self.t_prime_policy != "equal_to_t":
            try:
                v = float(self.t_prime_policy)
            except (TypeError, ValueError):
                raise ValueError("t_prime_policy must be 'equal_to_t' or a number") from None
            if not v >= 0:
                raise ValueError("fixed t' must be nonnegative")
        if not 0 < self.tilt < np.pi / 6:
            raise ValueError("tilt must lie in (0, pi/6)")
        if not self.arc_exponent > 0:
            raise ValueError("arc_exponent must be positive")

    def t_prime(self, t: float) -> float:
        if self.t_prime_policy == "equal_to_t":
            return float(t)
        tp = float(self.t_prime_policy)
        if tp < t - 1e-14:
            raise ValueError(f"fixed t'={tp} is smaller than requested t={t}")
        return tp

    def replace(self, **kw) -> "SolverConfig":
        d = dict(R=self.R, quad=self.quad, t_prime_policy=self.t_prime_policy,
                 contour_variant=self.contour_variant, tilt=self.tilt,
                 arc_exponent=self.arc_exponent, check_zeros=self.check_zeros)
        d.update(kw)
        return SolverConfig(**d)


@dataclass
class SolutionField:
    """Values of ``u`` at ``points`` with error estimates and diagnostics."""

    points: list
    values: np.ndarray
    est_abs_error: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        self.est_abs_error = np.asarray(self.est_abs_error, dtype=float)
        if not (len(self.points) == len(self.values) == len(self.est_abs_error)):
            raise ValueError("points, values and errors must have equal length")
        if np.any(~(self.est_abs_error >= 0)):
            raise ValueError("error estimates must be nonnegative")


@dataclass(frozen=True)
class VariantReport:
    points: list
    theorem_D: np.ndarray
    corollary_E: np.ndarray
    discrepancy: np.ndarray
    combined_error: np.ndarray
    passed: bool


# ----------------------------------------------------------------------------
# Spectral combinations at single points
# ----------------------------------------------------------------------------

def right_combination(data: ProblemData, lam: complex, t_prime: float) -> SpectralEval:
    """``n(lam) + i lam h1~(lam; t') - lam^2 h0~(lam; t')``."""
    if t_prime < 0:
        raise DataError("t' must be nonnegative")
    lam_a = np.array([complex(lam)])
    b = spectral_bundle(data, lam_a, need_u=True, left=False)
    c0, c1, c2, cU, scale = combination_coefficients(b, "right")
    hs = [time_transform_array(h, lam_a, t_prime) for h in
          (data.boundary0, data.boundary1, data.nonlocal_)]
    terms = np.array([c0[0] * hs[0][0], c1[0] * hs[1][0], c2[0] * hs[2][0], cU[0]])
    val = complex(terms.sum())
    big = max(float(np.max(np.abs(terms))), float(scale[0]))
    return SpectralEval(val, 64 * EPS * big, abs(val) < CANCEL_FACTOR * big, complex(lam))


# ----------------------------------------------------------------------------
# Integrand classes
# ----------------------------------------------------------------------------

class _Integrands:
    """Evaluates the x-independent factor of each integrand class at nodes."""

    def __init__(self, data: ProblemData, t: float, t_prime: float):
        self.data = data
        self.t = float(t)
        self.tp = float(t_prime)
        self.hs = (data.boundary0, data.boundary1, data.nonlocal_)
        self.active = [not h.is_zero for h in self.hs]
        self.knots = [time_knots(h, self.tp) if a and self.tp > 0 else None
                      for h, a in zip(self.hs, self.active)]
        self.has_u = not data.initial.is_zero
        tol = 1e-12 * max(1.0, self.t)
        starts = [s for kn in self.knots if kn is not None for s in kn.s if s < self.t - tol]
        ends = [s for kn in self.knots if kn is not None for s in kn.s if s >= self.t - tol]
        self.tau_start = max([self.t - s for s in starts], default=0.0)
        if self.has_u:
            self.tau_start = max(self.tau_start, self.t)
        self.tau_end = max([s - self.t for s in ends], default=0.0)
        self.has_start = self.has_u or bool(starts)
        self.has_end = bool(ends)
        self.tol = tol
        self.r_pole = data.max_time_frequency() ** (1.0 / 3.0) if data.has_time_data else 0.0

    def _knot_sum(self, kn: TimeKnots, lam: np.ndarray, which: str) -> np.ndarray:
        k = lam ** 3
        out = np.zeros(lam.shape, dtype=complex)
        for j, sj in enumerate(kn.s):
            is_start = sj < self.t - self.tol
            if (which == "start") != is_start:
                continue
            out += np.exp(1j * k * (self.t - sj)) * kn.J(j, k)
        return out

    def evaluate(self, lam: np.ndarray, side: str, cls: str):
        """Return ``(G, scale)``; ``scale`` bounds the assembled terms."""
        lam = np.asarray(lam, dtype=complex).ravel()
        if cls == "line":
            g = np.exp(1j * lam ** 3 * self.t) * fourier_array(self.data.initial, lam)
            return g, np.abs(g)
        need_u = self.has_u and cls in ("full", "start")
        b = spectral_bundle(self.data, lam, need_u=need_u, left=(side == "left"))
        c0, c1, c2, cU, scale = combination_coefficients(b, side)
        cs = (c0, c1, c2)
        terms = []
        for c, h, kn, act in zip(cs, self.hs, self.knots, self.active):
            if not act or self.tp <= 0:
                continue
            if cls == "full":
                X = time_transform_array(h, lam, self.tp, self.t)
            else:
                X = self._knot_sum(kn, lam, cls)
            terms.append(c * X)
        if need_u:
            phase = np.exp(1j * lam ** 3 * self.t)
            terms.append(cU * phase)
            scale = scale * np.abs(phase)
        else:
            scale = np.zeros(lam.shape)
        if not terms:
            return np.zeros(lam.shape, dtype=complex), np.zeros(lam.shape)
        T = np.vstack(terms)
        g = T.sum(axis=0)
        return g, np.maximum(np.max(np.abs(T), axis=0), scale)

    def rate(self, r: float, cls: str) -> float:
        """Phase (and decay) rate of the class integrand per unit length at radius r."""
        if cls == "start":
            tau = self.tau_start
        elif cls == "end":
            tau = self.tau_end
        elif cls == "line":
            tau = self.t
        else:
            tau = max(self.t, self.tau_end, self.tau_start)
        return 3.0 * r * r * tau + 3.0


# ----------------------------------------------------------------------------
# Contour pieces
# ----------------------------------------------------------------------------

@dataclass
class _Accum:
    nx: int
    value: np.ndarray = None
    error: np.ndarray = None
    cancels: int = 0
    truncations: list = field(default_factory=list)
    nonconverged: int = 0
    nodes: int = 0

    def __post_init__(self):
        self.value = np.zeros(self.nx, dtype=complex)
        self.error = np.zeros(self.nx)


def _panel_sum(acc: _Accum, lam, w, half, wgl, G, scale, a_x, sign):
    """Add ``sign * sum w e^{i lam a} G`` for every x; returns per-panel envelope."""
    npanel = len(half)
    n = lam.size // max(npanel, 1)
    phase = np.exp(1j * np.outer(a_x, lam))                       # (nx, m)
    f = phase * G[None, :]
    contrib = f * w[None, :]
    acc.value += sign * contrib.sum(axis=1)
    dens = (f * (w / (wgl * np.repeat(half, n)))[None, :]).reshape(len(a_x), npanel, n)
    err = panel_tail_estimate(dens, half[None, :]).sum(axis=1)
    bound = np.abs(phase) * (np.maximum(np.abs(G), scale) * np.abs(w))[None, :]
    err += 16 * EPS * bound.sum(axis=1)
    acc.error += err
    acc.nodes += lam.size
    flags = np.abs(G) < CANCEL_FACTOR * scale
    acc.cancels += int(np.count_nonzero(flags & (scale > 0)))
    env = (np.max(np.abs(phase), axis=0) * np.abs(G) * np.abs(w)).reshape(npanel, n).sum(axis=1)
    return env


def _line_nodes(z0: complex, z1: complex, breaks: np.ndarray, n: int = PANEL_NODES):
    x, wg = gauss_legendre(n)
    d = z1 - z0
    a, b = breaks[:-1], breaks[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    u = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    lam = z0 + u * d
    w = (half[:, None] * wg[None, :]).ravel() * d
    wgl = np.tile(wg, len(half))
    return lam, w, half * abs(d), wgl


def _segment(acc, ig: _Integrands, side, cls, z0, z1, a_x, sign, quad: QuadratureSpec):
    """Integrate a finite straight segment from z0 to z1 (orientation included)."""
    length = abs(z1 - z0)
    if length == 0:
        return
    rmax = max(abs(z0), abs(z1))
    npan = max(1, int(np.ceil(length * ig.rate(rmax, cls) / np.pi)))
    npan = min(npan, quad.max_panels)
    lam, w, half, wgl = _line_nodes(z0, z1, np.linspace(0.0, 1.0, npan + 1))
    G, scale = ig.evaluate(lam, side, cls)
    _panel_sum(acc, lam, w, half, wgl, G, scale, a_x, sign)


def _arc(acc, ig: _Integrands, side, rho, th0, th1, a_x, sign, quad: QuadratureSpec):
    """Integrate along ``rho e^{i theta}`` from th0 to th1."""
    length = abs(th1 - th0) * rho
    npan = max(1, int(np.ceil(length * ig.rate(rho, "full") / np.pi)))
    npan = min(npan, quad.max_panels)
    x, wg = gauss_legendre(ARC_NODES)
    br = np.linspace(th0, th1, npan + 1)
    half_t = 0.5 * np.diff(br)
    mid = 0.5 * (br[1:] + br[:-1])
    th = (mid[:, None] + half_t[:, None] * x[None, :]).ravel()
    lam = rho * np.exp(1j * th)
    w = (half_t[:, None] * wg[None, :]).ravel() * 1j * lam
    half = np.abs(half_t) * rho
    wgl = np.tile(wg, npan)
    G, scale = ig.evaluate(lam, side, "full")
    _panel_sum(acc, lam, w, half, wgl, G, scale, a_x, sign)


def _ray(acc, ig: _Integrands, side, cls, base: complex, direction: complex, a_x, sign,
         quad: QuadratureSpec, chunk: int = 8):
    """Integrate ``base + s*direction``, ``s`` in [0, inf), truncated adaptively."""
    r0 = abs(base)
    fixed_L = quad.truncation_L
    s = 0.0
    envs = []
    total_panels = 0
    scale_ref = 0.0
    converged = False
    cap = quad.hard_cap_L
    while True:
        breaks = [s]
        for _ in range(chunk):
            r = abs(base + breaks[-1] * direction)
            h = min(2.0, np.pi / ig.rate(r + 1.0, cls), max(0.1, 0.6 * (r - ig.r_pole)))
            breaks.append(breaks[-1] + h)
        br = np.array(breaks)
        if fixed_L is not None:
            smax = max(fixed_L - r0, 0.0)
            br = br[br < smax]
            br = np.append(br, smax) if (br.size == 0 or br[-1] < smax) else br
            if br.size < 2:
                converged = True
                break
        far = base + br[-1] * direction
        if abs(far.imag) > cap or abs(far) > 10 * cap:
            break
        lam, w, half, wgl = _line_nodes(base + br[0] * direction, base + br[-1] * direction,
                                        (br - br[0]) / (br[-1] - br[0]))
        G, scale = ig.evaluate(lam, side, cls)
        env = _panel_sum(acc, lam, w, half, wgl, G, scale, a_x, sign)
        envs.extend(env.tolist())
        total_panels += len(half)
        s = br[-1]
        scale_ref = max(scale_ref, float(np.max(np.abs(acc.value))) if acc.value.size else 0.0)
        if fixed_L is not None:
            if s >= fixed_L - r0 - 1e-12:
                converged = True
                break
            continue
        thresh = 1e-3 * max(quad.abs_tol, quad.rel_tol * scale_ref)
        last = envs[-3:]
        if total_panels >= 2 * chunk and all(e < thresh for e in last) and last[-1] <= last[0]:
            converged = True
            break
        if total_panels >= quad.max_panels:
            break
    # tail model from the last panels
    tail = 0.0
    if len(envs) >= 2:
        k = min(8, len(envs) - 1)
        e1, e0 = envs[-1], envs[-1 - k]
        q = (e1 / e0) ** (1.0 / k) if e0 > 0 else 0.0
        tail = e1 * q / (1 - q) if q < 0.999 else e1 * 1e3
    elif envs:
        tail = envs[-1]
    acc.error += tail
    acc.truncations.append(float(abs(base + s * direction)))
    if not converged:
        acc.nonconverged += 1


# ----------------------------------------------------------------------------
# Geometry
# ----------------------------------------------------------------------------

def _radii(data: ProblemData, cfg: SolverConfig, t: float, tp: float):
    tau = max(t, tp - t)
    rho = cfg.R if tau == 0 else min(cfg.R, (cfg.arc_exponent / tau) ** (1.0 / 3.0))
    rs = rho
    if data.has_time_data:
        rs = max(rs, 1.0, (3.0 * data.max_time_frequency()) ** (1.0 / 3.0))
    return rho, rs


def _rays_of(region: str):
    """Canonical rays of a region boundary as (theta, orientation, s_D, arc)."""
    out = []
    for ta, tb in SECTORS[region]:
        inside_d = region.startswith("D")
        # s_D: direction of increasing angle points into the adjacent D sector?
        sa = 1 if inside_d else -1
        sb = -1 if inside_d else 1
        out.append(((tb, -1, sb), (ta, 1, sa), (tb, ta)))
    return out


def _integrate_region(acc, ig, data, cfg, region, side, a_x, sign, rho, rs):
    quad = cfg.quad
    for (tb, ob, sb), (ta, oa, sa), (th0, th1) in _rays_of(region):
        for theta, orient, sD in ((tb, ob, sb), (ta, oa, sa)):
            e = np.exp(1j * theta)
            s_sign = sign * orient
            # canonical piece between rho and R_s uses the full integrand
            if rs > rho:
                z0, z1 = rho * e, rs * e
                if orient < 0:
                    z0, z1 = z1, z0
                _segment(acc, ig, side, "full", z0, z1, a_x, sign, quad)
            base = rs * e
            if ig.has_start:
                d = np.exp(1j * (theta - cfg.tilt * sD))
                _ray(acc, ig, side, "start", base, d, a_x, s_sign, quad)
            if ig.has_end:
                d = np.exp(1j * (theta + END_TILT * sD))
                _ray(acc, ig, side, "end", base, d, a_x, s_sign, quad)
        _arc(acc, ig, side, rho, th0, th1, a_x, sign, quad)


def _real_line(acc, ig, cfg, a_x, rho):
    quad = cfg.quad
    _segment(acc, ig, "left", "line", complex(-rho), complex(rho), a_x, 1, quad)
    _ray(acc, ig, "left", "line", complex(rho), np.exp(1j * cfg.tilt), a_x, 1, quad)
    _ray(acc, ig, "left", "line", complex(-rho), np.exp(1j * (np.pi - cfg.tilt)), a_x, -1, quad)


def zero_gate(data: ProblemData, cfg: SolverConfig, rho: float, r_out: float) -> list:
    """Certify that the regions swept by the deformations contain no zeros.

    Each D sector widened by the tilt angle is scanned over radii
    ``[rho, r_out]``; for the E variant the E annuli ``[rho, R]`` too.
    Raises :class:`ZeroGateError` otherwise; returns the reports.
    """
    from .verification import SectorRegion, count_delta_zeros, BoundaryTooCloseError

    regions = []
    pad = cfg.tilt * 1.2
    r_in = 0.9 * rho
    for ta, tb in SECTORS["D_plus"] + SECTORS["D_minus"]:
        regions.append(SectorRegion(ta - pad, tb + pad, r_in, r_out))
    if cfg.contour_variant == "corollary_E" and cfg.R > r_in:
        for ta, tb in SECTORS["E_plus"] + SECTORS["E_minus"]:
            regions.append(SectorRegion(ta, tb, r_in, cfg.R * 1.02))
    reports = []
    for reg in regions:
        try:
            rep = count_delta_zeros(data.weight, reg)
        except BoundaryTooCloseError as exc:
            raise ZeroGateError(f"zero-free check refused on {reg}: {exc}") from exc
        if rep.winding_count != 0:
            raise ZeroGateError(f"Delta has {rep.winding_count} zero(s) in {reg}; increase R")
        reports.append(rep)
    return reports


# ----------------------------------------------------------------------------
# Solver
# ----------------------------------------------------------------------------

def _group_points(points):
    groups = {}
    for i, (x, t) in enumerate(points):
        groups.setdefault(float(t), []).append(i)
    return groups


def _validate_points(points):
    pts = []
    for p in points:
        x, t = float(p[0]), float(p[1])
        if not (0.0 <= x <= 1.0):
            raise DataError(f"x={x} outside [0, 1]")
        if not t >= 0:
            raise DataError(f"t={t} must be nonnegative")
        pts.append((x, t))
    return pts


def solve_invp(data: ProblemData, cfg: SolverConfig | None, points) -> SolutionField:
    """Evaluate ``u(x, t)`` at each point from the contour representation."""
    cfg = cfg or SolverConfig()
    pts = _validate_points(points)
    vals = np.zeros(len(pts), dtype=complex)
    errs = np.zeros(len(pts))
    diag = {"cancellation_count": 0, "truncation_lengths": [], "nonconverged_rays": 0,
            "nodes": 0, "rho": {}, "R_s": {}, "zero_gate": [], "variant": cfg.contour_variant}
    for t, idx in sorted(_group_points(pts).items()):
        xs = np.array([pts[i][0] for i in idx])
        if t == 0:
            vals[idx] = data.initial.evaluate(xs)
            errs[idx] = 0.0
            continue
        tp = cfg.t_prime(t)
        rho, rs = _radii(data, cfg, t, tp)
        ig = _Integrands(data, t, tp)
        acc = _Accum(len(xs))
        if cfg.contour_variant == "theorem_D":
            if ig.has_u:
                _real_line(acc, ig, cfg, xs, rho)
            _integrate_region(acc, ig, data, cfg, "D_plus", "left", xs, 1, rho, rs)
            _integrate_region(acc, ig, data, cfg, "D_minus", "right", xs - 1.0, 1, rho, rs)
        else:
            _integrate_region(acc, ig, data, cfg, "E_plus", "left", xs, -1, rho, rs)
            _integrate_region(acc, ig, data, cfg, "E_minus", "right", xs - 1.0, -1, rho, rs)
        if cfg.check_zeros and (ig.has_u or ig.has_start or ig.has_end):
            r_out = min(max(acc.truncations + [rs * 1.5, cfg.R * 1.5]), 400.0)
            diag["zero_gate"].extend(r.__dict__ for r in zero_gate(data, cfg, rho, r_out))
        vals[idx] = acc.value / (2 * np.pi)
        errs[idx] = acc.error / (2 * np.pi)
        diag["cancellation_count"] += acc.cancels
        diag["truncation_lengths"].extend(acc.truncations)
        diag["nonconverged_rays"] += acc.nonconverged
        diag["nodes"] += acc.nodes
        diag["rho"][t] = rho
        diag["R_s"][t] = rs
    return SolutionField(pts, vals, errs, diag)


def cross_check_variants(data: ProblemData, cfg: SolverConfig | None, points,
                         floor: float = 0.0) -> VariantReport:
    """Solve with both contour variants and compare pointwise."""
    cfg = cfg or SolverConfig()
    a = solve_invp(data, cfg.replace(contour_variant="theorem_D"), points)
    b = solve_invp(data, cfg.replace(contour_variant="corollary_E"), points)
    disc = np.abs(a.values - b.values)
    comb = a.est_abs_error + b.est_abs_error
    passed = bool(np.all(disc <= 2 * comb + floor))
    return VariantReport(a.points, a.values, b.values, disc, comb, passed)
