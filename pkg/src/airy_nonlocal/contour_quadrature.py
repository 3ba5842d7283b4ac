"""Gauss-Legendre panel rules, sector-boundary contours and line integration.

The sectors are the six wedges between the rays ``e^{i k pi/3}[0, inf)``.
``D+`` is ``(pi/3, 2pi/3)``, ``D-`` is ``(-pi, -2pi/3) u (-pi/3, 0)`` and the
``E`` regions are the complements in each half plane.  Every boundary is
oriented with its region on the left.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre as npleg

PANEL_NODES = 16
ARC_NODES = 64
EPS = np.finfo(float).eps


# ----------------------------------------------------------------------------
# Reference rules
# ----------------------------------------------------------------------------

@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on [-1, 1]."""
    x, w = npleg.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def legendre_coefficient_matrix(n: int) -> np.ndarray:
    """Matrix mapping values at GL nodes to Legendre coefficients of the interpolant."""
    x, w = gauss_legendre(n)
    P = npleg.legvander(x, n - 1)  # (n, n), P[i, k] = P_k(x_i)
    C = (2 * np.arange(n) + 1)[:, None] / 2.0 * (P.T * w[None, :])
    C.setflags(write=False)
    return C


@lru_cache(maxsize=None)
def cumulative_matrices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Integration matrices on [-1, 1] for the GL interpolant.

    ``L @ f`` gives the integrals from -1 to each node and ``Rm @ f`` the
    integrals from each node to 1.
    """
    x, _ = gauss_legendre(n)
    C = legendre_coefficient_matrix(n)
    V = np.empty((n, n))
    for m in range(n):
        e = np.zeros(n)
        e[m] = 1.0
        V[:, m] = npleg.legval(x, npleg.legint(e, lbnd=-1.0))
    L = V @ C
    total = (gauss_legendre(n)[1])[None, :]
    Rm = total - L
    L.setflags(write=False)
    Rm.setflags(write=False)
    return L, Rm


def composite_rule(breaks: Sequence[float], n: int = PANEL_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Composite GL nodes/weights over consecutive ``breaks`` (one panel per gap)."""
    b = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(n)
    half = 0.5 * np.diff(b)
    mid = 0.5 * (b[1:] + b[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def subdivide(breaks: Sequence[float], panels_per_unit: float, minimum: int = 1) -> np.ndarray:
    """Refine ``breaks`` so no panel is longer than ``1/panels_per_unit``."""
    b = np.asarray(breaks, dtype=float)
    out = [b[0]]
    total = b[-1] - b[0]
    for lo, hi in zip(b[:-1], b[1:]):
        k = max(1, int(np.ceil((hi - lo) * panels_per_unit - 1e-12)))
        if total > 0:
            k = max(k, int(np.ceil(minimum * (hi - lo) / total - 1e-12)))
        out.extend(np.linspace(lo, hi, k + 1)[1:])
    return np.asarray(out)


def panel_tail_estimate(values: np.ndarray, half_lengths: np.ndarray) -> np.ndarray:
    """Per-panel error estimate from the last two Legendre coefficients.

    ``values`` has shape (..., npanel, n); the result has shape (..., npanel).
    """
    n = values.shape[-1]
    C = legendre_coefficient_matrix(n)
    coef = values @ C.T
    tail = np.maximum(np.abs(coef[..., -1]), np.abs(coef[..., -2]))
    return 2.0 * half_lengths * tail


# ----------------------------------------------------------------------------
# Result carriers
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralEval:
    """A complex value with an absolute error estimate and cancellation flag."""

    value: complex
    est_abs_error: float = 0.0
    cancellation_flag: bool = False
    lam: complex = 0j

    def __post_init__(self):
        if not self.est_abs_error >= 0:
            raise ValueError("est_abs_error must be nonnegative")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budgets for contour and real-line integration."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_panels: int = 4096
    truncation_L: float | None = None
    pv_epsilon: float = 1e-3
    hard_cap_L: float = 600.0

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "pv_epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_panels < 16:
            raise ValueError("max_panels must be at least 16")
        if self.truncation_L is not None and not self.truncation_L > 0:
            raise ValueError("truncation_L must be positive")


# ----------------------------------------------------------------------------
# Paths
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """One oriented piece of a contour.

    ``ray``: ``base + s*direction`` for ``s`` in ``[0, length]``, traversed
    outward when ``orientation`` is +1 and inward when -1.
    ``arc``: ``radius*e^{i theta}`` from ``theta0`` to ``theta1``.
    ``line``: straight segment from ``start`` to ``end``.
    """

    kind: str
    base: complex = 0j
    direction: complex = 1 + 0j
    length: float = 0.0
    orientation: int = 1
    radius: float = 0.0
    theta0: float = 0.0
    theta1: float = 0.0
    start_point: complex = 0j
    end_point: complex = 0j

    @property
    def start(self) -> complex:
        if self.kind == "ray":
            far = self.base + self.length * self.direction
            return self.base if self.orientation > 0 else far
        if self.kind == "arc":
            return self.radius * np.exp(1j * self.theta0)
        return self.start_point

    @property
    def end(self) -> complex:
        if self.kind == "ray":
            far = self.base + self.length * self.direction
            return far if self.orientation > 0 else self.base
        if self.kind == "arc":
            return self.radius * np.exp(1j * self.theta1)
        return self.end_point

    def reversed(self) -> "Segment":
        if self.kind == "ray":
            return Segment("ray", base=self.base, direction=self.direction,
                           length=self.length, orientation=-self.orientation)
        if self.kind == "arc":
            return Segment("arc", radius=self.radius, theta0=self.theta1, theta1=self.theta0)
        return Segment("line", start_point=self.end_point, end_point=self.start_point)

    def point(self, s: np.ndarray) -> np.ndarray:
        """Map the unit parameter ``s`` in [0, 1] (start to end) to the plane."""
        s = np.asarray(s, dtype=float)
        if self.kind == "arc":
            return self.radius * np.exp(1j * (self.theta0 + s * (self.theta1 - self.theta0)))
        return self.start + s * (self.end - self.start)

    def nodes(self, breaks_unit: np.ndarray, n: int = PANEL_NODES) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """GL nodes along the segment for unit-parameter panel ``breaks_unit``.

        Returns (lam, dlam_weights, half_lengths) where ``sum(f(lam)*w)``
        approximates the oriented integral.
        """
        u, wu = composite_rule(breaks_unit, n)
        if self.kind == "arc":
            dth = self.theta1 - self.theta0
            lam = self.point(u)
            w = wu * dth * 1j * lam
            half = 0.5 * np.diff(breaks_unit) * abs(dth) * self.radius
        else:
            d = self.end - self.start
            lam = self.point(u)
            w = wu * d
            half = 0.5 * np.diff(breaks_unit) * abs(d)
        return lam, w, half

    @property
    def path_length(self) -> float:
        if self.kind == "arc":
            return abs(self.theta1 - self.theta0) * self.radius
        return abs(self.end - self.start)


@dataclass(frozen=True)
class ContourPath:
    """Oriented contour stored as connected components of segments."""

    label: str
    components: tuple[tuple[Segment, ...], ...]
    R: float = 0.0
    truncation_L: float = 0.0
    closed: bool = False

    @property
    def segments(self) -> tuple[Segment, ...]:
        return tuple(s for comp in self.components for s in comp)

    def reversed(self) -> "ContourPath":
        comps = tuple(tuple(s.reversed() for s in reversed(c)) for c in self.components)
        return ContourPath(self.label, comps, self.R, self.truncation_L, self.closed)


LABELS = ("dD_plus", "dD_minus", "dE_plus", "dE_minus", "real_line")

# sectors (theta_a, theta_b) of each region
SECTORS = {
    "D_plus": ((np.pi / 3, 2 * np.pi / 3),),
    "D_minus": ((-np.pi / 3, 0.0), (-np.pi, -2 * np.pi / 3)),
    "E_plus": ((0.0, np.pi / 3), (2 * np.pi / 3, np.pi)),
    "E_minus": ((-2 * np.pi / 3, -np.pi / 3),),
}


def sector_boundary(theta_a: float, theta_b: float, R: float, L: float) -> tuple[Segment, ...]:
    """Boundary of ``{R < |lam| < L, theta_a < arg lam < theta_b}`` minus the far arc.

    Ray at ``theta_a`` outward, arc at ``R`` clockwise from ``theta_b`` to
    ``theta_a`` preceded by the ray at ``theta_b`` inward, so the sector is on
    the left.
    """
    ray_a = Segment("ray", base=R * np.exp(1j * theta_a), direction=np.exp(1j * theta_a),
                    length=L - R, orientation=1)
    ray_b = Segment("ray", base=R * np.exp(1j * theta_b), direction=np.exp(1j * theta_b),
                    length=L - R, orientation=-1)
    arc = Segment("arc", radius=R, theta0=theta_b, theta1=theta_a)
    return (ray_b, arc, ray_a)


def build_contour(label: str, R: float, truncation_L: float) -> ContourPath:
    """Truncated canonical boundary of the labelled region."""
    if label not in LABELS:
        raise ValueError(f"unknown contour label {label!r}")
    if not R > 0:
        raise ValueError("R must be positive")
    if not truncation_L > R:
        raise ValueError("truncation_L must exceed R")
    if label == "real_line":
        seg = Segment("line", start_point=complex(-truncation_L), end_point=complex(truncation_L))
        return ContourPath(label, ((seg,),), R, truncation_L)
    region = {"dD_plus": "D_plus", "dD_minus": "D_minus",
              "dE_plus": "E_plus", "dE_minus": "E_minus"}[label]
    comps = tuple(sector_boundary(a, b, R, truncation_L) for a, b in SECTORS[region])
    return ContourPath(label, comps, R, truncation_L)


def closed_sector_loop(theta_a: float, theta_b: float, R: float, L: float) -> tuple[Segment, ...]:
    """Closed anticlockwise loop around an annular sector (includes the far arc)."""
    ray_b, arc, ray_a = sector_boundary(theta_a, theta_b, R, L)
    far = Segment("arc", radius=L, theta0=theta_a, theta1=theta_b)
    return (ray_a, far, ray_b, arc)


# ----------------------------------------------------------------------------
# Generic integration
# ----------------------------------------------------------------------------

def _integrate_segment(f: Callable, seg: Segment, spec: QuadratureSpec,
                       npanel0: int) -> tuple[complex, float, int, bool]:
    """Adaptive bisection on one segment using the spectral tail as local error."""
    n = ARC_NODES if seg.kind == "arc" else PANEL_NODES
    stack = list(zip(np.linspace(0, 1, npanel0 + 1)[:-1], np.linspace(0, 1, npanel0 + 1)[1:]))
    total = 0j
    err = 0.0
    used = 0
    ok = True
    length = max(seg.path_length, 1e-300)
    while stack:
        a, b = stack.pop()
        lam, w, half = seg.nodes(np.array([a, b]), n)
        fv = np.asarray(f(lam), dtype=complex)
        val = np.sum(fv * w)
        e = float(panel_tail_estimate(fv.reshape(1, n), half)[0])
        e += 16 * EPS * float(np.sum(np.abs(fv * w)))
        used += 1
        budget = max(spec.abs_tol, spec.rel_tol * abs(val)) * (b - a)
        if e > budget and used + len(stack) < spec.max_panels and (b - a) * length > 1e-12:
            m = 0.5 * (a + b)
            stack.extend([(a, m), (m, b)])
            continue
        if e > budget:
            ok = False
        total += val
        err += e
    return total, err, used, ok


def _tail_estimate(f: Callable, seg: Segment) -> float:
    """Remaining-decay model at the truncated end of a ray."""
    if seg.kind != "ray" or seg.length <= 0:
        return 0.0
    s = seg.length * np.array([0.9, 0.95, 1.0])
    lam = seg.base + s * seg.direction
    mags = np.abs(np.asarray(f(lam), dtype=complex))
    fL = mags[-1]
    if fL == 0:
        return 0.0
    if mags[0] > mags[-1] > 0:
        rate = np.log(mags[0] / mags[-1]) / (s[-1] - s[0])
        tail_exp = fL / rate
        # algebraic decay model |f| ~ C s^-p
        p = np.log(mags[0] / mags[-1]) / np.log(s[-1] / s[0])
        tail_alg = fL * s[-1] / (p - 1) if p > 1 else np.inf
        return float(min(tail_exp, tail_alg, fL * seg.length))
    return float(fL * seg.length)


def integrate_contour(f: Callable[[np.ndarray], np.ndarray], path: ContourPath,
                      spec: QuadratureSpec | None = None) -> SpectralEval:
    """Sum of adaptive panel integrals of ``f`` over every segment of ``path``.

    The error estimate adds the panel estimates and, for each truncated ray,
    the magnitude of ``f`` at its far end times a fitted decay length.
    """
    spec = spec or QuadratureSpec()
    total = 0j
    err = 0.0
    ok = True
    for seg in path.segments:
        npanel0 = max(1, int(np.ceil(seg.path_length / 2.0))) if seg.kind != "arc" else 1
        v, e, _, good = _integrate_segment(f, seg, spec, npanel0)
        total += v
        err += e + (0.0 if path.closed else _tail_estimate(f, seg))
        ok = ok and good
    if not ok:
        err = max(err, 1e3 * max(spec.abs_tol, spec.rel_tol * abs(total)))
    return SpectralEval(complex(total), float(err), cancellation_flag=not ok)


def integrate_real_pv(f: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec | None = None,
                      exclusions: Sequence[float] = (), removable: Sequence[float] = (),
                      L: float | None = None) -> SpectralEval:
    """Symmetric principal-value integral of ``f`` over ``[-L, L]``.

    Points in ``exclusions`` get symmetric holes of half-width
    ``pv_epsilon``.  Points in ``removable`` are bridged: inside the hole the
    integrand is replaced by the cubic through samples at distance
    ``eps`` and ``2 eps`` on both sides, and integrated exactly.
    """
    spec = spec or QuadratureSpec()
    L = L if L is not None else (spec.truncation_L or 200.0)
    eps = spec.pv_epsilon
    marks = sorted([(float(c), "pv") for c in exclusions] + [(float(c), "rm") for c in removable])
    pieces = []
    lo = -L
    bridge = 0j
    for c, kind in marks:
        if c - eps <= lo or c + eps >= L:
            raise ValueError("exclusion point too close to the integration bounds")
        pieces.append((lo, c - eps))
        if kind == "rm":
            xs = c + eps * np.array([-2.0, -1.0, 1.0, 2.0])
            ys = np.asarray(f(xs.astype(complex)), dtype=complex)
            coef = np.polyfit(xs - c, ys, 3)
            anti = np.polyint(coef)
            bridge += np.polyval(anti, eps) - np.polyval(anti, -eps)
        lo = c + eps
    pieces.append((lo, L))
    total = bridge
    err = 0.0
    ok = True
    for a, b in pieces:
        seg = Segment("line", start_point=complex(a), end_point=complex(b))
        v, e, _, good = _integrate_segment(f, seg, spec, max(1, int(np.ceil((b - a) / 2.0))))
        total += v
        err += e
        ok = ok and good
    ends = np.abs(np.asarray(f(np.array([-L, L], dtype=complex)), dtype=complex))
    err += float(np.sum(ends) * L)
    return SpectralEval(complex(total), float(err), cancellation_flag=not ok)


def fourier_coefficient(h, n: int, T: float, n_fft: int = 1024) -> complex:
    """``(1/T) int_0^T h(t) e^{-i n omega t} dt`` by the uniform trapezoid rule."""
    if not T > 0:
        raise ValueError("period must be positive")
    t = np.arange(n_fft) * (T / n_fft)
    vals = np.asarray(_evaluate(h, t), dtype=complex)
    omega = 2 * np.pi / T
    return complex(np.mean(vals * np.exp(-1j * n * omega * t)))


def fourier_coefficients(h, n_max: int, T: float, n_fft: int = 1024) -> np.ndarray:
    """Coefficients for ``n = -n_max..n_max`` from one FFT of the samples."""
    if 2 * n_max + 1 > n_fft:
        raise ValueError("n_fft too small for the requested n_max")
    t = np.arange(n_fft) * (T / n_fft)
    vals = np.asarray(_evaluate(h, t), dtype=complex)
    c = np.fft.fft(vals) / n_fft
    idx = np.arange(-n_max, n_max + 1) % n_fft
    return c[idx]


def _evaluate(h, t):
    if hasattr(h, "evaluate"):
        return h.evaluate(t)
    return h(t)
