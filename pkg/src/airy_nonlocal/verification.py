"""Manufactured solutions, relation residuals and zero counts of Delta."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .contour_quadrature import Segment, composite_rule, gauss_legendre
from .spectral_core import (
    ALPHA,
    ROT,
    FunctionSpec,
    ProblemData,
    delta_array,
    delta_prime_array,
    fourier_array,
)

RELATIVE_BOUNDARY_FLOOR = 1e-9
ROUNDING_LIMIT = 1e-3


# ----------------------------------------------------------------------------
# Manufactured solutions
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ManufacturedCase:
    """Exact solution ``u = sum a_k e^{i mu_k x + i mu_k^3 t}`` and its data."""

    data: ProblemData
    modes: tuple           # of (mu, amplitude)
    omega: float | None = None
    mode_indices: tuple = ()

    @property
    def period(self) -> float | None:
        return None if self.omega is None else 2 * np.pi / self.omega

    def exact(self, x, t, deriv: int = 0) -> np.ndarray:
        x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        out = np.zeros(x.shape, dtype=complex)
        for mu, a in self.modes:
            out = out + a * (1j * mu) ** deriv * np.exp(1j * mu * x + 1j * mu ** 3 * t)
        return out


def make_manufactured_invp(modes: Sequence, K: FunctionSpec, period: float | None = None,
                           check: bool = True) -> ManufacturedCase:
    """Data read off ``u = sum a e^{i lam x + i lam^3 t}`` for each ``(lam, a)``."""
    modes = tuple((complex(m), complex(a)) for m, a in modes)
    if not modes:
        raise ValueError("need at least one mode")
    U = FunctionSpec.modes(modes)
    Khat = fourier_array(K, -np.array([m for m, _ in modes]))
    tdom = (0.0, 1.0)
    h0 = FunctionSpec.modes([(m ** 3, a * np.exp(1j * m)) for m, a in modes], tdom)
    h1 = FunctionSpec.modes([(m ** 3, a * 1j * m * np.exp(1j * m)) for m, a in modes], tdom)
    h2 = FunctionSpec.modes([(m ** 3, a * kh) for (m, a), kh in zip(modes, Khat)], tdom)
    data = ProblemData(U, K, h0, h1, h2, period=period, compatibility_tol=1e-12, check=check)
    return ManufacturedCase(data, modes)


def lambda_n(n: int, omega: float) -> float:
    """Real cube root of ``n omega``."""
    return float(np.sign(n) * (abs(n) * omega) ** (1.0 / 3.0))


def make_manufactured_periodic(mode_indices: Sequence, omega: float,
                               K: FunctionSpec) -> ManufacturedCase:
    """``q = sum e^{i alpha^j lam_n x + i n omega t}`` for each ``(n, j)``."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    modes = []
    idx = []
    for n, j in mode_indices:
        n, j = int(n), int(j)
        if n == 0 or j not in (0, 1, 2):
            raise ValueError(f"invalid mode index (n={n}, j={j})")
        modes.append((ROT[j] * lambda_n(n, omega), 1.0))
        idx.append((n, j))
    if not modes:
        raise ValueError("need at least one mode")
    base = make_manufactured_invp(modes, K, period=2 * np.pi / omega, check=True)
    return ManufacturedCase(base.data, base.modes, float(omega), tuple(idx))


def manufactured_error(case: ManufacturedCase, points, values) -> np.ndarray:
    pts = np.asarray(points, float)
    return np.abs(np.asarray(values) - case.exact(pts[:, 0], pts[:, 1]))


# ----------------------------------------------------------------------------
# Residuals by direct quadrature of the exact solution
# ----------------------------------------------------------------------------

def _gl(a: float, b: float, rate: float, n: int = 32):
    npan = max(2, int(np.ceil((b - a) * (rate + 1.0) / 2.0)))
    return composite_rule(np.linspace(a, b, npan + 1), n)


def global_relation_residual(case: ManufacturedCase, lam: complex, y: float, z: float,
                             t: float) -> float:
    """``|e^{-i lam^3 t} u_hat(t) - U_hat - [boundary terms]|`` on ``[y, z]``.

    Divided by ``max(1, largest term)``, since ``e^{-i lam^3 t}`` can be huge
    off the real axis and the absolute residual is then pure roundoff.
    """
    if not (0 <= y <= z <= 1):
        raise ValueError("need 0 <= y <= z <= 1")
    lam = complex(lam)
    if y == z:
        return 0.0
    mus = [m for m, _ in case.modes]
    rate_x = abs(lam) + max(abs(m) for m in mus)
    x, wx = _gl(y, z, rate_x)
    ex = np.exp(-1j * lam * x)
    lhs = np.exp(-1j * lam ** 3 * t) * np.sum(wx * ex * case.exact(x, t))
    Uhat = np.sum(wx * ex * case.exact(x, 0.0))

    def bracket(pt):
        if t == 0:
            return 0j
        rate = abs(lam) ** 3 + max(abs(m) ** 3 for m in mus)
        s, ws = _gl(0.0, t, rate)
        et = np.exp(-1j * lam ** 3 * s)
        f = [np.sum(ws * et * case.exact(pt, s, j)) for j in range(3)]
        return f[2] + 1j * lam * f[1] - lam ** 2 * f[0]

    by = np.exp(-1j * lam * y) * bracket(y)
    bz = np.exp(-1j * lam * z) * bracket(z)
    scale = max(1.0, abs(lhs), abs(Uhat), abs(by), abs(bz))
    return float(abs(lhs - (Uhat + by - bz)) / scale)


def _time_coeff(case: ManufacturedCase, g: Callable, n: int, nt: int = 256) -> complex:
    T = case.period
    t = np.arange(nt) * (T / nt)
    vals = np.array([g(tt) for tt in t])
    return complex(np.mean(vals * np.exp(-1j * n * case.omega * t)))


def periodic_relation_residual(case: ManufacturedCase, n: int, lam: complex) -> float:
    """Max residual of the periodic relation and its nonlocal companion."""
    if case.omega is None:
        raise ValueError("case is not periodic")
    if all(a == 0 for _, a in case.modes):
        return 0.0
    lam = complex(lam)
    K = case.data.weight
    om = case.omega
    rate = abs(lam) + max(abs(m) for m, _ in case.modes)
    x, wx = _gl(0.0, 1.0, rate)
    ex = np.exp(-1j * lam * x)
    Kx = K.evaluate(x)
    # cumulative q_hat(lam; t; y, 1) at the nodes y = x via a nested rule
    xi, wi = gauss_legendre(32)

    def qhat_tail(t):
        out = np.empty(x.size, dtype=complex)
        for k, yk in enumerate(x):
            s = yk + (1 - yk) * 0.5 * (xi + 1)
            out[k] = 0.5 * (1 - yk) * np.sum(wi * np.exp(-1j * lam * s) * case.exact(s, t))
        return out

    Q = _time_coeff(case, lambda t: np.sum(wx * ex * case.exact(x, t)), n)
    G = [_time_coeff(case, lambda t, j=j: case.exact(0.0, t, j)[()], n) for j in range(3)]
    Gam = [_time_coeff(case, lambda t, j=j: case.exact(1.0, t, j)[()], n) for j in range(3)]
    A = [_time_coeff(case, lambda t, j=j: np.sum(wx * Kx * case.exact(x, t, j)), n)
         for j in range(3)]
    P = _time_coeff(case, lambda t: np.sum(wx * np.exp(1j * lam * x) * Kx * qhat_tail(t)), n)
    fac = 1j * n * om - 1j * lam ** 3
    comb = lambda c: c[2] + 1j * lam * c[1] - lam ** 2 * c[0]
    r1 = fac * Q - (comb(G) - np.exp(-1j * lam) * comb(Gam))
    Khat_m = np.sum(wx * np.exp(1j * lam * x) * Kx)
    r2 = fac * P - (comb(A) - np.exp(-1j * lam) * Khat_m * comb(Gam))
    return float(max(abs(r1), abs(r2)))


# ----------------------------------------------------------------------------
# Zero counting
# ----------------------------------------------------------------------------

class BoundaryTooCloseError(ValueError):
    """The region boundary passes too close to a zero for a reliable count."""


@dataclass(frozen=True)
class SectorRegion:
    """``{r_in < |lam| < r_out, theta_a < arg lam < theta_b}``."""

    theta_a: float
    theta_b: float
    r_in: float
    r_out: float

    def boundary(self) -> list:
        a, b = self.theta_a, self.theta_b
        return [
            Segment("line", start_point=self.r_in * np.exp(1j * a), end_point=self.r_out * np.exp(1j * a)),
            Segment("arc", radius=self.r_out, theta0=a, theta1=b),
            Segment("line", start_point=self.r_out * np.exp(1j * b), end_point=self.r_in * np.exp(1j * b)),
            Segment("arc", radius=self.r_in, theta0=b, theta1=a),
        ]

    def contains(self, lam: complex) -> bool:
        r = abs(lam)
        th = np.angle(lam)
        # compare angles on a branch centred on the sector
        mid = 0.5 * (self.theta_a + self.theta_b)
        d = (th - mid + np.pi) % (2 * np.pi) - np.pi
        return self.r_in < r < self.r_out and abs(d) < 0.5 * (self.theta_b - self.theta_a)

    def __str__(self):
        return (f"sector(arg in [{self.theta_a:.4f}, {self.theta_b:.4f}], "
                f"|lam| in [{self.r_in:.4g}, {self.r_out:.4g}])")


@dataclass(frozen=True)
class StripRegion:
    """Rectangle ``{s d + w i d : s_min < s < s_max, |w| < half_width}``."""

    direction: complex
    s_min: float
    s_max: float
    half_width: float

    def _corners(self):
        d = complex(self.direction) / abs(self.direction)
        n = 1j * d
        w = self.half_width
        return [self.s_min * d - w * n, self.s_max * d - w * n,
                self.s_max * d + w * n, self.s_min * d + w * n]

    def boundary(self) -> list:
        c = self._corners()
        return [Segment("line", start_point=c[k], end_point=c[(k + 1) % 4]) for k in range(4)]

    def contains(self, lam: complex) -> bool:
        d = complex(self.direction) / abs(self.direction)
        z = lam / d
        return self.s_min < z.real < self.s_max and abs(z.imag) < self.half_width

    def __str__(self):
        return (f"strip(direction {complex(self.direction):.4g}, s in [{self.s_min:.4g}, "
                f"{self.s_max:.4g}], half-width {self.half_width:.4g})")


@dataclass(frozen=True)
class CircleRegion:
    center: complex
    radius: float

    def boundary(self) -> list:
        return [_ShiftedArc(complex(self.center), self.radius)]

    def contains(self, lam: complex) -> bool:
        return abs(lam - self.center) < self.radius

    def __str__(self):
        return f"circle(center {complex(self.center):.4g}, radius {self.radius:.4g})"


@dataclass(frozen=True)
class _ShiftedArc:
    center: complex
    radius: float

    @property
    def path_length(self):
        return 2 * np.pi * self.radius

    def point(self, s):
        return self.center + self.radius * np.exp(2j * np.pi * np.asarray(s, float))

    def nodes(self, breaks, n):
        u, wu = composite_rule(breaks, n)
        z = self.point(u)
        return z, wu * 2j * np.pi * (z - self.center), None


@dataclass(frozen=True)
class ZeroCountReport:
    region: str
    winding_count: int
    winding_value: float
    rounding_distance: float
    min_abs_delta_on_boundary: float
    zeros: tuple = ()


def _segment_nodes(seg, npan: int, n: int = 32):
    br = np.linspace(0.0, 1.0, npan + 1)
    lam, w, _ = seg.nodes(br, n)
    return lam, w


def count_delta_zeros(K: FunctionSpec | None, region, func: Callable | None = None,
                      dfunc: Callable | None = None, prescan: int = 512,
                      locate: bool = True) -> ZeroCountReport:
    """Argument-principle count of zeros of ``Delta`` (or ``func``) in ``region``.

    The boundary is first sampled at ``prescan`` points; a boundary passing
    within ``1e-9`` (relative to the size of the terms) of a zero is refused.
    The winding integral uses the analytic derivative and is doubled in
    resolution until successive values agree to ``1e-8``.
    """
    if func is None:
        def func(z):
            return delta_array(K, z)

        def scale_of(z):
            _, kh = delta_array(K, z, with_terms=True)
            return np.max(np.abs(kh), axis=0)

        def dfunc(z):
            return delta_prime_array(K, z)
    else:
        if dfunc is None:
            raise ValueError("dfunc required with func")

        def scale_of(z):
            return np.ones(np.shape(z))

    segs = region.boundary()
    lengths = np.array([s.path_length for s in segs])
    counts = np.maximum(2, np.round(prescan * lengths / lengths.sum())).astype(int)
    mins = []
    rel_min = np.inf
    for seg, c in zip(segs, counts):
        z = seg.point((np.arange(c) + 0.5) / c)
        v = np.abs(func(z))
        mins.append(float(np.min(v)))
        rel_min = min(rel_min, float(np.min(v / scale_of(z))))
    min_abs = min(mins)
    if not rel_min > RELATIVE_BOUNDARY_FLOOR:
        raise BoundaryTooCloseError(
            f"|Delta| on the boundary of {region} drops to {min_abs:.3g}; move the boundary")

    def winding(level: int) -> complex:
        tot = 0j
        for seg in segs:
            npan = max(2, int(np.ceil(seg.path_length * 2.0))) * 2 ** level
            lam, w = _segment_nodes(seg, npan)
            tot += np.sum(dfunc(lam) / func(lam) * w)
        return tot / (2j * np.pi)

    prev = winding(0)
    for level in range(1, 7):
        cur = winding(level)
        done = abs(cur - prev) < 1e-8
        prev = cur
        if done:
            break
    val = prev.real
    k = int(np.round(val))
    dist = float(abs(prev - k))
    if dist > ROUNDING_LIMIT:
        raise BoundaryTooCloseError(
            f"winding integral {prev:.6g} over {region} is not near an integer")
    zeros = ()
    if locate and k > 0:
        zeros = tuple(_locate_zeros(func, dfunc, scale_of, region, segs))
    return ZeroCountReport(str(region), k, float(val), dist, float(min_abs), zeros)


def _locate_zeros(func, dfunc, scale_of, region, segs, grid: int = 200) -> list:
    """Newton from local minima of ``|Delta|`` (relative to its terms) on a grid."""
    pts = np.concatenate([s.point(np.linspace(0, 1, 64)) for s in segs])
    X, Y = np.meshgrid(np.linspace(pts.real.min(), pts.real.max(), grid),
                       np.linspace(pts.imag.min(), pts.imag.max(), grid))
    Z = X + 1j * Y
    V = np.abs(func(Z.ravel())) / scale_of(Z.ravel())
    V = V.reshape(Z.shape)
    P = np.pad(V, 1, constant_values=np.inf)
    is_min = np.ones(V.shape, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= V <= P[1 + di: 1 + di + V.shape[0], 1 + dj: 1 + dj + V.shape[1]]
    found = []
    for z in Z[is_min]:
        for _ in range(60):
            dz = func(np.array([z]))[0] / dfunc(np.array([z]))[0]
            z = z - dz
            if abs(dz) < 1e-15 * max(1.0, abs(z)):
                break
        if not np.isfinite(z) or not region.contains(z):
            continue
        if abs(func(np.array([z]))[0]) > 1e-8 * scale_of(np.array([z]))[0]:
            continue
        if all(abs(z - f) > 1e-6 for f in found):
            found.append(complex(z))
    return sorted(found, key=abs)
