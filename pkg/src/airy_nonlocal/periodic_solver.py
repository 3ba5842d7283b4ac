"""Time-periodic solutions: coefficient systems, solubility criterion, evaluation.

With data of period ``T = 2 pi/omega`` the solution ``q`` is expanded as
``sum_n q_n(x) e^{i n omega t}`` (Fourier kernel ``e^{-i n omega t}`` for the
coefficients).  Evaluating the periodic relations at the three roots of
``lam^3 = n omega`` gives the unknown right second derivative ``Gamma_n^2``
and the left traces ``G_n^j`` in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .contour_quadrature import (
    EPS,
    PANEL_NODES,
    QuadratureSpec,
    composite_rule,
    fourier_coefficients,
    gauss_legendre,
    panel_tail_estimate,
)
from .invp_solver import SolutionField
from .spectral_core import (
    ROT,
    DataError,
    FunctionSpec,
    ProblemData,
    kappa_hat_array,
    kappa_of,
)

N_FFT = 1024
SERIES_TERMS = 40


class CriterionError(ArithmeticError):
    """The periodic solubility criterion fails."""

    def __init__(self, message: str, failing_n=(), report=None):
        super().__init__(message)
        self.failing_n = list(failing_n)
        self.report = report


@dataclass
class CoeffSet:
    """Fourier coefficients indexed ``n = -n_max..n_max`` (position ``n + n_max``)."""

    n_max: int
    omega: float
    H0: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    Gamma2: np.ndarray | None = None
    G0: np.ndarray | None = None
    G1: np.ndarray | None = None
    G2: np.ndarray | None = None
    A1: np.ndarray | None = None
    A2: np.ndarray | None = None

    def __post_init__(self):
        size = 2 * self.n_max + 1
        for name in ("H0", "H1", "H2", "Gamma2", "G0", "G1", "G2", "A1", "A2"):
            v = getattr(self, name)
            if v is not None and len(v) != size:
                raise ValueError(f"{name} must have length {size}")

    @property
    def n(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def at(self, name: str, n: int) -> complex:
        return complex(getattr(self, name)[n + self.n_max])


@dataclass(frozen=True)
class PeriodicCriterionReport:
    kappa_hat_second_deriv_at_0: complex
    min_abs_denominator: float
    failing_n: list
    passed: bool


def lambda_n(n: int, omega: float) -> float:
    """``sgn(n) (|n| omega)^{1/3}``."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    return float(np.sign(n) * (abs(n) * omega) ** (1.0 / 3.0))


def kappa_moments(K: FunctionSpec, kmax: int = 2) -> list:
    """``kappa_hat^{(k)}(0) = int (-i y)^k K(1-y) dy`` for ``k = 0..kmax``."""
    kap = kappa_of(K)
    br = kap.breaks(0.0, 1.0)
    x, w = composite_rule(np.unique(np.concatenate([br, np.linspace(0, 1, 9)])), PANEL_NODES)
    kx = kap.evaluate(x)
    return [complex(np.sum(w * (-1j * x) ** k * kx)) for k in range(kmax + 1)]


def periodic_coefficients(data: ProblemData, n_max: int, n_fft: int = N_FFT) -> CoeffSet:
    """Data coefficients ``H_n^k`` by FFT over one period."""
    if data.period is None:
        raise DataError("period required for periodic problems")
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    T = float(data.period)
    n_fft = max(n_fft, 2 * (2 * n_max + 1))
    H = [fourier_coefficients(h, n_max, T, n_fft) for h in
         (data.boundary0, data.boundary1, data.nonlocal_)]
    return CoeffSet(n_max, 2 * np.pi / T, *H)


def _nu_script(lam, kh, H0, H1, H2):
    return lam ** 2 * H2 + 1j * lam * kh * H1 - lam ** 2 * kh * H0


def solve_gamma2(data: ProblemData, n: int, H: CoeffSet,
                 kappa_hat_fn: Callable | None = None) -> complex:
    """``Gamma_n^2`` from the nonlocal periodic relation at the roots of ``lam^3 = n omega``."""
    kfn = kappa_hat_fn or (lambda z: kappa_hat_array(data.weight, z))
    H0, H1, H2 = H.at("H0", n), H.at("H1", n), H.at("H2", n)
    if n == 0:
        k0, k1, k2 = kappa_moments(data.weight)
        if abs(k2) <= 1e-10 * max(abs(k0), 1e-300):
            raise CriterionError("criterion fails at n=0: kappa_hat''(0) vanishes", [0])
        return complex(-2.0 * (H2 + 1j * k1 * H1 - k0 * H0) / k2)
    lam = lambda_n(n, H.omega)
    mu = ROT * lam
    kh = np.asarray(kfn(mu), dtype=complex)
    den = np.sum(ROT * kh)
    if abs(den) <= 1e-10 * max(np.max(np.abs(kh)), 1e-300):
        raise CriterionError(f"criterion fails at n={n}: |sum alpha^j kappa_hat| = {abs(den):.3g}", [n])
    num = np.sum(ROT * _nu_script(mu, kh, H0, H1, H2))
    return complex(-num / den)


def solve_G(data: ProblemData, n: int, H: CoeffSet, gamma2: complex):
    """Left traces ``(G_n^0, G_n^1, G_n^2)``."""
    H0, H1 = H.at("H0", n), H.at("H1", n)
    if n == 0:
        return (H0 - H1 + gamma2 / 2, H1 - gamma2, complex(gamma2))
    lam = lambda_n(n, H.omega)
    mu = ROT * lam
    frak = np.exp(-1j * mu) * (gamma2 + 1j * mu * H1 - mu ** 2 * H0)
    G2 = np.sum(frak) / 3
    G1 = np.sum(ROT ** 2 * frak) / (3j * lam)
    G0 = -np.sum(ROT * frak) / (3 * lam ** 2)
    return (complex(G0), complex(G1), complex(G2))


def solve_A(data: ProblemData, n: int, H: CoeffSet, gamma2: complex,
            kappa_hat_fn: Callable | None = None):
    """Nonlocal traces ``(A_n^1, A_n^2)`` of ``int K d^j q``."""
    kfn = kappa_hat_fn or (lambda z: kappa_hat_array(data.weight, z))
    H0, H1, H2 = H.at("H0", n), H.at("H1", n), H.at("H2", n)
    if n == 0:
        k0, k1, _ = kappa_moments(data.weight)
        return (complex(k0 * H1 - 1j * k1 * gamma2), complex(k0 * gamma2))
    lam = lambda_n(n, H.omega)
    mu = ROT * lam
    kh = np.asarray(kfn(mu), dtype=complex)
    rhs = _nu_script(mu, kh, H0, H1, H2) + kh * gamma2
    A2 = np.sum(rhs) / 3
    A1 = np.sum(ROT ** 2 * rhs) / (3j * lam)
    return (complex(A1), complex(A2))


def check_criterion(K: FunctionSpec, omega: float, n_max: int,
                    kappa_hat_fn: Callable | None = None) -> PeriodicCriterionReport:
    """Solubility check: ``kappa_hat''(0) != 0`` and ``sum alpha^j kappa_hat(alpha^j lam_n) != 0``."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    kfn = kappa_hat_fn or (lambda z: kappa_hat_array(K, z))
    k0, _, k2 = kappa_moments(K)
    scale0 = float(kappa_moments_abs(K))
    failing = []
    if not abs(k2) > 1e-10 * scale0:
        failing.append(0)
    mins = np.inf
    for n in list(range(-n_max, 0)) + list(range(1, n_max + 1)):
        mu = ROT * lambda_n(n, omega)
        kh = np.asarray(kfn(mu), dtype=complex)
        den = abs(np.sum(ROT * kh))
        mins = min(mins, den)
        if not den > 1e-10 * max(float(np.max(np.abs(kh))), 1e-300):
            failing.append(n)
    return PeriodicCriterionReport(complex(k2), float(mins), failing, not failing)


def kappa_moments_abs(K: FunctionSpec) -> float:
    kap = kappa_of(K)
    x, w = composite_rule(np.linspace(0, 1, 9), PANEL_NODES)
    return float(np.sum(w * np.abs(kap.evaluate(x))))


def solve_coefficients(data: ProblemData, n_max: int,
                       kappa_hat_fn: Callable | None = None) -> CoeffSet:
    """All coefficients; raises :class:`CriterionError` on criterion failure."""
    H = periodic_coefficients(data, n_max)
    rep = check_criterion(data.weight, H.omega, max(n_max, 1), kappa_hat_fn)
    if not rep.passed:
        raise CriterionError(f"periodic criterion fails at n in {rep.failing_n}",
                             rep.failing_n, rep)
    size = 2 * n_max + 1
    out = {k: np.zeros(size, dtype=complex) for k in ("Gamma2", "G0", "G1", "G2", "A1", "A2")}
    for i, n in enumerate(H.n):
        g2 = solve_gamma2(data, int(n), H, kappa_hat_fn)
        G = solve_G(data, int(n), H, g2)
        A = solve_A(data, int(n), H, g2, kappa_hat_fn)
        out["Gamma2"][i] = g2
        out["G0"][i], out["G1"][i], out["G2"][i] = G
        out["A1"][i], out["A2"][i] = A
    return CoeffSet(n_max, H.omega, H.H0, H.H1, H.H2, **out)


def removable_residuals(C: CoeffSet) -> np.ndarray:
    """``|numerator_n(lam_n)|`` relative to the coefficient sizes, per n."""
    out = np.zeros(len(C.n))
    for i, n in enumerate(C.n):
        lam = lambda_n(int(n), C.omega)
        num = _numerator(np.array([lam]), C, i)[0]
        size = 1 + max(abs(C.H0[i]), abs(C.H1[i]), abs(C.H2[i])) + abs(C.Gamma2[i]) + \
            abs(C.G0[i]) + abs(C.G1[i]) + abs(C.G2[i])
        out[i] = abs(num) / size
    return out


def _left_bracket(lam, C: CoeffSet, idx=slice(None)):
    return (C.G2[idx][..., None] + 1j * lam * C.G1[idx][..., None]
            - lam ** 2 * C.G0[idx][..., None])


def _right_bracket(lam, C: CoeffSet, idx=slice(None)):
    return np.exp(-1j * lam) * (C.Gamma2[idx][..., None] + 1j * lam * C.H1[idx][..., None]
                                - lam ** 2 * C.H0[idx][..., None])


def _numerator(lam, C: CoeffSet, i: int):
    sl = slice(i, i + 1)
    return (_left_bracket(lam, C, sl) - _right_bracket(lam, C, sl))[0]


def _zero_mode_series(lam: np.ndarray, C: CoeffSet) -> np.ndarray:
    """``numerator_0(lam)/(-i lam^3)`` from its Taylor series (valid for small lam)."""
    i0 = C.n_max
    g2, h1, h0 = C.Gamma2[i0], C.H1[i0], C.H0[i0]
    from math import factorial
    c = []
    for k in range(3, 3 + SERIES_TERMS):
        ck = ((-1j) ** k / factorial(k) * g2 + (-1j) ** (k - 1) / factorial(k - 1) * 1j * h1
              - (-1j) ** (k - 2) / factorial(k - 2) * h0)
        c.append(-ck)
    out = np.zeros(lam.shape, dtype=complex)
    for ck in reversed(c):
        out = out * lam + ck
    return 1j * out


def _summand_matrix(lam: np.ndarray, C: CoeffSet, part: str = "full") -> np.ndarray:
    """Rows ``n``: ``[bracket]/(i n omega - i lam^3)`` at the nodes ``lam``."""
    n = C.n[:, None]
    den = 1j * n * C.omega - 1j * lam[None, :] ** 3
    if part == "left":
        num = _left_bracket(lam, C)
    elif part == "right":
        # e^{-i lam} is carried by the spatial factor e^{i lam (x - 1)}
        num = -(C.Gamma2[:, None] + 1j * lam * C.H1[:, None] - lam ** 2 * C.H0[:, None])
    else:
        num = _left_bracket(lam, C) - _right_bracket(lam, C)
    with np.errstate(divide="ignore", invalid="ignore"):
        M = num / den
    if part == "full":
        small = np.abs(lam) < 1.0
        if np.any(small):
            M[C.n_max, small] = _zero_mode_series(lam[small], C)
    return M


# cubic through samples at -2, -1, 1, 2 integrated over [-1, 1]
_BRIDGE_W = np.linalg.solve(np.vander(np.array([-2.0, -1.0, 1.0, 2.0]), 4, increasing=True).T,
                            np.array([2.0, 0.0, 2.0 / 3.0, 0.0]))


@dataclass
class _Nodes:
    lam: np.ndarray
    w: np.ndarray
    part: str
    half: np.ndarray | None = None     # panel half-lengths (None for bridge nodes)
    wgl: np.ndarray | None = None
    shift: float = 0.0                 # spatial factor is e^{i lam (x + shift)}


def _real_nodes(C: CoeffSet, L: float, eps_rel: float):
    """Panels on [-L, L] with holes at each real root ``lam_n``, plus bridge nodes."""
    roots = sorted(lambda_n(int(n), C.omega) for n in C.n if n != 0
                   and abs(lambda_n(int(n), C.omega)) < L - 1)
    roots = np.array(roots)
    eps = []
    for k, r in enumerate(roots):
        gap = np.inf
        if k > 0:
            gap = min(gap, r - roots[k - 1])
        if k + 1 < len(roots):
            gap = min(gap, roots[k + 1] - r)
        eps.append(min(eps_rel * max(1.0, abs(r)), gap / 5))
    eps = np.array(eps)
    edges = [-L]
    for r, e in zip(roots, eps):
        edges.extend([r - e, r + e])
    edges.append(L)
    edges = np.array(edges)
    pieces = []
    lo_list, hi_list = edges[0::2], edges[1::2]
    for lo, hi in zip(lo_list, hi_list):
        brk = np.union1d([lo, hi], [b for b in (-1.0, 1.0) if lo < b < hi])
        fine = [brk[0]]
        for a, b in zip(brk[:-1], brk[1:]):
            k = max(1, int(np.ceil((b - a) / 0.5)))
            fine.extend(np.linspace(a, b, k + 1)[1:])
        pieces.append(np.array(fine))
    lam_l, w_l, half_l, wgl_l = [], [], [], []
    xg, wg = gauss_legendre(PANEL_NODES)
    for br in pieces:
        x, w = composite_rule(br, PANEL_NODES)
        lam_l.append(x)
        w_l.append(w)
        half_l.append(0.5 * np.diff(br))
        wgl_l.append(np.tile(wg, len(br) - 1))
    panels = _Nodes(np.concatenate(lam_l).astype(complex), np.concatenate(w_l).astype(complex),
                    "full", np.concatenate(half_l), np.concatenate(wgl_l))
    if len(roots):
        off = np.array([-2.0, -1.0, 1.0, 2.0])
        bl = (roots[:, None] + eps[:, None] * off[None, :]).ravel()
        bw = (eps[:, None] * _BRIDGE_W[None, :]).ravel()
        bridge = _Nodes(bl.astype(complex), bw.astype(complex), "full")
    else:
        bridge = _Nodes(np.zeros(0, complex), np.zeros(0, complex), "full")
    return panels, bridge, roots, eps


def _vertical_nodes(L: float, sign_real: float, down: bool, decay: float, vmax: float):
    """GL nodes on ``sign_real*L + i s`` (``-i s`` when ``down``), ``s`` in [0, S]."""
    S = 40.0 / max(decay, 1e-3)
    br = [0.0]
    while br[-1] < S:
        # rotated exponentials oscillate until they have decayed, about s = 2L + 100
        cap = 8.0 / max(vmax, 1e-3) if br[-1] < 2 * L + 100 else 4.0 / max(decay, 1e-3)
        h = min(max(1.0, (L + br[-1]) / 4.0), cap, S - br[-1])
        br.append(br[-1] + max(h, 1e-12))
    br = np.array(br)
    s, w = composite_rule(br, PANEL_NODES)
    direction = -1j if down else 1j
    lam = sign_real * L + direction * s
    # orientation: real tails run outward; rotated they become i*int or -i*int
    if sign_real > 0:
        weight = w * direction
    else:
        weight = -w * direction
    _, wg = gauss_legendre(PANEL_NODES)
    return _Nodes(lam, weight.astype(complex), "", 0.5 * np.diff(br), np.tile(wg, len(br) - 1),
                  -1.0 if down else 0.0)


def eval_periodic(data: ProblemData, n_max: int = 64, spec: QuadratureSpec | None = None,
                  points=(), kappa_hat_fn: Callable | None = None,
                  coeffs: CoeffSet | None = None) -> SolutionField:
    """``q(x, t) = (1/2 pi) int e^{i lam x} sum_n e^{i n omega t} Q_n(lam) d lam``."""
    spec = spec or QuadratureSpec()
    pts = [(float(x), float(t)) for x, t in points]
    for x, t in pts:
        if not 0.0 <= x <= 1.0:
            raise DataError(f"x={x} outside [0, 1]")
    C = coeffs if coeffs is not None else solve_coefficients(data, n_max, kappa_hat_fn)
    lam_max = lambda_n(C.n_max, C.omega) if C.n_max > 0 else 0.0
    L = spec.truncation_L if spec.truncation_L is not None else max(10.0, 2 * lam_max + 4)
    if L <= lam_max + 1:
        raise ValueError(f"truncation {L} must exceed the largest root {lam_max} by 1")
    panels, bridge, roots, eps = _real_nodes(C, L, spec.pv_epsilon)
    if not pts:
        return SolutionField([], np.zeros(0), np.zeros(0), {"n_max": C.n_max, "L": L})
    xs = np.array([p[0] for p in pts])
    ts = np.array([p[1] for p in pts])
    Mp = _summand_matrix(panels.lam, C)
    Mb = _summand_matrix(bridge.lam, C)
    xmin = max(float(xs.min()), 1e-3)
    xmax = max(float(1 - xs.max()), 1e-3)
    tails = []
    for sgn in (1.0, -1.0):
        tails.append((_vertical_nodes(L, sgn, False, xmin, 1.0), "left"))
        tails.append((_vertical_nodes(L, sgn, True, xmax, 1.0), "right"))
    tail_M = [(nd, _summand_matrix(nd.lam, C, part)) for nd, part in tails]
    vals = np.zeros(len(pts), dtype=complex)
    errs = np.zeros(len(pts))
    for blk in np.array_split(np.arange(len(pts)), max(1, len(pts) // 32)):
        x = xs[blk][:, None]
        e = np.exp(1j * np.outer(ts[blk], C.n * C.omega))      # (points, n)
        for nd, M in [(panels, Mp)] + tail_M:
            f = np.exp(1j * nd.lam[None, :] * (x + nd.shift)) * (e @ M)
            fw = f * nd.w[None, :]
            vals[blk] += fw.sum(axis=1)
            npan = len(nd.half)
            dens = (fw / (nd.wgl * np.repeat(nd.half, PANEL_NODES))[None, :])
            dens = dens.reshape(len(blk), npan, PANEL_NODES)
            errs[blk] += panel_tail_estimate(dens, nd.half).sum(axis=1)
            errs[blk] += 16 * EPS * np.abs(fw).sum(axis=1)
            if nd is not panels:
                errs[blk] += np.abs(f[:, -1]) / np.maximum(np.minimum(x[:, 0], 1 - x[:, 0]), 1e-3)
        if bridge.lam.size:
            fb = np.exp(1j * bridge.lam[None, :] * x) * (e @ Mb)
            vals[blk] += (fb * bridge.w[None, :]).sum(axis=1)
            # difference between the cubic and a linear bridge bounds the bridge error
            fb4 = fb.reshape(len(blk), -1, 4)
            lin = 0.5 * (fb4[:, :, 1] + fb4[:, :, 2]) * 2 * eps[None, :]
            cub = (fb4 * (eps[:, None] * _BRIDGE_W[None, :])[None]).sum(axis=2)
            errs[blk] += np.abs(cub - lin).sum(axis=1) * 1e-2
            errs[blk] += 16 * EPS * np.abs(fb * bridge.w[None, :]).sum(axis=1)
    vals /= 2 * np.pi
    errs /= 2 * np.pi
    tail_n = _series_tail(C)
    errs = errs + tail_n
    diag = {"n_max": C.n_max, "L": L, "series_tail": tail_n,
            "removable_max": float(np.max(removable_residuals(C))) if C.n_max >= 0 else 0.0}
    return SolutionField(pts, vals, errs, diag)


def _series_tail(C: CoeffSet) -> float:
    """Size of the outermost coefficients as a truncation indicator."""
    if C.n_max < 4:
        return 0.0
    q = max(1, C.n_max // 8)
    arrs = [C.H0, C.H1, C.H2, C.Gamma2, C.G0, C.G1, C.G2]
    edge = np.r_[np.arange(q), np.arange(len(C.n) - q, len(C.n))]
    return float(max(np.max(np.abs(a[edge])) for a in arrs))
