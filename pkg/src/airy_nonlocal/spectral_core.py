"""Problem data and the spectral functions of the nonlocal Airy problem.

Functions are described declaratively by :class:`FunctionSpec`.  Every kind
reduces to pieces of the form ``e^{i nu s} p(s - a)`` on ``[a, b]``, so
polynomial and exponential data get closed-form transforms, and sampled data
get splines whose pieces are integrated by Gauss-Legendre panels.

Notation used throughout: ``alpha = e^{2 pi i/3}``, ``kappa(y) = K(1-y)`` and
``Delta(lam) = sum_j alpha^j kappa_hat(alpha^j lam)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from numpy.polynomial import polynomial as nppoly
from scipy.interpolate import CubicSpline

from .contour_quadrature import (
    EPS,
    PANEL_NODES,
    SpectralEval,
    composite_rule,
    cumulative_matrices,
    gauss_legendre,
    subdivide,
)

SQRT3_2 = 0.86602540378443864676
ALPHA = complex(-0.5, SQRT3_2)
ALPHA2 = complex(-0.5, -SQRT3_2)
ROT = np.array([1.0 + 0j, ALPHA, ALPHA2])

CANCEL_FACTOR = 1e-13
SINGULAR_FACTOR = 1e-12
MAX_IMAG = 690.0


class DataError(ValueError):
    """Invalid or incompatible problem data."""


class SingularDeltaError(ArithmeticError):
    """Delta is numerically zero at a point where it must be inverted."""

    def __init__(self, lam):
        self.lam = complex(lam)
        super().__init__(f"Delta is numerically singular at lambda = {self.lam:.12g}")


# ----------------------------------------------------------------------------
# Function descriptions
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Piece:
    """``sum_terms e^{i nu s} p(s - a)`` on ``[a, b]``."""

    a: float
    b: float
    terms: tuple  # of (nu, ascending coefficient array)

    @property
    def degree(self) -> int:
        return max((len(c) - 1 for _, c in self.terms), default=0)


def _poly_values(coeffs: np.ndarray, u: np.ndarray, deriv: int = 0) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    for _ in range(deriv):
        c = nppoly.polyder(c) if len(c) > 1 else np.zeros(1, complex)
    return nppoly.polyval(u, c)


def _eval_piece(piece: Piece, s: np.ndarray, deriv: int = 0) -> np.ndarray:
    out = np.zeros(np.shape(s), dtype=complex)
    u = s - piece.a
    for nu, c in piece.terms:
        # d^k/ds^k [e^{i nu s} p(u)] = e^{i nu s} sum_j C(k,j) (i nu)^{k-j} p^{(j)}(u)
        acc = np.zeros(np.shape(s), dtype=complex)
        binom = 1.0
        for j in range(deriv + 1):
            if j > 0:
                binom = binom * (deriv - j + 1) / j
            acc = acc + binom * (1j * nu) ** (deriv - j) * _poly_values(c, u, j)
        out = out + np.exp(1j * nu * s) * acc
    return out


BUILTINS = {
    "zero": "identically zero",
    "constant": "value",
    "mode": "amp * e^{i freq s}",
    "cos": "amp * cos(freq s)",
    "sin": "amp * sin(freq s)",
    "compatible_bump": "amp * x^2 (1-x)^2 (1-2x); vanishes with slope at 1, zero mean",
    "compatible_cubic": "amp * (1-x)^2 (1-4x); vanishes with slope at 1, zero mean",
}


@dataclass(frozen=True, eq=False)
class FunctionSpec:
    """A scalar function on [0, 1] (space) or on a time interval.

    ``kind`` is one of ``polynomial`` (``params['coeffs']`` ascending),
    ``modes`` (``params['modes']`` as ``(freq, amp)`` pairs meaning
    ``sum amp e^{i freq s}``), ``samples`` (uniform samples over ``domain``
    with ``order`` 1 or 3), ``builtin`` (``params['name']`` plus its
    parameters), ``sum`` (``params['parts']``) and the internal ``pieces``.
    """

    kind: str
    params: Mapping = field(default_factory=dict)
    domain: tuple = (0.0, 1.0)
    periodic: bool = False

    # -- constructors --------------------------------------------------------
    @classmethod
    def polynomial(cls, coeffs: Sequence[complex], domain=(0.0, 1.0)):
        return cls("polynomial", {"coeffs": tuple(complex(c) for c in coeffs)}, tuple(domain))

    @classmethod
    def modes(cls, modes: Iterable, domain=(0.0, 1.0)):
        return cls("modes", {"modes": tuple((complex(f), complex(a)) for f, a in modes)},
                   tuple(domain))

    @classmethod
    def samples(cls, values: Sequence[complex], order: int = 3, domain=(0.0, 1.0),
                periodic: bool = False):
        vals = tuple(complex(v) for v in values)
        if len(vals) < 2:
            raise DataError("sampled function needs at least 2 samples")
        if order not in (1, 3):
            raise DataError("interpolation order must be 1 or 3")
        if order == 3 and len(vals) < 4 and not periodic:
            raise DataError("cubic interpolation needs at least 4 samples")
        lo, hi = float(domain[0]), float(domain[1])
        if not (np.isfinite(hi) and hi > lo):
            raise DataError("sampled function needs a finite domain")
        return cls("samples", {"values": vals, "order": int(order)}, (lo, hi), bool(periodic))

    @classmethod
    def builtin(cls, name: str, domain=(0.0, 1.0), **params):
        if name not in BUILTINS:
            raise DataError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}")
        return cls("builtin", {"name": name, **params}, tuple(domain))

    @classmethod
    def sum(cls, parts: Sequence["FunctionSpec"]):
        parts = tuple(parts)
        dom = parts[0].domain if parts else (0.0, 1.0)
        return cls("sum", {"parts": parts}, dom, any(p.periodic for p in parts))

    @classmethod
    def zero(cls, domain=(0.0, 1.0)):
        return cls.polynomial([0.0], domain)

    def __add__(self, other: "FunctionSpec") -> "FunctionSpec":
        return FunctionSpec.sum([self, other])

    def scaled(self, c: complex) -> "FunctionSpec":
        c = complex(c)
        if self.kind == "samples":
            vals = tuple(c * v for v in self.params["values"])
            return FunctionSpec("samples", {**self.params, "values": vals}, self.domain, self.periodic)
        return FunctionSpec("pieces", {"pieces": tuple(
            Piece(p.a, p.b, tuple((nu, c * np.asarray(co)) for nu, co in p.terms))
            for p in self._base_pieces())}, self.domain, self.periodic)

    # -- representation ------------------------------------------------------
    def _global_terms(self) -> list:
        """Terms ``(nu, coeffs)`` in the global variable for closed-form kinds."""
        k = self.kind
        p = self.params
        if k == "polynomial":
            return [(0j, np.asarray(p["coeffs"], dtype=complex))]
        if k == "modes":
            return [(complex(f), np.array([complex(a)])) for f, a in p["modes"]]
        if k == "builtin":
            name = p["name"]
            amp = complex(p.get("amp", 1.0))
            freq = complex(p.get("freq", 0.0))
            if name == "zero":
                return [(0j, np.zeros(1, complex))]
            if name == "constant":
                return [(0j, np.array([complex(p.get("value", 1.0))]))]
            if name == "mode":
                return [(freq, np.array([amp]))]
            if name == "cos":
                return [(freq, np.array([amp / 2])), (-freq, np.array([amp / 2]))]
            if name == "sin":
                return [(freq, np.array([amp / 2j])), (-freq, np.array([-amp / 2j]))]
            if name == "compatible_bump":
                return [(0j, amp * np.array([0, 0, 1, -4, 5, -2], dtype=complex))]
            if name == "compatible_cubic":
                return [(0j, amp * np.array([1, -6, 9, -4], dtype=complex))]
        if k == "sum":
            out = []
            for part in p["parts"]:
                if not part.closed_form or part.kind == "pieces":
                    raise TypeError("sum of non-global parts has no global terms")
                out.extend(part._global_terms())
            return out
        raise TypeError(f"kind {k!r} has no global closed form")

    @property
    def closed_form(self) -> bool:
        """True when transforms can use exact antiderivatives."""
        if self.kind == "samples":
            return False
        if self.kind == "sum":
            return all(p.closed_form for p in self.params["parts"])
        if self.kind == "pieces":
            return len(self.params["pieces"]) <= 4
        return True

    def _spline(self):
        vals = np.asarray(self.params["values"], dtype=complex)
        lo, hi = self.domain
        x = np.linspace(lo, hi, len(vals))
        if self.params["order"] == 1:
            c = np.zeros((2, len(vals) - 1), dtype=complex)
            c[0] = np.diff(vals) / np.diff(x)
            c[1] = vals[:-1]
            return x, c
        if self.periodic:
            vals = vals.copy()
            vals[-1] = vals[0]
            cs = CubicSpline(x, vals, bc_type="periodic")
        else:
            cs = CubicSpline(x, vals, bc_type="not-a-knot")
        return x, cs.c

    def _base_pieces(self) -> tuple:
        """Pieces covering the intrinsic domain (one period for periodic samples)."""
        cache = self.__dict__.get("_piece_cache")
        if cache is not None:
            return cache
        if self.kind == "samples":
            x, c = self._spline()
            deg = c.shape[0] - 1
            pieces = tuple(Piece(float(x[i]), float(x[i + 1]),
                                 ((0j, c[::-1, i].copy()),)) for i in range(len(x) - 1))
        elif self.kind == "pieces":
            pieces = tuple(self.params["pieces"])
        elif self.kind == "sum" and not self.closed_form:
            raise TypeError("sums with sampled parts are not supported")
        else:
            lo, hi = self.domain
            pieces = (Piece(0.0, np.inf, tuple(self._global_terms())),)
        object.__setattr__(self, "_piece_cache", pieces)
        return pieces

    def pieces(self, lo: float, hi: float) -> list:
        """Pieces intersected with ``[lo, hi]``, tiling periodic samples."""
        out = []
        base = self._base_pieces()
        if self.kind in ("samples",) or (self.kind == "pieces" and np.isfinite(base[-1].b)):
            d0, d1 = base[0].a, base[-1].b
            if self.periodic:
                T = d1 - d0
                k0 = int(np.floor((lo - d0) / T))
                k1 = int(np.ceil((hi - d0) / T))
                for k in range(k0, k1 + 1):
                    shift = k * T
                    for p in base:
                        a, b = p.a + shift, p.b + shift
                        if b <= lo or a >= hi:
                            continue
                        out.append(Piece(a, b, p.terms))
            else:
                if lo < d0 - 1e-12 or hi > d1 + 1e-12:
                    raise DataError(f"interval [{lo}, {hi}] outside the sampled domain [{d0}, {d1}]")
                for p in base:
                    if p.b <= lo or p.a >= hi:
                        continue
                    out.append(p)
            return out
        return list(base)

    def breaks(self, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        """Points in ``[lo, hi]`` where the description changes formula."""
        pts = {float(lo), float(hi)}
        if not self.closed_form or self.kind == "pieces":
            for p in self.pieces(lo, hi):
                for v in (p.a, p.b):
                    if lo < v < hi:
                        pts.add(float(v))
        if self.kind == "sum":
            for part in self.params["parts"]:
                pts.update(part.breaks(lo, hi).tolist())
        return np.array(sorted(pts))

    def evaluate(self, s, deriv: int = 0) -> np.ndarray:
        """Values (or ``deriv``-th derivatives) at the points ``s``."""
        s = np.asarray(s, dtype=float)
        if self.kind == "sum":
            return sum((p.evaluate(s, deriv) for p in self.params["parts"]),
                       np.zeros(s.shape, complex))
        if self.kind == "samples" and not self.periodic:
            lo, hi = self.domain
            if np.any(s < lo - 1e-12) or np.any(s > hi + 1e-12):
                raise DataError(f"evaluation outside the sampled domain [{lo}, {hi}]")
        base = self._base_pieces()
        if len(base) == 1 and not np.isfinite(base[0].b):
            return _eval_piece(base[0], s, deriv)
        d0, d1 = base[0].a, base[-1].b
        ss = s
        if self.periodic:
            ss = d0 + np.mod(s - d0, d1 - d0)
        edges = np.array([p.a for p in base] + [d1])
        idx = np.clip(np.searchsorted(edges, ss, side="right") - 1, 0, len(base) - 1)
        out = np.zeros(s.shape, dtype=complex)
        for i in np.unique(idx):
            m = idx == i
            out[m] = _eval_piece(base[i], ss[m], deriv)
        return out

    def __call__(self, s):
        return self.evaluate(s)

    @property
    def is_zero(self) -> bool:
        if self.kind == "samples":
            return not any(self.params["values"])
        if self.kind == "sum":
            return all(p.is_zero for p in self.params["parts"])
        try:
            return all(not np.any(c) for p in self._base_pieces() for _, c in p.terms)
        except TypeError:
            return False

    def max_frequency(self) -> float:
        """Largest ``|nu|`` among exponential factors (0 for polynomial data)."""
        if self.kind == "sum":
            return max(p.max_frequency() for p in self.params["parts"])
        return max((abs(nu) for p in self._base_pieces() for nu, c in p.terms if np.any(c)),
                   default=0.0)

    def reflected(self) -> "FunctionSpec":
        """The function ``s -> f(1 - s)`` on [0, 1]."""
        pieces = []
        for p in self.pieces(0.0, 1.0):
            a = max(p.a, 0.0)
            b = min(p.b, 1.0)
            terms = []
            for nu, c in p.terms:
                # e^{i nu (1-y)} p((1-y) - p.a) with local variable v = y - (1-b)
                # (1-y) - p.a = (1 - p.a - (1-b)) - v = (b - p.a) - v
                shift = b - p.a
                q = _compose_reverse(np.asarray(c, complex), shift)
                scale = np.exp(1j * nu * 1.0)
                # e^{-i nu y} written around the new piece start via the global variable
                terms.append((-nu, scale * q))
            pieces.append(Piece(1.0 - b, 1.0 - a, tuple(terms)))
        pieces = tuple(reversed(pieces))
        return FunctionSpec("pieces", {"pieces": pieces}, (0.0, 1.0))

    def times_identity(self) -> "FunctionSpec":
        """The function ``s -> s f(s)``."""
        pieces = []
        for p in self.pieces(0.0, 1.0):
            terms = []
            for nu, c in p.terms:
                c = np.asarray(c, complex)
                # s = (s - a) + a
                q = np.concatenate([[0], c]) + np.concatenate([p.a * c, [0]])
                terms.append((nu, q))
            pieces.append(Piece(p.a, min(p.b, 1.0), tuple(terms)))
        return FunctionSpec("pieces", {"pieces": tuple(pieces)}, (0.0, 1.0))

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        k = self.kind
        p = self.params
        if k == "polynomial":
            out = {"polynomial": [_num_out(c) for c in p["coeffs"]]}
        elif k == "modes":
            out = {"modes": [{"freq": _num_out(f), "amp_re": a.real, "amp_im": a.imag}
                             for f, a in p["modes"]]}
        elif k == "samples":
            vals = p["values"]
            if all(v.imag == 0 for v in vals):
                out = {"samples": [v.real for v in vals]}
            else:
                out = {"samples": [[v.real, v.imag] for v in vals]}
            out["order"] = p["order"]
            if self.periodic:
                out["periodic"] = True
        elif k == "builtin":
            out = {"builtin": p["name"]}
            for key, v in p.items():
                if key != "name":
                    out[key] = _num_out(v)
        elif k == "sum":
            out = {"sum": [q.to_dict() for q in p["parts"]]}
        else:
            raise TypeError("internal piece descriptions are not serializable")
        if k in ("samples",) or tuple(self.domain) != (0.0, 1.0):
            out["domain"] = [float(self.domain[0]), float(self.domain[1])]
        return out

    @classmethod
    def from_dict(cls, d: Mapping, default_domain=(0.0, 1.0)) -> "FunctionSpec":
        if not isinstance(d, Mapping):
            raise DataError(f"function description must be a mapping, got {type(d).__name__}")
        dom = tuple(float(v) for v in d.get("domain", default_domain))
        if "polynomial" in d:
            return cls.polynomial([_num_in(c) for c in d["polynomial"]], dom)
        if "modes" in d:
            modes = []
            for m in d["modes"]:
                modes.append((_num_in(m.get("freq", 0.0)),
                              complex(float(m.get("amp_re", 0.0)), float(m.get("amp_im", 0.0)))))
            return cls.modes(modes, dom)
        if "samples" in d:
            vals = [complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
                    for v in d["samples"]]
            return cls.samples(vals, int(d.get("order", 3)), dom, bool(d.get("periodic", False)))
        if "builtin" in d:
            params = {k: _num_in(v) for k, v in d.items() if k not in ("builtin", "domain")}
            return cls.builtin(d["builtin"], dom, **params)
        if "sum" in d:
            return cls.sum([cls.from_dict(q, default_domain) for q in d["sum"]])
        raise DataError("function description needs one of polynomial, modes, samples, builtin")

    def __eq__(self, other):
        if not isinstance(other, FunctionSpec):
            return NotImplemented
        try:
            return self.to_dict() == other.to_dict()
        except TypeError:
            return self is other

    __hash__ = object.__hash__


def _num_out(v):
    v = complex(v)
    return v.real if v.imag == 0 else [v.real, v.imag]


def _num_in(v):
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return v
    return complex(v) if isinstance(v, complex) else float(v)


def _compose_reverse(c: np.ndarray, shift: float) -> np.ndarray:
    """Coefficients of ``v -> p(shift - v)`` from those of ``p``."""
    out = np.zeros(len(c), dtype=complex)
    base = np.array([shift, -1.0], dtype=complex)
    power = np.array([1.0], dtype=complex)
    for k, ck in enumerate(c):
        out[: len(power)] += ck * power
        power = nppoly.polymul(power, base)
    return out


# ----------------------------------------------------------------------------
# Problem statement
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProblemData:
    """``U``, ``K`` and the data ``h0 = u(1,t)``, ``h1 = u_x(1,t)``, ``h2 = int K u``."""

    initial: FunctionSpec
    weight: FunctionSpec
    boundary0: FunctionSpec
    boundary1: FunctionSpec
    nonlocal_: FunctionSpec
    period: float | None = None
    compatibility_tol: float = 1e-8
    check: bool = True

    def __post_init__(self):
        if self.compatibility_tol < 0:
            raise DataError("compatibility_tol must be nonnegative")
        if self.period is not None and not self.period > 0:
            raise DataError("period must be positive")
        if not self.check:
            return
        k0 = complex(self.weight.evaluate(np.array([0.0]))[0])
        if not np.isfinite(k0) or abs(k0) == 0:
            raise DataError("weight K must be nonzero at 0")
        res = self.compatibility_residuals()
        bad = {k: v for k, v in res.items() if v > self.compatibility_tol}
        if bad:
            names = ", ".join(f"{k}={v:.3g}" for k, v in bad.items())
            raise DataError(f"data incompatible at t=0 ({names}) beyond tol {self.compatibility_tol}")
        if self.period is not None:
            T = self.period
            for name, h in self.time_data().items():
                d = abs(complex(h.evaluate(np.array([0.0]))[0]) - complex(h.evaluate(np.array([T * (1 - 1e-12)]))[0]))
                if d > max(self.compatibility_tol, 1e-9):
                    raise DataError(f"{name} is not {T}-periodic at the seam (jump {d:.3g})")

    @property
    def nonlocal_data(self) -> FunctionSpec:
        return self.nonlocal_

    def time_data(self) -> dict:
        return {"h0": self.boundary0, "h1": self.boundary1, "h2": self.nonlocal_}

    def compatibility_residuals(self) -> dict:
        U = self.initial
        one = np.array([1.0])
        zero = np.array([0.0])
        r0 = abs(complex(U.evaluate(one)[0]) - complex(self.boundary0.evaluate(zero)[0]))
        r1 = abs(complex(U.evaluate(one, 1)[0]) - complex(self.boundary1.evaluate(zero)[0]))
        r2 = abs(weighted_integral(self.weight, U) - complex(self.nonlocal_.evaluate(zero)[0]))
        return {"U(1)-h0(0)": r0, "U'(1)-h1(0)": r1, "int K U - h2(0)": r2}

    @property
    def has_time_data(self) -> bool:
        return not all(h.is_zero for h in self.time_data().values())

    def max_time_frequency(self) -> float:
        return max(h.max_frequency() for h in self.time_data().values())

    def replace(self, **kw) -> "ProblemData":
        d = dict(initial=self.initial, weight=self.weight, boundary0=self.boundary0,
                 boundary1=self.boundary1, nonlocal_=self.nonlocal_, period=self.period,
                 compatibility_tol=self.compatibility_tol, check=self.check)
        d.update(kw)
        return ProblemData(**d)

    def __eq__(self, other):
        if not isinstance(other, ProblemData):
            return NotImplemented
        names = ("initial", "weight", "boundary0", "boundary1", "nonlocal_", "period",
                 "compatibility_tol", "check")
        return all(getattr(self, n) == getattr(other, n) for n in names)

    __hash__ = object.__hash__


def weighted_integral(K: FunctionSpec, U: FunctionSpec) -> complex:
    """``int_0^1 K U`` by panel quadrature over the union of breakpoints."""
    br = np.union1d(K.breaks(0, 1), U.breaks(0, 1))
    br = subdivide(br, 8.0, 8)
    x, w = composite_rule(br, PANEL_NODES)
    return complex(np.sum(w * K.evaluate(x) * U.evaluate(x)))


# ----------------------------------------------------------------------------
# Exponential integrals of pieces
# ----------------------------------------------------------------------------

def _deriv_table(c: np.ndarray, u: float) -> np.ndarray:
    """``[p(u), p'(u), ...]`` for ascending coefficients ``c``."""
    out = []
    cc = np.asarray(c, dtype=complex)
    for _ in range(len(cc)):
        out.append(nppoly.polyval(u, cc))
        cc = nppoly.polyder(cc) if len(cc) > 1 else np.zeros(1, complex)
    return np.array(out, dtype=complex)


def _q_series(d: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """``sum_m (-1)^m d_m / (i beta)^{m+1}`` by Horner in ``1/(i beta)``."""
    inv = 1.0 / (1j * np.asarray(beta, dtype=complex))
    acc = np.zeros_like(inv)
    for m in range(len(d) - 1, -1, -1):
        acc = inv * (d[m] - acc)
    return acc


def _closed_threshold(deg: int) -> float:
    return max(1.0, 2.0 * deg)


def _piece_exp_integral(nu: complex, c: np.ndarray, a0: float, lo: float, hi: float,
                        k: np.ndarray, shift: float = 0.0) -> np.ndarray:
    """``int_lo^hi e^{i k (shift - s)} e^{i nu s} p(s - a0) ds`` for an array ``k``."""
    k = np.asarray(k, dtype=complex)
    out = np.zeros(k.shape, dtype=complex)
    L = hi - lo
    if L <= 0 or not np.any(c):
        return out
    deg = len(c) - 1
    beta = nu - k
    cf = np.abs(beta) * L >= _closed_threshold(deg)
    if np.any(cf):
        b = beta[cf]
        kk = k[cf]
        d_hi = _deriv_table(c, hi - a0)
        d_lo = _deriv_table(c, lo - a0)
        q_hi = _q_series(d_hi, b)
        q_lo = _q_series(d_lo, b)
        out[cf] = (np.exp(1j * kk * (shift - hi) + 1j * nu * hi) * q_hi
                   - np.exp(1j * kk * (shift - lo) + 1j * nu * lo) * q_lo)
    gl = ~cf
    if np.any(gl):
        b = beta[gl]
        kk = k[gl]
        npan = 1 + int(np.max(np.abs(b)) * L / 2.0) + deg // 12
        n = max(PANEL_NODES, deg + 4)
        x, w = composite_rule(np.linspace(lo, hi, npan + 1), n)
        px = nppoly.polyval(x - a0, np.asarray(c, complex))
        ph = np.exp(1j * kk[:, None] * (shift - x[None, :]) + 1j * nu * x[None, :])
        out[gl] = ph @ (w * px)
    return out


def _pieces_exp_integral(f: FunctionSpec, k: np.ndarray, lo: float, hi: float,
                         shift: float = 0.0) -> np.ndarray:
    """``int_lo^hi e^{i k (shift - s)} f(s) ds`` summed over closed-form pieces."""
    k = np.asarray(k, dtype=complex)
    out = np.zeros(k.shape, dtype=complex)
    for p in f.pieces(lo, hi):
        a = max(p.a, lo)
        b = min(p.b, hi)
        for nu, c in p.terms:
            out += _piece_exp_integral(nu, np.asarray(c, complex), p.a, a, b, k, shift)
    return out


def _max_degree(f: FunctionSpec) -> int:
    return max((p.degree for p in f.pieces(0.0, 1.0)), default=0)


def _panel_count(lam_abs: np.ndarray, length: float) -> np.ndarray:
    return np.maximum(8, 2 * np.ceil(lam_abs * length / (2 * np.pi))).astype(int)


def _gl_layout(f_breaks: np.ndarray, npan: int, lo: float, hi: float, n: int = PANEL_NODES):
    br = subdivide(f_breaks, npan / (hi - lo), npan)
    x, w = composite_rule(br, n)
    return br, x, w


def _gl_exp_integral(f: FunctionSpec, k: np.ndarray, lo: float, hi: float, shift: float = 0.0,
                     refine: int = 1) -> np.ndarray:
    """Composite-GL version of :func:`_pieces_exp_integral` for any kind."""
    k = np.asarray(k, dtype=complex)
    out = np.zeros(k.shape, dtype=complex)
    if hi <= lo:
        return out
    nu = f.max_frequency()
    counts = _panel_count(np.abs(k) + nu, hi - lo) * refine
    br0 = f.breaks(lo, hi)
    for npan in np.unique(counts):
        idx = np.flatnonzero(counts == npan)
        _, x, w = _gl_layout(br0, int(npan), lo, hi)
        wf = w * f.evaluate(x)
        for blk in _blocks(idx, x.size):
            out[blk] = np.exp(1j * k[blk][:, None] * (shift - x[None, :])) @ wf
    return out


def _blocks(idx: np.ndarray, width: int, budget: int = 2_000_000):
    """Split ``idx`` so each block times ``width`` stays under ``budget`` entries."""
    step = max(1, budget // max(width, 1))
    for i in range(0, idx.size, step):
        yield idx[i: i + step]


def exp_integral(f: FunctionSpec, k, lo: float, hi: float, shift: float = 0.0) -> np.ndarray:
    """``int_lo^hi e^{i k (shift - s)} f(s) ds``: closed form when available."""
    k = np.asarray(k, dtype=complex)
    if hi <= lo or f.is_zero:
        return np.zeros(k.shape, dtype=complex)
    if f.closed_form:
        return _pieces_exp_integral(f, k, lo, hi, shift)
    return _gl_exp_integral(f, k, lo, hi, shift)


# ----------------------------------------------------------------------------
# Spatial transforms
# ----------------------------------------------------------------------------

def fourier_array(f: FunctionSpec, lam, y: float = 0.0, z: float = 1.0) -> np.ndarray:
    """``int_y^z e^{-i lam x} f(x) dx`` for an array ``lam``."""
    lam = np.asarray(lam, dtype=complex)
    if not np.all(np.abs(lam.imag) * max(z - y, 0) < MAX_IMAG + 50):
        raise OverflowError("lambda too far from the real axis for double precision")
    return exp_integral(f, lam, y, z)


def kappa_of(K: FunctionSpec) -> FunctionSpec:
    """``kappa(y) = K(1 - y)``."""
    cache = K.__dict__.get("_kappa")
    if cache is None:
        cache = K.reflected() if K.closed_form else _ReflectedSpec(K)
        object.__setattr__(K, "_kappa", cache)
    return cache


class _ReflectedSpec(FunctionSpec):
    """Lazy reflection of a sampled weight (evaluated through the original)."""

    def __init__(self, K: FunctionSpec):
        object.__setattr__(self, "kind", "pieces")
        object.__setattr__(self, "params", {"pieces": ()})
        object.__setattr__(self, "domain", (0.0, 1.0))
        object.__setattr__(self, "periodic", False)
        object.__setattr__(self, "_src", K)

    @property
    def closed_form(self) -> bool:
        return False

    def evaluate(self, s, deriv: int = 0):
        s = np.asarray(s, dtype=float)
        return (-1) ** deriv * self._src.evaluate(1.0 - s, deriv)

    def breaks(self, lo=0.0, hi=1.0):
        b = 1.0 - self._src.breaks(1.0 - hi, 1.0 - lo)
        return np.sort(b)

    def max_frequency(self):
        return self._src.max_frequency()

    @property
    def is_zero(self):
        return self._src.is_zero

    def times_identity(self):
        return _ScaledByIdentity(self)


class _ScaledByIdentity(_ReflectedSpec):
    def __init__(self, f):
        super().__init__(f)

    def evaluate(self, s, deriv: int = 0):
        s = np.asarray(s, dtype=float)
        return s * self._src.evaluate(s)

    def breaks(self, lo=0.0, hi=1.0):
        return self._src.breaks(lo, hi)


def kappa_hat_array(K: FunctionSpec, lam) -> np.ndarray:
    """``kappa_hat(lam) = int_0^1 e^{-i lam y} K(1-y) dy``."""
    return fourier_array(kappa_of(K), lam, 0.0, 1.0)


def delta_array(K: FunctionSpec, lam, with_terms: bool = False):
    """``Delta(lam)``; optionally also the three rotated ``kappa_hat`` values."""
    lam = np.asarray(lam, dtype=complex)
    kh = kappa_hat_array(K, (ROT[:, None] * lam.ravel()[None, :]).ravel()).reshape(3, -1)
    d = (ROT[:, None] * kh).sum(axis=0).reshape(lam.shape)
    if with_terms:
        return d, kh.reshape((3,) + lam.shape)
    return d


def delta_prime_array(K: FunctionSpec, lam) -> np.ndarray:
    """``Delta'(lam) = -i sum_j alpha^{2j} int e^{-i alpha^j lam y} y kappa(y) dy``."""
    lam = np.asarray(lam, dtype=complex)
    ykappa = kappa_of(K).times_identity()
    vals = fourier_array(ykappa, (ROT[:, None] * lam.ravel()[None, :]).ravel(), 0.0, 1.0)
    vals = vals.reshape(3, -1)
    return (-1j * (ROT[:, None] ** 2 * vals).sum(axis=0)).reshape(lam.shape)


def _double_integrals(U: FunctionSpec, K: FunctionSpec, lam: np.ndarray, refine: int = 1,
                      want_m: bool = True, want_p: bool = True):
    """``M = iint_{y<z} K(y) U(z) e^{-i lam (z-y)}`` and
    ``P = iint_{z<y} K(y) U(z) e^{-i lam (1-y+z)}`` by cumulative GL panels."""
    lam = np.asarray(lam, dtype=complex).ravel()
    M = np.zeros(lam.shape, dtype=complex)
    P = np.zeros(lam.shape, dtype=complex)
    if U.is_zero or K.is_zero or lam.size == 0:
        return M, P
    if np.any(np.abs(lam.imag) > MAX_IMAG):
        raise OverflowError("lambda too far from the real axis for double precision")
    br0 = np.union1d(U.breaks(0, 1), K.breaks(0, 1))
    nu = U.max_frequency() + K.max_frequency()
    degree = max(_max_degree(U), _max_degree(K))
    counts = _panel_count(np.abs(lam) + nu, 1.0) * refine
    for npan in np.unique(counts):
        idx = np.flatnonzero(counts == npan)
        br = subdivide(br0, float(npan), int(npan))
        # narrow pieces of low degree (fine splines) need fewer nodes per panel
        phase = np.max(np.diff(br)) * (float(np.max(np.abs(lam[idx]))) + nu)
        n = 8 if (phase <= 1.0 and degree <= 4) else PANEL_NODES
        Lm, Rm = cumulative_matrices(n)
        _, w16 = gauss_legendre(n)
        x, w = composite_rule(br, n)
        half = 0.5 * np.diff(br)
        npanel = len(half)
        Ux = U.evaluate(x)
        Kx = K.evaluate(x)
        for sel in _blocks(idx, 4 * x.size):
            lm = lam[sel][:, None]
            E = np.exp(-1j * lm * x[None, :])
            Einv = 1.0 / E
            f = (E * Ux[None, :]).reshape(-1, npanel, n)
            tot = (f @ w16) * half[None, :]
            if want_m:
                within = (f @ Rm.T) * half[None, :, None]
                suffix = np.cumsum(tot[:, ::-1], axis=1)[:, ::-1] - tot
                G = (within + suffix[:, :, None]).reshape(-1, npanel * n)
                M[sel] = (Einv * G) @ (w * Kx)
            if want_p:
                within = (f @ Lm.T) * half[None, :, None]
                prefix = np.cumsum(tot, axis=1) - tot
                G = (within + prefix[:, :, None]).reshape(-1, npanel * n)
                P[sel] = np.exp(-1j * lam[sel]) * ((Einv * G) @ (w * Kx))
    return M, P


def m_array(U: FunctionSpec, K: FunctionSpec, lam, refine: int = 1) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex)
    M, _ = _double_integrals(U, K, lam, refine, want_p=False)
    return M.reshape(lam.shape)


def p_array(U: FunctionSpec, K: FunctionSpec, lam, refine: int = 1) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex)
    _, P = _double_integrals(U, K, lam, refine, want_m=False)
    return P.reshape(lam.shape)


# ----------------------------------------------------------------------------
# Time transforms
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TimeKnots:
    """Endpoint data of ``int_0^{t'} e^{-i k s} h(s) ds = sum_j e^{-i k s_j} J_j(k)``.

    ``jumps[j]`` maps each frequency ``nu`` at knot ``s_j`` to the jump
    vector ``[D p, D p', ...]`` (left limit minus right limit).
    """

    s: np.ndarray
    jumps: tuple
    min_gap: float
    degree: int
    freqs: tuple

    def J(self, j: int, k) -> np.ndarray:
        k = np.asarray(k, dtype=complex)
        out = np.zeros(k.shape, dtype=complex)
        sj = self.s[j]
        for nu, d in self.jumps[j].items():
            out += np.exp(1j * nu * sj) * _q_series(d, nu - k)
        return out


def time_knots(h: FunctionSpec, t_prime: float) -> TimeKnots:
    """Collect knot jumps of ``h`` on ``[0, t']``."""
    if t_prime < 0:
        raise DataError("t' must be nonnegative")
    pieces = h.pieces(0.0, t_prime) if t_prime > 0 else []
    pieces = [p for p in pieces if min(p.b, t_prime) > max(p.a, 0.0)]
    knots: dict = {}

    def add(s, nu, d):
        slot = knots.setdefault(float(s), {})
        key = complex(nu)
        if key in slot:
            n = max(len(slot[key]), len(d))
            a = np.zeros(n, complex)
            a[: len(slot[key])] += slot[key]
            a[: len(d)] += d
            slot[key] = a
        else:
            slot[key] = np.asarray(d, complex).copy()

    deg = 0
    freqs = set()
    gaps = []
    for p in pieces:
        a = max(p.a, 0.0)
        b = min(p.b, t_prime)
        gaps.append(b - a)
        for nu, c in p.terms:
            c = np.asarray(c, complex)
            if not np.any(c):
                continue
            deg = max(deg, len(c) - 1)
            freqs.add(complex(nu))
            add(b, nu, _deriv_table(c, b - p.a))
            add(a, nu, -_deriv_table(c, a - p.a))
    s = np.array(sorted(knots))
    jumps = tuple(knots[v] for v in s)
    return TimeKnots(s, jumps, min(gaps) if gaps else np.inf, deg, tuple(sorted(freqs, key=abs)))


def time_transform_array(h: FunctionSpec, lam, t_prime: float, t: float = 0.0) -> np.ndarray:
    """``e^{i lam^3 t} int_0^{t'} e^{-i lam^3 s} h(s) ds`` for an array ``lam``."""
    lam = np.asarray(lam, dtype=complex)
    k = lam ** 3
    if t_prime <= 0 or h.is_zero:
        return np.zeros(lam.shape, dtype=complex)
    return exp_integral(h, k, 0.0, t_prime, shift=t)


def time_classes(h: FunctionSpec, lam, t: float, t_prime: float):
    """Split ``e^{i lam^3 t} h_tilde(lam; t')`` by knot position.

    Returns ``(start, end)`` where ``start`` collects knots ``s_j < t`` (each
    carrying ``e^{i lam^3 (t - s_j)}`` with positive ``t - s_j``) and ``end``
    the knots ``s_j >= t``.
    """
    lam = np.asarray(lam, dtype=complex)
    start = np.zeros(lam.shape, dtype=complex)
    end = np.zeros(lam.shape, dtype=complex)
    if t_prime <= 0 or h.is_zero:
        return start, end
    kn = time_knots(h, t_prime)
    k = lam ** 3
    for j, sj in enumerate(kn.s):
        term = np.exp(1j * k * (t - sj)) * kn.J(j, k)
        if sj < t:
            start += term
        else:
            end += term
    return start, end


# ----------------------------------------------------------------------------
# Assembled spectral functions
# ----------------------------------------------------------------------------

def _check_delta(d: np.ndarray, kh: np.ndarray, lam: np.ndarray):
    scale = np.max(np.abs(kh), axis=0)
    bad = np.abs(d) < SINGULAR_FACTOR * scale
    if np.any(bad):
        raise SingularDeltaError(lam.ravel()[np.argmax(bad.ravel())])


def n1_array(data: ProblemData, lam, t_prime: float) -> np.ndarray:
    """``N_1(lam; t')``."""
    lam = np.asarray(lam, dtype=complex)
    kh = kappa_hat_array(data.weight, lam)
    h0 = time_transform_array(data.boundary0, lam, t_prime)
    h1 = time_transform_array(data.boundary1, lam, t_prime)
    h2 = time_transform_array(data.nonlocal_, lam, t_prime)
    M = m_array(data.initial, data.weight, lam)
    return lam ** 2 * kh * h0 - 1j * lam * kh * h1 - lam ** 2 * h2 + M


def n_combined_array(data: ProblemData, lam, t_prime: float) -> np.ndarray:
    """``n(lam) = Delta^{-1} sum_j alpha^j N_1(alpha^j lam)``."""
    lam = np.asarray(lam, dtype=complex)
    rot = (ROT[:, None] * lam.ravel()[None, :])
    d, kh = delta_array(data.weight, lam.ravel(), with_terms=True)
    _check_delta(d, kh, lam)
    n1 = n1_array(data, rot.ravel(), t_prime).reshape(3, -1)
    return ((ROT[:, None] * n1).sum(axis=0) / d).reshape(lam.shape)


@dataclass(frozen=True, eq=False)
class SpectralBundle:
    """Data-independent spectral values at a set of nodes."""

    lam: np.ndarray
    kh: np.ndarray          # (3, m)  kappa_hat(alpha^j lam)
    M: np.ndarray | None    # (3, m)  M(alpha^j lam)
    P: np.ndarray | None    # (m,)
    Uhat: np.ndarray | None  # (m,)


def spectral_bundle(data: ProblemData, lam, need_u: bool = True, left: bool = True,
                    refine: int = 1) -> SpectralBundle:
    lam = np.asarray(lam, dtype=complex).ravel()
    rot = (ROT[:, None] * lam[None, :]).ravel()
    kh = kappa_hat_array(data.weight, rot).reshape(3, -1)
    M = P = Uh = None
    if need_u and not data.initial.is_zero:
        if left:
            Mr, _ = _double_integrals(data.initial, data.weight, rot[lam.size:], refine, want_p=False)
            _, P = _double_integrals(data.initial, data.weight, lam, refine, want_m=False)
            M = np.vstack([np.zeros(lam.size, complex), Mr.reshape(2, -1)])
            Uh = fourier_array(data.initial, lam)
        else:
            Mr, _ = _double_integrals(data.initial, data.weight, rot, refine, want_p=False)
            M = Mr.reshape(3, -1)
    return SpectralBundle(lam, kh, M, P, Uh)


def combination_coefficients(b: SpectralBundle, side: str):
    """Coefficients ``(c0, c1, c2, cU, scale)`` of the stable assemblies.

    ``side='left'``: ``N0 = c0 h0~ + c1 h1~ + c2 h2~ + cU``.
    ``side='right'``: ``n + i lam h1~ - lam^2 h0~`` in the same form.
    ``scale`` is the largest intermediate magnitude, for the cancellation test.
    """
    lam = b.lam
    kh = b.kh
    S1 = kh[0] + ALPHA * kh[1] + ALPHA2 * kh[2]
    _check_delta(S1, kh, lam)
    A0 = (1 - ALPHA) * kh[1] + (1 - ALPHA2) * kh[2]
    A2 = (ALPHA2 - ALPHA) * kh[1] + (ALPHA - ALPHA2) * kh[2]
    if side == "right":
        c0 = lam ** 2 * A0 / S1
        c1 = -1j * lam * A2 / S1
        c2 = -3 * lam ** 2 / S1
        if b.M is not None:
            num = b.M[0] + ALPHA * b.M[1] + ALPHA2 * b.M[2]
            cU = num / S1
            scale = np.max(np.abs(np.vstack([b.M[0], ALPHA * b.M[1], ALPHA2 * b.M[2]])), axis=0) / np.abs(S1)
        else:
            cU = np.zeros_like(lam)
            scale = np.zeros(lam.shape)
        return c0, c1, c2, cU, scale
    if side != "left":
        raise ValueError("side must be 'left' or 'right'")
    E = np.exp(-1j * lam)
    c0 = E * lam ** 2 * A0 / S1
    c1 = -1j * lam * E * A2 / S1
    c2 = -3 * lam ** 2 * E / S1
    if b.M is not None:
        t1 = E * (ALPHA * b.M[1] + ALPHA2 * b.M[2])
        t2 = -b.P
        t3 = -b.Uhat * (ALPHA * kh[1] + ALPHA2 * kh[2])
        cU = (t1 + t2 + t3) / S1
        scale = np.max(np.abs(np.vstack([t1, t2, t3])), axis=0) / np.abs(S1)
    else:
        cU = np.zeros_like(lam)
        scale = np.zeros(lam.shape)
    return c0, c1, c2, cU, scale


def n0_array(data: ProblemData, lam, t_prime: float, return_flags: bool = False):
    """``N_0(lam; t') = e^{-i lam}[n + i lam h1~ - lam^2 h0~] - U_hat``.

    The exponentially large parts of ``e^{-i lam} n`` and ``U_hat`` in the
    upper half plane are cancelled analytically (the rotation ``j=0`` terms
    of the bracket combine with ``U_hat kappa_hat`` into the double integral
    over ``z < y``), so the value keeps full relative accuracy.
    """
    lam = np.asarray(lam, dtype=complex)
    b = spectral_bundle(data, lam.ravel(), need_u=True, left=True)
    c0, c1, c2, cU, scale = combination_coefficients(b, "left")
    hs = [time_transform_array(h, lam.ravel(), t_prime) for h in
          (data.boundary0, data.boundary1, data.nonlocal_)]
    terms = np.vstack([c0 * hs[0], c1 * hs[1], c2 * hs[2], cU])
    val = terms.sum(axis=0)
    big = np.maximum(np.max(np.abs(terms), axis=0), scale)
    flags = np.abs(val) < CANCEL_FACTOR * big
    if return_flags:
        return val.reshape(lam.shape), flags.reshape(lam.shape), big.reshape(lam.shape)
    return val.reshape(lam.shape)


def right_combination_array(data: ProblemData, lam, t_prime: float) -> np.ndarray:
    """``n(lam) + i lam h1~ - lam^2 h0~`` in the stable assembled form."""
    lam = np.asarray(lam, dtype=complex)
    b = spectral_bundle(data, lam.ravel(), need_u=True, left=False)
    c0, c1, c2, cU, _ = combination_coefficients(b, "right")
    hs = [time_transform_array(h, lam.ravel(), t_prime) for h in
          (data.boundary0, data.boundary1, data.nonlocal_)]
    return (c0 * hs[0] + c1 * hs[1] + c2 * hs[2] + cU).reshape(lam.shape)


# ----------------------------------------------------------------------------
# Scalar operations with error estimates
# ----------------------------------------------------------------------------

def _scalar_eval(lam, fine, coarse, scale=None) -> SpectralEval:
    v = complex(fine)
    err = abs(v - complex(coarse))
    sc = abs(v) if scale is None else float(scale)
    err += 64 * EPS * max(sc, abs(v))
    flag = scale is not None and abs(v) < CANCEL_FACTOR * sc
    return SpectralEval(v, float(err), bool(flag), complex(lam))


def _check_space(f: FunctionSpec, name="f"):
    if tuple(f.domain) != (0.0, 1.0) and f.kind == "samples":
        raise DataError(f"{name} must be defined on [0, 1]")


def fourier_restricted(f: FunctionSpec, lam: complex, y: float, z: float) -> SpectralEval:
    """``int_y^z e^{-i lam x} f(x) dx``; exactly 0 on empty intervals."""
    if not (0 <= y <= z <= 1):
        raise DataError("need 0 <= y <= z <= 1")
    _check_space(f)
    if y == z or f.is_zero:
        return SpectralEval(0j, 0.0, False, complex(lam))
    lam_a = np.array([complex(lam)])
    fine = fourier_array(f, lam_a, y, z)[0]
    if f.closed_form:
        coarse = fine
        scale = np.max(np.abs(f.evaluate(np.linspace(y, z, 9)))) * (z - y) * np.exp(abs(lam_a.imag[0]))
        return _scalar_eval(lam, fine, coarse, None if scale == 0 else None)
    coarse = _gl_exp_integral(f, lam_a, y, z, refine=2)[0]
    return _scalar_eval(lam, coarse, fine)


def kappa_hat(K: FunctionSpec, lam: complex) -> SpectralEval:
    """``int_0^1 e^{-i lam y} K(1-y) dy``."""
    return fourier_restricted(kappa_of(K), lam, 0.0, 1.0) if kappa_of(K).closed_form else \
        _scalar_eval(lam, _gl_exp_integral(kappa_of(K), np.array([complex(lam)]), 0, 1, refine=2)[0],
                     kappa_hat_array(K, np.array([complex(lam)]))[0])


def time_transform(h: FunctionSpec, lam: complex, t_prime: float) -> SpectralEval:
    """``int_0^{t'} e^{-i lam^3 s} h(s) ds``."""
    if t_prime < 0:
        raise DataError("t' must be nonnegative")
    lam_a = np.array([complex(lam)])
    v = time_transform_array(h, lam_a, t_prime)[0]
    if h.closed_form or t_prime == 0:
        return _scalar_eval(lam, v, v)
    c = _gl_exp_integral(h, lam_a ** 3, 0.0, t_prime, refine=2)[0]
    return _scalar_eval(lam, c, v)


def delta(K: FunctionSpec, lam: complex) -> SpectralEval:
    """``Delta(lam)`` with a cancellation flag relative to its three terms."""
    lam_a = np.array([complex(lam)])
    d, kh = delta_array(K, lam_a, with_terms=True)
    scale = float(np.max(np.abs(kh)))
    v = complex(d[0])
    err = 64 * EPS * scale
    if not kappa_of(K).closed_form:
        rot = ROT * lam_a[0]
        kh2 = _gl_exp_integral(kappa_of(K), rot, 0, 1, refine=2)
        err += abs(complex(np.sum(ROT * kh2)) - v)
    return SpectralEval(v, float(err), abs(v) < CANCEL_FACTOR * scale, complex(lam))


def delta_prime(K: FunctionSpec, lam: complex) -> SpectralEval:
    """Analytic derivative of ``Delta`` through first moments of ``kappa``."""
    lam_a = np.array([complex(lam)])
    v = complex(delta_prime_array(K, lam_a)[0])
    return SpectralEval(v, float(64 * EPS * (abs(v) + np.exp(abs(lam_a[0]) ))), False, complex(lam))


def n1(data: ProblemData, lam: complex, t_prime: float) -> SpectralEval:
    """``N_1(lam; t')`` with an error estimate from a refined inner rule."""
    if t_prime < 0:
        raise DataError("t' must be nonnegative")
    lam_a = np.array([complex(lam)])
    v = n1_array(data, lam_a, t_prime)[0]
    M2 = m_array(data.initial, data.weight, lam_a, refine=2)[0]
    M1 = m_array(data.initial, data.weight, lam_a)[0]
    return _scalar_eval(lam, v, v - M1 + M2)


def n_combined(data: ProblemData, lam: complex, t_prime: float) -> SpectralEval:
    """``n(lam)``; raises :class:`SingularDeltaError` where ``Delta`` vanishes."""
    lam_a = np.array([complex(lam)])
    v = n_combined_array(data, lam_a, t_prime)[0]
    return _scalar_eval(lam, v, v)


def n0(data: ProblemData, lam: complex, t_prime: float) -> SpectralEval:
    """``N_0(lam; t')`` with a cancellation flag over all assembled terms."""
    lam_a = np.array([complex(lam)])
    v, flags, big = n0_array(data, lam_a, t_prime, return_flags=True)
    err = 64 * EPS * float(big[0])
    return SpectralEval(complex(v[0]), err, bool(flags[0]), complex(lam))


def uhat_array(U: FunctionSpec, lam) -> np.ndarray:
    return fourier_array(U, lam, 0.0, 1.0)
