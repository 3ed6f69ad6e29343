"""Finite atomic signed measures and quasi-Levy measures.

An :class:`AtomicSignedMeasure` is a finite signed measure on R^d with
finitely many atoms.  A :class:`QuasiLevyMeasure` adds an optional isotropic
alpha-stable density ``C |x|^{-(d+alpha)} dx`` and never charges the origin.
"""
from dataclasses import dataclass
from functools import lru_cache
import itertools
import math

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from .errors import QuadratureFailure

GRID_RESOLUTION = 1e-12
PRUNE_TOL = 1e-15

_INT64_SAFE = 2.0 ** 62


def _canonicalize(points, weights, resolution, prune_tol):
    """Merge atoms whose coordinates agree on the snapping grid.

    Returns points sorted lexicographically by their snapped key; the
    representative point of a class is its first occurrence.
    """
    if len(weights) == 0:
        return points.reshape(0, points.shape[1]), weights.reshape(0)
    scaled = np.round(points / resolution)
    if np.all(np.abs(scaled) < _INT64_SAFE):
        keys = scaled.astype(np.int64)
        _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.reshape(-1)
        merged = np.zeros(len(first))
        np.add.at(merged, inverse, weights)
        reps = points[first]
    else:
        acc = {}
        for i, row in enumerate(scaled):
            key = tuple(int(v) for v in row)
            if key in acc:
                acc[key][1] += weights[i]
            else:
                acc[key] = [i, float(weights[i])]
        order = sorted(acc)
        reps = points[[acc[k][0] for k in order]]
        merged = np.array([acc[k][1] for k in order])
    keep = np.abs(merged) >= prune_tol
    return reps[keep], merged[keep]


class AtomicSignedMeasure:
    """Finite signed measure ``sum_i w_i delta_{x_i}`` on R^d.

    Atoms closer than ``resolution`` (per coordinate, after rounding) are
    merged and atoms with ``|w| < prune_tol`` are dropped.  Instances are
    immutable.
    """

    __slots__ = ("_points", "_weights", "dim", "resolution", "prune_tol")

    def __init__(self, points, weights, dim=None, resolution=GRID_RESOLUTION, prune_tol=PRUNE_TOL):
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if dim is None:
            points = np.atleast_2d(np.asarray(points, dtype=float))
            if points.size == 0:
                raise ValueError("dim is required for an empty measure")
            dim = points.shape[1]
        points = np.asarray(points, dtype=float).reshape(len(weights), dim)
        if not np.all(np.isfinite(points)) or not np.all(np.isfinite(weights)):
            raise ValueError("atoms and weights must be finite")
        pts, w = _canonicalize(points, weights, resolution, prune_tol)
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "_points", pts)
        object.__setattr__(self, "_weights", w)
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "resolution", resolution)
        object.__setattr__(self, "prune_tol", prune_tol)

    def __setattr__(self, name, value):
        raise AttributeError("AtomicSignedMeasure is immutable")

    @classmethod
    def empty(cls, dim):
        return cls(np.zeros((0, dim)), np.zeros(0), dim=dim)

    @classmethod
    def from_dict(cls, atoms, dim=None):
        """Build from a mapping ``point -> weight``; scalar points are 1-d."""
        pts, ws = [], []
        for x, w in atoms.items():
            pts.append(np.atleast_1d(np.asarray(x, dtype=float)))
            ws.append(w)
        if dim is None:
            if not pts:
                raise ValueError("dim is required for an empty measure")
            dim = len(pts[0])
        return cls(np.array(pts).reshape(len(ws), dim), ws, dim=dim)

    @classmethod
    def dirac(cls, x, weight=1.0):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cls(x[None, :], [weight], dim=len(x))

    @property
    def points(self):
        return self._points

    @property
    def weights(self):
        return self._weights

    def __len__(self):
        return len(self._weights)

    def __iter__(self):
        return iter(zip(map(tuple, self._points), self._weights))

    def __repr__(self):
        body = ", ".join(f"{tuple(p)}: {w:.6g}" for p, w in itertools.islice(self, 6))
        more = ", ..." if len(self) > 6 else ""
        return f"AtomicSignedMeasure(dim={self.dim}, {{{body}{more}}})"

    def as_dict(self):
        return {tuple(float(c) for c in p): float(w) for p, w in self}

    def weight_at(self, x):
        """Weight of the atom at ``x`` (0 when there is none)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if len(self) == 0:
            return 0.0
        hit = np.all(np.abs(self._points - x) <= self.resolution, axis=1)
        return float(self._weights[hit].sum())

    def norms(self):
        return np.linalg.norm(self._points, axis=1)

    def total_mass(self):
        return math.fsum(self._weights)

    def total_variation(self):
        return math.fsum(np.abs(self._weights))

    def integrate(self, f):
        """``sum_i w_i f(x_i)`` for ``f`` vectorized over rows of points."""
        if len(self) == 0:
            return 0.0
        vals = np.asarray(f(self._points))
        return np.tensordot(self._weights, vals, axes=(0, 0))

    def restrict(self, mask):
        return AtomicSignedMeasure(self._points[mask], self._weights[mask], dim=self.dim,
                                   resolution=self.resolution, prune_tol=self.prune_tol)

    def restrict_ball(self, r, closed=True):
        """Restriction to ``{|x| <= r}`` (``< r`` when not closed)."""
        n = self.norms()
        return self.restrict(n <= r if closed else n < r)

    def restrict_outside(self, r):
        """Restriction to ``{|x| > r}``."""
        return self.restrict(self.norms() > r)

    def without_origin(self):
        return self.restrict(np.any(np.abs(self._points) > self.resolution, axis=1))

    def origin_mass(self):
        return self.weight_at(np.zeros(self.dim))

    def scale(self, c):
        return AtomicSignedMeasure(self._points, c * self._weights, dim=self.dim,
                                   resolution=self.resolution, prune_tol=self.prune_tol)

    def shift(self, a):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        return AtomicSignedMeasure(self._points + a, self._weights, dim=self.dim,
                                   resolution=self.resolution, prune_tol=self.prune_tol)

    def __add__(self, other):
        if not isinstance(other, AtomicSignedMeasure):
            return NotImplemented
        _check_dims(self, other)
        return AtomicSignedMeasure(np.vstack([self._points, other._points]),
                                   np.concatenate([self._weights, other._weights]),
                                   dim=self.dim, resolution=self.resolution, prune_tol=self.prune_tol)

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return self.scale(float(c))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, AtomicSignedMeasure):
            return NotImplemented
        return (self.dim == other.dim and self._points.shape == other._points.shape
                and np.array_equal(self._points, other._points)
                and np.array_equal(self._weights, other._weights))

    __hash__ = None

    def allclose(self, other, atol=1e-12):
        """Atomwise comparison: every atom of either side matches to ``atol``."""
        diff = self - other
        return len(diff) == 0 or float(np.max(np.abs(diff.weights))) <= atol

    def to_rows(self):
        return [[float(c) for c in p] + [float(w)] for p, w in self]


def _check_dims(m1, m2):
    if m1.dim != m2.dim:
        raise ValueError(f"dimension mismatch: {m1.dim} != {m2.dim}")


def jordan(m):
    """Split ``m`` into mutually singular non-negative parts ``(plus, minus)``."""
    pos = m.weights > 0
    return m.restrict(pos), m.restrict(~pos).scale(-1.0)


def convolve_atomic(m1, m2):
    """Convolution ``m1 * m2`` of two atomic measures."""
    _check_dims(m1, m2)
    if len(m1) == 0 or len(m2) == 0:
        return AtomicSignedMeasure.empty(m1.dim)
    pts = (m1.points[:, None, :] + m2.points[None, :, :]).reshape(-1, m1.dim)
    w = np.outer(m1.weights, m2.weights).reshape(-1)
    return AtomicSignedMeasure(pts, w, dim=m1.dim, resolution=m1.resolution, prune_tol=m1.prune_tol)


def convolution_power(m, k):
    """``m^{*k}``; ``m^{*0}`` is the unit mass at the origin."""
    out = AtomicSignedMeasure.dirac(np.zeros(m.dim))
    for _ in range(k):
        out = convolve_atomic(out, m)
    return out


def pushforward(m, M, drop_origin=True):
    """Image of ``m`` under ``x -> M x``; mass landing on 0 is dropped if asked."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[1] != m.dim:
        raise ValueError(f"matrix has {M.shape[1]} columns, measure has dim {m.dim}")
    n = M.shape[0]
    out = AtomicSignedMeasure(m.points @ M.T, m.weights, dim=n,
                              resolution=m.resolution, prune_tol=m.prune_tol)
    return out.without_origin() if drop_origin else out


def sphere_area(d):
    """Surface area of the unit sphere S^{d-1} in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / gamma_fn(d / 2.0)


def abs_projection_moment(d, alpha):
    """``int_{S^{d-1}} |theta_1|^alpha dsigma(theta)``."""
    return 2.0 * math.pi ** ((d - 1) / 2.0) * gamma_fn((alpha + 1) / 2.0) / gamma_fn((d + alpha) / 2.0)


@lru_cache(maxsize=None)
def _one_minus_cos_integral(alpha, rtol=1e-10):
    # int_0^inf (1 - cos u) u^{-1-alpha} du, split at u = 1
    # head = int_0^1 g(u) u^{1-alpha} du with smooth g; the algebraic weight takes the singularity
    def g(u):
        return 0.5 if u == 0.0 else 2.0 * math.sin(0.5 * u) ** 2 / (u * u)

    head, err1 = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(1.0 - alpha, 0.0),
                                epsabs=0.0, epsrel=rtol, limit=200)
    osc, err2 = integrate.quad(lambda u: u ** (-1.0 - alpha), 1.0, np.inf, weight="cos", wvar=1.0)
    value = head + 1.0 / alpha - osc
    if err1 + err2 > 100 * rtol * abs(value):
        raise QuadratureFailure(f"radial integral for alpha={alpha} did not reach rtol={rtol}")
    return value


def one_minus_cos_integral(alpha):
    """Adaptive quadrature of ``int_0^inf (1 - cos u) u^{-1-alpha} du``."""
    return _one_minus_cos_integral(float(alpha))


def angular_second_moment(d):
    """``int_{S^{d-1}} theta theta^T dsigma`` by quadrature in hyperspherical angles.

    Independent of the isotropy argument; used to check closed forms.
    """
    if d == 1:
        return np.array([[2.0]])

    def unit(angles):
        x = np.empty(d)
        s = 1.0
        for i, phi in enumerate(angles):
            x[i] = s * math.cos(phi)
            s *= math.sin(phi)
        x[d - 1] = s
        return x

    def jac(angles):
        return math.prod(math.sin(angles[i]) ** (d - 2 - i) for i in range(d - 2))

    ranges = [(0.0, math.pi)] * (d - 2) + [(0.0, 2 * math.pi)]
    out = np.zeros((d, d))
    for i in range(d):
        for j in range(i, d):
            def f(*angles, i=i, j=j):
                u = unit(angles)
                return u[i] * u[j] * jac(angles)
            val, _ = integrate.nquad(f, ranges, opts={"epsabs": 1e-13, "epsrel": 1e-11, "limit": 200})
            out[i, j] = out[j, i] = val
    return out


@dataclass(frozen=True)
class StableTail:
    """Isotropic alpha-stable Levy density ``C |x|^{-(d+alpha)}`` on R^d minus 0."""

    alpha: float
    C: float
    dim: int

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not self.C > 0.0:
            raise ValueError(f"C must be positive, got {self.C}")
        if self.dim < 1:
            raise ValueError("dim must be positive")

    @property
    def surface(self):
        return sphere_area(self.dim)

    def radial_integral(self, f, a=0.0, b=np.inf, rtol=1e-10):
        """``C omega_d int_a^b f(s) s^{-1-alpha} ds`` for a radial profile ``f``."""
        g = lambda s: f(s) * s ** (-1.0 - self.alpha)
        pieces = [(a, min(b, 1.0)), (max(a, 1.0), b)]
        total = 0.0
        for lo, hi in pieces:
            if hi <= lo:
                continue
            val, err = integrate.quad(g, lo, hi, epsabs=0.0, epsrel=rtol, limit=400)
            if err > 100 * rtol * max(abs(val), 1e-300):
                raise QuadratureFailure(f"radial quadrature on [{lo}, {hi}] failed (err={err:g})")
            total += val
        return self.C * self.surface * total

    def small_jump_integral(self):
        """Closed form of ``int (1 ^ |x|^2) nu(dx)``."""
        return self.C * self.surface * (1.0 / (2.0 - self.alpha) + 1.0 / self.alpha)

    def gram(self, r):
        """Closed form of ``int_{|x|<=r} x x^T nu(dx)``."""
        scale = self.C * self.surface * r ** (2.0 - self.alpha) / (self.dim * (2.0 - self.alpha))
        return scale * np.eye(self.dim)

    def gram_quadrature(self, r):
        """Same integral as :meth:`gram` via radial and angular quadrature."""
        radial, err = integrate.quad(lambda s: s ** (1.0 - self.alpha), 0.0, r, epsabs=0.0, epsrel=1e-12)
        return self.C * radial * angular_second_moment(self.dim)

    def second_moment_ball(self, r):
        """``int_{|x|<=r} |x|^2 nu(dx)``."""
        return self.C * self.surface * r ** (2.0 - self.alpha) / (2.0 - self.alpha)

    def tail_mass(self, r):
        """``nu({|x| > r})``."""
        return self.C * self.surface * r ** (-self.alpha) / self.alpha

    def exponent(self, z):
        """Contribution ``int (e^{i<z,x>} - 1 - i<z,x>1_{|x|<=1}) nu(dx)``.

        Isotropy kills the odd part; the even part factorizes into an angular
        moment (closed form) times a radial integral (quadrature).
        """
        z = np.asarray(z, dtype=float)
        norm = np.linalg.norm(z, axis=-1)
        k = self.C * abs_projection_moment(self.dim, self.alpha) * one_minus_cos_integral(self.alpha)
        return -(k * norm ** self.alpha) + 0j

    def pushforward_scaled_orthogonal(self, scale):
        """Image under ``x -> s O x`` with O orthogonal: intensity scales by ``|s|^alpha``."""
        return StableTail(self.alpha, self.C * abs(scale) ** self.alpha, self.dim)


class QuasiLevyMeasure:
    """Quasi-Levy measure: atomic signed part (no mass at 0) plus optional stable tail."""

    __slots__ = ("atomic", "stable")

    def __init__(self, atomic, stable=None):
        if stable is not None and stable.dim != atomic.dim:
            raise ValueError("stable part and atomic part differ in dimension")
        object.__setattr__(self, "atomic", atomic.without_origin())
        object.__setattr__(self, "stable", stable)

    def __setattr__(self, name, value):
        raise AttributeError("QuasiLevyMeasure is immutable")

    @classmethod
    def zero(cls, dim):
        return cls(AtomicSignedMeasure.empty(dim))

    @property
    def dim(self):
        return self.atomic.dim

    def __repr__(self):
        return f"QuasiLevyMeasure({self.atomic!r}, stable={self.stable!r})"

    def __eq__(self, other):
        if not isinstance(other, QuasiLevyMeasure):
            return NotImplemented
        return self.atomic == other.atomic and self.stable == other.stable

    __hash__ = None

    def positive(self):
        """nu^+ : positive atoms plus the (non-negative) stable part."""
        return QuasiLevyMeasure(jordan(self.atomic)[0], self.stable)

    def negative(self):
        """nu^- : negated negative atoms; the stable part never contributes."""
        return QuasiLevyMeasure(jordan(self.atomic)[1], None)

    def variation(self):
        """|nu| = nu^+ + nu^-."""
        plus, minus = jordan(self.atomic)
        return QuasiLevyMeasure(plus + minus, self.stable)

    def side(self, which):
        if which in ("+", "plus"):
            return self.positive()
        if which in ("-", "minus"):
            return self.negative()
        raise ValueError(f"side must be '+' or '-', got {which!r}")

    def is_nonnegative(self, tol=0.0):
        return len(self.atomic) == 0 or float(self.atomic.weights.min()) >= -tol

    def is_finite(self):
        return self.stable is None

    def small_jump_integral(self):
        """``int (1 ^ |x|^2) d|nu|``."""
        n = self.atomic.norms()
        total = math.fsum(np.abs(self.atomic.weights) * np.minimum(1.0, n ** 2))
        if self.stable is not None:
            total += self.stable.small_jump_integral()
        return total

    def __add__(self, other):
        if not isinstance(other, QuasiLevyMeasure):
            return NotImplemented
        if self.stable is not None and other.stable is not None:
            s, t = self.stable, other.stable
            if s.alpha != t.alpha:
                raise ValueError("sum of stable parts with different alpha is not representable")
            stable = StableTail(s.alpha, s.C + t.C, s.dim)
        else:
            stable = self.stable or other.stable
        return QuasiLevyMeasure(self.atomic + other.atomic, stable)

    def to_json(self):
        return {
            "dim": self.dim,
            "atoms": self.atomic.to_rows(),
            "stable": None if self.stable is None else {"alpha": self.stable.alpha, "C": self.stable.C},
        }

    @classmethod
    def from_json(cls, data):
        return cls(*_parse_measure(data))


def _parse_measure(data):
    dim = int(data["dim"])
    rows = data.get("atoms") or []
    if rows:
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != dim + 1:
            raise ValueError(f"each atom row needs {dim} coordinates and a weight")
        atomic = AtomicSignedMeasure(arr[:, :dim], arr[:, dim], dim=dim)
    else:
        atomic = AtomicSignedMeasure.empty(dim)
    st = data.get("stable")
    stable = None if st is None else StableTail(float(st["alpha"]), float(st["C"]), dim)
    return atomic, stable


def measure_to_json(m):
    """Serialize a bare atomic measure with the measure schema."""
    return {"dim": m.dim, "atoms": m.to_rows(), "stable": None}


def measure_from_json(data):
    """Parse the measure schema into an atomic measure (origin atoms kept)."""
    atomic, stable = _parse_measure(data)
    if stable is not None:
        raise ValueError("expected a purely atomic measure")
    return atomic
