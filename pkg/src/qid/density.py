"""Smooth-density criteria from small-ball second-moment matrices.

``G+(r)`` is the smallest eigenvalue of ``int_{|x|<=r} x x^T nu+(dx)``,
``G-(r)`` the largest eigenvalue of the same matrix for ``nu-``; ``g+-`` are
the traces.  Verdicts on finite ``r`` grids are evidence, never proof.
"""
from dataclasses import dataclass
import math

import numpy as np

from .measure import AtomicSignedMeasure, QuasiLevyMeasure

EIG_RTOL = 1e-12
DEFAULT_R_GRID = np.logspace(0, -6, 20)


def gram_matrix(part, r):
    """``int_{|x|<=r} x x^T dpart`` for a non-negative measure side."""
    if r <= 0:
        raise ValueError("r must be positive")
    if isinstance(part, AtomicSignedMeasure):
        part = QuasiLevyMeasure(part)
    a = part.atomic
    d = part.dim
    out = np.zeros((d, d))
    if len(a):
        mask = a.norms() <= r
        if mask.any():
            x = a.points[mask]
            out = (x * a.weights[mask][:, None]).T @ x
    if part.stable is not None:
        out = out + part.stable.gram(r)
    return 0.5 * (out + out.T)


def _spectrum(S):
    evals = np.linalg.eigvalsh(S)
    tr = float(np.sum(np.abs(evals)))
    return np.where(evals < EIG_RTOL * tr, 0.0, evals) if tr > 0 else np.zeros_like(evals)


@dataclass(frozen=True)
class SmallBall:
    """``G+-`` and ``g+-`` at one radius.  Traces are summed from the clamped
    spectrum so that the sandwich bounds hold in floating point."""

    r: float
    G_plus: float
    G_minus: float
    g_plus: float
    g_minus: float
    minus_tail: float


def small_ball(t, r):
    ev_p = _spectrum(gram_matrix(t.nu.positive(), r))
    ev_m = _spectrum(gram_matrix(t.nu.negative(), r))
    neg = t.nu.negative().atomic
    tail = math.fsum(neg.weights[neg.norms() > r]) if len(neg) else 0.0
    return SmallBall(r, float(ev_p[0]), float(ev_m[-1]), math.fsum(ev_p), math.fsum(ev_m), tail)


def G_plus(t, r):
    return small_ball(t, r).G_plus


def G_minus(t, r):
    return small_ball(t, r).G_minus


def g_plus(t, r):
    return small_ball(t, r).g_plus


def g_minus(t, r):
    return small_ball(t, r).g_minus


def minus_tail_mass(t, r):
    """``nu-({|x| > r})``."""
    return small_ball(t, r).minus_tail


def _index(sb):
    if sb.G_plus == 0.0:
        return 0.0
    r = sb.r
    bracket = sb.G_plus / 3.0 - 2.0 * r ** 2 * sb.minus_tail - 2.0 * sb.G_minus / 3.0
    return bracket / (r ** 2 * abs(math.log(r)))


def kallenberg_index(t, r):
    """``r^-2 |log r|^-1 G+(r) (1/3 - 2 r^2 nu-(|x|>r) / G+(r) - 2/3 G-(r) / G+(r))``; 0 if ``G+(r) = 0``."""
    if not 0.0 < r < 1.0:
        raise ValueError("kallenberg_index needs 0 < r < 1")
    return _index(small_ball(t, r))


def _last_decade(r):
    return r <= r[-1] * 10.0 * (1 + 1e-12)


@dataclass(frozen=True)
class DensityReport:
    r: np.ndarray
    G_plus: np.ndarray
    G_minus: np.ndarray
    g_plus: np.ndarray
    g_minus: np.ndarray
    minus_tail: np.ndarray
    index: np.ndarray
    verdict: str
    thresholds: dict

    def sandwich_holds(self):
        d_ok = np.all(self.G_minus <= self.g_minus) and np.all(self.G_plus <= self.g_plus)
        return bool(d_ok and np.all(self.g_minus <= self.thresholds["dim"] * self.G_minus))

    def rows(self):
        return [
            {"r": float(r), "G_plus": float(gp), "G_minus": float(gm), "g_plus": float(hp),
             "g_minus": float(hm), "minus_tail": float(nt), "index": None if np.isnan(ix) else float(ix)}
            for r, gp, gm, hp, hm, nt, ix in zip(self.r, self.G_plus, self.G_minus, self.g_plus,
                                                 self.g_minus, self.minus_tail, self.index)
        ]

    def to_json(self):
        return {"verdict": self.verdict, "evidence_only": True, "thresholds": self.thresholds,
                "rows": self.rows()}


def _check_grid(r_grid):
    r = np.asarray(DEFAULT_R_GRID if r_grid is None else r_grid, dtype=float)
    if r.ndim != 1 or len(r) < 2 or np.any(np.diff(r) >= 0) or r[-1] <= 0:
        raise ValueError("r_grid must be strictly decreasing and positive")
    if r[-1] > 1e-4:
        raise ValueError("r_grid must reach 1e-4 or below")
    return r


def a_is_positive_definite(t):
    A = t.A
    if A.size == 0:
        return False
    ev = np.linalg.eigvalsh(A)
    return bool(ev[0] > EIG_RTOL * max(float(np.abs(ev).sum()), 1e-300))


def check_kallenberg(t, r_grid=None, growth=10.0, floor=1e3):
    """Evaluate the Kallenberg index along ``r_grid`` and classify the trend.

    ``condition_holds_on_grid``: the last value exceeds ``growth`` times the
    value one decade earlier and ``floor``.  ``condition_fails``: the index
    is ``<= 0`` throughout the last decade.  Points with ``r >= 1`` carry
    no index (``nan``).
    """
    r = _check_grid(r_grid)
    balls = [small_ball(t, float(ri)) for ri in r]
    index = np.array([_index(b) if b.r < 1.0 else np.nan for b in balls])
    thresholds = {"growth": growth, "floor": floor, "dim": t.dim, "eig_rtol": EIG_RTOL}
    if a_is_positive_definite(t):
        verdict = "smooth_density_certified_by_A"
    else:
        last = index[_last_decade(r)]
        earlier = r[-1] * 10.0
        j = int(np.argmin(np.abs(np.log(r) - math.log(earlier))))
        if np.all(last <= 0.0):
            verdict = "condition_fails"
        elif index[-1] > growth * index[j] and index[-1] > floor and index[j] > 0:
            verdict = "condition_holds_on_grid"
        else:
            verdict = "inconclusive"
    return DensityReport(r, *(np.array([getattr(b, f) for b in balls]) for f in
                              ("G_plus", "G_minus", "g_plus", "g_minus", "minus_tail")),
                         index=index, verdict=verdict, thresholds=thresholds)


@dataclass(frozen=True)
class OreyReport:
    beta: float
    r: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    verdict: str
    thresholds: dict

    def to_json(self):
        return {"beta": self.beta, "verdict": self.verdict, "evidence_only": True,
                "thresholds": self.thresholds,
                "rows": [{"r": float(r), "r^-beta G_plus": float(a), "r^-beta G_minus": float(b)}
                         for r, a, b in zip(self.r, self.lower, self.upper)]}


def check_orey(t, beta, r_grid=None, flat=0.5, vanish=1e-6):
    """Compare ``r^-beta G+(r)`` and ``r^-beta G-(r)`` along ``r_grid``.

    ``holds_on_grid`` when over the last decade ``r^-beta G+`` stays positive
    and above ``flat`` times its largest value there, and ``r^-beta G-`` at the
    smallest radius is below ``vanish``.
    """
    if not 0.0 < beta < 2.0:
        raise ValueError("beta must lie in (0, 2)")
    r = _check_grid(r_grid)
    balls = [small_ball(t, float(ri)) for ri in r]
    lower = np.array([b.G_plus for b in balls]) * r ** -beta
    upper = np.array([b.G_minus for b in balls]) * r ** -beta
    thresholds = {"flat": flat, "vanish": vanish}
    if a_is_positive_definite(t):
        verdict = "smooth_density_certified_by_A"
    else:
        last = lower[_last_decade(r)]
        if last.min() > 0 and last.min() >= flat * last.max() and upper[-1] < vanish:
            verdict = "holds_on_grid"
        else:
            verdict = "fails_on_grid"
    return OreyReport(beta, r, lower, upper, verdict, thresholds)
