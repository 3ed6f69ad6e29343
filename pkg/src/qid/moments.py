"""Moments of QID laws from their standard triplet.

Truncated series (``tail_bound > 0``) cannot settle integrability of the
full measure; for those a growth test on the outermost atoms flags tails
whose ``h``-weighted terms do not decay.
"""
from dataclasses import dataclass
import math
import warnings

import numpy as np

from .errors import HypothesisFails, TailBoundWarning
from .measure import QuasiLevyMeasure
from .triplet import Mode, convert_mode

DIGIT_BUDGET = 1e-10


def _warn_tail(t, budget):
    if t.tail_bound > budget:
        warnings.warn(f"truncation tail bound {t.tail_bound:.3g} exceeds the digit budget {budget:.3g}",
                      TailBoundWarning, stacklevel=3)


def _h_values(h, points):
    kind, param = h
    if kind == "exp":
        alpha = np.atleast_1d(np.asarray(param, dtype=float))
        return np.exp(points @ alpha)
    if kind == "power":
        return np.linalg.norm(points, axis=1) ** float(param)
    raise ValueError(f"unknown moment function {kind!r}; use 'exp' or 'power'")


def tail_terms_grow(points, terms, fraction=0.5):
    """True when ``log terms`` has non-negative slope in ``|x|`` over the outer atoms.

    Used only for truncated series, where a growing summand means the full
    series diverges.
    """
    if len(terms) < 4:
        return False
    norms = np.linalg.norm(points, axis=1)
    outer = norms >= norms.max() * (1.0 - fraction)
    x, y = norms[outer], np.abs(terms[outer])
    pos = y > 0
    if pos.sum() < 3 or np.ptp(x[pos]) == 0:
        return False
    slope = np.polyfit(x[pos], np.log(y[pos]), 1)[0]
    return bool(slope >= 0.0)


@dataclass(frozen=True)
class HMoment:
    finite: bool
    value: float
    truncated: bool = False
    suspect_divergent: bool = False

    def to_json(self):
        return {"finite": self.finite, "value": self.value if self.finite else None,
                "truncated": self.truncated, "suspect_divergent": self.suspect_divergent}


def h_moment_tail(nu, side, h, tail_bound=0.0):
    """``int_{|x|>1} h d nu^{side}`` for ``h = ('exp', alpha)`` or ``('power', p)``.

    For a truncated atomic series (``tail_bound > 0``) the returned value is
    that of the truncation; ``suspect_divergent`` reports whether the
    summands grow, in which case the untruncated integral is infinite.
    """
    part = nu.side(side)
    a = part.atomic
    mask = a.norms() > 1.0 if len(a) else np.zeros(0, dtype=bool)
    pts = a.points[mask]
    terms = a.weights[mask] * _h_values(h, pts) if mask.any() else np.zeros(0)
    value = math.fsum(terms)
    suspect = tail_bound > 0 and tail_terms_grow(pts, terms)
    st = part.stable
    if st is not None:
        kind, param = h
        if kind == "power":
            p = float(param)
            if p >= st.alpha:
                return HMoment(False, math.inf)
            value += st.C * st.surface / (st.alpha - p)
        else:
            if np.any(np.asarray(param, dtype=float) != 0):
                return HMoment(False, math.inf)
            value += st.tail_mass(1.0)
    return HMoment(True, value, tail_bound > 0, suspect)


def _standard(t):
    return t if t.mode is Mode.STANDARD else convert_mode(t, Mode.STANDARD)


def mean(t, budget=DIGIT_BUDGET):
    """``E X = gamma + int_{|x|>1} x nu(dx)``, the center of the law."""
    st = t.nu.stable
    if st is not None and st.alpha <= 1.0:
        raise HypothesisFails("int_{|x|>1} |x| nu+(dx)", f"stable part with alpha={st.alpha} <= 1 has no mean")
    if t.tail_bound > 0 and h_moment_tail(t.nu, "+", ("power", 1), t.tail_bound).suspect_divergent:
        raise HypothesisFails("int_{|x|>1} |x| nu+(dx)", "truncated nu+ tail grows; first moment diverges")
    _warn_tail(t, budget)
    return convert_mode(t, Mode.CENTER).gamma.copy()


def covariance(t, budget=DIGIT_BUDGET):
    """``Cov X = A + int x x^T nu(dx)``; no stable part has a second moment."""
    if t.nu.stable is not None:
        raise HypothesisFails("int_{|x|>1} |x|^2 nu+(dx)", "stable part has infinite second moment")
    if t.tail_bound > 0 and h_moment_tail(t.nu, "+", ("power", 2), t.tail_bound).suspect_divergent:
        raise HypothesisFails("int_{|x|>1} |x|^2 nu+(dx)", "truncated nu+ tail grows; second moment diverges")
    _warn_tail(t, budget)
    a = t.nu.atomic
    d = t.dim
    out = np.array(t.A, dtype=float)
    if len(a):
        for i in range(d):
            for j in range(i, d):
                v = math.fsum(a.weights * a.points[:, i] * a.points[:, j])
                out[i, j] += v
                if j != i:
                    out[j, i] += v
    return out


def exp_moment(t, alpha, budget=DIGIT_BUDGET):
    """``E exp(<alpha, X>)`` from the triplet.

    Requires ``int_{|x|>1} e^{<alpha,x>} nu+(dx) < inf``; for truncated
    series this is judged by :func:`h_moment_tail`.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.shape != (t.dim,):
        raise ValueError(f"alpha must have length {t.dim}")
    if t.nu.stable is not None and np.any(alpha != 0):
        raise HypothesisFails("int_{|x|>1} e^{<alpha,x>} nu+(dx)", "stable part has no exponential moments")
    tail = h_moment_tail(t.nu, "+", ("exp", alpha), t.tail_bound)
    if tail.suspect_divergent:
        raise HypothesisFails("int_{|x|>1} e^{<alpha,x>} nu+(dx)",
                              "truncated nu+ tail grows under e^{<alpha,x>}; the exponential moment "
                              "formula diverges for the full measure")
    _warn_tail(t, budget)
    s = _standard(t)
    a = s.nu.atomic
    expo = float(alpha @ s.gamma) + 0.5 * float(alpha @ s.A @ alpha)
    if len(a):
        ax = a.points @ alpha
        inside = (a.norms() <= 1.0).astype(float)
        expo += math.fsum(a.weights * (np.expm1(ax) - ax * inside))
    return math.exp(expo)
