"""Quasi-Levy measure of a law with a dominant atom.

For ``mu = lam delta_a + (1 - lam) sigma`` with ``lam > 1/2`` the measure is
the log-series ``sum_k (-1)^{k+1} r^k / k (delta_{-a} * sigma)^{*k}`` with
``r = (1 - lam) / lam < 1``, restricted away from the origin.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import LambdaOutOfRange
from .measure import AtomicSignedMeasure, QuasiLevyMeasure, convolve_atomic
from .triplet import CharTriplet, Mode


@dataclass(frozen=True, eq=False)
class CuppensResult:
    triplet: CharTriplet
    lam: float
    terms: int
    tail_bound: float
    origin_mass: float
    rho_mass: float
    tol: float

    def mass_identity_residual(self):
        return mass_identity_check(self)

    def to_json(self):
        return {
            "triplet": self.triplet.to_json(),
            "lambda": self.lam,
            "terms": self.terms,
            "tail_bound": self.tail_bound,
            "origin_mass": self.origin_mass,
            "rho_mass": self.rho_mass,
            "mass_identity_residual": mass_identity_check(self),
            "tol": self.tol,
        }


def series_terms(r, tol):
    """Smallest K with ``r^{K+1} / ((K+1)(1-r)) < tol``."""
    if r == 0.0:
        return 0
    K = 0
    while r ** (K + 1) / ((K + 1) * (1.0 - r)) >= tol:
        K += 1
    return K


def cuppens_triplet(lam, a, sigma, tol=1e-12):
    """Drift-mode triplet ``(0, nu_K, a)`` of ``lam delta_a + (1 - lam) sigma``.

    ``sigma`` is an atomic probability measure without an atom at ``a``.
    The series is cut at ``K = series_terms(r, tol)`` so the discarded
    total variation is below ``tol``.
    """
    lam = float(lam)
    if not 0.5 < lam <= 1.0:
        raise LambdaOutOfRange(f"lambda must lie in (1/2, 1], got {lam}")
    a = np.atleast_1d(np.asarray(a, dtype=float))
    d = len(a)
    if sigma.dim != d:
        raise ValueError("sigma and a differ in dimension")
    if len(sigma) and float(sigma.weights.min()) < 0:
        raise ValueError("sigma must be a non-negative measure")
    if abs(sigma.total_mass() - 1.0) > 1e-12:
        raise ValueError(f"sigma must be a probability measure (mass {sigma.total_mass()!r})")
    if sigma.weight_at(a) != 0.0:
        raise ValueError("sigma must not charge the atom a")

    r = (1.0 - lam) / lam
    K = series_terms(r, tol)
    base = sigma.shift(-a)
    power = AtomicSignedMeasure.dirac(np.zeros(d))
    pts, ws = [], []
    for k in range(1, K + 1):
        power = convolve_atomic(power, base)
        coef = (-1) ** (k + 1) * r ** k / k
        pts.append(power.points)
        ws.append(coef * power.weights)
    if pts:
        rho = AtomicSignedMeasure(np.vstack(pts), np.concatenate(ws), dim=d)
    else:
        rho = AtomicSignedMeasure.empty(d)
    tail = r ** (K + 1) / ((K + 1) * (1.0 - r)) if r > 0 else 0.0
    t = CharTriplet(A=np.zeros((d, d)), nu=QuasiLevyMeasure(rho), gamma=a, mode=Mode.DRIFT, tail_bound=tail)
    return CuppensResult(t, lam, K, tail, rho.origin_mass(), rho.total_mass(), tol)


def mass_identity_check(result):
    """``|rho_K(R^d) + log lam|``, where ``rho_K`` still carries its origin mass."""
    return abs(result.rho_mass + math.log(result.lam))
