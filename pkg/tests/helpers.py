"""Independent oracles and hypothesis strategies shared by the test modules."""
import cmath
import math

import numpy as np
from hypothesis import strategies as st

from qid import AtomicSignedMeasure, CharTriplet, LatticePMF, Mode, QuasiLevyMeasure, StableTail


def bernoulli_nu(p, k):
    """Closed-form quasi-Levy weight of b(1, p) at k >= 1."""
    return (-1) ** (k + 1) * (p / (1 - p)) ** k / k


def pmf_char(probs, z):
    """Direct sum ``sum_x p_x e^{i<x,z>}`` over a dict ``point tuple -> p``."""
    z = np.atleast_1d(z)
    return sum(p * cmath.exp(1j * float(np.dot(x, z))) for x, p in probs.items())


def brute_exponent(A, atoms, gamma, z, mode="standard"):
    """Characteristic exponent by a plain Python loop over atoms."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = 1j * float(np.dot(gamma, z)) - 0.5 * float(z @ np.asarray(A) @ z)
    for x, w in atoms:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        xz = float(np.dot(x, z))
        if mode == "standard":
            comp = xz if np.linalg.norm(x) <= 1.0 else 0.0
        elif mode == "center":
            comp = xz
        else:
            comp = 0.0
        out += w * (cmath.exp(1j * xz) - 1 - 1j * comp)
    return out


def pmf_moments(probs):
    xs = np.array([np.atleast_1d(x) for x in probs], dtype=float)
    ps = np.array(list(probs.values()))
    mean = ps @ xs
    cov = (xs - mean).T @ np.diag(ps) @ (xs - mean)
    return mean, cov


def stable_gram_oracle(alpha, C, d, r):
    """``Cw_d/(d(2-alpha)) r^{2-alpha}`` on the diagonal."""
    w = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    return C * w * r ** (2 - alpha) / (d * (2 - alpha))


# ---------------------------------------------------------------- strategies

weights = st.floats(-2.0, 2.0, allow_nan=False).filter(lambda w: abs(w) > 1e-6)


@st.composite
def atomic_measures(draw, dim=None, max_atoms=6, lattice=False):
    d = dim or draw(st.integers(1, 3))
    n = draw(st.integers(0, max_atoms))
    coord = st.integers(-4, 4).map(float) if lattice else st.floats(-3.0, 3.0, allow_nan=False)
    pts = [draw(st.lists(coord, min_size=d, max_size=d)) for _ in range(n)]
    ws = [draw(weights) for _ in range(n)]
    return AtomicSignedMeasure(np.array(pts, dtype=float).reshape(n, d), ws, dim=d)


@st.composite
def triplets(draw, dim=None, mode=Mode.STANDARD, with_stable=False, alphas=(0.5, 1.5)):
    d = dim or draw(st.integers(1, 3))
    B = np.array(draw(st.lists(st.floats(-1.0, 1.0), min_size=d * d, max_size=d * d))).reshape(d, d)
    A = B @ B.T if draw(st.booleans()) else np.zeros((d, d))
    nu = draw(atomic_measures(dim=d))
    stable = None
    if with_stable and draw(st.booleans()):
        alpha = draw(st.sampled_from(list(alphas)))
        if (mode is Mode.DRIFT and alpha < 1) or (mode is Mode.CENTER and alpha > 1) or mode is Mode.STANDARD:
            stable = StableTail(alpha, draw(st.floats(0.1, 2.0)), d)
    gamma = draw(st.lists(st.floats(-3.0, 3.0), min_size=d, max_size=d))
    return CharTriplet(A=A, nu=QuasiLevyMeasure(nu, stable), gamma=np.array(gamma), mode=mode)


@st.composite
def dominant_pmfs(draw, dim=1, span=3, lam_min=0.55):
    """Lattice pmfs with one atom of mass > 1/2, hence zero-free characteristic functions."""
    lam = draw(st.floats(lam_min, 0.95))
    pts = [tuple(draw(st.lists(st.integers(0, span), min_size=dim, max_size=dim))) for _ in range(3)]
    top = tuple(draw(st.lists(st.integers(0, span), min_size=dim, max_size=dim)))
    raw = [draw(st.floats(0.05, 1.0)) for _ in pts]
    probs = {top: lam}
    s = sum(raw)
    for x, r in zip(pts, raw):
        probs[x] = probs.get(x, 0.0) + (1 - lam) * r / s
    return probs


def pmf_from_probs(probs):
    return LatticePMF.from_dict({k: v for k, v in probs.items()}, normalize=True)


def unit_vectors(d):
    return st.lists(st.floats(-1.0, 1.0), min_size=d, max_size=d).filter(
        lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: np.asarray(v) / np.linalg.norm(v))


# acceptance lines collected during the run, printed by the terminal summary hook
ACCEPTANCE_LINES = {}
