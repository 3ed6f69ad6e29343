"""Characteristic triplets ``(A, nu, gamma)`` and their exponents.

Three representation functions are supported: ``standard`` (location
``gamma``), ``drift`` (no centering, location ``gamma_0``) and ``center``
(full centering, location ``gamma_m``, the mean).
"""
from dataclasses import dataclass, field
import enum
import math

import numpy as np

from .errors import ModeMismatch, NotIntegrable, NotPSD, NotSymmetric, StableUnsupported, UnsupportedStableImage
from .measure import AtomicSignedMeasure, QuasiLevyMeasure, StableTail, pushforward


class Mode(str, enum.Enum):
    STANDARD = "standard"
    DRIFT = "drift"
    CENTER = "center"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class CharTriplet:
    """Generating triplet of a quasi-infinitely divisible law.

    ``tail_bound`` is the total variation known to be missing from ``nu``
    when the measure is a truncated series (0 for exact measures).
    """

    A: np.ndarray
    nu: QuasiLevyMeasure
    gamma: np.ndarray
    mode: Mode = Mode.STANDARD
    tail_bound: float = 0.0
    _locations: dict = field(default=None, repr=False)

    def __post_init__(self):
        d = self.nu.dim
        A = np.array(self.A, dtype=float).reshape(d, d)
        gamma = np.array(self.gamma, dtype=float).reshape(d)
        A.setflags(write=False)
        gamma.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "mode", Mode(self.mode))
        if self._locations is None:
            object.__setattr__(self, "_locations", {self.mode: gamma})

    @classmethod
    def make(cls, dim=None, A=None, nu=None, gamma=None, mode=Mode.STANDARD, tail_bound=0.0):
        """Convenience constructor filling zeros for omitted components."""
        if dim is None:
            if nu is not None:
                dim = nu.dim
            elif A is not None:
                dim = np.atleast_2d(A).shape[0]
            elif gamma is not None:
                dim = len(np.atleast_1d(gamma))
            else:
                raise ValueError("cannot infer the dimension")
        if isinstance(nu, AtomicSignedMeasure):
            nu = QuasiLevyMeasure(nu)
        return cls(
            A=np.zeros((dim, dim)) if A is None else A,
            nu=QuasiLevyMeasure.zero(dim) if nu is None else nu,
            gamma=np.zeros(dim) if gamma is None else gamma,
            mode=mode,
            tail_bound=tail_bound,
        )

    @property
    def dim(self):
        return self.nu.dim

    def __repr__(self):
        return (f"CharTriplet(mode={self.mode.value}, A={self.A.tolist()}, gamma={self.gamma.tolist()}, "
                f"nu={self.nu!r})")

    def to_json(self):
        return {
            "dim": self.dim,
            "mode": self.mode.value,
            "A": self.A.reshape(-1).tolist(),
            "gamma": self.gamma.tolist(),
            "nu": self.nu.to_json(),
            "tail_bound": self.tail_bound,
        }

    @classmethod
    def from_json(cls, data):
        d = int(data["dim"])
        nu = QuasiLevyMeasure.from_json(data.get("nu") or {"dim": d, "atoms": [], "stable": None})
        if nu.dim != d:
            raise ValueError("triplet and measure dimensions differ")
        A = np.asarray(data.get("A", np.zeros(d * d)), dtype=float).reshape(d, d)
        return cls(A=A, nu=nu, gamma=data.get("gamma", np.zeros(d)), mode=data.get("mode", "standard"),
                   tail_bound=float(data.get("tail_bound", 0.0)))


def validate(t, sym_tol=None, psd_tol=None):
    """Check that ``A`` is symmetric and non-negative definite.

    Default tolerances are ``1e-10 * ||A||``.  Eigenvalues in ``[-psd_tol, 0)``
    are clamped to zero.  Also checks the integrability that ``t.mode`` needs.
    """
    A = t.A
    scale = float(np.linalg.norm(A, 2)) if A.size else 0.0
    sym_tol = 1e-10 * scale if sym_tol is None else sym_tol
    psd_tol = 1e-10 * scale if psd_tol is None else psd_tol
    asym = float(np.max(np.abs(A - A.T))) if A.size else 0.0
    if asym > sym_tol:
        raise NotSymmetric(f"A is not symmetric (max |A - A^T| = {asym:g})")
    A = 0.5 * (A + A.T)
    evals, evecs = np.linalg.eigh(A)
    if evals.size and evals[0] < -psd_tol:
        raise NotPSD(f"A has eigenvalue {evals[0]:g} < 0; no QID law has this Gaussian part")
    if evals.size and evals[0] < 0:
        A = (evecs * np.clip(evals, 0.0, None)) @ evecs.T
        A = 0.5 * (A + A.T)
    _check_mode_integrability(t.nu, t.mode)
    return CharTriplet(A=A, nu=t.nu, gamma=t.gamma, mode=t.mode, tail_bound=t.tail_bound,
                       _locations=t._locations)


def _check_mode_integrability(nu, mode):
    st = nu.stable
    if st is None:
        return
    if mode is Mode.DRIFT and st.alpha >= 1.0:
        raise NotIntegrable("small jumps", f"int_{{|x|<=1}} |x| d|nu| = inf for stable alpha={st.alpha} >= 1")
    if mode is Mode.CENTER and st.alpha <= 1.0:
        raise NotIntegrable("large jumps", f"int_{{|x|>1}} |x| d|nu| = inf for stable alpha={st.alpha} <= 1")


def _atomic_exponent(points, weights, z, mode):
    # z: (m, d) -> (m,)
    out = np.zeros(len(z), dtype=complex)
    if len(weights) == 0:
        return out
    norms = np.linalg.norm(points, axis=1)
    if mode is Mode.STANDARD:
        comp = (norms <= 1.0).astype(float)
    elif mode is Mode.CENTER:
        comp = np.ones_like(norms)
    else:
        comp = np.zeros_like(norms)
    block = max(1, 2_000_000 // max(len(weights), 1))
    for s in range(0, len(z), block):
        theta = z[s:s + block] @ points.T
        re = -2.0 * np.sin(0.5 * theta) ** 2
        im = np.sin(theta) - theta * comp
        out[s:s + block] = re @ weights + 1j * (im @ weights)
    return out


def char_exponent(t, z):
    """Characteristic exponent ``Psi(z)`` so that ``mu_hat(z) = exp(Psi(z))``.

    ``z`` may be a single point of R^d or an array of shape ``(..., d)``.
    """
    z = np.asarray(z, dtype=float)
    d = t.dim
    if d == 1 and (z.ndim == 0 or z.shape[-1] != 1):
        z = z[..., None]
    if z.shape[-1] != d:
        raise ValueError(f"z must have trailing dimension {d}")
    shape = z.shape[:-1]
    zz = z.reshape(-1, d)
    psi = 1j * (zz @ t.gamma) - 0.5 * np.einsum("mi,ij,mj->m", zz, t.A, zz)
    psi = psi + _atomic_exponent(t.nu.atomic.points, t.nu.atomic.weights, zz, t.mode)
    if t.nu.stable is not None:
        psi = psi + t.nu.stable.exponent(zz)
    psi = psi.reshape(shape)
    return complex(psi) if psi.ndim == 0 else psi


def char_function(t, z):
    return np.exp(char_exponent(t, z))


def convolve(t1, t2):
    """Triplet of the convolution: componentwise sums."""
    if t1.dim != t2.dim:
        raise ValueError(f"dimension mismatch: {t1.dim} != {t2.dim}")
    if t1.mode is not t2.mode:
        raise ModeMismatch(f"cannot add a {t1.mode.value} triplet to a {t2.mode.value} triplet")
    return CharTriplet(A=t1.A + t2.A, nu=t1.nu + t2.nu, gamma=t1.gamma + t2.gamma, mode=t1.mode,
                       tail_bound=t1.tail_bound + t2.tail_bound)


def zero_triplet(dim, mode=Mode.STANDARD):
    return CharTriplet.make(dim=dim, mode=mode)


def _vector_fsum(rows):
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[None, :]
    return np.array([math.fsum(col) for col in rows.T])


def _scaled_orthogonal_factor(M):
    n, d = M.shape
    if n != d:
        return None
    G = M.T @ M
    s2 = float(np.trace(G)) / d
    if s2 <= 0 or np.max(np.abs(G - s2 * np.eye(d))) > 1e-12 * s2:
        return None
    return math.sqrt(s2)


def affine_image(t, M, b=None):
    """Triplet of ``M X + b`` for ``X`` with standard triplet ``t``."""
    if t.mode is not Mode.STANDARD:
        raise ModeMismatch("affine_image needs a standard-mode triplet")
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n, d = M.shape
    if d != t.dim:
        raise ValueError(f"M has {d} columns, triplet has dim {t.dim}")
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float).reshape(n)
    stable = None
    if t.nu.stable is not None:
        s = _scaled_orthogonal_factor(M)
        if s is None:
            raise UnsupportedStableImage("stable part only maps in closed form under nonzero multiples "
                                         "of orthogonal matrices")
        stable = t.nu.stable.pushforward_scaled_orthogonal(s)
    atoms = t.nu.atomic
    if len(atoms):
        img = atoms.points @ M.T
        inside_img = np.linalg.norm(img, axis=1) <= 1.0
        inside = atoms.norms() <= 1.0
        coef = atoms.weights * (inside_img.astype(float) - inside.astype(float))
        correction = _vector_fsum(img * coef[:, None])
    else:
        correction = np.zeros(n)
    nu_u = QuasiLevyMeasure(pushforward(atoms, M, drop_origin=True), stable)
    return CharTriplet(A=M @ t.A @ M.T, nu=nu_u, gamma=b + M @ t.gamma + correction, mode=Mode.STANDARD,
                       tail_bound=t.tail_bound)


def _small_ball_first_moment(nu):
    a = nu.atomic
    if len(a) == 0:
        return np.zeros(nu.dim)
    mask = a.norms() <= 1.0
    return _vector_fsum(a.points[mask] * a.weights[mask][:, None]) if mask.any() else np.zeros(nu.dim)


def _outer_first_moment(nu):
    a = nu.atomic
    if len(a) == 0:
        return np.zeros(nu.dim)
    mask = a.norms() > 1.0
    return _vector_fsum(a.points[mask] * a.weights[mask][:, None]) if mask.any() else np.zeros(nu.dim)


def _locations(t):
    """Locations of ``t`` in every mode whose integrability holds."""
    locs = dict(t._locations)
    nu = t.nu
    if Mode.STANDARD not in locs:
        if t.mode is Mode.DRIFT:
            locs[Mode.STANDARD] = t.gamma + _small_ball_first_moment(nu)
        else:
            locs[Mode.STANDARD] = t.gamma - _outer_first_moment(nu)
    std = locs[Mode.STANDARD]
    st = nu.stable
    if Mode.DRIFT not in locs and (st is None or st.alpha < 1.0):
        # the stable part is symmetric, its first moment over the unit ball is 0
        locs[Mode.DRIFT] = std - _small_ball_first_moment(nu)
    if Mode.CENTER not in locs and (st is None or st.alpha > 1.0):
        locs[Mode.CENTER] = std + _outer_first_moment(nu)
    return locs


def convert_mode(t, target):
    """Re-express ``t`` with another representation function.

    Converting back and forth returns the original location bit for bit.
    """
    target = Mode(target)
    if target is t.mode:
        return t
    _check_mode_integrability(t.nu, target)
    locs = _locations(t)
    for gamma in locs.values():
        gamma.setflags(write=False)
    return CharTriplet(A=t.A, nu=t.nu, gamma=locs[target], mode=target, tail_bound=t.tail_bound,
                       _locations=locs)


def drift(t):
    return convert_mode(t, Mode.DRIFT).gamma


def center(t):
    return convert_mode(t, Mode.CENTER).gamma


def product_triplet(parts):
    """Standard triplet of the independent vector ``(X_1, ..., X_d)``."""
    parts = list(parts)
    if not parts:
        raise ValueError("need at least one part")
    if len(parts) == 1:
        return parts[0]
    d = len(parts)
    A = np.zeros((d, d))
    gamma = np.zeros(d)
    pts, ws = [], []
    tail = 0.0
    for k, p in enumerate(parts):
        if p.dim != 1:
            raise ValueError("product_triplet takes one-dimensional parts")
        if p.mode is not Mode.STANDARD:
            raise ModeMismatch("product_triplet needs standard-mode parts")
        if p.nu.stable is not None:
            raise StableUnsupported("a product of stable marginals is not isotropic")
        A[k, k] = p.A[0, 0]
        gamma[k] = p.gamma[0]
        emb = np.zeros((len(p.nu.atomic), d))
        emb[:, k] = p.nu.atomic.points[:, 0]
        pts.append(emb)
        ws.append(p.nu.atomic.weights)
        tail += p.tail_bound
    nu = QuasiLevyMeasure(AtomicSignedMeasure(np.vstack(pts), np.concatenate(ws), dim=d))
    return CharTriplet(A=A, nu=nu, gamma=gamma, mode=Mode.STANDARD, tail_bound=tail)


@dataclass(frozen=True)
class CharExponentFn:
    """A characteristic exponent as a callable, with its provenance."""

    fn: object
    provenance: str = "user_supplied"

    def __call__(self, z):
        return self.fn(z)

    @classmethod
    def from_triplet(cls, t):
        return cls(lambda z: char_exponent(t, z), "from_triplet")


def polya_exponent(z):
    """``1 - e^{|z|}``: the logarithm of a zero-free characteristic function of a non-QID law."""
    return 1.0 - np.exp(np.linalg.norm(np.atleast_1d(z)))


POLYA = CharExponentFn(polya_exponent, "polya_example")


@dataclass(frozen=True)
class ProbeReport:
    t: np.ndarray
    q: np.ndarray
    classification: str
    limit: float
    thresholds: dict

    def to_json(self):
        return {
            "t": self.t.tolist(),
            "q": [float(v) if np.isfinite(v) else str(v) for v in self.q],
            "classification": self.classification,
            "limit": self.limit if np.isfinite(self.limit) else str(self.limit),
            "thresholds": self.thresholds,
        }


def gaussian_probe(psi, z, t_grid=None, growth=10.0, flat_tol=0.05):
    """Estimate ``<z, A z>`` as the limit of ``q(t) = -2 t^{-2} Re Psi(t z)``.

    Classification (evidence only, a finite grid proves no limit):
    ``diverges`` when ``q(t_max) > growth * max(1, q(t_min))`` and ``q`` is
    non-decreasing over the last decade; ``converges`` when the spread of
    ``q`` over the last decade is at most ``flat_tol * max(1, |q(t_max)|)``;
    otherwise ``inconclusive``.
    """
    t_grid = np.logspace(0, 3, 31) if t_grid is None else np.asarray(t_grid, dtype=float)
    if len(t_grid) < 4 or np.any(np.diff(t_grid) <= 0) or t_grid[0] <= 0:
        raise ValueError("t_grid must be at least 4 increasing positive values")
    if t_grid[-1] / t_grid[0] < 100.0 * (1 - 1e-12):
        raise ValueError("t_grid must span at least two decades")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if abs(np.linalg.norm(z) - 1.0) > 1e-12:
        raise ValueError("z must be a unit vector")
    with np.errstate(over="ignore", invalid="ignore"):
        q = np.array([-2.0 * np.real(psi(t * z)) / t ** 2 for t in t_grid], dtype=float)
    q = np.where(np.isnan(q), np.inf, q)
    last = q[t_grid >= t_grid[-1] / 10.0 * (1 - 1e-12)]
    rising = bool(np.all(last[1:] >= last[:-1]))
    if q[-1] > growth * max(1.0, q[0]) and rising:
        cls = "diverges"
    elif np.all(np.isfinite(last)) and float(np.ptp(last)) <= flat_tol * max(1.0, abs(q[-1])):
        cls = "converges"
    else:
        cls = "inconclusive"
    return ProbeReport(t=t_grid, q=q, classification=cls, limit=float(q[-1]),
                       thresholds={"growth": growth, "flat_tol": flat_tol})
