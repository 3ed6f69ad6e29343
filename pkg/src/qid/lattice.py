"""Lattice-supported laws: zero certification and triplet extraction.

A law supported in ``M Z^d + b`` is QID exactly when the characteristic
polynomial of the reduced integer law has no zero on the torus.  In that
case the distinguished logarithm, minus its linear winding part, is a
periodic function whose Fourier coefficients are the quasi-Levy weights.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
import scipy.fft

from ._threads import workers
from .errors import AliasWarning, GridTooCoarse, ImaginaryLeak, Inconclusive, ZeroFound
from .measure import AtomicSignedMeasure, QuasiLevyMeasure, pushforward
from .triplet import CharTriplet, Mode

WITNESS_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class LatticePMF:
    """Finitely supported pmf ``sum_k p_k delta_{M k + b}`` with ``k`` in Z^d."""

    ks: np.ndarray
    ps: np.ndarray
    M: np.ndarray = None
    b: np.ndarray = None

    def __post_init__(self):
        ks = np.atleast_2d(np.asarray(self.ks, dtype=np.int64))
        ps = np.asarray(self.ps, dtype=float).reshape(-1)
        if ks.shape[0] != len(ps):
            if ks.shape[1] == len(ps) and ks.shape[0] == 1:
                ks = ks.T
            else:
                raise ValueError("ks and ps have inconsistent lengths")
        if np.any(ps < 0):
            raise ValueError("probabilities must be non-negative")
        keep = ps > 0
        ks, ps = ks[keep], ps[keep]
        if len(ps) == 0:
            raise ValueError("empty pmf")
        if abs(math.fsum(ps) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {math.fsum(ps)!r}, not 1")
        uniq, inv = np.unique(ks, axis=0, return_inverse=True)
        if len(uniq) != len(ks):
            merged = np.zeros(len(uniq))
            np.add.at(merged, inv.reshape(-1), ps)
            ks, ps = uniq, merged
        d = ks.shape[1]
        M = np.eye(d) if self.M is None else np.asarray(self.M, dtype=float).reshape(d, d)
        b = np.zeros(d) if self.b is None else np.asarray(self.b, dtype=float).reshape(d)
        if abs(np.linalg.det(M)) < 1e-300:
            raise ValueError("lattice matrix M must be invertible")
        for name, val in (("ks", ks), ("ps", ps), ("M", M), ("b", b)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @classmethod
    def from_dict(cls, probs, M=None, b=None, normalize=False):
        ks = [np.atleast_1d(k) for k in probs]
        ps = np.array(list(probs.values()), dtype=float)
        if normalize:
            ps = ps / math.fsum(ps)
        return cls(np.array(ks), ps, M, b)

    @classmethod
    def from_json(cls, data):
        d = int(data["dim"])
        rows = np.asarray(data["probs"], dtype=float)
        if rows.ndim != 2 or rows.shape[1] != d + 1:
            raise ValueError(f"each probs row needs {d} integer coordinates and a probability")
        ks = rows[:, :d]
        if np.any(ks != np.round(ks)):
            raise ValueError("lattice coordinates must be integers")
        M = data.get("M")
        return cls(ks.astype(np.int64), rows[:, d],
                   None if M is None else np.asarray(M, dtype=float).reshape(d, d), data.get("b"))

    def to_json(self):
        return {
            "dim": self.dim,
            "M": self.M.reshape(-1).tolist(),
            "b": self.b.tolist(),
            "probs": [[int(c) for c in k] + [float(p)] for k, p in zip(self.ks, self.ps)],
        }

    @property
    def dim(self):
        return self.ks.shape[1]

    @property
    def support_bound(self):
        return int(np.max(np.abs(self.ks)))

    def points(self):
        """Support points ``M k + b`` in R^d."""
        return self.ks @ self.M.T + self.b

    def default_grid(self):
        return default_grid(self.support_bound)


def default_grid(m):
    """Smallest power of two that is at least ``max(64, 8 (m + 1))``."""
    n = max(64, 8 * (m + 1))
    return 1 << (n - 1).bit_length()


def char_poly(p, z):
    """``sum_k p_k exp(i <z, k>)`` for the reduced integer law."""
    z = np.asarray(z, dtype=float)
    d = p.dim
    if d == 1 and (z.ndim == 0 or z.shape[-1] != 1):
        z = z[..., None]
    theta = z @ p.ks.T.astype(float)
    val = np.exp(1j * theta) @ p.ps
    return complex(val) if np.ndim(val) == 0 else val


def char_poly_grad(p, z):
    z = np.atleast_1d(np.asarray(z, dtype=float))
    e = np.exp(1j * (p.ks @ z)) * p.ps
    return 1j * (p.ks.T.astype(float) @ e)


def law_char_fn(p, u):
    """Characteristic function of the law on ``M Z^d + b`` itself."""
    u = np.asarray(u, dtype=float)
    if p.dim == 1 and (u.ndim == 0 or u.shape[-1] != 1):
        u = u[..., None]
    return np.exp(1j * (u @ p.b)) * char_poly(p, u @ p.M)


def torus_values(p, N):
    """``mu_hat(2 pi j / N)`` for all ``j`` in ``{0..N-1}^d`` via one inverse FFT."""
    d = p.dim
    if N <= 2 * p.support_bound:
        raise ValueError(f"grid N={N} aliases a support of radius {p.support_bound}")
    arr = np.zeros((N,) * d, dtype=complex)
    np.add.at(arr, tuple((p.ks % N).T), p.ps)
    return scipy.fft.ifftn(arr, norm="forward", workers=workers())


def lipschitz_bound(p):
    return math.fsum(np.linalg.norm(p.ks.astype(float), axis=1) * p.ps)


@dataclass(frozen=True)
class ZeroFreeCertificate:
    N: int
    min_modulus: float
    lipschitz: float
    threshold: float
    certified: bool
    witness: tuple = None
    witness_modulus: float = None
    witness_law: tuple = None

    def to_json(self):
        return {
            "N": self.N,
            "min_modulus": self.min_modulus,
            "lipschitz": self.lipschitz,
            "threshold": self.threshold,
            "certified": self.certified,
            "witness": None if self.witness is None else list(self.witness),
            "witness_modulus": self.witness_modulus,
            "witness_law": None if self.witness_law is None else list(self.witness_law),
            "witness_tol": WITNESS_TOL,
        }


def refine_zero(p, z0, max_iter=100, tol=WITNESS_TOL):
    """Gauss-Newton descent on ``|mu_hat|^2`` from ``z0`` with step halving by the golden ratio."""
    z = np.array(z0, dtype=float)
    f = char_poly(p, z)
    shrink = (math.sqrt(5) - 1) / 2
    for _ in range(max_iter):
        if abs(f) < tol:
            break
        g = char_poly_grad(p, z)
        J = np.vstack([g.real, g.imag])
        step = -np.linalg.lstsq(J, np.array([f.real, f.imag]), rcond=None)[0]
        s = 1.0
        while s > 1e-12:
            z_new = z + s * step
            f_new = char_poly(p, z_new)
            if abs(f_new) < abs(f):
                break
            s *= shrink
        else:
            break
        z, f = z_new, f_new
    return np.mod(z, 2 * np.pi), abs(f)


def certify_zero_free(p, N=None, n_candidates=8):
    """Certify that the characteristic polynomial has no zero on the torus.

    On the ``N^d`` grid every torus point is within ``sqrt(d) pi / N`` of a
    node, so ``min |mu_hat| > L sqrt(d) pi / N`` with ``L = sum |k| p_k``
    rules out zeros.  Otherwise the lowest nodes are refined; a refined
    point with ``|mu_hat| < 1e-13`` is returned as a witness.  If neither
    happens :class:`Inconclusive` is raised.
    """
    m = p.support_bound
    N = p.default_grid() if N is None else int(N)
    if N < 4 * (m + 1):
        raise ValueError(f"grid N={N} is below 4(m+1)={4 * (m + 1)}")
    d = p.dim
    vals = np.abs(torus_values(p, N))
    min_mod = float(vals.min())
    L = lipschitz_bound(p)
    threshold = L * math.sqrt(d) * math.pi / N
    if min_mod > threshold:
        return ZeroFreeCertificate(N, min_mod, L, threshold, True)
    flat = vals.reshape(-1)
    order = np.argsort(flat, kind="stable")[:n_candidates]
    best_z, best_f = None, np.inf
    for idx in order:
        if flat[idx] > threshold:
            break
        z0 = 2 * np.pi * np.array(np.unravel_index(idx, vals.shape), dtype=float) / N
        z, f = refine_zero(p, z0)
        if f < best_f:
            best_z, best_f = z, f
        if f < WITNESS_TOL:
            law = np.linalg.solve(p.M.T, z)
            return ZeroFreeCertificate(N, min_mod, L, threshold, False, tuple(map(float, z)), float(f),
                                       tuple(map(float, law)))
    raise Inconclusive(
        f"min |mu_hat| = {min_mod:.3g} on the {N}^{d} grid is below the certification threshold "
        f"{threshold:.3g} and no zero was found (best {best_f:.3g}); increase N",
        min_modulus=min_mod, threshold=threshold)


def _pi_multiples(z):
    out = []
    for v in z:
        c = round(v / math.pi, 4)
        out.append("0" if c == 0 else ("\u03c0" if c == 1 else f"{c:g}\u03c0"))
    return ", ".join(out)


def require_zero_free(p, N=None):
    cert = certify_zero_free(p, N)
    if not cert.certified:
        z = cert.witness_law
        loc = ", ".join(f"{v:.6g}" for v in z)
        raise ZeroFound(f"zero of characteristic function at z \u2248 ({loc}) = ({_pi_multiples(z)}); "
                        "the law is not QID", location=z)
    return cert


def _wrapped_steps(F, axis):
    nxt = np.roll(F, -1, axis=axis)
    return np.angle(nxt * np.conj(F))


@dataclass(frozen=True, eq=False)
class DistinguishedLog:
    N: int
    values: np.ndarray
    winding: np.ndarray
    max_jump: float


def distinguished_log(p, N=None, certificate=None):
    """Continuous logarithm of ``mu_hat`` on the ``N^d`` torus grid with ``log mu_hat(0) = 0``.

    The phase is unwrapped along the first axis from the origin, then each
    further axis is swept from the hyperplane already filled.  The winding
    vector holds the phase increments over one period per axis divided by
    ``2 pi``.
    """
    N = p.default_grid() if N is None else int(N)
    if certificate is None:
        require_zero_free(p, N)
    d = p.dim
    F = torus_values(p, N)
    steps = [_wrapped_steps(F, ax) for ax in range(d)]
    max_jump = max(float(np.max(np.abs(s))) for s in steps)
    if max_jump >= np.pi / 2:
        raise GridTooCoarse(f"phase jumps by {max_jump:.3f} >= pi/2 between grid neighbours at N={N}")
    # phase on the closed grid {0..N}^d, filled axis by axis
    U = np.zeros((N + 1,) * d)
    for ax in range(d):
        ext = np.pad(steps[ax], [(0, 1)] * d, mode="wrap")
        head = [slice(None)] * ax
        tail = [0] * (d - ax - 1)
        cum = np.cumsum(ext[tuple(head + [slice(0, N)] + tail)], axis=ax)
        anchor = U[tuple(head + [0] + tail)]
        U[tuple(head + [slice(1, N + 1)] + tail)] = anchor[..., None] + cum
    winding = np.zeros(d)
    for ax in range(d):
        corner = [0] * d
        corner[ax] = N
        winding[ax] = U[tuple(corner)] / (2 * np.pi)
    w_int = np.round(winding)
    if np.max(np.abs(winding - w_int)) > 1e-6:
        raise GridTooCoarse(f"winding {winding} is not an integer vector")
    inner = U[tuple([slice(0, N)] * d)]
    values = np.log(np.abs(F)) + 1j * inner
    return DistinguishedLog(N, values, w_int.astype(np.int64), max_jump)


@dataclass(frozen=True, eq=False)
class LatticeExtraction:
    triplet: CharTriplet
    N: int
    winding: np.ndarray
    mass_tol: float
    max_imag: float
    alias_residual: float
    truncation_bound: float
    edge_max: float
    certificate: ZeroFreeCertificate = None
    reduced_nu: AtomicSignedMeasure = field(default=None, repr=False)

    def to_json(self):
        return {
            "triplet": self.triplet.to_json(),
            "N": self.N,
            "winding": self.winding.tolist(),
            "mass_tol": self.mass_tol,
            "max_imag": self.max_imag,
            "alias_residual": self.alias_residual,
            "truncation_bound": self.truncation_bound,
            "edge_max": self.edge_max,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
        }


def _extract_once(p, N, mass_tol, cert):
    d = p.dim
    dl = distinguished_log(p, N, certificate=cert)
    freqs = np.rint(scipy.fft.fftfreq(N) * N).astype(np.int64)
    grids = np.meshgrid(*([2 * np.pi * np.arange(N) / N] * d), indexing="ij")
    lin = sum(w * g for w, g in zip(dl.winding, grids))
    c = scipy.fft.fftn(dl.values - 1j * lin, norm="forward", workers=workers())
    kgrid = np.stack(np.meshgrid(*([freqs] * d), indexing="ij"), axis=-1).reshape(-1, d)
    cflat = c.reshape(-1)
    inf_norm = np.max(np.abs(kgrid), axis=1)
    valid = inf_norm < N // 2
    origin = inf_norm == 0
    keep = valid & ~origin & (np.abs(cflat) >= mass_tol)
    dropped = ~keep & ~origin
    c0 = cflat[origin][0]
    nu_w = cflat[keep].real
    max_imag = float(np.max(np.abs(cflat[keep].imag))) if keep.any() else 0.0
    alias_residual = abs(c0.real + math.fsum(nu_w))
    truncation = math.fsum(np.abs(cflat[dropped]))
    edge = inf_norm >= N // 4
    edge_max = float(np.max(np.abs(cflat[edge]))) if edge.any() else 0.0
    return dl, kgrid[keep], nu_w, max_imag, alias_residual, truncation, edge_max


def extract_triplet(p, N=None, mass_tol=1e-10, refine=False, N_max=4096):
    """Drift-mode triplet of a zero-free lattice law.

    With ``refine`` the grid is doubled while certification is inconclusive
    and until the Fourier coefficients on the outer shell ``||k||_inf >= N/4``
    drop below ``mass_tol``.
    """
    N = p.default_grid() if N is None else int(N)
    while True:
        try:
            cert = require_zero_free(p, N)
            break
        except Inconclusive:
            if not refine or 2 * N > N_max:
                raise
            N *= 2
    while True:
        dl, ks, w, max_imag, residual, truncation, edge_max = _extract_once(p, N, mass_tol, cert)
        if not refine or edge_max < mass_tol or 2 * N > N_max:
            break
        N *= 2
    if max_imag > 100 * mass_tol:
        raise ImaginaryLeak(f"max |Im c_k| = {max_imag:.3g} exceeds 100 * mass_tol; the logarithm "
                            "branch is not continuous")
    if residual > truncation + mass_tol or edge_max >= mass_tol:
        warnings.warn(f"possible aliasing at N={N}: residual {residual:.3g}, edge coefficient "
                      f"{edge_max:.3g} (mass_tol {mass_tol:.3g})", AliasWarning, stacklevel=2)
    reduced = AtomicSignedMeasure(ks.astype(float), w, dim=p.dim)
    nu = pushforward(reduced, p.M, drop_origin=True)
    gamma0 = p.M @ dl.winding.astype(float) + p.b
    t = CharTriplet(A=np.zeros((p.dim, p.dim)), nu=QuasiLevyMeasure(nu), gamma=gamma0, mode=Mode.DRIFT,
                    tail_bound=truncation)
    return LatticeExtraction(t, N, dl.winding, mass_tol, max_imag, residual, truncation, edge_max, cert,
                             reduced)


@dataclass(frozen=True)
class ProjectionCheck:
    a: tuple
    id: bool
    min_weight: float
    nu: AtomicSignedMeasure

    def to_json(self):
        return {"a": list(self.a), "id": self.id, "min_weight": self.min_weight,
                "nu": {"dim": 1, "atoms": self.nu.to_rows(), "stable": None}}


def projection_id_check(t, a, mass_tol=1e-10):
    """Is ``L(a^T X)`` infinitely divisible?  True iff the projected measure is non-negative."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if t.nu.stable is not None:
        raise ValueError("projection check expects a finite atomic quasi-Levy measure")
    proj = pushforward(t.nu.atomic, a[None, :], drop_origin=True)
    min_w = float(proj.weights.min()) if len(proj) else 0.0
    return ProjectionCheck(tuple(float(v) for v in a), min_w >= -mass_tol, min_w, proj)
