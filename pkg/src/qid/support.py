"""Support of QID laws in translates of polyhedral cones."""
from dataclasses import dataclass

import numpy as np

from .errors import NotApplicable, StableUnsupported
from .triplet import Mode, convert_mode

MEMBERSHIP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Cone:
    """``K = {x : <n_i, x> >= 0 for all i}``; the caller guarantees K is proper."""

    normals: np.ndarray

    def __post_init__(self):
        n = np.atleast_2d(np.asarray(self.normals, dtype=float))
        n.setflags(write=False)
        object.__setattr__(self, "normals", n)

    @property
    def dim(self):
        return self.normals.shape[1]

    @classmethod
    def orthant(cls, d):
        return cls(np.eye(d))

    @classmethod
    def from_json(cls, data):
        return cls(data["normals"])

    def to_json(self):
        return {"normals": self.normals.tolist()}

    def contains(self, x, tol=MEMBERSHIP_TOL):
        """Row-wise membership for an array of points (or a single point)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        ok = np.all(x @ self.normals.T >= -tol, axis=1)
        return bool(ok[0]) if single else ok


@dataclass(frozen=True)
class ConeReport:
    cond_ii: bool
    A_zero: bool
    nu_plus_in_K: bool
    nu_minus_in_K: bool
    drift: tuple
    drift_in_K: bool
    conclusion: str
    consistent: bool

    @property
    def cond_i(self):
        """The nu- half of condition (i); the support half is implied by (ii)."""
        return self.nu_minus_in_K

    def to_json(self):
        return {
            "cond_i_nu_minus": self.cond_i,
            "cond_ii": self.cond_ii,
            "A_zero": self.A_zero,
            "nu_plus_in_K": self.nu_plus_in_K,
            "nu_minus_in_K": self.nu_minus_in_K,
            "drift": list(self.drift),
            "drift_in_K": self.drift_in_K,
            "conclusion": self.conclusion,
            "consistent": self.consistent,
            "membership_tol": MEMBERSHIP_TOL,
        }


def check_cone_conditions(t, K, a_tol=1e-12):
    """Check ``A = 0`` and ``supp nu+ in K`` (small jumps are integrable for atoms).

    When this holds the law sits in a translate of ``K``; it sits in ``K``
    itself exactly when the drift does.  ``consistent`` is False when the
    condition holds but ``nu-`` leaves ``K``, which no genuine QID law allows.
    """
    if t.nu.stable is not None:
        raise StableUnsupported("an isotropic stable part is never supported in a proper cone")
    if K.dim != t.dim:
        raise ValueError("cone and triplet differ in dimension")
    A_zero = bool(np.max(np.abs(t.A)) <= a_tol) if t.A.size else True
    plus, minus = t.nu.positive().atomic, t.nu.negative().atomic
    plus_in = bool(np.all(K.contains(plus.points))) if len(plus) else True
    minus_in = bool(np.all(K.contains(minus.points))) if len(minus) else True
    gamma0 = convert_mode(t, Mode.DRIFT).gamma
    drift_in = K.contains(gamma0)
    cond_ii = A_zero and plus_in
    if not cond_ii:
        conclusion = "conditions_fail"
    elif drift_in:
        conclusion = "supported_in_K"
    else:
        conclusion = "supported_in_translate"
    return ConeReport(cond_ii, A_zero, plus_in, minus_in, tuple(map(float, gamma0)), drift_in, conclusion,
                      consistent=(not cond_ii) or minus_in)


@dataclass(frozen=True)
class DriftSupportCheck:
    drift: tuple
    in_support: bool = None


def drift_in_support_check(t, pmf=None, tol=1e-9):
    """For infinitely divisible ``t`` the drift lies in the support of the law."""
    if not t.nu.is_nonnegative():
        raise NotApplicable("drift-in-support holds for infinitely divisible laws only (signed nu given)")
    gamma0 = convert_mode(t, Mode.DRIFT).gamma
    if pmf is None:
        return DriftSupportCheck(tuple(map(float, gamma0)))
    pts = pmf.points()
    hit = bool(np.any(np.all(np.abs(pts - gamma0) <= tol, axis=1)))
    return DriftSupportCheck(tuple(map(float, gamma0)), hit)
