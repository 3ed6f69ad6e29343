"""Finite-index diagnostics for weak convergence of QID triplets.

The sufficient conditions are statements about limits; these functions
tabulate the relevant quantities at the supplied indices and attach trend
flags.  They never declare convergence.
"""
import csv
from dataclasses import dataclass, field
import io
import math

import numpy as np

from .measure import AtomicSignedMeasure, QuasiLevyMeasure
from .triplet import convert_mode


@dataclass(frozen=True)
class Ramp:
    """Radial test function: 0 on ``|x| <= a``, 1 on ``|x| >= b``, linear between."""

    a: float
    b: float

    def __post_init__(self):
        if not 0.0 < self.a < self.b:
            raise ValueError("ramp needs 0 < a < b")

    def profile(self, s):
        return np.clip((np.asarray(s, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def __call__(self, x):
        return self.profile(np.linalg.norm(np.atleast_2d(x), axis=1))

    @property
    def label(self):
        return f"f[{self.a:g},{self.b:g}]"


def _as_qlm(nu):
    return QuasiLevyMeasure(nu) if isinstance(nu, AtomicSignedMeasure) else nu


def cs_integral(nu_side, f):
    """``int f d nu_side`` for a ramp ``f``: exact over atoms, quadrature over a stable part."""
    nu_side = _as_qlm(nu_side)
    a = nu_side.atomic
    total = math.fsum(a.weights * f(a.points)) if len(a) else 0.0
    st = nu_side.stable
    if st is not None:
        total += st.radial_integral(f.profile, f.a, f.b)
        total += st.radial_integral(lambda s: 1.0, f.b, np.inf)
    return total


def small_ball_second_moment(nu_minus, eps):
    """``int_{|x|<=eps} |x|^2 d nu_minus``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    nu_minus = _as_qlm(nu_minus)
    a = nu_minus.atomic
    total = 0.0
    if len(a):
        n = a.norms()
        mask = n <= eps
        total = math.fsum(a.weights[mask] * n[mask] ** 2)
    if nu_minus.stable is not None:
        total += nu_minus.stable.second_moment_ball(eps)
    return total


def a_form(t_n, t_target, eps, z):
    """``(<z, A_{n,eps} z>, |<z, A_{n,eps} z> - <z, A z>|)`` with
    ``<z, A_{n,eps} z> = <z, A z> + int_{|x|<=eps} <z, x>^2 nu_n+(dx)`` and ``A`` the target's."""
    if t_n.dim != t_target.dim:
        raise ValueError("dimension mismatch")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    base = float(z @ t_target.A @ z)
    plus = t_n.nu.positive()
    a = plus.atomic
    extra = 0.0
    if len(a):
        mask = a.norms() <= eps
        extra = math.fsum(a.weights[mask] * (a.points[mask] @ z) ** 2)
    if plus.stable is not None:
        extra += float(z @ plus.stable.gram(eps) @ z)
    value = base + extra
    return value, abs(value - base)


def _trend(values, atol=1e-12):
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return "single"
    if np.all(np.abs(v - v[0]) <= atol * max(1.0, abs(v[0]))):
        return "flat"
    d = np.diff(v)
    if np.all(d >= 0) and v[-1] > 2.0 * max(abs(v[0]), atol):
        return "growing"
    if np.all(d <= 0) or abs(v[-1]) <= 0.5 * abs(v[0]):
        return "shrinking"
    return "unclear"


@dataclass(frozen=True)
class ConvergenceReport:
    indices: list
    columns: list
    table: np.ndarray
    trends: dict
    flags: dict = field(default_factory=dict)

    def column(self, name):
        return self.table[:, self.columns.index(name)]

    def to_json(self):
        return {
            "indices": list(self.indices),
            "columns": list(self.columns),
            "rows": [[float(v) for v in row] for row in self.table],
            "trends": self.trends,
            "flags": self.flags,
            "note": "diagnostics at finitely many indices; no convergence verdict is implied",
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index"] + list(self.columns))
        for n, row in zip(self.indices, self.table):
            w.writerow([n] + [repr(float(v)) for v in row])
        return buf.getvalue()


def convergence_report(sequence, target, eps_grid=(0.5, 0.1, 0.01), ramps=None, directions=None):
    """Tabulate the four sufficient-condition quantities for ``(index, t_n)`` pairs.

    Columns per ramp ``f``: ``int f dnu_n+-`` and their distances to the
    target's; per ``eps`` and direction ``z``: the ``A_{n,eps}`` deviation;
    per ``eps``: ``int_{|x|<=eps} |x|^2 dnu_n-``; finally ``|gamma_n - gamma|``.
    Locations are compared in the target's representation mode.
    """
    d = target.dim
    ramps = [Ramp(0.1, 0.5), Ramp(0.5, 0.9)] if ramps is None else list(ramps)
    directions = list(np.eye(d)) if directions is None else [np.atleast_1d(z) for z in directions]
    cols = []
    for f in ramps:
        cols += [f"c1 {f.label} nu+", f"c1 {f.label} nu-", f"c1 {f.label} |nu+ - target|",
                 f"c1 {f.label} |nu- - target|"]
    for eps in eps_grid:
        for j, _ in enumerate(directions):
            cols.append(f"c2 eps={eps:g} z{j} deviation")
    for eps in eps_grid:
        cols.append(f"c3 eps={eps:g} small-ball nu-")
    cols.append("c4 |gamma_n - gamma|")

    tp, tm = target.nu.positive(), target.nu.negative()
    ref = {f: (cs_integral(tp, f), cs_integral(tm, f)) for f in ramps}
    indices, rows = [], []
    for n, t_n in sequence:
        if t_n.dim != d:
            raise ValueError("sequence and target differ in dimension")
        t_n = convert_mode(t_n, target.mode)
        plus, minus = t_n.nu.positive(), t_n.nu.negative()
        row = []
        for f in ramps:
            ip, im = cs_integral(plus, f), cs_integral(minus, f)
            row += [ip, im, abs(ip - ref[f][0]), abs(im - ref[f][1])]
        for eps in eps_grid:
            for z in directions:
                row.append(a_form(t_n, target, eps, z)[1])
        for eps in eps_grid:
            row.append(small_ball_second_moment(minus, eps))
        row.append(float(np.linalg.norm(t_n.gamma - target.gamma)))
        indices.append(n)
        rows.append(row)
    table = np.array(rows, dtype=float).reshape(len(rows), len(cols))
    trends = {c: _trend(table[:, j]) for j, c in enumerate(cols)}
    flags = {
        "c1_blowup": any(trends[c] == "growing" for c in cols if c.startswith("c1") and "target" not in c),
        "c4_shrinking": trends["c4 |gamma_n - gamma|"] in ("shrinking", "flat"),
    }
    return ConvergenceReport(indices, cols, table, trends, flags)
