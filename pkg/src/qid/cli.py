"""Command-line front end: JSON in, JSON/table out, optional SVG line charts.

Exit codes: 0 success, 1 usage error, 2 validation error or zero found,
3 inconclusive, 4 moment hypothesis failure.
"""
import argparse
import json
import math
import sys
import warnings

import numpy as np

from . import convergence, cuppens, density, lattice, moments, support, triplet
from .errors import HypothesisFails, Inconclusive, QIDError
from .measure import measure_from_json

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_INCONCLUSIVE, EXIT_HYPOTHESIS = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- parsing

def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise QIDError(f"{path}: invalid JSON ({exc})") from None


def _json_arg(text):
    """Inline JSON, or ``@file`` for a JSON file."""
    if text.startswith("@"):
        return _load(text[1:])
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse {text!r} as JSON ({exc})") from None


def _floats(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def parse_grid(text):
    """``a:b:n`` or ``a:b:n:log`` (log spacing) or ``a:b:n:lin``."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"grid {text!r} is not of the form a:b:n[:log|lin]")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid {text!r} is not of the form a:b:n[:log|lin]") from None
    scale = parts[3] if len(parts) == 4 else "log"
    if scale == "lin":
        return np.linspace(a, b, n)
    if scale != "log" or a <= 0 or b <= 0:
        raise UsageError(f"log grid {text!r} needs positive endpoints")
    return np.logspace(math.log10(a), math.log10(b), n)


def _triplet(path):
    t = triplet.CharTriplet.from_json(_load(path))
    return triplet.validate(t)


# ---------------------------------------------------------------- output

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True, ensure_ascii=False)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if v is None:
        return "-"
    return str(v)


def render_table(rows, columns=None):
    if not rows:
        return "(empty)"
    columns = columns or list(rows[0])
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[j]) for row in cells)) for j, c in enumerate(columns)]
    line = lambda vals: "  ".join(v.rjust(w) for v, w in zip(vals, widths))  # noqa: E731
    return "\n".join([line(columns), line(["-" * w for w in widths])] + [line(r) for r in cells])


def _kv_table(d, prefix=""):
    rows = []
    for k in sorted(d):
        v = d[k]
        if isinstance(v, dict):
            rows += _kv_table(v, f"{prefix}{k}.")
        else:
            if isinstance(v, list):
                v = json.dumps(_clean(v)) if len(v) <= 6 else f"[{len(v)} entries; see --format json]"
            rows.append({"key": prefix + k, "value": v})
    return rows


class Output:
    """Collects the payload, optional table rows and an optional figure writer."""

    def __init__(self, payload, rows=None, columns=None, plot=None, code=EXIT_OK):
        self.payload, self.rows, self.columns, self.plot, self.code = payload, rows, columns, plot, code

    def emit(self, args, out):
        if args.format == "table":
            if self.rows is not None:
                header = {k: v for k, v in self.payload.items() if not isinstance(v, (list, dict))}
                if header:
                    out.write(render_table(_kv_table(header), ["key", "value"]) + "\n\n")
                out.write(render_table(self.rows, self.columns) + "\n")
            else:
                out.write(render_table(_kv_table(_clean(self.payload)), ["key", "value"]) + "\n")
        else:
            if args.format == "svg":
                if self.plot is None:
                    raise UsageError(f"--format svg is not available for '{args.command}'")
                path = args.out or f"qid-{args.command}.svg"
                self.plot(path)
                self.payload = dict(self.payload, figure=path)
            out.write(dumps(self.payload) + "\n")


# ---------------------------------------------------------------- commands

def cmd_analyze(args):
    p = lattice.LatticePMF.from_json(_load(args.pmf))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ext = lattice.extract_triplet(p, N=args.grid, mass_tol=args.mass_tol, refine=args.refine)
    payload = ext.to_json()
    payload["tolerances"] = {"grid": ext.N, "mass_tol": args.mass_tol, "refine": args.refine,
                             "witness_tol": lattice.WITNESS_TOL}
    payload["warnings"] = [str(w.message) for w in caught]
    rows = [{"x": ", ".join(f"{c:g}" for c in r[:-1]), "weight": r[-1]} for r in ext.triplet.nu.atomic.to_rows()]
    return Output(payload, rows, ["x", "weight"])


def cmd_cuppens(args):
    data = _load(args.spec)
    lam = args.lam if args.lam is not None else data["lambda"]
    sigma = measure_from_json(data["sigma"])
    res = cuppens.cuppens_triplet(lam, data["a"], sigma, tol=args.tol)
    payload = res.to_json()
    payload["tolerances"] = {"tol": args.tol}
    rows = [{"x": ", ".join(f"{c:g}" for c in r[:-1]), "weight": r[-1]} for r in res.triplet.nu.atomic.to_rows()]
    return Output(payload, rows, ["x", "weight"])


def cmd_convolve(args):
    t = triplet.convolve(_triplet(args.first), _triplet(args.second))
    return Output({"triplet": t.to_json()})


def cmd_affine(args):
    t = _triplet(args.triplet)
    M = np.atleast_2d(np.asarray(_json_arg(args.matrix), dtype=float))
    b = None if args.shift is None else np.asarray(_json_arg(args.shift), dtype=float)
    return Output({"triplet": triplet.affine_image(t, M, b).to_json()})


def cmd_moments(args):
    t = _triplet(args.triplet)
    payload = {"tolerances": {"digit_budget": moments.DIGIT_BUDGET}}
    failed = False
    jobs = [("mean", lambda: moments.mean(t).tolist()),
            ("covariance", lambda: moments.covariance(t).tolist())]
    if args.alpha is not None:
        jobs.append(("exp_moment", lambda: moments.exp_moment(t, args.alpha)))
        payload["alpha"] = args.alpha
    warned = []
    for name, job in jobs:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                payload[name] = job()
            except HypothesisFails as exc:
                payload[name] = {"hypothesis_fails": exc.which, "message": str(exc)}
                failed = True
        warned += [str(w.message) for w in caught if str(w.message) not in warned]
    payload["warnings"] = warned
    code = EXIT_HYPOTHESIS if failed else EXIT_OK
    if failed:
        sys.stderr.write("moment hypothesis fails; see the hypothesis_fails entries\n")
    return Output(payload, code=code)


def _r_grid(args):
    return None if args.r_grid is None else parse_grid(args.r_grid)


def cmd_density(args):
    from .plotting import plot_density_report
    rep = density.check_kallenberg(_triplet(args.triplet), _r_grid(args))
    payload = rep.to_json()
    payload["sandwich_holds"] = rep.sandwich_holds()
    payload["tolerances"] = dict(rep.thresholds, r_grid=rep.r.tolist())
    return Output(payload, rep.rows(), plot=lambda path: plot_density_report(rep, path))


def cmd_orey(args):
    from .plotting import plot_orey_report
    rep = density.check_orey(_triplet(args.triplet), args.beta, _r_grid(args))
    payload = rep.to_json()
    payload["tolerances"] = dict(rep.thresholds, r_grid=rep.r.tolist())
    return Output(payload, payload["rows"], plot=lambda path: plot_orey_report(rep, path))


def cmd_support(args):
    t = _triplet(args.triplet)
    K = support.Cone(_json_arg(args.normals)) if args.normals else support.Cone.orthant(t.dim)
    payload = support.check_cone_conditions(t, K).to_json()
    payload["cone"] = K.to_json()
    payload["tolerances"] = {"membership_tol": support.MEMBERSHIP_TOL}
    return Output(payload)


def cmd_probe(args):
    from .plotting import plot_probe_report
    if args.polya == (args.triplet is not None):
        raise UsageError("probe: give exactly one of a triplet file or --polya")
    if args.polya:
        psi, dim = triplet.POLYA, 1
    else:
        t = _triplet(args.triplet)
        psi, dim = triplet.CharExponentFn.from_triplet(t), t.dim
    z = np.asarray(_json_arg(args.direction), dtype=float) if args.direction else np.eye(dim)[0]
    t_grid = None if args.t_grid is None else parse_grid(args.t_grid)
    rep = triplet.gaussian_probe(psi, z, t_grid)
    payload = rep.to_json()
    payload["provenance"] = psi.provenance
    payload["direction"] = z.tolist()
    payload["tolerances"] = dict(rep.thresholds)
    rows = [{"t": float(a), "q": float(b)} for a, b in zip(rep.t, rep.q)]
    return Output(payload, rows, plot=lambda path: plot_probe_report(rep, path))


def cmd_converge(args):
    from .plotting import plot_convergence_report
    data = _load(args.sequence)
    target = triplet.CharTriplet.from_json(data["target"])
    seq = [(item["index"], triplet.CharTriplet.from_json(item["triplet"])) for item in data["sequence"]]
    eps = args.eps if args.eps is not None else data.get("eps", [0.5, 0.1, 0.01])
    ramps = [convergence.Ramp(a, b) for a, b in data["ramps"]] if data.get("ramps") else None
    dirs = data.get("directions")
    rep = convergence.convergence_report(seq, target, eps, ramps, dirs)
    payload = rep.to_json()
    payload["tolerances"] = {"eps": list(eps), "trend_atol": 1e-12}
    rows = [dict({"index": n}, **dict(zip(rep.columns, map(float, row)))) for n, row in zip(rep.indices, rep.table)]
    return Output(payload, rows, plot=lambda path: plot_convergence_report(rep, path))


def cmd_project_id(args):
    t = _triplet(args.triplet)
    res = lattice.projection_id_check(t, args.a, mass_tol=args.mass_tol)
    payload = res.to_json()
    payload["tolerances"] = {"mass_tol": args.mass_tol}
    return Output(payload)


# ---------------------------------------------------------------- wiring

def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "table", "svg"), default="json")
    common.add_argument("--out", help="figure path for --format svg")

    parser = _Parser(prog="qid", description="Quasi-infinitely divisible distributions toolkit.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("analyze", parents=[common], help="certify zero-freeness and extract the triplet of a lattice pmf")
    s.add_argument("pmf")
    s.add_argument("--grid", type=int, default=None, help="FFT grid size N (default: power of two >= 8(m+1))")
    s.add_argument("--mass-tol", type=float, default=1e-10)
    s.add_argument("--refine", action="store_true", help="double N until the outer shell is below mass-tol")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("cuppens", parents=[common], help="triplet of lam*delta_a + (1-lam)*sigma")
    s.add_argument("spec", help='JSON {"lambda", "a", "sigma": measure}')
    s.add_argument("--lambda", dest="lam", type=float, default=None)
    s.add_argument("--tol", type=float, default=1e-12)
    s.set_defaults(func=cmd_cuppens)

    s = sub.add_parser("convolve", parents=[common], help="triplet of the convolution of two laws")
    s.add_argument("first")
    s.add_argument("second")
    s.set_defaults(func=cmd_convolve)

    s = sub.add_parser("affine", parents=[common], help="triplet of M X + b")
    s.add_argument("triplet")
    s.add_argument("--matrix", required=True, help="JSON matrix or @file")
    s.add_argument("--shift", default=None, help="JSON vector or @file")
    s.set_defaults(func=cmd_affine)

    s = sub.add_parser("moments", parents=[common], help="mean, covariance and exponential moment")
    s.add_argument("triplet")
    s.add_argument("--alpha", type=_floats, default=None, help="comma-separated exponent vector")
    s.set_defaults(func=cmd_moments)

    for name, func, extra, hint in (("density-check", cmd_density, False, "Kallenberg small-ball density check"),
                                    ("orey", cmd_orey, True, "Orey small-ball condition for a given beta")):
        s = sub.add_parser(name, parents=[common], help=hint)
        s.add_argument("triplet")
        s.add_argument("--r-grid", default=None, help="a:b:n[:log|lin], decreasing radii (default 1:1e-6:20)")
        if extra:
            s.add_argument("--beta", type=float, required=True)
        s.set_defaults(func=func)

    s = sub.add_parser("support-check", parents=[common], help="cone support conditions")
    s.add_argument("triplet")
    s.add_argument("--normals", default=None, help="JSON list of cone normals (default: the orthant)")
    s.set_defaults(func=cmd_support)

    s = sub.add_parser("probe", parents=[common], help="Gaussian-component probe of an exponent")
    s.add_argument("triplet", nargs="?")
    s.add_argument("--polya", action="store_true", help="probe the built-in exponent 1 - e^|z|")
    s.add_argument("--direction", default=None, help="JSON unit vector (default e_1)")
    s.add_argument("--t-grid", default=None, help="a:b:n[:log|lin] (default 1:1000:31)")
    s.set_defaults(func=cmd_probe)

    s = sub.add_parser("converge", parents=[common], help="finite-index convergence diagnostics")
    s.add_argument("sequence", help='JSON {"target", "sequence": [{"index", "triplet"}], "ramps"?, "eps"?}')
    s.add_argument("--eps", type=_floats, default=None)
    s.set_defaults(func=cmd_converge)

    s = sub.add_parser("project-id", parents=[common], help="is the projection <a, X> infinitely divisible?")
    s.add_argument("triplet")
    s.add_argument("--a", type=_floats, required=True)
    s.add_argument("--mass-tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_project_id)
    return parser


def run(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    stderr, sys.stderr = sys.stderr, err
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("qid: a subcommand is required (see qid --help)")
        result = args.func(args)
        result.emit(args, out)
        return result.code
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except Inconclusive as exc:
        err.write(f"inconclusive: {exc}\n")
        return EXIT_INCONCLUSIVE
    except HypothesisFails as exc:
        err.write(f"hypothesis fails: {exc}\n")
        return EXIT_HYPOTHESIS
    except (QIDError, ValueError, KeyError, TypeError) as exc:
        msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        err.write(f"error: {msg}\n")
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    finally:
        sys.stderr = stderr


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
