"""Single line-chart figures for CLI reports, written to files.

SVG output is made reproducible by fixing the hash salt and dropping the
date stamp.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "lines.markersize": 3.5,
    "svg.hashsalt": "qid",
    "svg.fonttype": "none",
}


def _save(fig, path):
    fmt = str(path).rsplit(".", 1)[-1].lower()
    meta = {"Date": None} if fmt == "svg" else None
    fig.savefig(path, format=fmt, metadata=meta, bbox_inches="tight")
    plt.close(fig)
    return path


PLOT_CEILING = 1e150  # log-axis tick formatting overflows far beyond this


def _positive(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = np.isfinite(y) & (y > 0) & (y < PLOT_CEILING)
    return x[ok], y[ok]


def plot_density_report(report, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x, y = _positive(report.r, report.index)
        ax.loglog(x, y, "o-", label="Kallenberg index")
        ax.axhline(report.thresholds["floor"], color="0.5", ls="--", lw=0.8, label="floor")
        ax.invert_xaxis()
        ax.set_xlabel("r")
        ax.set_ylabel("index")
        ax.set_title(f"verdict: {report.verdict}")
        ax.legend(loc="best", frameon=False)
        return _save(fig, path)


def plot_orey_report(report, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for vals, lab in ((report.lower, r"$r^{-\beta}G^+$"), (report.upper, r"$r^{-\beta}G^-$")):
            x, y = _positive(report.r, vals)
            if len(x):
                ax.loglog(x, y, "o-", label=lab)
        ax.invert_xaxis()
        ax.set_xlabel("r")
        ax.set_title(f"beta = {report.beta:g}: {report.verdict}")
        ax.legend(loc="best", frameon=False)
        return _save(fig, path)


def plot_probe_report(report, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x, y = _positive(report.t, report.q)
        ax.loglog(x, y, "o-")
        ax.set_xlabel("t")
        ax.set_ylabel(r"$-2t^{-2}\,\mathrm{Re}\,\Psi(tz)$")
        ax.set_title(report.classification)
        return _save(fig, path)


def plot_convergence_report(report, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        idx = np.asarray(report.indices, dtype=float)
        for j, name in enumerate(report.columns):
            if "target" in name or "deviation" in name or name.startswith("c4"):
                x, y = _positive(idx, report.table[:, j])
                if len(x):
                    ax.semilogy(x, y, ".-", label=name)
        ax.set_xlabel("index n")
        ax.set_ylabel("distance to target")
        ax.legend(loc="best", frameon=False, fontsize=7)
        return _save(fig, path)
