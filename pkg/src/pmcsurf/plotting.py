"""Report figures (matplotlib, file output only)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_FIELDS = (("Hnorm2", "|H|^2"), ("theta_abs", "|Theta|"), ("pmc_residual", "pmc residual"),
           ("csq", "|C1^2 - C2^2|"))


def _grid(rows, key):
    xs = sorted({r.x for r in rows})
    ys = sorted({r.y for r in rows})
    z = np.full((len(ys), len(xs)), np.nan)
    for r in rows:
        if key == "theta_abs":
            v = abs(r.theta)
        elif key == "csq":
            v = abs(r.C1**2 - r.C2**2)
        else:
            v = getattr(r, key)
        z[ys.index(r.y), xs.index(r.x)] = v
    return np.array(xs), np.array(ys), z


def surface_figure(name, rows, path):
    """Heatmaps of the main pointwise quantities over the chart grid."""
    fig, axes = plt.subplots(1, len(_FIELDS), figsize=(4 * len(_FIELDS), 3.4))
    fig.subplots_adjust(left=0.05, right=0.97, bottom=0.15, top=0.82, wspace=0.45)
    for ax, (key, label) in zip(axes, _FIELDS):
        xs, ys, z = _grid(rows, key)
        if key in ("pmc_residual", "theta_abs", "csq"):
            z = np.log10(np.maximum(np.abs(z), 1e-18))
            label = f"log10 {label}"
        extent = (xs[0], xs[-1], ys[0], ys[-1]) if len(xs) > 1 and len(ys) > 1 else None
        im = ax.imshow(z, origin="lower", aspect="auto", extent=extent, cmap="viridis")
        cb = fig.colorbar(im, ax=ax, shrink=0.85)
        cb.formatter.set_useOffset(False)
        cb.update_ticks()
        ax.set_title(label, fontsize=9)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    fig.suptitle(name, fontsize=10)
    fig.savefig(path, dpi=90)
    plt.close(fig)
    return path


def scan_figure(rows, param, path, key="theta_abs"):
    """One scanned quantity against the first scanned parameter."""
    pts = [(r[param], r[key]) for r in rows if r.get("status") == "ok"]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    fig.subplots_adjust(left=0.16, bottom=0.15)
    if pts:
        x, y = np.array(pts, dtype=float).T
        ax.plot(x, y, "o-", ms=3)
    ax.set_xlabel(param)
    ax.set_ylabel(key)
    fig.savefig(path, dpi=90)
    plt.close(fig)
    return path
