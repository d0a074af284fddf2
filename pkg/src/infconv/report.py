"""CSV emission and the figures rendered alongside.

Every experiment writes one CSV (fixed, sorted columns; one row per
ladder point) and a PNG next to it visualizing the fit: a log-log
deficit-versus-distance cloud with the fitted slope for sharpness runs,
ratio plateaus for the quadratic and limit runs, and a per-case deficit
chart for the equality audit.
"""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["write_csv", "render_figure", "format_record"]


def _ensure_parent(path):
    parent = os.path.dirname(str(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def _fmt(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int,)):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, rows):
    """Deterministic CSV: header from the union of keys, sorted."""
    _ensure_parent(path)
    if not rows:
        with open(path, "w") as fh:
            fh.write("\n")
        return
    keys = sorted({k for row in rows for k in row})
    lines = [",".join(keys)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(k, "")) for k in keys))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def format_record(mapping) -> str:
    """Flat `key = value` record used by the CLI output."""
    lines = []
    for key in sorted(mapping):
        lines.append(f"{key} = {_fmt(mapping[key])}")
    return "\n".join(lines)


def _groups(rows):
    seen = {}
    for row in rows:
        key = (row.get("n"), row.get("p"))
        seen.setdefault(key, []).append(row)
    return seen


def render_figure(kind, rows, path):
    """One PNG per experiment, saved to ``path``."""
    _ensure_parent(path)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    if kind == "quadratic":
        for (n, p), grp in sorted(_groups(rows).items()):
            eps = [r["eps"] for r in grp]
            ratio = [r["ratio"] for r in grp]
            ax.semilogx(eps, ratio, "o-", ms=4, label=f"n={n}, p={p:g}")
            ax.axhline(grp[0]["target"], color="k", lw=0.6, ls="--")
        ax.set_xlabel(r"$\varepsilon$")
        ax.set_ylabel(r"deficit / $\varepsilon^2$")
        ax.set_title("quadratic deficit rate")
    elif kind == "sharpness":
        for (n, p), grp in sorted(_groups(rows).items()):
            d = [r["deficit"] for r in grp]
            dist = [r["distance"] for r in grp]
            ax.loglog(d, dist, "o", ms=4, label=f"n={n}, p={p:g}")
            lo, hi = min(d), max(d)
            anchor = dist[len(dist) // 2] / (d[len(d) // 2] ** 0.5)
            ax.loglog([lo, hi], [anchor * lo ** 0.5, anchor * hi ** 0.5],
                      "k--", lw=0.6)
        ax.set_xlabel("deficit")
        ax.set_ylabel(r"$L^1$ distance to the model")
        ax.set_title("stability exponent (dashed: slope 1/2)")
    elif kind == "limit":
        for (n, p), grp in sorted(_groups(rows).items()):
            ts = [r["t"] for r in grp]
            ratio = [r["ratio"] for r in grp]
            ax.semilogx(ts, ratio, "o-", ms=4, label=f"n={n}, p={p:g}")
            ax.axhline(grp[0]["target"], color="k", lw=0.6, ls="--")
        ax.set_xlabel("t")
        ax.set_ylabel("deficit / t")
        ax.set_title("short-time deficit ladder")
    elif kind == "equality":
        labels = [f"{r['case']}[n={r['n']}]" for r in rows]
        vals = [max(r["deficit"], 1e-18) for r in rows]
        colors = ["tab:green" if r["passed"] else "tab:red" for r in rows]
        ax.bar(range(len(rows)), vals, color=colors)
        ax.set_yscale("log")
        ax.axhline(1e-9, color="k", lw=0.6, ls="--")
        ax.set_xticks(range(len(rows)))
        ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=6)
        ax.set_ylabel("deficit")
        ax.set_title("equality audit (dashed: 1e-9)")
    else:
        raise ValueError(f"unknown experiment kind {kind!r}")
    if kind != "equality":
        ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
