"""Figure rendering for profile curves and verification reports.

Profiles are drawn in the (x, y) plane with event markers; the optional
overlay shows the limit curve shifted by (0, c), which the extended curves
approach as c grows.  Files are written via matplotlib (SVG by default).
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

import numpy as np  # noqa: E402

CSV_HEADER = ["s", "x", "y", "xp", "yp", "segment", "chart"]


def write_curve_csv(path, rows):
    """Write resampled curve rows; floats printed with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for st, seg_idx, chart in rows:
            w.writerow([f"{st.s:.17g}", f"{st.x:.17g}", f"{st.y:.17g}",
                        f"{st.xp:.17g}", f"{st.yp:.17g}", str(seg_idx), chart])


def read_curve_csv(path):
    """Read a curve CSV; returns a dict of arrays (segment as int array)."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or [h.strip() for h in header] != CSV_HEADER:
            raise ValueError(f"bad or missing CSV header in {path}")
        cols = {k: [] for k in CSV_HEADER}
        for row in r:
            if not row:
                continue
            for k, v in zip(CSV_HEADER, row):
                cols[k].append(v)
    out = {k: np.array([float(v) for v in cols[k]])
           for k in ("s", "x", "y", "xp", "yp")}
    out["segment"] = np.array([int(v) for v in cols["segment"]])
    out["chart"] = cols["chart"]
    return out


def render_profile(data, out_path, events=None, overlay=None, title=None):
    """Render a profile curve to a figure file (format from the extension).

    ``data`` is the dict from read_curve_csv; ``events`` a list of event
    dicts ({kind, s, x, y, ...}); ``overlay`` an optional (x, y, label)
    triple for the shifted limit curve.
    """
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    seg_ids = data["segment"]
    for k in sorted(set(int(v) for v in seg_ids)):
        mask = seg_ids == k
        chart = data["chart"][int(np.argmax(mask))]
        style = "-" if chart == "arc-length" else "--"
        ax.plot(data["x"][mask], data["y"][mask], style, lw=1.2,
                color="C0" if chart == "arc-length" else "C1")
    if events:
        marker = {"AxisContact": "v", "YAxisContact": "<", "OriginContact": "o"}
        for ev in events:
            ax.plot([ev["x"]], [ev["y"]], marker.get(ev["kind"], "x"),
                    color="C3", ms=7, zorder=5)
            ax.annotate(ev["kind"], (ev["x"], ev["y"]),
                        textcoords="offset points", xytext=(4, 6), fontsize=7)
    if overlay is not None:
        ox, oy, label = overlay
        ax.plot(ox, oy, ":", color="C2", lw=1.4, label=label)
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.axhline(0.0, color="0.6", lw=0.6)
    ax.set_aspect("equal", adjustable="datalim")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_report_figure(report, out_path):
    """One diagnostic figure per verification report, next to its JSON."""
    check = report.get("check", "")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    obs = report.get("observed", {})
    if check.startswith("thm33"):
        eps, err = obs["eps"], obs["E"]
        ax.loglog(eps, err, "o-", label="remainder sup-norm")
        slope = obs["slope"]
        ref = [err[0] * (e / eps[0]) ** slope for e in eps]
        ax.loglog(eps, ref, "--", label=f"fit slope {slope:.2f}")
        ax.set_xlabel("1/c")
        ax.set_ylabel("E_K")
        ax.legend(fontsize=8)
    elif check.startswith("thm32"):
        per_c = obs.get("per_c", {})
        cs = sorted(per_c)
        ax.semilogx(cs, [per_c[c]["max_ratio"] for c in cs], "o-")
        ax.axhline(report["bound_or_expected"]["ratio_limit"], color="C3", ls="--")
        ax.set_xlabel("c")
        ax.set_ylabel("max (Ftil^2+Gtil^2) / bound")
    elif check.startswith("thm31"):
        runs = obs.get("runs", [])
        ax.bar(range(len(runs)), [r["observed"]["min_y"] for r in runs],
               color="C0")
        ax.axhline(0.0, color="C3")
        ax.set_xticks(range(len(runs)))
        ax.set_xticklabels([f"run {i}" for i in range(len(runs))], fontsize=8)
        ax.set_ylabel("min y")
    elif check.startswith("prop43"):
        ax.bar([0, 1], [obs["slope_sq"], report["bound_or_expected"]["slope_sq"]],
               color=["C0", "C2"])
        ax.set_xticks([0, 1])
        ax.set_xticklabels(["measured", "l/(l+m)"])
        ax.set_ylabel("x'^2 at origin")
    elif check.startswith("periods"):
        vals = [obs["int_cos"], obs["int_sin"], obs["double_int"], obs["signed_area"]]
        ax.bar(range(4), vals, color="C0")
        ax.set_xticks(range(4))
        ax.set_xticklabels(["int cos", "int sin", "double int", "area"], fontsize=8)
    ax.set_title(check, fontsize=10)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def gamma_overlay(acc, s_values, c):
    """Points of the limit curve shifted by (0, c)."""
    xs = np.array([acc._cos.prefix(s) for s in s_values])
    ys = np.array([-acc._sin.prefix(s) for s in s_values]) + c
    return xs, ys
