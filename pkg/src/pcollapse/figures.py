"""Render scenario reports to PNG figures.

Figures are a presentation layer over :class:`~pcollapse.harness.RunReport`:
they read only the flat record dictionaries, never recompute physics, so a
report loaded from disk renders identically to a fresh one.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness import FIG2_PROBES, FIG4_MODES, RunReport  # noqa: E402

_TSIRELSON = 2.0 * np.sqrt(2.0)


def _points(report: RunReport, **filters) -> list[dict]:
    out = []
    for rec in report.records:
        if rec.get("kind") != "point":
            continue
        if all(rec.get(k) == v for k, v in filters.items()):
            out.append(rec)
    return out


def _matrix_from_record(rec: dict, prefix: str, n: int) -> np.ndarray | None:
    if f"{prefix}_re_00" not in rec:
        return None
    m = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            m[i, j] = rec[f"{prefix}_re_{i}{j}"] + 1j * rec[f"{prefix}_im_{i}{j}"]
    return m


def _bar3d(ax, matrix: np.ndarray, title: str, zlim: tuple[float, float]) -> None:
    n = matrix.shape[0]
    xs, ys = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    xs = xs.ravel()
    ys = ys.ravel()
    values = matrix.ravel()
    ax.bar3d(xs - 0.35, ys - 0.35, np.zeros_like(values), 0.7, 0.7, values,
             shade=True, color="#4878cf")
    ax.set_zlim(*zlim)
    ax.set_title(title, fontsize=9)
    ax.set_xticks(range(n))
    ax.set_yticks(range(n))
    ax.tick_params(labelsize=6)


def _save(fig, out_dir: Path, name: str) -> Path:
    path = out_dir / name
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_fig2(report: RunReport, out_dir: Path) -> list[Path]:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for probe in FIG2_PROBES:
        pts = _points(report, probe=probe)
        ps = [r["p"] for r in pts]
        ax1.plot(ps, [r["fidelity_recovered"] for r in pts],
                 marker="o", label=probe)
    ax1.set_xlabel("measurement strength p")
    ax1.set_ylabel("recovered fidelity")
    ax1.set_title("recovery fidelity by probe")
    ax1.legend()
    ax1.grid(alpha=0.3)

    pts = _points(report, probe="D")
    ps = [r["p"] for r in pts]
    for comp, style in (("x", "-o"), ("y", "-s"), ("z", "-^")):
        ax2.plot(ps, [r[f"bloch_pm_{comp}"] for r in pts], style, label=comp)
    ax2.set_xlabel("measurement strength p")
    ax2.set_ylabel("Bloch component after measurement")
    ax2.set_title("partial collapse of the D probe")
    ax2.legend()
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    return [_save(fig, out_dir, "fig2.png")]


def render_fig3(report: RunReport, out_dir: Path) -> list[Path]:
    paths = []
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    pm = _points(report, channel="pm")
    ps = [r["p"] for r in pm]
    for key, label in (("00", "II"), ("33", "ZZ")):
        ax1.plot(ps, [r[f"chi_norm_re_{key}"] for r in pm], "o",
                 label=f"measured {label}")
        traces = [r["chi_trace"] for r in pm]
        analytic = [r[f"chi_analytic_re_{key}"] / t for r, t in zip(pm, traces)]
        ax1.plot(ps, analytic, "--", label=f"closed form {label}")
    ax1.set_xlabel("measurement strength p")
    ax1.set_ylabel("normalized chi entry")
    ax1.set_title("measurement channel diagonal")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)

    rev = _points(report, channel="reverse")
    ps = [r["p"] for r in rev]
    ax2.plot(ps, [r["fidelity_vs_identity"] for r in rev], "-o")
    ax2.axhline(0.93, color="gray", linestyle=":")
    ax2.set_xlabel("measurement strength p")
    ax2.set_ylabel("process fidelity vs identity")
    ax2.set_title("measure-then-reverse channel")
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    paths.append(_save(fig, out_dir, "fig3.png"))

    grid = sorted({r["p"] for r in pm})
    picks = sorted({grid[0], grid[len(grid) // 2], grid[-1]})
    fig = plt.figure(figsize=(4 * len(picks), 7))
    for col, p in enumerate(picks):
        for row, channel in enumerate(("pm", "reverse")):
            rec = next(r for r in _points(report, channel=channel)
                       if r["p"] == p)
            chi = _matrix_from_record(rec, "chi_norm", 4)
            ax = fig.add_subplot(2, len(picks), row * len(picks) + col + 1,
                                 projection="3d")
            _bar3d(ax, chi.real, f"{channel}, p={p:g}", (-0.1, 1.0))
    fig.tight_layout()
    paths.append(_save(fig, out_dir, "fig3_chi.png"))
    return paths


def render_fig4(report: RunReport, out_dir: Path) -> list[Path]:
    paths = []
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for mode in FIG4_MODES:
        pts = _points(report, mode=mode)
        ps = [r["p"] for r in pts]
        ax1.plot(ps, [r["concurrence"] for r in pts], "-o", label=mode)
        ax2.plot(ps, [r["success_probability"] for r in pts], "-o",
                 label=mode)
    pm = _points(report, mode="pm_only")
    ax1.plot([r["p"] for r in pm], [r["concurrence_theory"] for r in pm],
             "k--", label="closed form (pm)")
    ax1.set_xlabel("measurement strength p")
    ax1.set_ylabel("concurrence")
    ax1.set_title("entanglement under collapse and reversal")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)
    ax2.set_xlabel("measurement strength p")
    ax2.set_ylabel("success probability")
    ax2.set_title("protocol success probability")
    ax2.legend(fontsize=8)
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    paths.append(_save(fig, out_dir, "fig4.png"))

    with_rho = [r for r in _points(report) if "rho_re_00" in r]
    snapshot_ps = sorted({r["p"] for r in with_rho})[:3]
    if snapshot_ps:
        fig = plt.figure(figsize=(4 * len(snapshot_ps), 10))
        for col, p in enumerate(snapshot_ps):
            for row, mode in enumerate(FIG4_MODES):
                rec = next(r for r in with_rho
                           if r["p"] == p and r["mode"] == mode)
                rho = _matrix_from_record(rec, "rho", 4)
                ax = fig.add_subplot(3, len(snapshot_ps),
                                     row * len(snapshot_ps) + col + 1,
                                     projection="3d")
                _bar3d(ax, rho.real, f"{mode}, p={p:g}", (-0.1, 0.6))
        fig.tight_layout()
        paths.append(_save(fig, out_dir, "fig4_matrices.png"))
    return paths


def render_chsh(report: RunReport, out_dir: Path) -> list[Path]:
    pts = _points(report)
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = [r["variant"] for r in pts]
    values = [r["s"] for r in pts]
    errors = [r.get("s_sampled_std", 0.0) for r in pts]
    ax.bar(labels, values, yerr=errors, capsize=4, color="#4878cf")
    ax.axhline(2.0, color="red", linestyle="--", label="classical bound")
    ax.axhline(_TSIRELSON, color="gray", linestyle=":",
               label="quantum bound")
    ax.set_ylabel("S")
    ax.set_ylim(0, 3.0)
    ax.set_title("CHSH value of recovered states")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return [_save(fig, out_dir, "chsh.png")]


_RENDERERS = {
    "fig2": render_fig2,
    "fig3": render_fig3,
    "fig4": render_fig4,
    "chsh": render_chsh,
}


def render_report(report: RunReport, out_dir) -> list[Path]:
    """Write the PNG figures for one report; returns the created paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _RENDERERS[report.scenario](report, out)
