"""Figure recipes: pure views of the solver's CSV tables.

Each recipe declares which CSV files and columns it needs and how the
panels are laid out; nothing here recomputes physics.  A missing file or
column fails loudly with its name.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


class MissingInputError(RuntimeError):
    """A required CSV file or column is absent."""


def read_table(path: Path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    if not path.is_file():
        raise MissingInputError(f"missing input file: {path}")
    header = None
    rows = []
    for line in path.read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append(line.split(","))
    if header is None:
        raise MissingInputError(f"{path.name}: no header row")
    missing = [c for c in required if c not in header]
    if missing:
        raise MissingInputError(
            f"{path.name}: missing column(s) {', '.join(missing)}")
    if not rows:
        raise MissingInputError(f"{path.name}: no data rows")
    idx = {c: header.index(c) for c in header}
    out = {}
    for col in header:
        vals = [r[idx[col]] for r in rows]
        try:
            out[col] = np.array([float(v) for v in vals])
        except ValueError:
            out[col] = np.array(vals)
    return out


@dataclass(frozen=True)
class FigureRecipe:
    figure_id: str
    inputs: dict  # file name -> tuple of required columns
    description: str

    def load(self, csv_dir: Path):
        return {name: read_table(csv_dir / name, cols)
                for name, cols in self.inputs.items()}


def _save(fig, out_file):
    fig.savefig(out_file, dpi=160)
    plt.close(fig)
    return out_file


# ---------------------------------------------------------------------------
# individual renderers
# ---------------------------------------------------------------------------

def render_fig2(tables, out_file):
    t = tables["fig2_toy_poles.csv"]
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    full = t["rw"] == 0
    for sel, marker, suffix in ((full, "o", ""), (~full, "x", " (RW)")):
        axes[0].plot(t["re_pj"][sel], t["im_pj"][sel], marker, ms=3,
                     label="oscillator-like" + suffix)
        axes[0].plot(t["re_pc"][sel], t["im_pc"][sel], marker, ms=3,
                     label="cavity-like" + suffix)
    axes[0].set_xlabel(r"Re $s$")
    axes[0].set_ylabel(r"Im $s$")
    axes[0].legend(fontsize=7)
    g = t["g_over_omega_j"][full]
    dpj = np.hypot(t["re_pj"][full] - t["re_pj"][~full],
                   t["im_pj"][full] - t["im_pj"][~full])
    dpc = np.hypot(t["re_pc"][full] - t["re_pc"][~full],
                   t["im_pc"][full] - t["im_pc"][~full])
    axes[1].plot(g, dpj, label=r"$|\Delta p_j|$")
    axes[1].plot(g, dpc, label=r"$|\Delta p_c|$")
    axes[1].set_xlabel(r"$g/\omega_j$")
    axes[1].set_ylabel("full vs rotating-wave pole shift")
    axes[1].legend()
    fig.tight_layout()
    return _save(fig, out_file)


def render_fig3(tables, out_file):
    fig, axes = plt.subplots(2, 2, figsize=(9, 7), sharex=False)
    for ax, panel in zip(axes.flat, "abcd"):
        t = tables[f"fig3{panel}_modes.csv"]
        for chi_s in np.unique(t["chi_s"]):
            sel = t["chi_s"] == chi_s
            ax.plot(t["nu_n"][sel], t["kappa_n"][sel], ".", ms=3,
                    label=rf"$\chi_s={chi_s:g}$")
        ax.set_yscale("log")
        ax.set_xlabel(r"$\nu_n$")
        ax.set_ylabel(r"$\kappa_n$")
        ax.set_title(f"panel ({panel})", fontsize=9)
        ax.legend(fontsize=6)
    fig.tight_layout()
    return _save(fig, out_file)


def render_fig4(tables, out_file):
    t = tables["fig4_poles.csv"]
    fig, ax = plt.subplots(figsize=(6, 5))
    labels = sorted(set(t["label"]))
    for lbl in labels:
        sel = t["label"] == lbl
        ax.plot(t["re_s"][sel], t["im_s"][sel], ".", ms=2, label=lbl)
    ax.set_xlabel(r"Re $s$")
    ax.set_ylabel(r"Im $s$")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, out_file)


def render_fig5(tables, out_file):
    t = tables["fig5_poles.csv"]
    counts = sorted(set(int(v) for v in t["n_track"]))
    fig, axes = plt.subplots(2, 2, figsize=(9, 7))
    for ax, n in zip(axes.flat, counts):
        sel = t["n_track"] == n
        for lbl in ("j", "n1"):
            s2 = sel & (t["label"] == lbl)
            ax.plot(t["re_s"][s2], t["im_s"][s2], ".", ms=2, label=lbl)
        ax.set_title(f"{n} mode(s) kept", fontsize=9)
        ax.set_xlabel(r"Re $s$")
        ax.set_ylabel(r"Im $s$")
        ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, out_file)


def render_fig6(tables, out_file):
    t = tables["fig6_decay.csv"]
    chis = np.unique(t["chi_g"])
    fig, axes = plt.subplots(1, len(chis), figsize=(5 * len(chis), 4),
                             squeeze=False)
    for ax, chi_g in zip(axes[0], chis):
        sel = t["chi_g"] == chi_g
        ax.semilogy(t["omega_j"][sel], t["alpha_j"][sel])
        ax.set_xlabel(r"$\omega_j$")
        ax.set_ylabel(r"$\alpha_j$")
        ax.set_title(rf"$\chi_g = {chi_g:g}$", fontsize=9)
    fig.tight_layout()
    return _save(fig, out_file)


def _waterfall(tables, name, out_file):
    t = tables[name]
    chis = np.unique(t["chi_g"])
    omegas = np.unique(t["omega"])
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.5), sharey=True)
    for ax, col, title in ((axes[0], "mag_linear", "linear"),
                           (axes[1], "mag_mspt", "perturbative")):
        grid = np.zeros((len(chis), len(omegas)))
        for i, chi in enumerate(chis):
            sel = t["chi_g"] == chi
            order = np.argsort(t["omega"][sel])
            row = t[col][sel][order]
            peak = row.max()
            grid[i] = row / peak if peak > 0 else row
        ax.imshow(grid, aspect="auto", origin="lower",
                  extent=(omegas.min(), omegas.max(), chis.min(), chis.max()),
                  cmap="inferno")
        ax.set_xlabel(r"$\omega$")
        ax.set_title(title, fontsize=9)
    axes[0].set_ylabel(r"$\chi_g$")
    fig.tight_layout()
    return _save(fig, out_file)


def render_fig7(tables, out_file):
    return _waterfall(tables, "fig7_spectra.csv", out_file)


def render_fig10(tables, out_file):
    return _waterfall(tables, "fig10_spectra.csv", out_file)


def render_fig11(tables, out_file):
    return _waterfall(tables, "fig11_spectra.csv", out_file)


def render_fig8(tables, out_file):
    t = tables["fig8_residues.csv"]
    fig, axes = plt.subplots(1, 3, figsize=(12, 4))
    labels = sorted(set(t["label"]))
    for lbl in labels:
        sel = t["label"] == lbl
        axes[0].plot(t["chi_g"][sel], t["abs_ax"][sel], label=lbl)
        axes[1].plot(t["chi_g"][sel], t["abs_ay"][sel], label=lbl)
        axes[2].plot(t["chi_g"][sel], np.abs(t["u"][sel]), label=lbl)
    for ax, ylab in zip(axes, (r"$|A^X|$", r"$|A^Y|$", r"$|u_l|$")):
        ax.set_xlabel(r"$\chi_g$")
        ax.set_ylabel(ylab)
        ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, out_file)


def render_fig9(tables, out_file):
    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    for ax, panel in zip(axes.flat, "abcd"):
        t = tables[f"fig9{panel}_traces.csv"]
        ax.plot(t["t"], t["x_numeric"], "-", lw=1.0, label="numeric")
        ax.plot(t["t"], t["x_mspt"], ":", lw=1.2, label="perturbative")
        ax.plot(t["t"], t["x_linear"], "-.", lw=0.8, label="linear")
        ax.set_xlabel("t")
        ax.set_ylabel(r"$\langle X \rangle$")
        ax.set_title(f"panel ({panel})", fontsize=9)
        ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, out_file)


_MODE_COLS = ("chi_s", "n", "nu_n", "kappa_n")
_SPECTRA_COLS = ("chi_g", "omega", "mag_linear", "mag_mspt")
_TRACE_COLS = ("t", "x_numeric", "x_mspt", "x_linear")

RECIPES = {
    "fig2": FigureRecipe("fig2", {"fig2_toy_poles.csv":
                                  ("g_over_omega_j", "re_pj", "im_pj",
                                   "re_pc", "im_pc", "rw")},
                         "toy-model pole map and rotating-wave deviation"),
    "fig3": FigureRecipe("fig3", {f"fig3{p}_modes.csv": _MODE_COLS
                                  for p in "abcd"},
                         "decay rate vs frequency, four openings"),
    "fig4": FigureRecipe("fig4", {"fig4_poles.csv":
                                  ("n_track", "chi_g", "label", "re_s", "im_s")},
                         "weak-coupling pole trajectories"),
    "fig5": FigureRecipe("fig5", {"fig5_poles.csv":
                                  ("n_track", "chi_g", "label", "re_s", "im_s")},
                         "pole convergence under kernel truncation"),
    "fig6": FigureRecipe("fig6", {"fig6_decay.csv":
                                  ("chi_g", "omega_j", "alpha_j")},
                         "spontaneous decay rate sweeps"),
    "fig7": FigureRecipe("fig7", {"fig7_spectra.csv": _SPECTRA_COLS},
                         "oscillator spectra waterfall"),
    "fig8": FigureRecipe("fig8", {"fig8_residues.csv":
                                  ("chi_g", "label", "abs_ax", "abs_ay", "u")},
                         "residues and hybridization weights"),
    "fig9": FigureRecipe("fig9", {f"fig9{p}_traces.csv": _TRACE_COLS
                                  for p in "abcd"},
                         "linear / perturbative / numeric trace comparison"),
    "fig10": FigureRecipe("fig10", {"fig10_spectra.csv": _SPECTRA_COLS},
                          "output-field spectra waterfall"),
    "fig11": FigureRecipe("fig11", {"fig11_spectra.csv": _SPECTRA_COLS},
                          "output-field spectra, wide sweep"),
}

_RENDERERS = {
    "fig2": render_fig2, "fig3": render_fig3, "fig4": render_fig4,
    "fig5": render_fig5, "fig6": render_fig6, "fig7": render_fig7,
    "fig8": render_fig8, "fig9": render_fig9, "fig10": render_fig10,
    "fig11": render_fig11,
}


def render(figure_id: str, csv_dir, out_file) -> str:
    """Render one figure from the CSV directory; returns the output path."""
    if figure_id not in RECIPES:
        raise MissingInputError(
            f"unknown figure id '{figure_id}'; known: {', '.join(sorted(RECIPES))}")
    recipe = RECIPES[figure_id]
    tables = recipe.load(Path(csv_dir))
    return _RENDERERS[figure_id](tables, str(out_file))
