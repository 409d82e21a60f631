"""Figure rendering for the report path.

Each experiment kind maps to one or two small matplotlib figures written
as PNG next to the delimited output.  Rendering is optional and never
affects the numerical artifacts.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, out: Path, name: str, files: list[str]) -> None:
    path = out / name
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    files.append(name)


def _plot_mass_series(series, out: Path, files: list[str],
                      name: str = "masses.png", title: str = "sheet masses"):
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    n = series.sheet_masses.shape[1]
    for k in range(n):
        ax.plot(series.times, series.sheet_masses[:, k], label=f"sheet {k}")
        ax.plot(series.times, series.far_masses[:, k], "--", lw=0.9,
                label=f"far, sheet {k}")
    ax.set_xlabel("t")
    ax.set_ylabel("mass")
    ax.set_title(title)
    ax.legend(fontsize=7)
    _save(fig, out, name, files)


def render(kind: str, figure_data, out: Path) -> list[str]:
    files: list[str] = []
    for name, obj in figure_data:
        if name == "mass_series":
            _plot_mass_series(obj, out, files)
        elif name == "transmission":
            rep = obj
            _plot_mass_series(rep.forward_series, out, files,
                              "masses_forward.png", "forward sheet masses")
            if rep.backward_series is not None:
                _plot_mass_series(rep.backward_series, out, files,
                                  "masses_backward.png",
                                  "backward sheet masses")
            fig, ax = plt.subplots(figsize=(4.6, 3.2))
            ax.plot(rep.t_samples, rep.residuals_forward, "o-",
                    label="forward")
            if rep.residuals_backward.size:
                ax.plot(rep.t_samples, rep.residuals_backward, "s--",
                        label="backward (mirrored)")
            ax.axhline(rep.spec.eps, color="k", lw=0.8, ls=":",
                       label="eps target")
            ax.set_xlabel("t")
            ax.set_ylabel("residual / ||w0||")
            ax.legend(fontsize=8)
            _save(fig, out, "residuals.png", files)
        elif name == "survey":
            survey = obj
            n = survey["num_sheets"]
            mat = np.array([survey["far_matrix"][k] for k in sorted(
                survey["far_matrix"])])
            fig, ax = plt.subplots(figsize=(3.6, 3.2))
            im = ax.imshow(mat, cmap="viridis", vmin=0.0)
            ax.set_xlabel("arrival sheet")
            ax.set_ylabel("launch sheet")
            ax.set_xticks(range(n))
            ax.set_yticks(range(mat.shape[0]))
            for (i, j), v in np.ndenumerate(mat):
                ax.text(j, i, f"{v:.3f}", ha="center", va="center",
                        color="w", fontsize=7)
            fig.colorbar(im, shrink=0.85)
            _save(fig, out, "far_matrix.png", files)
        elif name == "spectrum":
            res = obj
            fig, ax = plt.subplots(figsize=(4.6, 3.2))
            idx = np.arange(len(res["computed"]))
            ax.plot(idx, res["oracle"][:len(idx)], "k_", ms=18,
                    label="separable oracle")
            ax.plot(idx, res["computed"], "o", label=f"h = {res['h']:g}")
            ax.set_xlabel("distinct mode index")
            ax.set_ylabel("eigenvalue")
            ax.legend(fontsize=8)
            _save(fig, out, "spectrum.png", files)
        elif name in ("decay_fit", "tail_decay"):
            fig, ax = plt.subplots(figsize=(4.6, 3.2))
            if name == "decay_fit":
                fit = obj
                ax.loglog(fit.scales, fit.values, "o-",
                          label=f"slope {fit.slope:.2f}")
                ax.set_ylabel("|Psi| at the forbidden ray")
            else:
                ax.loglog(obj.fit.scales, obj.tail_mass, "o-",
                          label=f"mass slope {obj.fit.slope:.2f}")
                ax.loglog(obj.grad_fit.scales, obj.grad_tail_mass, "s--",
                          label=f"gradient slope {obj.grad_fit.slope:.2f}")
                ax.set_ylabel("tail mass")
            ax.set_xlabel("1 + s t")
            ax.legend(fontsize=8)
            _save(fig, out, "decay.png", files)
        elif name == "localization":
            res = obj
            fig, ax = plt.subplots(figsize=(4.2, 3.2))
            ax.loglog(res.s_values, res.integrals, "o-")
            ax.set_xlabel("s")
            ax.set_ylabel("time-integrated source norm")
            _save(fig, out, "localization_error.png", files)
    return files
