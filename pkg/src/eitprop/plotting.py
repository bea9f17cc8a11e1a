"""Optional PNG rendering of solution fields next to the CSV output."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_fields(fields: dict, theta0, out_dir, *, suffix="", title="") -> list:
    """One figure per method: theta(t) at every depth, input shape dotted."""
    out_dir = Path(out_dir)
    paths = []
    for name, fld in fields.items():
        t = fld.grid.times
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        ax.plot(t, theta0, ":", color="k", lw=1.0, label="input")
        for k, z in enumerate(fld.z_values):
            ax.plot(t, fld.theta[k], lw=1.2, label=f"z = {z:g}")
        ax.set_xlabel(r"$\Gamma t$")
        ax.set_ylabel(r"$\theta$")
        ax.set_title(f"{title} {name}".strip())
        ax.legend(frameon=False, fontsize=8)
        fig.tight_layout()
        path = out_dir / f"{name}{suffix}.png"
        fig.savefig(path, dpi=120, metadata={"Software": None})
        plt.close(fig)
        paths.append(path)
    return paths
