"""Figure rendering for parameter sweeps.

Only the sweep path imports this module, so matplotlib stays out of every
other code path; the Agg backend is forced because the CLI never has a
display to talk to.
"""

from __future__ import annotations

import numpy as np


def render_sweep_figures(eps_values, delta_values, trace_grid, entropy_grid,
                         stem: str) -> list[str]:
    """Write the three sweep heatmaps next to the delimited output.

    Grids are indexed [delta_index, eps_index].  Returns the written paths:
    ``<stem>_trace.png``, ``<stem>_defect.png``, ``<stem>_entropy.png``.
    The entropy panel masks points with no completion.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    eps = np.asarray(eps_values, dtype=float)
    delta = np.asarray(delta_values, dtype=float)
    trace = np.asarray(trace_grid, dtype=float)
    panels = [
        ("trace", trace, "completion candidate trace"),
        ("defect", 1.0 - trace, "trace defect"),
        ("entropy", np.asarray(entropy_grid, dtype=float), "completion entropy"),
    ]
    extent = (float(eps[0]), float(eps[-1]), float(delta[0]), float(delta[-1]))
    written = []
    for tag, grid, title in panels:
        fig, ax = plt.subplots(figsize=(5.2, 4.4))
        image = ax.imshow(np.ma.masked_invalid(grid), origin="lower",
                          extent=extent, aspect="equal")
        fig.colorbar(image, ax=ax)
        ax.set_xlabel("eps")
        ax.set_ylabel("delta")
        ax.set_title(title)
        fig.tight_layout()
        path = f"{stem}_{tag}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
