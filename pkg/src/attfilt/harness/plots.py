"""Static SVG figures of a run: principal angle and angular-velocity error."""

from __future__ import annotations

from pathlib import Path

from matplotlib.figure import Figure


def emit_plots(report, out_dir) -> dict:
    """Write ``phi_vs_t.svg`` and ``omega_vs_t.svg`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    fig = Figure(figsize=(6.4, 3.6))
    ax = fig.add_subplot()
    ax.plot(report.t, report.phi, lw=1.0)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(r"$\phi$ [rad]")
    ax.set_title("Principal angle of the attitude estimation error")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    phi_path = out / "phi_vs_t.svg"
    fig.savefig(phi_path, metadata={"Date": None})

    fig = Figure(figsize=(6.4, 3.6))
    ax = fig.add_subplot()
    for j, name in enumerate(("x", "y", "z")):
        ax.plot(report.t, report.omega[:, j], lw=1.0, label=rf"$\omega_{name}$")
    ax.set_xlabel("t [s]")
    ax.set_ylabel(r"$\omega$ [rad/s]")
    ax.set_title("Angular velocity estimation error")
    ax.legend(loc="upper right")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    omega_path = out / "omega_vs_t.svg"
    fig.savefig(omega_path, metadata={"Date": None})

    return {"phi_plot": phi_path, "omega_plot": omega_path}
