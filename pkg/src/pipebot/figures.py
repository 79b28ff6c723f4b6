"""Report figures rendered next to the telemetry files.

matplotlib is imported lazily inside the render functions and forced onto
the Agg backend, so the core library stays import-light and headless runs
never touch a display.  Figures are a reporting convenience; nothing in the
numerical pipeline depends on them.
"""

from __future__ import annotations

import math


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def run_report(traj, sc, metrics, path: str) -> str:
    """Render the four-panel run report (velocity, angles, rates, torques).

    Returns the path written.
    """
    plt = _pyplot()
    t = traj.t
    deg = 180.0 / math.pi
    vd = sc.controller.desired_velocity

    fig, axes = plt.subplots(2, 2, figsize=(11, 7), constrained_layout=True)

    ax = axes[0, 0]
    ax.plot(t, traj.states[:, 1], lw=1.2)
    ax.axhline(vd, color="k", ls=":", lw=0.8, label=f"setpoint {vd:g} m/s")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("v [m/s]")
    ax.set_title("axial velocity")
    ax.legend(loc="lower right", fontsize=8)

    ax = axes[0, 1]
    ax.plot(t, traj.states[:, 2] * deg, lw=1.2, label="phi")
    ax.plot(t, traj.states[:, 4] * deg, lw=1.2, label="psi")
    ax.axhspan(-1.0, 1.0, color="0.9")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("angle [deg]")
    ax.set_title("attitude angles")
    ax.legend(loc="upper right", fontsize=8)

    ax = axes[1, 0]
    ax.plot(t, traj.states[:, 3] * deg, lw=1.0, label="phi rate")
    ax.plot(t, traj.states[:, 5] * deg, lw=1.0, label="psi rate")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("rate [deg/s]")
    ax.set_title("attitude rates")
    ax.legend(loc="upper right", fontsize=8)

    ax = axes[1, 1]
    for j, style in enumerate(("-", "--", "-.")):
        ax.plot(t, traj.torques[:, j] * 1e3, style, lw=1.0,
                label=f"tau{j + 1}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("torque [N·mm]")
    ax.set_title("wheel torques")
    ax.legend(loc="upper right", fontsize=8)

    peak = metrics.peak_torque
    fig.suptitle(
        f"phi0={sc.phi0_deg:g} deg, psi0={sc.psi0_deg:g} deg, "
        f"Vd={vd:g} m/s, peak |tau|={peak:.3g} N·m",
        fontsize=10,
    )
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def sweep_report(rows: list[dict], path: str) -> str:
    """Scatter of settling outcomes over the initial-attitude plane.

    One marker per run at (phi0, psi0), colored by the slower of the two
    attitude settling times; runs that never settled are drawn as crosses.
    """
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 6), constrained_layout=True)

    ok_x, ok_y, ok_c, bad_x, bad_y = [], [], [], [], []
    for r in rows:
        ts = (r["phi_settle_s"], r["psi_settle_s"])
        if r["settled"]:
            ok_x.append(r["phi0_deg"])
            ok_y.append(r["psi0_deg"])
            ok_c.append(max(ts))
        else:
            bad_x.append(r["phi0_deg"])
            bad_y.append(r["psi0_deg"])
    if ok_x:
        sc = ax.scatter(ok_x, ok_y, c=ok_c, s=60, cmap="viridis")
        fig.colorbar(sc, ax=ax, label="attitude settling time [s]")
    if bad_x:
        ax.scatter(bad_x, bad_y, marker="x", color="red", s=70,
                   label="not settled")
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("phi0 [deg]")
    ax.set_ylabel("psi0 [deg]")
    ax.set_title(f"sweep outcomes ({len(rows)} runs)")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
