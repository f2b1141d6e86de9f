"""Optional figures for CLI reports (needs the ``figures`` extra: matplotlib)."""
from __future__ import annotations

import os


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise RuntimeError("figures need matplotlib; install the 'figures' extra") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def volume_figure(vs, out_dir: str, name: str = "volume.png", nondiff=None) -> str:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(vs.radii, vs.V, lw=1.2)
    if nondiff is not None:
        for r in nondiff.radii:
            ax.axvline(r, color="tab:red", lw=0.8, ls="--")
    ax.set_xlabel("r")
    ax.set_ylabel("V(r)")
    path = os.path.join(out_dir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def jump_figure(profile, out_dir: str, name: str = "jumps.png") -> str:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(profile.radii, profile.jump, lw=1.0, label="left - right slope")
    ax.plot(profile.radii, 4 * profile.noise, lw=0.8, color="grey", label="4 x noise")
    ax.set_xlabel("r")
    ax.legend(loc="upper right")
    path = os.path.join(out_dir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def convergence_figure(report, out_dir: str, name: str = "convergence.png") -> str:
    plt = _pyplot()
    ks = [row[0] for row in report.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(ks, [max(row[2], 1e-16) for row in report.rows], "o-", label="flat distance")
    ax.semilogy(ks, [max(row[3], 1e-16) for row in report.rows], "s-", label="mass gap")
    ax.set_xlabel("k")
    ax.legend()
    path = os.path.join(out_dir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
