"""Matplotlib rendering of the report CSV series."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_PNG_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)
    return path


def render_wtp(path: Path, thetas, wtp) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(thetas, wtp, color="tab:blue")
    ax.set_xlabel(r"sender type $\theta$")
    ax.set_ylabel("willingness to pay for full access")
    ax.set_title("First-best value of information")
    ax.grid(alpha=0.3)
    return _save(fig, path)


def render_utility(path: Path, thetas, utility, value, knots) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(thetas, value, color="tab:green", label="value of assigned bundle")
    ax.plot(thetas, utility, color="tab:blue", label="indirect utility")
    for k in knots:
        ax.axvline(k, color="gray", linestyle=":", linewidth=0.8)
    ax.set_xlabel(r"sender type $\theta$")
    ax.set_ylabel("payoff")
    ax.set_title("Optimal screening menu")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def render_coercion(path: Path, thetas, base, coerced, outside) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(thetas, base, color="tab:blue", label="no coercion")
    ax.plot(thetas, coerced, color="tab:red", label="with coercion")
    ax.plot(thetas, outside, color="gray", linestyle="--", label="threat value")
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel(r"sender type $\theta$")
    ax.set_ylabel("indirect utility")
    ax.set_title("Coercive vs screening menu")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def render_prior_shift(path: Path, thetas, base, shifted) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(thetas, base, color="tab:blue", label="original prior")
    ax.plot(thetas, shifted, color="tab:orange", label="reduced prior")
    ax.set_xlabel(r"sender type $\theta$")
    ax.set_ylabel("indirect utility")
    ax.set_title("Prior reduction: sender surplus")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)
