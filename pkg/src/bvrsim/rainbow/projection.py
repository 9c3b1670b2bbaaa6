"""Categorical projection of Bellman-updated return atoms onto the fixed
support: each shifted atom's mass splits linearly between the two bracketing
support atoms (all of it when the shift lands exactly on one)."""
from __future__ import annotations

import numpy as np


def project_distribution(
    probs: np.ndarray,
    rewards: np.ndarray,
    gammas: np.ndarray,
    dones: np.ndarray,
    support: np.ndarray,
) -> np.ndarray:
    """Batched projection. probs (B, K); rewards/gammas/dones (B,).

    Terminal transitions collapse to the clamped reward atom. Total mass is
    preserved exactly up to float64 addition order.
    """
    probs = np.asarray(probs, dtype=np.float64)
    support = np.asarray(support, dtype=np.float64)
    batch, k = probs.shape
    v_min, v_max = float(support[0]), float(support[-1])
    dz = (v_max - v_min) / (k - 1) if k > 1 else 1.0

    cont = (1.0 - np.asarray(dones, dtype=np.float64))[:, None]
    tz = np.asarray(rewards, dtype=np.float64)[:, None] + cont * np.asarray(gammas, dtype=np.float64)[:, None] * support[None, :]
    np.clip(tz, v_min, v_max, out=tz)

    b = (tz - v_min) / dz
    np.clip(b, 0.0, k - 1, out=b)
    lo = np.floor(b)
    hi = np.ceil(b)
    frac_hi = b - lo
    frac_lo = hi - b
    exact = lo == hi  # integer landing takes the whole mass

    out = np.zeros((batch, k), dtype=np.float64)
    rows = np.repeat(np.arange(batch) * k, k)
    np.add.at(out.ravel(), rows + lo.astype(np.int64).ravel(), (probs * (frac_lo + exact)).ravel())
    np.add.at(out.ravel(), rows + hi.astype(np.int64).ravel(), (probs * frac_hi).ravel())
    return out


def project_target(
    probs: np.ndarray,
    reward: float,
    gamma_eff: float,
    done: bool,
    support: np.ndarray,
) -> np.ndarray:
    """Single-distribution convenience wrapper."""
    return project_distribution(
        np.asarray(probs, dtype=np.float64)[None, :],
        np.array([reward]),
        np.array([gamma_eff]),
        np.array([1.0 if done else 0.0]),
        support,
    )[0]
