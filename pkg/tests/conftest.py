"""Shared draw helpers for the test suite.

Random inputs are drawn with seeded generators and rejection rules that
keep them inside the validity domain of the formulas: levels separated,
spectral parameters away from the level poles and from each other.
"""
import numpy as np

from rgsolve.model import ModelParams, make_spectral_set


def draw_epsilons(rng, L, lo, hi, min_sep=0.05):
    """L level positions uniform in [lo, hi] with pairwise gaps >= min_sep."""
    while True:
        eps = np.sort(rng.uniform(lo, hi, size=L))
        if L == 1 or np.diff(eps).min() >= min_sep:
            return eps


def draw_offshell(rng, model, N, avoid=(), pole_margin=0.05, radius=1.5):
    """N random complex rapidities usable as an off-shell ket.

    Kept away from the levels (poles of every kernel), from each other,
    and from the values in `avoid` (the bra set, so determinant routes
    with 1/(v_a - w_b) entries stay finite).
    """
    avoid = np.asarray(list(avoid), dtype=complex)
    center = float(np.mean(model.epsilons))
    vals = []
    while len(vals) < N:
        z = complex(center + rng.uniform(-radius, radius),
                    rng.uniform(0.2, 1.0) * rng.choice([-1.0, 1.0]))
        near_pole = np.abs(model.epsilons - z).min() < pole_margin
        near_old = vals and min(abs(z - w) for w in vals) < pole_margin
        near_avoid = len(avoid) and np.abs(avoid - z).min() < pole_margin
        if not (near_pole or near_old or near_avoid):
            vals.append(z)
    return make_spectral_set(vals)


def pairwise_deviation(values):
    """Largest |x - y| over all pairs, relative to the largest magnitude."""
    vals = [complex(v) for v in values]
    scale = max(1e-300, max(abs(v) for v in vals))
    worst = 0.0
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            worst = max(worst, abs(vals[i] - vals[j]) / scale)
    return worst
