"""Statistical kernels: evenness, z-score outliers, Jensen-Shannon divergence.

These are the scoring primitives every introspection analysis is built on.
All functions are pure and operate on plain numpy arrays / dicts.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "evenness",
    "flag_outliers",
    "jensen_shannon_divergence",
    "jsd_contributions",
    "normalize_row",
]


def evenness(p, n: int | None = None) -> float:
    """Normalized Shannon entropy of a discrete distribution, in [0, 1].

    evenness = -sum_{p_i > 0} p_i * ln(p_i) / ln(n)

    1 means the distribution is uniform over the n categories, 0 means all
    mass sits on a single category.

    Args:
        p: probability vector (entries >= 0, summing to 1 within 1e-9).
        n: number of categories to normalize by; defaults to len(p).
           By convention the result is 0.0 when n <= 1 (a one-category
           distribution has no spread to measure).
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("evenness expects a non-empty 1-D probability vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("evenness expects finite, non-negative probabilities")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities must sum to 1 (got {total!r})")
    if n is None:
        n = p.size
    if n <= 1:
        return 0.0
    pos = p[p > 0]
    h = float(-(pos * np.log(pos)).sum())
    return h / math.log(n)


def flag_outliers(values: dict, lam: float):
    """z-score outlier rule over a map of subject -> value.

    Flags subjects with |x - mean| > lam * std, using the population
    standard deviation. The inequality is strict, so a zero-variance map
    (or fewer than 2 subjects) produces no outliers.

    Returns:
        (high, low, mean, std): high/low are lists of subjects sorted by
        decreasing |x - mean|, ties broken by subject order.
    """
    if lam <= 0 or not math.isfinite(lam):
        raise ValueError("lam must be a positive finite number")
    if len(values) < 2:
        return [], [], float("nan"), float("nan")
    subjects = list(values.keys())
    x = np.array([values[s] for s in subjects], dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("outlier detection expects finite values")
    mean = float(x.mean())
    std = float(x.std())  # population std
    if std == 0.0:
        return [], [], mean, std
    dev = x - mean
    flagged = np.abs(dev) > lam * std
    order = np.argsort(-np.abs(dev), kind="stable")
    high = [subjects[i] for i in order if flagged[i] and dev[i] > 0]
    low = [subjects[i] for i in order if flagged[i] and dev[i] < 0]
    return high, low, mean, std


def _kl_terms(p: np.ndarray, m: np.ndarray) -> np.ndarray:
    terms = np.zeros_like(p)
    mask = p > 0
    terms[mask] = p[mask] * np.log2(p[mask] / m[mask])
    return terms


def jensen_shannon_divergence(p, q) -> float:
    """Jensen-Shannon divergence with base-2 logarithm, in [0, 1].

    Symmetric in (p, q); 0 iff p == q, 1 iff the supports are disjoint.
    """
    return float(jsd_contributions(p, q).sum())


def jsd_contributions(p, q) -> np.ndarray:
    """Per-index contributions to the base-2 JSD (they sum to the JSD).

    contribution_i = 0.5 * (p_i*log2(p_i/m_i) + q_i*log2(q_i/m_i)),
    with m = (p + q) / 2. Useful to attribute a divergence to the
    indexes (here: actions) responsible for it.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError("expected two 1-D distributions of equal length")
    for v in (p, q):
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("expected finite, non-negative probabilities")
        if abs(float(v.sum()) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")
    m = 0.5 * (p + q)
    return 0.5 * (_kl_terms(p, m) + _kl_terms(q, m))


def normalize_row(row, eps: float = 1e-6) -> np.ndarray:
    """Map an arbitrary real-valued row to a probability distribution.

    Shift-by-min plus eps, then divide by the sum. Invariant to adding a
    constant to the whole row; an all-equal row maps to the uniform
    distribution (eps keeps the sum positive).
    """
    row = np.asarray(row, dtype=float)
    if row.ndim != 1 or row.size == 0:
        raise ValueError("expected a non-empty 1-D row")
    if not np.all(np.isfinite(row)):
        raise ValueError("expected finite values")
    shifted = row - row.min() + eps
    return shifted / shifted.sum()
