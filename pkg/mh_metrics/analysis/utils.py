"""Shared analysis utilities: off-diagonal block masses and level span sums."""

from __future__ import annotations

import numpy as np


def block_masses(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Upper/lower off-diagonal block masses for every cut i = 1 … r−1.

    G1[i-1] = Pr(X ≤ i, Y ≥ i+1), G2[i-1] = Pr(X ≥ i+1, Y ≤ i).

    The lower block is read from the transpose so both blocks are summed in
    mirrored order: a symmetric table gives bitwise-equal G1 and G2. Cells are
    summed directly (not via cumulative differences) so empty blocks stay
    exactly zero.
    """
    r = p.shape[0]
    pt = p.T
    g1 = np.empty(r - 1)
    g2 = np.empty(r - 1)
    for i in range(1, r):
        g1[i - 1] = np.ascontiguousarray(p[:i, i:]).sum()
        g2[i - 1] = np.ascontiguousarray(pt[:i, i:]).sum()
    return g1, g2


def distance_weights(r: int) -> np.ndarray:
    """|l − k| for every cell, the number of cuts separating row k from column l."""
    idx = np.arange(r)
    return np.abs(np.subtract.outer(idx, idx)).astype(float)


def weighted_offdiagonal_mass(p: np.ndarray) -> float:
    """Σ |l − k| p_kl: equals Δ = Σ_i (G1_i + G2_i)."""
    return float(np.sum(distance_weights(p.shape[0]) * p))


def prefix_sums(values: np.ndarray) -> np.ndarray:
    """P[j] = Σ_{i<j} values[i], with a leading zero (length len(values)+1)."""
    out = np.zeros(len(values) + 1)
    np.cumsum(values, out=out[1:])
    return out


def level_span_sums(values: np.ndarray) -> np.ndarray:
    """S[k, l] = Σ values[i] over cuts i (0-based) with k ≤ i < l.

    For an upper cell (k, l), k < l, these are exactly the cuts whose upper
    block contains the cell; for the mirrored lower cell (l, k) the cuts whose
    lower block contains it. Entries with k ≥ l are zero.
    """
    prefix = prefix_sums(values)
    spans = prefix[np.newaxis, :] - prefix[:, np.newaxis]  # [k, l] = prefix[l] − prefix[k]
    return np.triu(spans, k=1)


def is_two_point(a: float, b: float, tol: float) -> bool:
    """True if (a, b) is a probability pair within tol."""
    return a >= 0.0 and b >= 0.0 and abs(a + b - 1.0) <= tol
