"""Style-transfer-accuracy metrics over classifier probability distributions.

In reference-free mode, p is the source sentence's distribution and q the
generated sentence's; reference-based mode swaps p for the reference's.
Functions accept either StyleDistribution objects or raw probability
vectors.
"""

from __future__ import annotations

import logging

import numpy as np

from .corpus import StyleDistribution

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-10


def _probs(dist) -> np.ndarray:
    if isinstance(dist, StyleDistribution):
        return dist.array
    return np.asarray(dist, dtype=float)


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, StyleDistribution) and isinstance(q, StyleDistribution):
        if p.class_labels != q.class_labels:
            raise ValueError(
                f"class labels differ: {p.class_labels} vs {q.class_labels}"
            )
    pv, qv = _probs(p), _probs(q)
    if pv.shape != qv.shape:
        raise ValueError(f"distribution sizes differ: {pv.shape} vs {qv.shape}")
    return pv, qv


def sentence_accuracy(q, target: int) -> int:
    """1 iff the argmax class is the target; ties break to the lowest index."""
    qv = _probs(q)
    best = int(np.argmax(qv))
    if np.sum(qv == qv[best]) > 1:
        logger.warning("argmax tie in style distribution; using lowest index %d", best)
    return int(best == target)


def classifier_confidence(q, target: int) -> float:
    """Probability mass the classifier assigns to the target class."""
    qv = _probs(q)
    if not 0 <= target < len(qv):
        raise ValueError(f"target class {target} out of range for K={len(qv)}")
    return float(qv[target])


def emd(p, q) -> float:
    """Earth mover's distance with |i - j| ground distance on class indices.

    Closed form for the 1-D transport problem: sum of absolute CDF gaps.
    """
    pv, qv = _pair(p, q)
    return float(np.abs(np.cumsum(pv - qv)).sum())


def kl_divergence(p, q, eps: float = DEFAULT_EPS) -> float:
    """KL(p || q) with epsilon smoothing and renormalization.

    Smoothing keeps the value finite on one-hot classifier outputs. The
    direction is configurable at the engine level; this function computes
    the divergence of its first argument from its second.
    """
    pv, qv = _pair(p, q)
    ps = (pv + eps) / (pv + eps).sum()
    qs = (qv + eps) / (qv + eps).sum()
    return float(np.sum(ps * np.log(ps / qs)))


def js_divergence(p, q, normalized: bool = False) -> float:
    """Jensen-Shannon divergence (natural log, bounded by ln 2).

    With ``normalized=True`` the value is divided by ln 2 so ensembles see
    a [0, 1] quantity.
    """
    pv, qv = _pair(p, q)
    m = (pv + qv) / 2

    def _kl_to_m(v: np.ndarray) -> float:
        mask = v > 0
        return float(np.sum(v[mask] * np.log(v[mask] / m[mask])))

    value = 0.5 * _kl_to_m(pv) + 0.5 * _kl_to_m(qv)
    value = max(value, 0.0)
    return value / np.log(2) if normalized else value


def dist_cosine(p, q) -> float:
    """Cosine similarity between the two probability vectors.

    High similarity to the source distribution means the transfer failed,
    so the registry orients this metric lower-better for style.
    """
    pv, qv = _pair(p, q)
    np_, nq = np.linalg.norm(pv), np.linalg.norm(qv)
    if np_ == 0 or nq == 0:
        raise ValueError("zero vector in cosine similarity")
    return float(np.dot(pv, qv) / (np_ * nq))
