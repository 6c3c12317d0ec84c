"""Cross-entropy objective for the binary (and general) classifiers."""

from __future__ import annotations

import numpy as np


def softmax(logits):
    """Row-wise softmax, stabilized by subtracting the row maximum."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits, labels):
    """Mean negative log-likelihood and its gradient in the logits.

    Uses the log-sum-exp form so saturated logits do not overflow; the
    batch reduction accumulates at 64-bit.  Returns (loss, grad_logits)
    with grad = (softmax - one_hot) / batch.
    """
    logits = np.asarray(logits)
    labels = np.asarray(labels)
    if logits.ndim != 2:
        raise ValueError(f"logits must be (batch, classes), got {logits.shape}")
    n, k = logits.shape
    if labels.shape != (n,):
        raise ValueError(f"labels must be ({n},), got {labels.shape}")
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels must lie in [0, {k})")

    m = logits.max(axis=1, keepdims=True)
    z = logits - m
    lse = np.log(np.exp(z).sum(axis=1))
    picked = z[np.arange(n), labels]
    loss = float(np.mean((lse - picked).astype(np.float64)))

    grad = softmax(logits)
    grad[np.arange(n), labels] -= 1
    grad /= logits.dtype.type(n)
    return loss, grad
