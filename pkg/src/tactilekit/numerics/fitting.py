"""Minibatch training loop shared by the task modules.

The loop owns nothing but the optimization mechanics: seeded epoch
shuffling, step or wall-clock budgets, masked updates for frozen layers,
and per-epoch bookkeeping.  Data access goes through a fetch callback so
callers decide how samples are stored (preprocessed tensors, lazy frame
windows, ...).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..rng import make_generator
from .loss import cross_entropy
from .optim import AdamState, adam_step


@dataclass
class FitReport:
    """Training-side record: per-epoch loss/accuracy and budget accounting."""

    epochs: list = field(default_factory=list)
    steps: int = 0
    wall_seconds: float = 0.0


def fit_classifier(
    spec,
    params,
    n_train,
    fetch_batch,
    *,
    steps=None,
    wall_clock=None,
    batch_size=8,
    learning_rate=0.001,
    seed=0,
    trainable_layers=None,
    frozen_layers=frozenset(),
):
    """Train `params` in place; returns a FitReport.

    fetch_batch(indices) must return (X, y) with X channels-first float32.
    Exactly one of `steps` / `wall_clock` (seconds) must be set.  When
    `trainable_layers` is given, only those parameterized layers receive
    gradients, updates and running-stat commits; `frozen_layers` names the
    complement so batch-norm layers in it normalize with stored statistics.
    """
    if (steps is None) == (wall_clock is None):
        raise ValueError("set exactly one of steps / wall_clock")
    if n_train < 1:
        raise ValueError("empty training set")

    state = AdamState(learning_rate=learning_rate)
    report = FitReport()
    t0 = time.monotonic()
    epoch = 0
    cursor = 0
    order = make_generator(seed, "shuffle", 0).permutation(n_train)
    epoch_losses = []
    epoch_hits = 0
    epoch_seen = 0

    def flush_epoch():
        if epoch_seen:
            report.epochs.append({
                "epoch": epoch,
                "loss": float(np.mean(epoch_losses)),
                "accuracy": epoch_hits / epoch_seen,
            })

    step = 0
    while True:
        if steps is not None and step >= steps:
            break
        if wall_clock is not None and time.monotonic() - t0 >= wall_clock:
            break
        if cursor >= n_train:
            flush_epoch()
            epoch += 1
            cursor = 0
            order = make_generator(seed, "shuffle", epoch).permutation(n_train)
            epoch_losses = []
            epoch_hits = 0
            epoch_seen = 0
        idx = order[cursor:cursor + batch_size]
        cursor += batch_size
        x, y = fetch_batch(idx)
        logits, tape = spec.forward(params, x, mode="train", frozen=frozen_layers)
        loss, grad_logits = cross_entropy(logits, y)
        if trainable_layers is None:
            grads = spec.backward(params, tape, grad_logits)
        else:
            grads = spec.backward_masked(params, tape, grad_logits, trainable_layers)
        adam_step(params, grads, state)
        spec.commit_buffers(params, tape, trainable_layers)
        epoch_losses.append(loss)
        epoch_hits += int((logits.argmax(axis=1) == y).sum())
        epoch_seen += len(y)
        step += 1

    flush_epoch()
    report.steps = step
    report.wall_seconds = time.monotonic() - t0
    return report


def predict_logits(spec, params, x, batch_size=64):
    """Deterministic eval-mode logits, batched to bound memory."""
    outs = []
    for i in range(0, len(x), batch_size):
        logits, _ = spec.forward(params, x[i:i + batch_size], mode="eval")
        outs.append(logits)
    return np.concatenate(outs, axis=0)


def evaluate_accuracy(spec, params, fetch_batch, n, batch_size=64):
    """Eval-mode accuracy over n samples served by fetch_batch."""
    hits = 0
    for i in range(0, n, batch_size):
        idx = np.arange(i, min(i + batch_size, n))
        x, y = fetch_batch(idx)
        logits, _ = spec.forward(params, x, mode="eval")
        hits += int((logits.argmax(axis=1) == y).sum())
    return hits / n
