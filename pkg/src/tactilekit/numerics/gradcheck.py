"""Central-difference gradient oracle.

Independent check of the analytic backward pass: perturb sampled parameter
coordinates, re-run the forward loss, and compare the central difference
(loss(p+e) - loss(p-e)) / 2e against the recorded gradient.

Two numeric regimes are supported.  The 32-bit check runs the network at
its native precision with the standard epsilon of 1e-3; the 64-bit check
casts parameters and batch up and shrinks epsilon to 1e-5, which isolates
math errors from float32 rounding.

A finite difference is a physical instrument and is treated as one:

* Noise floor.  The loss is computed to roughly machine epsilon times a
  depth factor, so slopes below NOISE_FLOOR_SAFETY * eps(dtype) * |loss|
  / epsilon cannot be resolved; sampling is restricted to coordinates
  whose analytic gradient clears that floor.  If none do, the largest
  available coordinates are probed instead.

* Kink rejection.  Rectifier networks are only piecewise smooth.  Each
  coordinate is probed at epsilon, epsilon/2 and epsilon/4 plus the two
  one-sided slopes; a smooth function makes these agree to O(epsilon^2),
  so estimates that fail to converge (relative disagreement above
  KINK_REJECT) mark the coordinate unmeasurable and it is skipped.  The
  converged finest-step estimate is the one compared.

Near-zero denominators fall back to absolute comparison below
ABS_THRESHOLD.
"""

from __future__ import annotations

import numpy as np

from ..rng import make_generator
from .loss import cross_entropy
from .network import cast_params

ABS_THRESHOLD = 1e-8
NOISE_FLOOR_SAFETY = 4000.0
KINK_REJECT = 0.005
DEFAULT_EPSILON32 = 1e-3  # standard central-difference scale for 32-bit floats
DEFAULT_EPSILON64 = 1e-5


def finite_difference_check(
    spec,
    params,
    batch,
    labels,
    *,
    epsilon=None,
    sample_count=50,
    seed=0,
    mode="eval",
    float64=False,
):
    """Worst relative error between analytic and central-difference gradients
    over `sample_count` measurable sampled coordinates."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    if epsilon is None:
        epsilon = DEFAULT_EPSILON64 if float64 else DEFAULT_EPSILON32
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if float64:
        params = cast_params(params, np.float64)
        batch = np.asarray(batch, dtype=np.float64)
    else:
        params = {k: v.copy() for k, v in params.items()}
        batch = np.asarray(batch, dtype=np.float32)

    logits, tape = spec.forward(params, batch, mode=mode)
    base_loss, grad_logits = cross_entropy(logits, labels)
    analytic = spec.backward(params, tape, grad_logits)

    names = sorted(analytic)
    flat_abs = np.concatenate([np.abs(analytic[n]).reshape(-1) for n in names])
    sizes = np.array([params[n].size for n in names])
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    macheps = np.finfo(np.float64 if float64 else np.float32).eps
    floor = NOISE_FLOOR_SAFETY * macheps * max(abs(base_loss), 1.0) / epsilon
    candidates = np.flatnonzero(flat_abs >= floor)
    if candidates.size == 0:
        # nothing clears the floor: probe the strongest slopes available
        candidates = np.argsort(flat_abs)[-max(sample_count, 8):]

    rng = make_generator(seed, "gradcheck")

    def loss_at():
        out, _ = spec.forward(params, batch, mode=mode)
        return cross_entropy(out, labels)[0]

    def probe(c, step):
        i = int(np.searchsorted(offsets, c, side="right") - 1)
        flat = params[names[i]].reshape(-1)
        j = int(c - offsets[i])
        saved = flat[j]
        flat[j] = saved + step
        hi = float(flat[j])  # the perturbation actually representable
        up = loss_at()
        flat[j] = saved - step
        lo = float(flat[j])
        down = loss_at()
        flat[j] = saved
        central = (up - down) / (hi - lo)
        right = (up - base_loss) / (hi - float(saved))
        left = (base_loss - down) / (float(saved) - lo)
        return central, right, left

    def compare(c, numeric):
        i = int(np.searchsorted(offsets, c, side="right") - 1)
        a = float(analytic[names[i]].reshape(-1)[int(c - offsets[i])])
        scale = max(abs(a), abs(numeric))
        return abs(a - numeric) if scale < ABS_THRESHOLD else abs(a - numeric) / scale

    worst = 0.0
    measured = 0
    budget = 8 * sample_count
    order = rng.permutation(candidates) if candidates.size > 1 else candidates
    fallback = None
    for c in order[:budget]:
        fd1, right, left = probe(c, epsilon)
        fd2, _, _ = probe(c, epsilon / 2.0)
        fd4, _, _ = probe(c, epsilon / 4.0)
        scale_fd = max(abs(fd1), abs(fd2), abs(fd4), floor)
        converged = (
            abs(fd1 - fd2) <= KINK_REJECT * scale_fd
            and abs(fd2 - fd4) <= KINK_REJECT * scale_fd
            and abs(right - left) <= 4 * KINK_REJECT * scale_fd
        )
        if not converged:
            if fallback is None:
                fallback = compare(c, fd4)
            continue  # unmeasurable here; spend budget elsewhere
        worst = max(worst, compare(c, fd4))
        measured += 1
        if measured >= sample_count:
            break
    if measured == 0 and fallback is not None:
        worst = fallback  # nothing measurable: report the first probe as-is
    return worst
