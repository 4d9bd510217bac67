"""Batch-means estimates and inequality verdicts.

Chains are correlated, so error bars come from block means: split the
retained stream into consecutive batches, use the spread of batch means.
Estimates keep their batch means so pooling chains recomputes an honest
stderr instead of averaging stale ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_BATCH_SIZE = 100
DEFAULT_K_SIGMA = 3.0

HOLDS = "holds"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n_samples: int
    n_batches: int
    batch_size: int
    batch_means: np.ndarray = field(repr=False)
    seed_list: tuple = ()


def accumulate(stream, batch_size=DEFAULT_BATCH_SIZE, seed=None):
    """Batch-means estimate over a sample stream (any iterable of numbers).

    Needs at least two full batches; a trailing partial batch is dropped.
    """
    values = np.asarray(stream if hasattr(stream, "__len__") else list(stream),
                        dtype=np.float64)
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    n_batches = values.size // batch_size
    if n_batches < 2:
        raise ValueError(
            f"too few samples: {values.size} < 2 * batch_size ({batch_size})")
    used = n_batches * batch_size
    batch_means = values[:used].reshape(n_batches, batch_size).mean(axis=1)
    return _from_batches(batch_means, batch_size,
                         () if seed is None else (seed,))


def _from_batches(batch_means, batch_size, seed_list):
    n_batches = batch_means.size
    mean = math.fsum(batch_means) / n_batches
    if n_batches > 1:
        var = math.fsum((b - mean) ** 2 for b in batch_means) / (n_batches - 1)
        stderr = math.sqrt(var / n_batches)
    else:
        stderr = 0.0
    return Estimate(mean=mean, stderr=stderr,
                    n_samples=n_batches * batch_size, n_batches=n_batches,
                    batch_size=batch_size,
                    batch_means=np.asarray(batch_means, dtype=np.float64),
                    seed_list=tuple(seed_list))


def merge(a, b):
    """Pool two estimates built with the same batch size.

    Exact on (sum, count): the pooled mean is the grand mean of all used
    samples, and stderr is recomputed from the pooled batch means.
    """
    if a.batch_size != b.batch_size:
        raise ValueError("can only merge estimates with equal batch sizes")
    return _from_batches(np.concatenate([a.batch_means, b.batch_means]),
                         a.batch_size, a.seed_list + b.seed_list)


def merge_all(estimates):
    estimates = list(estimates)
    if not estimates:
        raise ValueError("nothing to merge")
    out = estimates[0]
    for e in estimates[1:]:
        out = merge(out, e)
    return out


def inequality_verdict(lhs, rhs, k_sigma=DEFAULT_K_SIGMA, paired_diff=None):
    """Three-way verdict on "lhs <= rhs".

    "violated" only when lhs - rhs exceeds k_sigma combined standard errors,
    "holds" when rhs - lhs does, else "inconclusive".  For jointly sampled
    pairs pass ``paired_diff``, an Estimate of (rhs - lhs) built from the
    per-sample differences; its stderr is the honest one when the two sides
    are correlated.
    """
    if paired_diff is not None:
        gap = paired_diff.mean
        scale = paired_diff.stderr
    else:
        gap = rhs.mean - lhs.mean
        scale = math.hypot(lhs.stderr, rhs.stderr)
    if gap > k_sigma * scale:
        return HOLDS
    if -gap > k_sigma * scale:
        return VIOLATED
    return INCONCLUSIVE
