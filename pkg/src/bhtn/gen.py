"""Synthetic test tensors with a guaranteed exact tree representation.

A ground-truth tree is built with exactly the node shapes ``decompose``
would produce for the requested (order, size, rank); every leaf matrix and
core tensor is filled with iid Bernoulli(p) bits and the tensor is the
tree's reconstruction, so an exact decomposition at that rank always
exists. Degenerate draws (all zeros or all ones) are rejected and
resampled under a fresh sub-seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boolcore import BitMatrix, BitTensor
from .htn import HtnTree, Internal, Leaf, plan_split, reconstruct
from .seeding import derive_seed

__all__ = ["GenerationError", "GenSpec", "generate", "add_noise", "DENSITY_CHOICES"]

DENSITY_CHOICES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
_MAX_ATTEMPTS = 1000
_NOISE_TAG = 0x401E


class GenerationError(RuntimeError):
    """Rejection sampling failed to produce a non-degenerate tensor."""


@dataclass(frozen=True)
class GenSpec:
    """Cubic test problem: ``order`` modes of common ``size``, tree ``rank``.

    ``p`` fixes the factor density; when None, each generated problem draws
    one p uniformly from {0.1, ..., 0.9} shared by all of its factors.
    """

    order: int
    size: int
    rank: int
    p: float | None = None
    noise_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("order must be >= 2")
        if self.size < 2:
            raise ValueError("size must be >= 2")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.p is not None and not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if not 0 <= self.noise_prob < 1:
            raise ValueError("noise_prob must lie in [0, 1)")


def _random_tree(
    dims: tuple[int, ...], q: int, rank: int, p: float, rng: np.random.Generator
):
    if len(dims) == 1:
        return Leaf(BitMatrix((rng.random((dims[0], q)) < p).astype(np.uint8)))
    k, r1, r2 = plan_split(dims, q, rank, rank)
    core = BitTensor((rng.random((q, r1, r2)) < p).astype(np.uint8))
    left = _random_tree(dims[:k], r1, rank, p, rng)
    right = _random_tree(dims[k:], r2, rank, p, rng)
    return Internal(core, left, right)


def generate(spec: GenSpec) -> tuple[BitTensor, HtnTree]:
    """Sample a tensor together with the tree that reconstructs it exactly."""
    dims = (spec.size,) * spec.order
    for attempt in range(_MAX_ATTEMPTS):
        rng = np.random.Generator(np.random.PCG64(derive_seed(spec.seed, attempt)))
        p = spec.p if spec.p is not None else float(rng.choice(DENSITY_CHOICES))
        tree = HtnTree(_random_tree(dims, 1, spec.rank, p, rng), dims)
        tensor = reconstruct(tree)
        ones = tensor.count_ones()
        if 0 < ones < tensor.size:
            return tensor, tree
    raise GenerationError(
        f"no non-degenerate tensor after {_MAX_ATTEMPTS} attempts for {spec}"
    )


def add_noise(t: BitTensor, prob: float, seed: int = 0) -> BitTensor:
    """Flip each entry independently with probability ``prob``.

    Deterministic given ``seed``; degenerate outcomes (all zeros/ones) are
    resampled under fresh sub-seeds.
    """
    if not 0 <= prob < 1:
        raise ValueError("prob must lie in [0, 1)")
    if prob == 0:
        return t
    for attempt in range(_MAX_ATTEMPTS):
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, _NOISE_TAG, attempt)))
        flips = (rng.random(t.shape) < prob).astype(np.uint8)
        out = BitTensor(t.a ^ flips)
        ones = out.count_ones()
        if 0 < ones < out.size:
            return out
    raise GenerationError(f"no non-degenerate noisy tensor after {_MAX_ATTEMPTS} attempts")
