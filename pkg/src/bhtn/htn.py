"""Hierarchical Boolean tensor-network decomposition.

A tensor of order d is turned into a binary tree with d matrix leaves and
d-1 order-3 cores. One recursion step on a working tensor T(n_1,..,n_s, q)
(q is the connector to the parent, a dummy size-1 dimension at the root):

1. unfold T at k = ceil(s/2) and split the matrix M ~ M' . M'' at rank r1;
2. move q from the columns of M'' to its rows (q-major combined index);
3. split again, M'' ~ core . right, at rank r2; the core reshapes to
   (q, r1, r2);
4. recurse on M' as a tensor (n_1,..,n_k, r1) and on right^T as a tensor
   (n_{k+1},..,n_s, r2); a single remaining mode becomes a leaf matrix.

Reconstruction contracts the tree bottom-up over the OR-AND semiring and
drops the dummy root connector.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from math import ceil, prod
from typing import Union

from .bmf import BmfConfig, factorize
from .boolcore import (
    BitMatrix,
    BitTensor,
    ShapeError,
    hamming,
    matricize_split,
    move_q_to_rows,
    reshape,
    tensor_contract,
)
from .seeding import derive_seed

__all__ = [
    "RankClampWarning",
    "Leaf",
    "Internal",
    "HtnNode",
    "HtnTree",
    "HtnConfig",
    "plan_split",
    "decompose",
    "reconstruct",
    "error_rate",
]


class RankClampWarning(UserWarning):
    """A requested rank exceeded a matricization dimension and was clamped."""


@dataclass(frozen=True)
class Leaf:
    matrix: BitMatrix  # (mode size) x (rank of the edge to the parent)


@dataclass(frozen=True)
class Internal:
    core: BitTensor  # (parent rank q, left child rank, right child rank)
    left: "HtnNode"
    right: "HtnNode"


HtnNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class HtnTree:
    """Decomposition tree for a tensor of shape ``shape``."""

    root: HtnNode
    shape: tuple[int, ...]

    def leaf_dims(self) -> list[int]:
        out: list[int] = []

        def walk(node: HtnNode):
            if isinstance(node, Leaf):
                out.append(node.matrix.rows)
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return out

    def num_leaves(self) -> int:
        return len(self.leaf_dims())

    def num_cores(self) -> int:
        def walk(node: HtnNode) -> int:
            if isinstance(node, Leaf):
                return 0
            return 1 + walk(node.left) + walk(node.right)

        return walk(self.root)

    def edge_ranks(self) -> dict[tuple[str, ...], int]:
        """Rank of the edge above each node, keyed by root path ('L'/'R')."""
        out: dict[tuple[str, ...], int] = {}

        def walk(node: HtnNode, path: tuple[str, ...]):
            if isinstance(node, Leaf):
                out[path] = node.matrix.cols
            else:
                out[path] = node.core.shape[0]
                walk(node.left, path + ("L",))
                walk(node.right, path + ("R",))

        walk(self.root, ())
        return out

    def validate(self) -> None:
        """Check structural invariants; raises ValueError on violation."""

        def walk(node: HtnNode):
            # returns (mode sizes covered, rank of the edge above the node)
            if isinstance(node, Leaf):
                return (node.matrix.rows,), node.matrix.cols
            q, r1, r2 = node.core.shape
            ldims, lrank = walk(node.left)
            rdims, rrank = walk(node.right)
            if lrank != r1 or rrank != r2:
                raise ValueError(
                    f"core {node.core.shape} disagrees with child ranks ({lrank}, {rrank})"
                )
            return ldims + rdims, q

        dims, root_rank = walk(self.root)
        if root_rank != 1:
            raise ValueError(f"root connector rank must be 1, got {root_rank}")
        if dims != self.shape:
            raise ValueError(f"leaves cover dims {dims}, tree claims shape {self.shape}")


@dataclass(frozen=True)
class HtnConfig:
    """Uniform edge rank (optionally overridden per node path) plus the
    factorization settings applied at every split."""

    rank: int
    bmf: BmfConfig = field(default_factory=lambda: BmfConfig(rank=1))
    seed: int = 0
    rank_overrides: dict[tuple[str, ...], int] | None = None

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        for path, r in (self.rank_overrides or {}).items():
            if r < 1:
                raise ValueError(f"override rank for {path} must be >= 1")

    def rank_for(self, path: tuple[str, ...]) -> int:
        if self.rank_overrides:
            return self.rank_overrides.get(path, self.rank)
        return self.rank


def plan_split(dims: tuple[int, ...], q: int, r_left: int, r_right: int) -> tuple[int, int, int]:
    """Split point and clamped edge ranks for one recursion step.

    Returns (k, r1, r2) for a working tensor with mode sizes ``dims`` and
    connector ``q``. Requested ranks are clamped to the split-matrix
    dimensions, where a factorization of that rank is always exact-capable.
    The generator mirrors this plan so its trees match decompose's shapes.
    """
    s = len(dims)
    k = ceil(s / 2)
    rows = prod(dims[:k])
    cols = prod(dims[k:]) * q
    r1 = min(r_left, rows, cols)
    r2 = min(r_right, q * r1, prod(dims[k:]))
    return k, r1, r2


def _path_tag(path: tuple[str, ...]) -> int:
    tag = 1
    for step in path:
        tag = tag * 2 + (0 if step == "L" else 1)
    return tag


def decompose(t: BitTensor, cfg: HtnConfig, stats: dict | None = None) -> HtnTree:
    """Build the decomposition tree of ``t``.

    Deterministic given ``cfg.seed``; left/right branch factorizations derive
    independent seeds from their tree paths. ``stats``, when given, collects
    totals: solver seconds, alternating iterations, factorize calls.
    """
    if t.order < 2:
        raise ShapeError("decompose needs a tensor of order >= 2")
    acc = {"solver_time": 0.0, "bmf_iters": 0, "factorize_calls": 0}

    def run_bmf(m: BitMatrix, rank: int, path: tuple[str, ...], stage: int) -> tuple[BitMatrix, BitMatrix]:
        bcfg = replace(
            cfg.bmf, rank=rank, seed=derive_seed(cfg.seed, _path_tag(path), stage)
        )
        res = factorize(m, bcfg)
        acc["solver_time"] += res.solver_time_total
        acc["bmf_iters"] += res.iters
        acc["factorize_calls"] += 1
        return res.a, res.b

    def warn_clamp(want: int, got: int, path: tuple[str, ...]) -> None:
        if got < want:
            warnings.warn(
                f"rank {want} exceeds the matricization bound at edge "
                f"{'/'.join(path) or 'root'}; clamped to {got}",
                RankClampWarning,
                stacklevel=4,
            )

    def rec(work: BitTensor, path: tuple[str, ...]) -> HtnNode:
        dims, q = work.shape[:-1], work.shape[-1]
        s = len(dims)
        if s == 1:
            return Leaf(reshape(work, (dims[0], q)))
        want1 = cfg.rank_for(path + ("L",))
        want2 = cfg.rank_for(path + ("R",))
        k, r1, r2 = plan_split(dims, q, want1, want2)
        warn_clamp(want1, r1, path + ("L",))
        warn_clamp(want2, r2, path + ("R",))
        m = matricize_split(work, k)
        m_left, m_rest = run_bmf(m, r1, path, 0)
        m_rest = move_q_to_rows(m_rest, dims[k:], q, r1)
        m_core, m_right = run_bmf(m_rest, r2, path, 1)
        core = reshape(m_core, (q, r1, r2))
        left = rec(reshape(m_left, dims[:k] + (r1,)), path + ("L",))
        right = rec(reshape(m_right.T, dims[k:] + (r2,)), path + ("R",))
        return Internal(core, left, right)

    work = reshape(t, t.shape + (1,))
    tree = HtnTree(rec(work, ()), t.shape)
    if stats is not None:
        stats.update(acc)
    return tree


def reconstruct(ht: HtnTree) -> BitTensor:
    """Contract the tree bottom-up; result has the tree's original shape."""
    def walk(node: HtnNode) -> BitTensor:
        if isinstance(node, Leaf):
            return node.matrix
        return tensor_contract(node.core, walk(node.left), walk(node.right))

    full = walk(ht.root)
    if full.shape[-1] != 1:
        raise ValueError(f"root connector rank is {full.shape[-1]}, expected 1")
    out = reshape(full, full.shape[:-1])
    if out.shape != ht.shape:
        raise ValueError(f"reconstruction shape {out.shape} != tree shape {ht.shape}")
    return out


def error_rate(t: BitTensor, t_hat: BitTensor) -> float:
    """Fraction of entries where the two tensors differ."""
    return hamming(t, t_hat) / t.size
