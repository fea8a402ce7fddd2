import numpy as np
import pytest

from bhtn.bmf import BmfConfig
from bhtn.boolcore import BitMatrix, BitTensor, hamming
from bhtn.gen import GenSpec, generate
from bhtn.htn import (
    HtnConfig,
    HtnTree,
    Internal,
    Leaf,
    RankClampWarning,
    decompose,
    error_rate,
    plan_split,
    reconstruct,
)
from bhtn.serialize import tree_to_obj


def rand_bits(rng, *shape):
    return (rng.random(shape) < 0.5).astype(np.uint8)


def contract_oracle_tree(node):
    # independent bottom-up contraction with explicit loops
    if isinstance(node, Leaf):
        return node.matrix.a
    left = contract_oracle_tree(node.left)
    right = contract_oracle_tree(node.right)
    q, r1, r2 = node.core.shape
    L = left.reshape(-1, r1)
    R = right.reshape(-1, r2)
    out = np.zeros((L.shape[0], R.shape[0], q), dtype=np.uint8)
    for i in range(L.shape[0]):
        for j in range(R.shape[0]):
            for c in range(q):
                v = 0
                for a in range(r1):
                    for b in range(r2):
                        v |= L[i, a] & node.core.a[c, a, b] & R[j, b]
                out[i, j, c] = v
    return out.reshape(left.shape[:-1] + right.shape[:-1] + (q,))


def cfg_for(rank, seed=0, backend="exact"):
    from bhtn.solvers import SolverConfig

    return HtnConfig(
        rank=rank,
        bmf=BmfConfig(rank=rank, solver=SolverConfig(backend=backend)),
        seed=seed,
    )


class TestTreeShape:
    def test_order_two_is_one_core_two_leaves(self):
        rng = np.random.default_rng(0)
        t = BitTensor(rand_bits(rng, 3, 4))
        tree = decompose(t, cfg_for(2))
        assert isinstance(tree.root, Internal)
        assert isinstance(tree.root.left, Leaf)
        assert isinstance(tree.root.right, Leaf)
        assert tree.root.core.shape == (1, 2, 2)

    @pytest.mark.parametrize("order", [2, 3, 4, 5, 7])
    def test_leaf_and_core_counts(self, order):
        rng = np.random.default_rng(order)
        t = BitTensor(rand_bits(rng, *(2,) * order))
        tree = decompose(t, cfg_for(1, seed=1))
        assert tree.num_leaves() == order
        assert tree.num_cores() == order - 1
        assert tree.leaf_dims() == [2] * order
        tree.validate()

    def test_edge_ranks_respect_config(self):
        t, _ = generate(GenSpec(order=4, size=3, rank=2, seed=2))
        tree = decompose(t, cfg_for(2, seed=3))
        ranks = tree.edge_ranks()
        assert ranks[()] == 1
        assert all(r <= 2 for r in ranks.values())

    def test_plan_split_midpoint(self):
        assert plan_split((2, 2, 2, 2), 1, 9, 9) == (2, 4, 4)
        assert plan_split((2, 2, 2), 1, 2, 2) == (2, 2, 2)  # odd order rounds up


class TestDecompose:
    def test_all_ones_rank_one_exact(self):
        t = BitTensor(np.ones((2, 2, 2, 2), dtype=np.uint8))
        tree = decompose(t, cfg_for(1, seed=4))
        assert error_rate(t, reconstruct(tree)) == 0.0

    def test_noise_free_instances_recovered(self):
        # generated tensors have an exact tree at the requested rank
        hits = 0
        for seed in range(20):
            t, _ = generate(GenSpec(order=4, size=4, rank=2, seed=seed))
            tree = decompose(t, cfg_for(2, seed=seed))
            hits += error_rate(t, reconstruct(tree)) == 0.0
        assert hits >= 18

    def test_rank_clamped_with_warning(self):
        rng = np.random.default_rng(5)
        t = BitTensor(rand_bits(rng, 2, 2))
        with pytest.warns(RankClampWarning):
            tree = decompose(t, cfg_for(10, seed=6))
        assert max(tree.edge_ranks().values()) <= 2
        assert error_rate(t, reconstruct(tree)) == 0.0  # clamp keeps exactness possible

    def test_deterministic_given_seed(self):
        t, _ = generate(GenSpec(order=3, size=3, rank=2, seed=7))
        t1 = decompose(t, cfg_for(2, seed=8))
        t2 = decompose(t, cfg_for(2, seed=8))
        assert tree_to_obj(t1) == tree_to_obj(t2)

    def test_order_one_rejected(self):
        from bhtn.boolcore import ShapeError

        with pytest.raises(ShapeError):
            decompose(BitTensor([1, 0, 1]), cfg_for(1))

    def test_stats_collection(self):
        t, _ = generate(GenSpec(order=3, size=2, rank=2, seed=9))
        stats = {}
        decompose(t, cfg_for(2, seed=10), stats=stats)
        assert stats["factorize_calls"] == 2 * (3 - 1)
        assert stats["bmf_iters"] >= stats["factorize_calls"]
        assert stats["solver_time"] > 0

    def test_rank_overrides(self):
        t, _ = generate(GenSpec(order=4, size=2, rank=2, seed=11))
        cfg = HtnConfig(rank=2, bmf=BmfConfig(rank=2), seed=12,
                        rank_overrides={("L",): 1})
        # constraining the left edge to 1 also bounds the sibling edge
        # (r_right <= q * r_left at the root), which warns
        with pytest.warns(RankClampWarning):
            tree = decompose(t, cfg)
        assert tree.edge_ranks()[("L",)] == 1


class TestReconstruct:
    def test_generator_round_trip(self):
        tensor, tree = generate(GenSpec(order=5, size=2, rank=2, seed=13))
        assert reconstruct(tree) == tensor

    def test_identity_leaves_expose_core(self):
        rng = np.random.default_rng(14)
        core = BitTensor(rand_bits(rng, 1, 3, 4))
        tree = HtnTree(
            Internal(core, Leaf(BitMatrix.identity(3)), Leaf(BitMatrix.identity(4))),
            (3, 4),
        )
        tree.validate()
        out = reconstruct(tree)
        assert np.array_equal(out.a, core.a[0])

    def test_matches_brute_force_contraction(self):
        rng = np.random.default_rng(15)
        for _ in range(10):
            r1, r2, rr = (int(v) for v in rng.integers(1, 3, size=3))
            core = BitTensor(rand_bits(rng, 1, r1, rr))
            sub = Internal(
                BitTensor(rand_bits(rng, rr, 2, r2)),
                Leaf(BitMatrix(rand_bits(rng, 3, 2))),
                Leaf(BitMatrix(rand_bits(rng, 2, r2))),
            )
            tree = HtnTree(Internal(core, Leaf(BitMatrix(rand_bits(rng, 3, r1))), sub), (3, 3, 2))
            tree.validate()
            got = reconstruct(tree).a
            want = contract_oracle_tree(tree.root)
            assert np.array_equal(got, want.reshape(got.shape))

    def test_invalid_tree_rejected(self):
        bad = HtnTree(
            Internal(
                BitTensor(np.ones((1, 2, 2), dtype=np.uint8)),
                Leaf(BitMatrix(np.ones((3, 1), dtype=np.uint8))),
                Leaf(BitMatrix(np.ones((3, 2), dtype=np.uint8))),
            ),
            (3, 3),
        )
        with pytest.raises(ValueError):
            bad.validate()


class TestErrorRate:
    def test_identical(self):
        t = BitTensor([[1, 0], [0, 1]])
        assert error_rate(t, t) == 0.0

    def test_complement(self):
        a = BitTensor(np.zeros((2, 2), dtype=np.uint8))
        b = BitTensor(np.ones((2, 2), dtype=np.uint8))
        assert error_rate(a, b) == 1.0

    def test_single_flip_sixteenth(self):
        a = np.zeros((4, 4), dtype=np.uint8)
        b = a.copy()
        b[2, 3] = 1
        assert error_rate(BitTensor(a), BitTensor(b)) == 0.0625

    def test_self_consistency_with_pipeline(self):
        t, _ = generate(GenSpec(order=3, size=3, rank=2, seed=16))
        tree = decompose(t, cfg_for(2, seed=17))
        recon = reconstruct(tree)
        assert error_rate(t, recon) == hamming(t, recon) / t.size
