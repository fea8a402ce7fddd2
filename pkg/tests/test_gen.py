import numpy as np
import pytest

from bhtn.boolcore import BitTensor, hamming
from bhtn.gen import DENSITY_CHOICES, GenSpec, add_noise, generate
from bhtn.htn import reconstruct


class TestGenerate:
    def test_ground_truth_reconstructs_exactly(self):
        for seed in range(10):
            tensor, tree = generate(GenSpec(order=3, size=3, rank=2, seed=seed))
            assert reconstruct(tree) == tensor

    def test_largest_configuration_element_count(self):
        tensor, _ = generate(GenSpec(order=8, size=4, rank=2, seed=0))
        assert tensor.size == 65536
        assert tensor.shape == (4,) * 8

    def test_never_degenerate(self):
        for seed in range(30):
            tensor, _ = generate(GenSpec(order=2, size=2, rank=1, seed=seed))
            assert 0 < tensor.count_ones() < tensor.size

    def test_dense_spec_resamples_to_mixed(self):
        tensor, _ = generate(GenSpec(order=4, size=4, rank=4, p=0.9, seed=3))
        assert 0 < tensor.count_ones() < tensor.size

    def test_deterministic(self):
        s = GenSpec(order=4, size=3, rank=2, seed=11)
        t1, tr1 = generate(s)
        t2, tr2 = generate(s)
        assert t1 == t2
        from bhtn.serialize import tree_to_obj

        assert tree_to_obj(tr1) == tree_to_obj(tr2)

    def test_distinct_seeds_differ(self):
        t1, _ = generate(GenSpec(order=4, size=4, rank=3, seed=0))
        t2, _ = generate(GenSpec(order=4, size=4, rank=3, seed=1))
        assert t1 != t2

    def test_factor_density_tracks_p(self):
        # leaves and cores are iid Bernoulli(p): check the pooled factor
        # density lands within 5 sigma of the binomial expectation
        for p in (0.2, 0.5, 0.8):
            _, tree = generate(GenSpec(order=6, size=4, rank=4, p=p, seed=7))
            bits = []

            def walk(node):
                from bhtn.htn import Leaf

                if isinstance(node, Leaf):
                    bits.append(node.matrix.a.reshape(-1))
                else:
                    bits.append(node.core.a.reshape(-1))
                    walk(node.left)
                    walk(node.right)

            walk(tree.root)
            pool = np.concatenate(bits)
            n = pool.size
            sigma = np.sqrt(p * (1 - p) * n)
            assert abs(pool.sum() - p * n) < 5 * sigma

    def test_spec_validation(self):
        for kwargs in (
            {"order": 1, "size": 2, "rank": 1},
            {"order": 2, "size": 1, "rank": 1},
            {"order": 2, "size": 2, "rank": 0},
            {"order": 2, "size": 2, "rank": 1, "p": 1.0},
            {"order": 2, "size": 2, "rank": 1, "noise_prob": 1.0},
        ):
            with pytest.raises(ValueError):
                GenSpec(**kwargs)

    def test_density_choices_grid(self):
        assert DENSITY_CHOICES == (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


class TestAddNoise:
    def test_zero_probability_identity(self):
        tensor, _ = generate(GenSpec(order=3, size=3, rank=2, seed=0))
        assert add_noise(tensor, 0.0, seed=5) == tensor

    def test_flip_count_within_binomial_bounds(self):
        tensor, _ = generate(GenSpec(order=8, size=4, rank=3, seed=1))
        noisy = add_noise(tensor, 0.01, seed=2)
        flips = hamming(tensor, noisy)
        n, p = tensor.size, 0.01
        sigma = np.sqrt(n * p * (1 - p))
        assert abs(flips - n * p) < 5 * sigma

    def test_deterministic(self):
        tensor, _ = generate(GenSpec(order=4, size=3, rank=2, seed=3))
        assert add_noise(tensor, 0.05, seed=9) == add_noise(tensor, 0.05, seed=9)

    def test_seed_changes_pattern(self):
        tensor, _ = generate(GenSpec(order=4, size=4, rank=2, seed=4))
        assert add_noise(tensor, 0.05, seed=1) != add_noise(tensor, 0.05, seed=2)

    def test_never_degenerate(self):
        # heavy noise on a tiny tensor would often produce all-ones without
        # the rejection loop
        t = BitTensor(np.ones((2, 2), dtype=np.uint8) - np.eye(2, dtype=np.uint8))
        for seed in range(20):
            out = add_noise(t, 0.6, seed=seed)
            assert 0 < out.count_ones() < out.size

    def test_invalid_probability(self):
        tensor, _ = generate(GenSpec(order=2, size=2, rank=1, seed=0))
        with pytest.raises(ValueError):
            add_noise(tensor, 1.0)
