import numpy as np
import pytest

from freqdir.baselines import (
    BASELINES,
    BruteForceSketch,
    HashingSketch,
    NaiveSketch,
    ProjectionSketch,
    SamplingSketch,
    hash_index_sign,
)


def feed(sk, a):
    for row in a:
        sk.update(row)
    return sk.finalize()


@pytest.mark.parametrize("kind", sorted(BASELINES))
def test_finalize_shape_and_delta(kind, rng):
    a = rng.standard_normal((30, 7))
    sk = BASELINES[kind](4, 7, seed=3)
    b = feed(sk, a)
    assert b.shape == (4, 7)
    assert sk.delta == 0
    assert sk.rows_seen == 30


@pytest.mark.parametrize("kind", sorted(BASELINES))
def test_seed_determinism(kind, rng):
    a = rng.standard_normal((50, 5))
    b1 = feed(BASELINES[kind](3, 5, seed=99), a)
    b2 = feed(BASELINES[kind](3, 5, seed=99), a)
    assert b1.tobytes() == b2.tobytes()


@pytest.mark.parametrize("kind", ["naive", "brute", "hash", "project"])
def test_extend_matches_update(kind, rng):
    a = rng.standard_normal((70, 6))
    b1 = feed(BASELINES[kind](4, 6, seed=8), a)
    sk = BASELINES[kind](4, 6, seed=8)
    sk.extend(a[:33])
    sk.extend(a[33:])
    np.testing.assert_allclose(sk.finalize(), b1, atol=1e-12)


def test_sampling_extend_matches_update(rng):
    # same random draws in the same order, so the chosen rows agree
    a = rng.standard_normal((70, 6))
    b1 = feed(SamplingSketch(4, 6, seed=8), a)
    sk = SamplingSketch(4, 6, seed=8)
    sk.extend(a)
    np.testing.assert_allclose(sk.finalize(), b1, rtol=1e-12)


def test_naive_is_zero(rng):
    assert not feed(NaiveSketch(3, 4), rng.standard_normal((10, 4))).any()


class TestBrute:
    def test_diagonal(self):
        b = feed(BruteForceSketch(2, 3), np.diag([3.0, 2.0, 1.0]))
        np.testing.assert_allclose(np.abs(b), [[3, 0, 0], [0, 2, 0]], atol=1e-10)

    def test_low_rank_exact(self, rng):
        a = rng.standard_normal((40, 2)) @ rng.standard_normal((2, 6))
        b = feed(BruteForceSketch(3, 6), a)
        np.testing.assert_allclose(b.T @ b, a.T @ a, atol=1e-8 * np.abs(a.T @ a).max())

    def test_residual_is_next_eigenvalue(self, rng):
        a = rng.standard_normal((50, 8))
        b = feed(BruteForceSketch(3, 8), a)
        lam = np.sort(np.linalg.eigvalsh(a.T @ a))[::-1]
        err = np.abs(np.linalg.eigvalsh(a.T @ a - b.T @ b)).max()
        assert err == pytest.approx(lam[3], rel=1e-8)

    def test_d_limit(self):
        with pytest.raises(ValueError, match="limit"):
            BruteForceSketch(2, 5000)
        with pytest.raises(ValueError):
            BruteForceSketch(2, 20, max_d=10)


class TestSampling:
    def test_repeated_row(self):
        v = np.array([1.0, -2.0, 0.5])
        n, ell = 9, 4
        b = feed(SamplingSketch(ell, 3, seed=1), np.tile(v, (n, 1)))
        np.testing.assert_allclose(b, np.tile(v * np.sqrt(n / ell), (ell, 1)))
        assert np.sum(b * b) == pytest.approx(n * v @ v)

    def test_single_row(self):
        v = np.array([3.0, 4.0])
        b = feed(SamplingSketch(5, 2, seed=2), v[None])
        np.testing.assert_allclose(b.T @ b, np.outer(v, v))

    def test_zero_stream(self):
        assert not feed(SamplingSketch(3, 2), np.zeros((4, 2))).any()


class TestHashing:
    def test_single_row(self):
        a = np.array([[1.0, 2.0, -1.0]])
        b = feed(HashingSketch(4, 3, seed=5), a)
        assert np.count_nonzero(np.any(b != 0, axis=1)) == 1
        np.testing.assert_array_equal(b.T @ b, a.T @ a)

    def test_collision(self):
        ell = 4
        seed = next(s for s in range(1000)
                    if hash_index_sign(s, 0, ell)[0] == hash_index_sign(s, 1, ell)[0])
        a = np.array([[1.0, 0.0], [0.5, 2.0]])
        b = feed(HashingSketch(ell, 2, seed=seed), a)
        (h, s1), (_, s2) = hash_index_sign(seed, 0, ell), hash_index_sign(seed, 1, ell)
        np.testing.assert_array_equal(b[h], s1 * a[0] + s2 * a[1])

    def test_hash_range(self):
        out = [hash_index_sign(7, i, 5) for i in range(500)]
        assert {h for h, _ in out} == set(range(5))
        assert {s for _, s in out} == {-1, 1}


class TestProjection:
    def test_single_row(self):
        a = np.array([[2.0, -1.0, 0.5]])
        b = feed(ProjectionSketch(6, 3, seed=4), a)
        np.testing.assert_allclose(b.T @ b, a.T @ a, rtol=1e-12)

    def test_zero_rows(self, rng):
        a = rng.standard_normal((5, 3))
        padded = np.vstack([a[:2], np.zeros((3, 3)), a[2:]])
        b = feed(ProjectionSketch(4, 3, seed=0), padded)
        assert b.shape == (4, 3)
        assert feed(ProjectionSketch(4, 3, seed=0), np.zeros((6, 3))).any() == False  # noqa: E712


def mc_unbiased(cls, a, trials=10_000):
    """Max z-score of mean(B^T B) against A^T A over independent seeds."""
    d = a.shape[1]
    acc = np.zeros((trials, d, d))
    for t in range(trials):
        sk = cls(4, d, seed=t)
        sk.extend(a)
        b = sk.finalize()
        acc[t] = b.T @ b
    mean = acc.mean(axis=0)
    se = acc.std(axis=0, ddof=1) / np.sqrt(trials)
    target = a.T @ a
    z = np.abs(mean - target) / np.where(se > 0, se, np.inf)
    return float(z.max())


@pytest.mark.parametrize("cls", [SamplingSketch, HashingSketch, ProjectionSketch])
def test_unbiased_small(cls):
    a = np.random.default_rng(3).standard_normal((10, 3))
    # full run lives in the acceptance suite
    assert mc_unbiased(cls, a, trials=2000) <= 4.0


def test_update_cost_scaling():
    d, ell = 200, 10
    row = np.ones(d)
    costs = {}
    for kind in ("sample", "hash", "project", "brute"):
        sk = BASELINES[kind](ell, d, seed=0)
        ops = []
        for _ in range(20):
            sk.update(row)
            ops.append(sk.last_ops)
        costs[kind] = max(ops)
    assert costs["hash"] == d
    assert costs["sample"] <= ell + ell * d
    assert costs["project"] == ell * d
    assert costs["brute"] == d * d
