import numpy as np
import pytest
from conftest import cycle_graph

from nbdist import (Graph, ModelSpec, TuningParams, generate, tnbsd,
                    top_eigenvalues)
from nbdist.analysis import (KSResult, LabeledPointSet, NumericalError,
                             fingerprint_ks_test, gmm_em, kpca_cosine, ks_two_sample,
                             purity, rewiring_profile, timeline)


def pairwise_distances(points):
    diffs = points[:, None, :] - points[None, :, :]
    return np.sqrt((diffs ** 2).sum(axis=-1))


class TestKpcaCosine:
    def test_orthogonal_triple_equilateral(self):
        pts = kpca_cosine(np.eye(3), dims=2).points
        d = pairwise_distances(pts)
        assert abs(d[0, 1] - d[0, 2]) < 1e-8
        assert abs(d[0, 1] - d[1, 2]) < 1e-8

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(12, 5))
        scales = rng.uniform(0.1, 10.0, size=12)
        a = kpca_cosine(x, dims=3).points
        b = kpca_cosine(x * scales[:, None], dims=3).points
        assert np.abs(a - b).max() < 1e-8

    def test_zero_vector_rejected(self):
        x = np.ones((5, 3))
        x[2] = 0.0
        with pytest.raises(ValueError, match="index 2"):
            kpca_cosine(x, dims=2)

    def test_too_few_vectors(self):
        with pytest.raises(ValueError, match="at least"):
            kpca_cosine(np.eye(2), dims=2)

    def test_deterministic_sign(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(10, 4))
        a = kpca_cosine(x, dims=2).points
        b = kpca_cosine(x, dims=2).points
        assert np.array_equal(a, b)


class TestGmmEm:
    def test_k1_mean_is_sample_mean(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(40, 3))
        res = gmm_em(LabeledPointSet(points=x), k=1, restarts=1)
        assert np.abs(res.means[0] - x.mean(axis=0)).max() < 1e-10

    def test_identical_points_hit_reg_floor(self):
        res = gmm_em(LabeledPointSet(points=np.ones((6, 2))), k=1, restarts=1)
        assert np.allclose(res.covariances[0], 1e-6 * np.eye(2))

    def test_log_likelihood_monotone(self):
        rng = np.random.default_rng(2)
        x = np.concatenate([rng.normal(0, 1, (30, 2)), rng.normal(6, 1, (30, 2))])
        res = gmm_em(LabeledPointSet(points=x), k=2, seed=0)
        hist = res.ll_history
        assert all(b >= a for a, b in zip(hist, hist[1:]))

    def test_separated_blobs_recovered(self):
        rng = np.random.default_rng(4)
        x = np.concatenate([rng.normal(0, 0.3, (25, 2)), rng.normal(5, 0.3, (25, 2))])
        labels = [0] * 25 + [1] * 25
        res = gmm_em(LabeledPointSet(points=x), k=2, seed=1)
        assert purity(res.assignments, labels) == 1.0

    def test_fewer_points_than_components(self):
        with pytest.raises(ValueError, match="fewer points"):
            gmm_em(LabeledPointSet(points=np.eye(3)), k=6)

    def test_k_validated(self):
        with pytest.raises(ValueError):
            gmm_em(LabeledPointSet(points=np.eye(3)), k=0)

    def test_weights_sum_to_one(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(30, 2))
        res = gmm_em(LabeledPointSet(points=x), k=3, seed=2)
        assert abs(res.weights.sum() - 1.0) < 1e-9


class TestPurity:
    def test_perfect(self):
        assert purity([0, 1, 2], ["a", "b", "c"]) == 1.0

    def test_random_guess_floor(self):
        labels = [m for m in "abcdef" for _ in range(4)]
        assert abs(purity([0] * 24, labels) - 1 / 6) < 1e-12

    def test_majority_counting(self):
        assert purity([0, 0, 1, 1], ["a", "a", "a", "b"]) == 0.75

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            purity([0, 1], ["a"])

    def test_single_cluster_is_max_class_frequency(self):
        labels = ["a", "a", "a", "b", "c"]
        assert purity([0] * 5, labels) == 3 / 5


class TestKsTwoSample:
    def test_identical_samples(self):
        r = ks_two_sample([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert r.statistic == 0.0 and r.p_value == 1.0 and not r.rejected

    def test_disjoint_supports(self):
        r = ks_two_sample([0.0] * 20, [1.0] * 20)
        assert r.statistic == 1.0 and r.rejected

    def test_shifted_uniforms(self):
        hits = 0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            r = ks_two_sample(rng.uniform(0, 1, 500), rng.uniform(0.5, 1.5, 500),
                              level=0.1)
            assert abs(r.statistic - 0.5) < 0.07
            hits += r.rejected
        assert hits == 10

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        x, y = rng.normal(size=60), rng.normal(1.0, 1.0, size=40)
        a, b = ks_two_sample(x, y), ks_two_sample(y, x)
        assert a.statistic == b.statistic and a.p_value == b.p_value

    def test_p_monotone_in_statistic(self):
        # same sizes, increasing shift -> larger D -> smaller p
        x = np.linspace(0, 1, 50)
        prev = None
        for shift in (0.1, 0.3, 0.6, 1.2):
            r = ks_two_sample(x, x + shift)
            if prev is not None:
                assert r.statistic >= prev.statistic
                assert r.p_value <= prev.p_value
            prev = r

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ks_two_sample([], [1.0])


class TestFingerprintKsTest:
    def test_self_comparison(self, k4):
        fp = top_eigenvalues(k4, 3)
        real, imag = fingerprint_ks_test(fp, fp)
        assert not real.rejected and not imag.rejected
        assert real.p_value == 1.0 and imag.p_value == 1.0

    def test_bonferroni_level_applied(self):
        rng = np.random.default_rng(0)
        x, y = rng.normal(size=100), rng.normal(0.3, 1.0, size=100)
        loose = ks_two_sample(x, y, level=0.1)
        strict = ks_two_sample(x, y, level=0.1 / 14)
        assert loose.statistic == strict.statistic
        assert (not strict.rejected) or loose.rejected

    def test_empty_fingerprint_rejected(self, k3):
        from nbdist import Fingerprint
        empty = Fingerprint(eigs=np.array([], dtype=complex), r=0)
        with pytest.raises(ValueError):
            fingerprint_ks_test(empty, top_eigenvalues(k3, 3))


class TestRewiringProfile:
    def test_zero_fraction_zero_distance(self):
        g = generate(ModelSpec("ws", n=200, target_mean_degree=6.0, seed=1))
        prof = rewiring_profile(g, [0.0, 0.2], ensemble_count=3, r=10, seed=2)
        assert prof.distances[0] == 0.0
        assert prof.distances[1] > 0.0

    def test_k3_baseline_zero(self, k3):
        prof = rewiring_profile(k3, [], ensemble_count=4, r=3, seed=0)
        assert prof.baseline_mean == 0.0 and prof.baseline_std == 0.0

    def test_unsorted_fractions_rejected(self, k3):
        with pytest.raises(ValueError, match="ascending"):
            rewiring_profile(k3, [0.2, 0.1], ensemble_count=2, r=3)

    def test_baseline_stats_consistent(self):
        g = generate(ModelSpec("er", n=150, target_mean_degree=8.0, seed=3))
        prof = rewiring_profile(g, [0.1], ensemble_count=5, r=10, seed=4)
        base = np.array(prof.baseline_distances)
        assert abs(prof.baseline_mean - base.mean()) < 1e-12
        assert abs(prof.baseline_std - base.std()) < 1e-12


class TestTimeline:
    def test_constant_sequence(self, k4):
        fp = top_eigenvalues(k4, 3)
        rep = timeline([fp] * 5)
        assert all(d == 0.0 for d in rep.distances)
        assert rep.anomalies == ()

    def test_two_fingerprints_never_flagged(self, k3, c4):
        rep = timeline([top_eigenvalues(k3, 3), top_eigenvalues(c4, 3)])
        assert len(rep.distances) == 1
        assert rep.std == 0.0 and rep.anomalies == ()

    def test_reversal_symmetry(self):
        fps = [top_eigenvalues(cycle_graph(n), 4) for n in (4, 5, 6, 7)]
        fwd = timeline(fps)
        rev = timeline(fps[::-1])
        assert fwd.distances == rev.distances[::-1]

    def test_fixed_mode_skips_base(self, k3, c4):
        fps = [top_eigenvalues(k3, 3), top_eigenvalues(c4, 3),
               top_eigenvalues(k3, 3)]
        rep = timeline(fps, mode="fixed", base=0)
        assert len(rep.distances) == 2
        assert rep.distances[1] == 0.0

    def test_fixed_mode_base_validated(self, k3, c4):
        fps = [top_eigenvalues(k3, 3), top_eigenvalues(c4, 3)]
        with pytest.raises(ValueError, match="out of range"):
            timeline(fps, mode="fixed", base=5)

    def test_unknown_mode(self, k3, c4):
        fps = [top_eigenvalues(k3, 3), top_eigenvalues(c4, 3)]
        with pytest.raises(ValueError, match="mode"):
            timeline(fps, mode="sliding")

    def test_too_short(self, k3):
        with pytest.raises(ValueError, match="at least 2"):
            timeline([top_eigenvalues(k3, 3)])

    def test_stats_recomputable(self):
        fps = [top_eigenvalues(cycle_graph(n), 4) for n in (4, 5, 6, 7, 8)]
        rep = timeline(fps)
        arr = np.array(rep.distances)
        assert abs(rep.mean - arr.mean()) < 1e-12
        assert abs(rep.std - arr.std()) < 1e-12
        assert rep.anomalies == tuple(np.nonzero(arr > rep.mean + rep.std)[0])

    def test_injected_model_switch_flagged(self):
        r, flagged = 20, 0
        trials = 10
        for seed in range(trials):
            fps = []
            for i in range(6):
                if i == 3:
                    g = generate(ModelSpec("ws", n=300, target_mean_degree=8.0,
                                           seed=seed))
                else:
                    g = generate(ModelSpec("er", n=300, target_mean_degree=8.0,
                                           seed=100 * seed + i))
                fps.append(top_eigenvalues(g, r))
            rep = timeline(fps)
            # distances indexed from step 1: boundaries are entries 2 and 3
            if 2 in rep.anomalies and 3 in rep.anomalies:
                flagged += 1
        assert flagged >= 0.9 * trials
