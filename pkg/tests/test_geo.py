"""Constituency profiles, scaling regression, and medoid clustering."""

import itertools

import numpy as np
import pytest

from petmine import geo
from petmine.corpus import ConstituencyMeta
from petmine.errors import ConfigError, ValidationError

from conftest import make_corpus, make_model, make_petition


def _meta(code, electorate=70_000):
    return ConstituencyMeta(code, f"Seat {code}", electorate)


def _zprofile(code, z, electorate=70_000, total=100):
    z = np.asarray(z, dtype=np.float64)
    return geo.ConstituencyProfile(
        meta=_meta(code, electorate), total_signatures=total,
        per_elector=total / electorate, issue_share=z.copy(), z_scores=z)


def _sig_profile(electorate, total):
    return geo.ConstituencyProfile(
        meta=_meta(f"E{electorate}", electorate), total_signatures=total,
        per_elector=total / electorate,
        issue_share=np.array([1.0]), z_scores=np.array([0.0]))


# ---------------------------------------------------------------------------
# profiles


def _two_petition_setup():
    petitions = [make_petition(1, {"E1": 30, "E2": 10, "E3": 10}),
                 make_petition(2, {"E1": 10, "E2": 10, "E3": 30})]
    model = make_model(np.eye(2), doc_ids=("1", "2"))
    meta = [_meta("E1"), _meta("E2", 50_000), _meta("E3")]
    return model, make_corpus(petitions), meta


def test_profiles_hand_case_exact():
    model, corpus, meta = _two_petition_setup()
    profiles = geo.profile_constituencies(model, corpus, meta)
    shares = np.stack([p.issue_share for p in profiles])
    assert np.array_equal(shares, [[0.75, 0.25], [0.5, 0.5], [0.25, 0.75]])
    z = np.stack([p.z_scores for p in profiles])
    # shares are equally spaced so the Z-scores come out exactly integral
    assert np.array_equal(z, [[1.0, -1.0], [0.0, 0.0], [-1.0, 1.0]])
    assert [p.total_signatures for p in profiles] == [40, 20, 40]
    assert profiles[1].per_elector == pytest.approx(20 / 50_000)
    assert all(p.cluster is None for p in profiles)


def test_profiles_standardization():
    rng = np.random.default_rng(4)
    theta = rng.dirichlet(np.ones(3), size=6)
    codes = [f"E{i}" for i in range(8)]
    petitions = [
        make_petition(d, {c: int(rng.integers(1, 80)) for c in codes})
        for d in range(6)
    ]
    model = make_model(theta, doc_ids=tuple(str(d) for d in range(6)))
    profiles = geo.profile_constituencies(model, make_corpus(petitions),
                                          [_meta(c) for c in codes])
    z = np.stack([p.z_scores for p in profiles])
    assert np.allclose(z.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(z.std(axis=0, ddof=1), 1.0, atol=1e-12)
    shares = np.stack([p.issue_share for p in profiles])
    assert np.allclose(shares.sum(axis=1), 1.0)


def test_profiles_zero_signature_constituency_nan():
    model, corpus, meta = _two_petition_setup()
    meta = meta + [_meta("E9")]
    profiles = geo.profile_constituencies(model, corpus, meta)
    ghost = profiles[3]
    assert ghost.total_signatures == 0
    assert np.isnan(ghost.issue_share).all()
    assert np.isnan(ghost.z_scores).all()
    # the live constituencies standardize exactly as before
    z = np.stack([p.z_scores for p in profiles[:3]])
    assert np.array_equal(z, [[1.0, -1.0], [0.0, 0.0], [-1.0, 1.0]])


def test_profiles_skip_unlisted_codes():
    petitions = [make_petition(1, {"E1": 30, "UNKNOWN": 500, "E2": 10}),
                 make_petition(2, {"E1": 10, "E2": 30, "ZZZ": 99})]
    model = make_model(np.eye(2), doc_ids=("1", "2"))
    profiles = geo.profile_constituencies(
        model, make_corpus(petitions), [_meta("E1"), _meta("E2")])
    assert [p.total_signatures for p in profiles] == [40, 40]


def test_profiles_errors():
    model, corpus, meta = _two_petition_setup()
    with pytest.raises(ValidationError, match="no constituency metadata"):
        geo.profile_constituencies(model, corpus, [])
    other = make_model(np.eye(2), doc_ids=("8", "9"))
    with pytest.raises(ValidationError, match="misaligned"):
        geo.profile_constituencies(other, corpus, meta)
    lone = make_corpus([make_petition(1, {"E1": 5})])
    lone_model = make_model(np.eye(1), doc_ids=("1",))
    with pytest.raises(ValidationError, match="at least 2"):
        geo.profile_constituencies(lone_model, lone, meta)


# ---------------------------------------------------------------------------
# scaling regression


def test_scaling_fit_exact_power_law():
    electorates = [100, 200, 400, 800, 1600]
    profiles = [_sig_profile(e, 3 * e * e) for e in electorates]
    fit = geo.scaling_fit(profiles)
    assert fit.mode == "raw"
    assert fit.n == 5
    assert fit.exponent == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(3), abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_scaling_fit_binned():
    rng = np.random.default_rng(9)
    electorates = rng.integers(40_000, 110_000, size=40)
    profiles = [_sig_profile(2 * int(e), int(e)) for e in electorates]
    raw = geo.scaling_fit(profiles)
    binned = geo.scaling_fit(profiles, mode="binned", n_bins=8)
    assert binned.mode == "binned"
    assert binned.n == 8
    # proportional data keeps slope 1 under both treatments
    assert raw.exponent == pytest.approx(1.0, abs=1e-6)
    assert binned.exponent == pytest.approx(1.0, abs=1e-2)


def test_scaling_fit_ignores_silent_constituencies():
    profiles = [_sig_profile(e, 2 * e) for e in (100, 200, 400)]
    profiles.append(_sig_profile(800, 0))
    fit = geo.scaling_fit(profiles)
    assert fit.n == 3


def test_scaling_fit_errors():
    good = [_sig_profile(e, e) for e in (100, 200, 400)]
    with pytest.raises(ConfigError, match="unknown scaling mode"):
        geo.scaling_fit(good, mode="magic")
    with pytest.raises(ValidationError, match="at least 3"):
        geo.scaling_fit(good[:2])
    with pytest.raises(ValidationError, match="cannot fill"):
        geo.scaling_fit(good, mode="binned", n_bins=10)
    flat = [_sig_profile(500, s) for s in (10, 20, 30)]
    with pytest.raises(ValidationError, match="all equal"):
        geo.scaling_fit(flat)


# ---------------------------------------------------------------------------
# clustering


def _blob_profiles(n_per=6, spread=0.05, seed=0):
    rng = np.random.default_rng(seed)
    centers = [np.array([3.0, 0.0, -1.0]), np.array([-2.0, 1.5, 2.0])]
    profiles = []
    for b, center in enumerate(centers):
        for i in range(n_per):
            z = center + rng.normal(0.0, spread, size=3)
            profiles.append(_zprofile(f"B{b}N{i}", z))
    return profiles


def _brute_medoid_cost(dist, k):
    return min(
        float(dist[:, c].min(axis=1).sum())
        for c in itertools.combinations(range(dist.shape[0]), k)
    )


def test_pam_separates_blobs():
    profiles = _blob_profiles()
    result = geo.pam_cluster(profiles, k=2)
    assert result.k == 2
    assert result.metric == "euclidean"
    first = [result.assignments[f"B0N{i}"] for i in range(6)]
    second = [result.assignments[f"B1N{i}"] for i in range(6)]
    assert len(set(first)) == 1
    assert len(set(second)) == 1
    assert set(first) != set(second)
    for p in profiles:
        assert p.cluster == result.assignments[p.meta.code]


def test_pam_matches_brute_force():
    rng = np.random.default_rng(12)
    for trial in range(10):
        profiles = [_zprofile(f"E{i}", rng.normal(size=3)) for i in range(9)]
        result = geo.pam_cluster(profiles, k=3)
        z = np.stack([p.z_scores for p in profiles])
        from scipy.spatial.distance import cdist
        dist = cdist(z, z)
        assert result.total_cost == pytest.approx(
            _brute_medoid_cost(dist, 3), abs=1e-9)


def test_pam_swap_path_is_one_swap_optimal():
    rng = np.random.default_rng(33)
    profiles = [_zprofile(f"E{i}", rng.normal(size=3)) for i in range(14)]
    # force the heuristic path and verify no single exchange improves it
    result = geo.pam_cluster(profiles, k=3, exact_budget=0)
    z = np.stack([p.z_scores for p in profiles])
    from scipy.spatial.distance import cdist
    dist = cdist(z, z)
    medoids = list(result.medoid_indices)
    base = float(dist[:, medoids].min(axis=1).sum())
    assert result.total_cost == pytest.approx(base)
    for pos in range(len(medoids)):
        for cand in range(len(profiles)):
            if cand in medoids:
                continue
            trial = medoids.copy()
            trial[pos] = cand
            assert float(dist[:, trial].min(axis=1).sum()) >= base - 1e-9


def test_pam_deterministic_and_seed_inert():
    profiles_a = _blob_profiles(seed=5)
    profiles_b = _blob_profiles(seed=5)
    a = geo.pam_cluster(profiles_a, k=2, seed=1)
    b = geo.pam_cluster(profiles_b, k=2, seed=999)
    assert a.medoid_indices == b.medoid_indices
    assert a.assignments == b.assignments
    assert a.total_cost == b.total_cost


def test_pam_skips_nan_profiles():
    profiles = _blob_profiles(n_per=4)
    ghost = _zprofile("GHOST", [0.0, 0.0, 0.0])
    ghost.z_scores = np.full(3, np.nan)
    ghost.issue_share = np.full(3, np.nan)
    profiles.append(ghost)
    result = geo.pam_cluster(profiles, k=2)
    assert "GHOST" not in result.assignments
    assert ghost.cluster is None
    assert len(result.assignments) == 8


def test_pam_manhattan_metric():
    profiles = _blob_profiles()
    result = geo.pam_cluster(profiles, k=2, metric="manhattan")
    assert result.metric == "manhattan"
    assert len(set(result.assignments.values())) == 2


def test_pam_validation():
    profiles = _blob_profiles(n_per=2)
    with pytest.raises(ConfigError, match="metric"):
        geo.pam_cluster(profiles, k=2, metric="cosine")
    with pytest.raises(ConfigError, match="k must satisfy"):
        geo.pam_cluster(profiles, k=0)
    with pytest.raises(ConfigError, match="k must satisfy"):
        geo.pam_cluster(profiles, k=4)


def test_cluster_issue_profile_means():
    profiles = [_zprofile("A", [1.0, 0.0]), _zprofile("B", [0.8, 0.2]),
                _zprofile("C", [0.0, 1.0])]
    for p, share in zip(profiles, ([1.0, 0.0], [0.8, 0.2], [0.0, 1.0])):
        p.issue_share = np.array(share)
    result = geo.pam_cluster(profiles, k=2)
    means = geo.cluster_issue_profile(result, profiles)
    ab = result.assignments["A"]
    assert means[ab] == pytest.approx([0.9, 0.1])
    assert means[result.assignments["C"]] == pytest.approx([0.0, 1.0])


# ---------------------------------------------------------------------------
# silhouette


def test_silhouette_separated_blobs_near_one():
    profiles = _blob_profiles(spread=0.01)
    z = np.stack([p.z_scores for p in profiles])
    from scipy.spatial.distance import cdist
    dist = cdist(z, z)
    labels = np.array([0] * 6 + [1] * 6)
    assert geo.silhouette_score(dist, labels) > 0.95


def test_silhouette_singletons_score_zero():
    dist = np.array([[0.0, 1.0, 5.0],
                     [1.0, 0.0, 5.0],
                     [5.0, 5.0, 0.0]])
    labels = np.array([0, 0, 1])
    # the singleton contributes 0; the pair scores (5-1)/5 each
    want = (0.8 + 0.8 + 0.0) / 3
    assert geo.silhouette_score(dist, labels) == pytest.approx(want)


def test_silhouette_sweep_shape_and_range():
    profiles = _blob_profiles()
    sweep = geo.silhouette_sweep(profiles, k_values=range(2, 15))
    # k values at or above the point count are dropped
    assert sorted(sweep) == list(range(2, 12))
    assert all(-1.0 <= v <= 1.0 for v in sweep.values())
    assert max(sweep, key=sweep.get) == 2
    again = geo.silhouette_sweep(profiles, k_values=range(2, 15))
    assert sweep == again


def test_silhouette_sweep_metric_validation():
    with pytest.raises(ConfigError):
        geo.silhouette_sweep(_blob_profiles(), metric="cosine")
