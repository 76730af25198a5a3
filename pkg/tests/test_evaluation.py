"""Split protocols, proper-score metrics, paired gaps, and baselines."""

from types import SimpleNamespace

import numpy as np
import pytest
from scipy.special import expit, logit

from graphsynth import (Block, SplitError, audit_split, auc_score,
                        average_precision, cv_best_agent, fit_logistic_stack,
                        make_split, paired_gaps, sample_graph, score_metrics)

SPARSE_BLOCK = Block.from_arrays([0, 0.5, 1], [[0.08, 0.02], [0.02, 0.08]])


def sparse_graph(seed=7, n=300):
    return sample_graph(SPARSE_BLOCK, n, seed=seed)


# ---------------------------------------------------------------------------
# metrics: hand oracles
# ---------------------------------------------------------------------------

def test_perfect_predictions():
    labels = np.array([1.0, 0.0, 1.0, 0.0, 1.0])
    r = score_metrics(labels.copy(), labels)
    assert r.brier == 0.0
    assert r.logloss <= 1e-11
    assert r.auc == 1.0
    assert r.ap == 1.0
    assert r.ece == 0.0


def test_constant_half_on_balanced_labels():
    labels = np.array([1.0, 0.0, 1.0, 0.0])
    preds = np.full(4, 0.5)
    r = score_metrics(preds, labels)
    assert r.brier == pytest.approx(0.25, abs=1e-12)
    assert r.logloss == pytest.approx(np.log(2.0), abs=1e-12)
    assert r.auc == pytest.approx(0.5, abs=1e-12)
    # constant scores: index tiebreak ranks positives at 1 and 3
    assert r.ap == pytest.approx((1.0 + 2.0 / 3.0) / 2.0, abs=1e-12)
    assert r.ece == 0.0  # the single occupied bin is perfectly calibrated


def test_two_point_oracle():
    preds = np.array([0.9, 0.1])
    labels = np.array([1.0, 0.0])
    r = score_metrics(preds, labels)
    assert r.auc == 1.0
    assert r.ap == 1.0
    assert r.brier == pytest.approx(0.01, abs=1e-15)
    assert r.logloss == pytest.approx(-np.log(0.9), abs=1e-12)
    assert r.ece == pytest.approx(0.1, abs=1e-12)
    rel, res, unc = r.murphy
    assert rel == pytest.approx(0.01, abs=1e-12)
    assert res == pytest.approx(0.25, abs=1e-12)
    assert unc == pytest.approx(0.25, abs=1e-12)
    assert r.binned_brier == pytest.approx(r.brier, abs=1e-12)


def test_murphy_binned_identity_random():
    """reliability - resolution + uncertainty equals the Brier score of the
    bin-averaged predictions (exact identity, checked to 1e-9)."""
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = int(rng.integers(50, 500))
        preds = rng.random(m)
        labels = (rng.random(m) < preds).astype(float)
        bins = 10
        r = score_metrics(preds, labels, bins=bins)
        bin_idx = np.minimum((preds * bins).astype(int), bins - 1)
        binned = preds.copy()
        for b in np.unique(bin_idx):
            binned[bin_idx == b] = preds[bin_idx == b].mean()
        brier_binned = np.mean((binned - labels) ** 2)
        assert abs(r.binned_brier - brier_binned) <= 1e-9


def test_reliability_bins_skip_empty():
    preds = np.array([0.05, 0.06, 0.95, 0.94])
    labels = np.array([0.0, 0.0, 1.0, 1.0])
    r = score_metrics(preds, labels)
    assert len(r.reliability_bins) == 2  # only bins 0 and 9 are occupied
    counts = [row[2] for row in r.reliability_bins]
    assert counts == [2, 2]


def test_constant_predictor_grid_minimized_at_base_rate():
    """Among constant predictors, the label frequency minimizes both proper
    scores (propriety sanity check)."""
    rng = np.random.default_rng(13)
    labels = (rng.random(500) < 0.3).astype(float)
    rate = labels.mean()
    grid = np.linspace(0.01, 0.99, 99)
    briers = [score_metrics(np.full(500, c), labels).brier for c in grid]
    loglosses = [score_metrics(np.full(500, c), labels).logloss for c in grid]
    best_c = grid[int(np.argmin(briers))]
    assert abs(best_c - rate) <= 0.011
    assert abs(grid[int(np.argmin(loglosses))] - rate) <= 0.011


def test_ranking_metrics_monotone_invariant():
    rng = np.random.default_rng(15)
    preds = rng.random(200)
    labels = (rng.random(200) < preds).astype(float)
    warped = expit(4.0 * preds - 2.0)  # strictly increasing into (0,1)
    assert auc_score(warped, labels) == pytest.approx(auc_score(preds, labels), abs=1e-12)
    assert average_precision(warped, labels) == pytest.approx(
        average_precision(preds, labels), abs=1e-12)


def test_metrics_degenerate_and_invalid_inputs():
    assert np.isnan(auc_score(np.array([0.2, 0.4]), np.array([1.0, 1.0])))
    assert np.isnan(average_precision(np.array([0.2]), np.array([0.0])))
    with pytest.raises(ValueError):
        score_metrics(np.array([0.5]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        score_metrics(np.array([1.2]), np.array([1.0]))


# ---------------------------------------------------------------------------
# splits
# ---------------------------------------------------------------------------

def test_edge_holdout_ratio_and_determinism():
    g = sparse_graph()
    a = make_split(g, "edge_holdout", seed=1, negpos_ratio=3.0)
    b = make_split(g, "edge_holdout", seed=1, negpos_ratio=3.0)
    np.testing.assert_array_equal(a.train_dyads, b.train_dyads)
    np.testing.assert_array_equal(a.test_labels, b.test_labels)
    for labels in (a.train_labels, a.val_labels, a.test_labels):
        pos = labels.sum()
        neg = labels.size - pos
        assert neg == round(3.0 * pos)
    c = make_split(g, "edge_holdout", seed=2, negpos_ratio=3.0)
    assert not np.array_equal(a.test_dyads, c.test_dyads)


def test_edge_holdout_rejects_low_ratio():
    g = sparse_graph()
    with pytest.raises(SplitError):
        make_split(g, "edge_holdout", seed=1, negpos_ratio=0.5)
    with pytest.raises(SplitError):
        make_split(g, "no_such_regime", seed=1)


def test_node_holdout_removes_incident_dyads():
    g = sparse_graph(seed=9)
    spec = make_split(g, "node_holdout", seed=3)
    held = set(int(v) for v in spec.held_out_nodes)
    assert len(held) == round(0.10 * g.n)
    for dyads in (spec.train_dyads, spec.val_dyads):
        for i, j in dyads:
            assert int(i) not in held and int(j) not in held
    # every positive test dyad touches the held-out set
    pos = spec.test_dyads[spec.test_labels == 1]
    for i, j in pos:
        assert int(i) in held or int(j) in held


def test_uniform_dyads_counts_and_rate():
    g = sparse_graph(seed=21)
    m = 4000
    spec = make_split(g, "uniform_dyads", seed=5, m_uniform=m)
    total = spec.train_labels.size + spec.val_labels.size + spec.test_labels.size
    assert total == m
    density = g.n_edges / (g.n * (g.n - 1) / 2)
    rate = (spec.train_labels.sum() + spec.val_labels.sum()
            + spec.test_labels.sum()) / m
    assert abs(rate - density) <= 4 * np.sqrt(density / m)


def test_audit_split_catches_tampering():
    g = sparse_graph(seed=33)
    spec = make_split(g, "edge_holdout", seed=8)
    audit_split(spec, g)  # clean split passes

    bad = make_split(g, "edge_holdout", seed=8)
    bad.train_dyads = np.concatenate([bad.train_dyads, spec.test_dyads[:1]])
    bad.train_labels = np.concatenate([bad.train_labels, spec.test_labels[:1]])
    with pytest.raises(SplitError, match="overlap"):
        audit_split(bad, g)

    flipped = make_split(g, "edge_holdout", seed=8)
    flipped.train_labels = flipped.train_labels.copy()
    flipped.train_labels[0] = 1.0 - flipped.train_labels[0]
    with pytest.raises(SplitError, match="disagree"):
        audit_split(flipped, g)


# ---------------------------------------------------------------------------
# paired gaps
# ---------------------------------------------------------------------------

def _score_maps(gap_values):
    a = {f"s{i}": SimpleNamespace(brier=0.3 + gv) for i, gv in enumerate(gap_values)}
    b = {f"s{i}": SimpleNamespace(brier=0.3) for i in range(len(gap_values))}
    return a, b


def test_paired_gaps_hand_oracle():
    a, b = _score_maps([0.1, 0.1, -0.1, 0.1, 0.1])
    report = paired_gaps(a, b, metrics=("brier",))
    s = report.summaries["brier"]
    assert s.mean == pytest.approx(0.06, abs=1e-12)
    sd = np.std([0.1, 0.1, -0.1, 0.1, 0.1], ddof=1)
    assert s.se == pytest.approx(sd / np.sqrt(5), abs=1e-12)
    assert s.ci_low == pytest.approx(s.mean - 1.96 * s.se, abs=1e-12)
    assert s.win_rate == pytest.approx(0.8)


def test_paired_gaps_identical_methods():
    a, b = _score_maps([0.0, 0.0, 0.0])
    report = paired_gaps(a, b, metrics=("brier",))
    s = report.summaries["brier"]
    assert s.mean == 0.0 and s.se == 0.0 and s.win_rate == 0.0  # ties lose


def test_paired_gaps_report_shape_and_key_check():
    rng = np.random.default_rng(19)
    keys = [f"{reg}:{k}" for reg in ("eh", "nh", "ud") for k in range(5)]
    mk = lambda: {key: SimpleNamespace(logloss=rng.random(), brier=rng.random(),
                                       auc=rng.random(), ap=rng.random())
                  for key in keys}
    report = paired_gaps(mk(), mk())
    assert report.units == tuple(sorted(keys))
    rows = report.to_rows()
    assert len(rows) == 4
    assert all(row["n_units"] == 15 for row in rows)
    with pytest.raises(ValueError, match="mismatched"):
        paired_gaps({"a": SimpleNamespace(brier=0.1)},
                    {"b": SimpleNamespace(brier=0.1)}, metrics=("brier",))


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------

def test_cv_best_agent_selection():
    rng = np.random.default_rng(23)
    m = 2000
    good = rng.random(m)
    labels = (rng.random(m) < good).astype(float)
    feats = np.column_stack([np.ones(m), np.full(m, 0.5), good])
    assert cv_best_agent(feats, labels) == 1
    # duplicate best columns tie-break to the lowest index
    feats_tie = np.column_stack([np.ones(m), good, good])
    assert cv_best_agent(feats_tie, labels) == 0
    single = np.column_stack([np.ones(m), good])
    assert cv_best_agent(single, labels) == 0
    with pytest.raises(ValueError):
        cv_best_agent(single[:0], labels[:0])


def test_logistic_stack_recovers_coefficients():
    rng = np.random.default_rng(29)
    m = 20_000
    x = rng.random(m)
    y = rng.random(m)
    feats = np.column_stack([np.ones(m), x, y])
    true_beta = np.array([0.5, -1.2, 2.0])
    labels = (rng.random(m) < expit(feats @ true_beta)).astype(float)
    beta = fit_logistic_stack(feats, labels)
    assert np.max(np.abs(beta - true_beta)) <= 0.2


def test_logistic_stack_beats_single_agents():
    rng = np.random.default_rng(31)
    m = 5000
    p1 = rng.random(m)
    noise = rng.random(m)
    labels = (rng.random(m) < expit(3.0 * p1 - 1.5)).astype(float)
    feats = np.column_stack([np.ones(m), p1, noise])
    beta = fit_logistic_stack(feats, labels)
    stack_pred = expit(feats @ beta)
    stack_ll = score_metrics(stack_pred, labels).logloss
    for col in (1, 2):
        agent_ll = score_metrics(np.clip(feats[:, col], 0, 1), labels).logloss
        assert stack_ll < agent_ll
    assert beta[1] > 0


def test_logistic_stack_one_class_fallback():
    feats = np.column_stack([np.ones(50), np.linspace(0, 1, 50)])
    with pytest.warns(UserWarning, match="one-class"):
        beta = fit_logistic_stack(feats, np.ones(50))
    assert beta[1] == 0.0
    assert beta[0] == pytest.approx(logit(1 - 1e-6))
