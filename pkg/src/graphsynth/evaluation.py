"""Holdout protocols, proper-score metrics, calibration, and paired gaps."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .sampling import GraphSample, make_rng

LOGLOSS_FLOOR = 1e-12


class SplitError(ValueError):
    pass


# ---------------------------------------------------------------------------
# splits
# ---------------------------------------------------------------------------

@dataclass
class SplitSpec:
    """Train/val/test dyad sets with labels for one evaluation split.

    Dyad arrays are (k, 2) with i < j and no duplicates; the three sets are
    pairwise disjoint.
    """

    regime: str
    train_dyads: np.ndarray
    train_labels: np.ndarray
    val_dyads: np.ndarray
    val_labels: np.ndarray
    test_dyads: np.ndarray
    test_labels: np.ndarray
    seed: int | None = None
    negpos_ratio: float | None = None
    held_out_nodes: np.ndarray | None = None

    @property
    def test_positive_rate(self) -> float:
        return float(self.test_labels.mean()) if self.test_labels.size else float("nan")


def _dyad_key(dyads: np.ndarray, n: int) -> np.ndarray:
    return dyads[:, 0].astype(np.int64) * n + dyads[:, 1].astype(np.int64)


def _sample_negatives(rng, n, count, forbidden_keys, restrict_nodes=None,
                      require_touch=None):
    """Uniform non-edge dyads (i < j), excluding forbidden keys and earlier
    picks.  ``restrict_nodes`` keeps both endpoints in a node set;
    ``require_touch`` demands at least one endpoint in a node set."""
    forbidden = set(int(k) for k in forbidden_keys)
    out = []
    attempts = 0
    max_attempts = 200 * max(count, 1) + 10_000
    node_pool = None if restrict_nodes is None else np.asarray(restrict_nodes)
    touch = None if require_touch is None else set(int(v) for v in require_touch)
    while len(out) < count:
        attempts += 1
        if attempts > max_attempts:
            raise SplitError(
                f"could not find {count} negative dyads ({len(out)} found); "
                "graph too dense for the requested ratio")
        if node_pool is not None:
            i, j = rng.choice(node_pool, size=2, replace=False)
        else:
            i = int(rng.integers(0, n))
            j = int(rng.integers(0, n))
        if i == j:
            continue
        i, j = (i, j) if i < j else (j, i)
        if touch is not None and i not in touch and j not in touch:
            continue
        key = i * n + j
        if key in forbidden:
            continue
        forbidden.add(key)
        out.append((i, j))
    return np.asarray(out, dtype=np.int64).reshape(-1, 2)


def _build_labeled(pos, neg):
    dyads = np.concatenate([pos, neg], axis=0) if neg.size else pos
    labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    order = np.lexsort((dyads[:, 1], dyads[:, 0]))
    return dyads[order], labels[order]


def make_split(graph: GraphSample, regime: str, seed, negpos_ratio: float = 3.0,
               test_frac: float = 0.2, val_frac: float = 0.1,
               node_frac: float = 0.10, m_uniform: int | None = None) -> SplitSpec:
    """Deterministic train/val/test dyad split under one of three regimes.

    edge_holdout: hold out observed edges, negatives sampled from non-edges
    at the fixed ratio.  node_holdout: hold out a node fraction, drop all
    their incident edges from training, test on dyads touching held-out
    nodes.  uniform_dyads: uniform dyads without replacement, labels from
    the adjacency.
    """
    n = graph.n
    rng = make_rng(seed)
    edges = graph.edges
    if edges.shape[0] == 0:
        raise SplitError("graph has no edges")
    edge_keys = _dyad_key(edges, n)

    if regime == "edge_holdout":
        if negpos_ratio < 1:
            raise SplitError("negpos_ratio must be >= 1")
        perm = rng.permutation(edges.shape[0])
        n_test = max(1, int(round(test_frac * edges.shape[0])))
        n_val = max(1, int(round(val_frac * edges.shape[0])))
        if n_test + n_val >= edges.shape[0]:
            raise SplitError("too few edges for the requested holdout fractions")
        test_pos = edges[perm[:n_test]]
        val_pos = edges[perm[n_test:n_test + n_val]]
        train_pos = edges[perm[n_test + n_val:]]
        forbidden = set(int(k) for k in edge_keys)
        neg_sets = []
        for pos in (train_pos, val_pos, test_pos):
            neg = _sample_negatives(rng, n, int(round(negpos_ratio * len(pos))), forbidden)
            forbidden.update(int(k) for k in _dyad_key(neg, n))
            neg_sets.append(neg)
        tr = _build_labeled(train_pos, neg_sets[0])
        va = _build_labeled(val_pos, neg_sets[1])
        te = _build_labeled(test_pos, neg_sets[2])
        spec = SplitSpec("edge_holdout", *tr, *va, *te, seed=seed, negpos_ratio=negpos_ratio)

    elif regime == "node_holdout":
        n_held = max(1, int(round(node_frac * n)))
        held = np.sort(rng.choice(n, size=n_held, replace=False))
        held_set = set(int(v) for v in held)
        touch = np.array([(int(i) in held_set) or (int(j) in held_set) for i, j in edges])
        test_pos = edges[touch]
        keep_pos = edges[~touch]
        if len(test_pos) == 0 or len(keep_pos) < 2:
            raise SplitError("node holdout left an empty positive set")
        perm = rng.permutation(len(keep_pos))
        n_val = max(1, int(round(val_frac * len(keep_pos))))
        val_pos = keep_pos[perm[:n_val]]
        train_pos = keep_pos[perm[n_val:]]
        kept_nodes = np.setdiff1d(np.arange(n), held)
        forbidden = set(int(k) for k in edge_keys)
        train_neg = _sample_negatives(rng, n, int(round(negpos_ratio * len(train_pos))),
                                      forbidden, restrict_nodes=kept_nodes)
        forbidden.update(int(k) for k in _dyad_key(train_neg, n))
        val_neg = _sample_negatives(rng, n, int(round(negpos_ratio * len(val_pos))),
                                    forbidden, restrict_nodes=kept_nodes)
        forbidden.update(int(k) for k in _dyad_key(val_neg, n))
        test_neg = _sample_negatives(rng, n, int(round(negpos_ratio * len(test_pos))),
                                     forbidden, require_touch=held)
        tr = _build_labeled(train_pos, train_neg)
        va = _build_labeled(val_pos, val_neg)
        te = _build_labeled(test_pos, test_neg)
        spec = SplitSpec("node_holdout", *tr, *va, *te, seed=seed,
                         negpos_ratio=negpos_ratio, held_out_nodes=held)

    elif regime == "uniform_dyads":
        total_pairs = n * (n - 1) // 2
        m = m_uniform if m_uniform is not None else min(total_pairs, 20 * edges.shape[0])
        if m < 10:
            raise SplitError("uniform regime needs at least 10 dyads")
        m = min(m, total_pairs)
        # triangular decoding of uniform pair indices without replacement
        idx = rng.choice(total_pairs, size=m, replace=False)
        r = np.ceil((np.sqrt(8.0 * (idx + 1) + 1) - 1) / 2).astype(np.int64)
        s = idx - r * (r - 1) // 2
        dyads = np.stack([s, r], axis=1)
        keys = _dyad_key(dyads, n)
        labels = np.isin(keys, edge_keys).astype(float)
        perm = rng.permutation(m)
        n_test = max(1, int(round(test_frac * m)))
        n_val = max(1, int(round(val_frac * m)))
        te_i, va_i, tr_i = perm[:n_test], perm[n_test:n_test + n_val], perm[n_test + n_val:]
        spec = SplitSpec("uniform_dyads",
                         dyads[np.sort(tr_i)], labels[np.sort(tr_i)],
                         dyads[np.sort(va_i)], labels[np.sort(va_i)],
                         dyads[np.sort(te_i)], labels[np.sort(te_i)],
                         seed=seed)
    else:
        raise SplitError(f"unknown split regime {regime!r}")

    audit_split(spec, graph)
    return spec


def audit_split(spec: SplitSpec, graph: GraphSample) -> None:
    """Split-hygiene audit; raises SplitError on any violation.

    Checks i < j and no duplicates per set, pairwise disjointness, and for
    node holdout that training retains no dyad touching a held-out node.
    """
    n = graph.n
    keysets = []
    for name, dyads in (("train", spec.train_dyads), ("val", spec.val_dyads),
                        ("test", spec.test_dyads)):
        if dyads.size == 0:
            keysets.append(np.empty(0, dtype=np.int64))
            continue
        if np.any(dyads[:, 0] >= dyads[:, 1]):
            raise SplitError(f"{name} set violates i < j")
        keys = _dyad_key(dyads, n)
        if np.unique(keys).size != keys.size:
            raise SplitError(f"{name} set contains duplicate dyads")
        keysets.append(keys)
    for a in range(3):
        for b in range(a + 1, 3):
            if np.intersect1d(keysets[a], keysets[b]).size:
                raise SplitError("train/val/test dyad sets overlap")
    if spec.held_out_nodes is not None:
        held = set(int(v) for v in spec.held_out_nodes)
        for dyads in (spec.train_dyads, spec.val_dyads):
            for i, j in dyads:
                if int(i) in held or int(j) in held:
                    raise SplitError("training retains a dyad touching a held-out node")
    # labels must agree with the adjacency for positives
    edge_keys = set(int(k) for k in _dyad_key(graph.edges, n))
    for dyads, labels in ((spec.train_dyads, spec.train_labels),
                          (spec.val_dyads, spec.val_labels),
                          (spec.test_dyads, spec.test_labels)):
        if dyads.size == 0:
            continue
        keys = _dyad_key(dyads, n)
        is_edge = np.array([int(k) in edge_keys for k in keys])
        if not np.array_equal(is_edge.astype(float), labels):
            raise SplitError("labels disagree with the adjacency")


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricReport:
    """Proper scores, ranking metrics, and calibration decomposition."""

    brier: float
    logloss: float
    auc: float
    ap: float
    ece: float
    murphy: tuple  # (reliability, resolution, uncertainty)
    reliability_bins: tuple  # per-bin (mean prediction, empirical rate, count)
    n: int

    @property
    def binned_brier(self) -> float:
        rel, res, unc = self.murphy
        return rel - res + unc

    def to_dict(self) -> dict:
        return {"brier": self.brier, "logloss": self.logloss, "auc": self.auc,
                "ap": self.ap, "ece": self.ece,
                "reliability": self.murphy[0], "resolution": self.murphy[1],
                "uncertainty": self.murphy[2], "n": self.n}


def auc_score(predictions: np.ndarray, labels: np.ndarray) -> float:
    """Rank-statistic AUC with midranks for ties."""
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    ranks = rankdata(predictions)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def average_precision(predictions: np.ndarray, labels: np.ndarray) -> float:
    """Step-integrated precision-recall (deterministic index tiebreak)."""
    n_pos = int((labels == 1).sum())
    if n_pos == 0:
        return float("nan")
    order = np.lexsort((np.arange(labels.size), -predictions))
    sorted_labels = labels[order]
    tp = np.cumsum(sorted_labels)
    precision = tp / np.arange(1, labels.size + 1)
    return float(np.sum(precision * sorted_labels) / n_pos)


def score_metrics(predictions, labels, bins: int = 10) -> MetricReport:
    """Brier, floored log-loss, AUC, AP, ECE, and the Brier decomposition.

    The reliability/resolution/uncertainty decomposition and ECE share the
    same equal-width bins; empty bins are skipped.
    """
    predictions = np.asarray(predictions, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if predictions.shape != labels.shape or predictions.size == 0:
        raise ValueError("predictions and labels must be equal-length and nonempty")
    if np.any(predictions < 0) or np.any(predictions > 1):
        raise ValueError("predictions must lie in [0,1]")
    m = predictions.size
    brier = float(np.mean((predictions - labels) ** 2))
    clipped = np.clip(predictions, LOGLOSS_FLOOR, 1.0 - LOGLOSS_FLOOR)
    logloss = float(-np.mean(labels * np.log(clipped) + (1 - labels) * np.log1p(-clipped)))
    auc = auc_score(predictions, labels)
    ap = average_precision(predictions, labels)

    bin_idx = np.minimum((predictions * bins).astype(int), bins - 1)
    base_rate = labels.mean()
    ece = 0.0
    rel = 0.0
    res = 0.0
    bin_rows = []
    for b in range(bins):
        mask = bin_idx == b
        count = int(mask.sum())
        if count == 0:
            continue
        p_bar = float(predictions[mask].mean())
        y_bar = float(labels[mask].mean())
        wt = count / m
        ece += wt * abs(p_bar - y_bar)
        rel += wt * (p_bar - y_bar) ** 2
        res += wt * (y_bar - base_rate) ** 2
        bin_rows.append((p_bar, y_bar, count))
    unc = float(base_rate * (1 - base_rate))
    return MetricReport(brier=brier, logloss=logloss, auc=auc, ap=ap, ece=float(ece),
                        murphy=(float(rel), float(res), unc),
                        reliability_bins=tuple(bin_rows), n=m)


# ---------------------------------------------------------------------------
# paired gaps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapSummary:
    metric: str
    gaps: np.ndarray = None
    mean: float = 0.0
    se: float = 0.0
    ci_low: float = 0.0
    ci_high: float = 0.0
    win_rate: float = 0.0


@dataclass(frozen=True)
class PairedGapReport:
    """Per-split paired gaps metric(A) - metric(B); positive favors B for
    losses.  CI is normal: mean +/- 1.96 se; ties count as non-wins."""

    units: tuple
    summaries: dict

    def to_rows(self):
        rows = []
        for name, s in self.summaries.items():
            rows.append({"metric": name, "mean_gap": s.mean, "se": s.se,
                         "ci_low": s.ci_low, "ci_high": s.ci_high,
                         "win_rate": s.win_rate, "n_units": len(self.units)})
        return rows


def paired_gaps(scores_a: dict, scores_b: dict,
                metrics=("logloss", "brier", "auc", "ap")) -> PairedGapReport:
    """Paired per-split gaps between two methods on identical split keys."""
    keys_a, keys_b = set(scores_a), set(scores_b)
    if keys_a != keys_b:
        raise ValueError(f"mismatched split keys: {sorted(keys_a ^ keys_b)}")
    units = tuple(sorted(scores_a))
    summaries = {}
    for metric in metrics:
        gaps = np.array([getattr(scores_a[k], metric) - getattr(scores_b[k], metric)
                         for k in units], dtype=float)
        mean = float(gaps.mean())
        se = float(gaps.std(ddof=1) / np.sqrt(gaps.size)) if gaps.size > 1 else 0.0
        summaries[metric] = GapSummary(
            metric=metric, gaps=gaps, mean=mean, se=se,
            ci_low=mean - 1.96 * se, ci_high=mean + 1.96 * se,
            win_rate=float(np.mean(gaps > 0)))
    return PairedGapReport(units=units, summaries=summaries)


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------

def _logloss_vec(pred, labels):
    p = np.clip(pred, LOGLOSS_FLOOR, 1.0 - LOGLOSS_FLOOR)
    return float(-np.mean(labels * np.log(p) + (1 - labels) * np.log1p(-p)))


def cv_best_agent(val_features: np.ndarray, val_labels: np.ndarray) -> int:
    """Index (0-based over agents) of the validation-log-loss-best agent;
    ties break to the lowest index."""
    if val_labels.size == 0:
        raise ValueError("validation set must be nonempty")
    losses = [_logloss_vec(np.clip(val_features[:, 1 + j], 0.0, 1.0), val_labels)
              for j in range(val_features.shape[1] - 1)]
    return int(np.argmin(losses))


def fit_logistic_stack(features: np.ndarray, labels: np.ndarray,
                       grad_tol: float = 1e-8, max_iter: int = 100_000,
                       plateau_tol: float = 1e-13, plateau_steps: int = 25) -> np.ndarray:
    """Logistic stacking on (1, p_1, ..., p_J) by deterministic full-batch
    gradient descent with backtracking, to gradient norm <= tol.

    Near-separable data drives the MLE toward infinity, so iteration also
    stops after ``plateau_steps`` consecutive steps whose loss decrease is
    below ``plateau_tol`` (the predictions are stationary at that point).
    Degenerate one-class labels yield an intercept-only model (with a
    warning) since the MLE diverges.
    """
    from scipy.special import expit, logit
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    m, d = features.shape
    if labels.min() == labels.max():
        warnings.warn("one-class training labels: returning intercept-only stack")
        rate = np.clip(labels.mean(), 1e-6, 1 - 1e-6)
        beta = np.zeros(d)
        beta[0] = float(logit(rate))
        return beta

    def loss_grad(beta):
        z = features @ beta
        p = expit(z)
        pc = np.clip(p, LOGLOSS_FLOOR, 1 - LOGLOSS_FLOOR)
        loss = -np.mean(labels * np.log(pc) + (1 - labels) * np.log1p(-pc))
        grad = features.T @ (p - labels) / m
        return loss, grad

    beta = np.zeros(d)
    loss, grad = loss_grad(beta)
    step = 1.0
    flat_run = 0
    for _ in range(max_iter):
        gnorm = np.linalg.norm(grad)
        if gnorm <= grad_tol:
            break
        step = min(step * 2.0, 1e4)
        while True:
            cand = beta - step * grad
            new_loss, new_grad = loss_grad(cand)
            if new_loss <= loss - 0.5 * step * gnorm ** 2 or step < 1e-12:
                break
            step *= 0.5
        flat_run = flat_run + 1 if loss - new_loss < plateau_tol * max(1.0, abs(loss)) else 0
        beta, loss, grad = cand, new_loss, new_grad
        if flat_run >= plateau_steps:
            break
    return beta


def baselines(train_features, train_labels, val_features, val_labels) -> dict:
    """Validation-selected best agent plus a logistic stacking model."""
    best = cv_best_agent(val_features, val_labels)
    stack = fit_logistic_stack(train_features, train_labels)
    return {"cv_best_agent": best, "stack_logistic": stack}
