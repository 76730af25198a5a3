"""Finite-graph agent models, entropic tilts, and small-n enumeration.

Agents are edge-probability generators on a fixed vertex set.  Entropic
tilting by edge or block statistics has closed forms (logit shifts) for the
canonical families; general exponential-family agents are calibrated to
target moments by damped Newton on the exactly enumerated mean map
(supported up to n = 6 vertices).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit, logit, logsumexp


class AgentError(ValueError):
    pass


class InfeasibleTarget(AgentError):
    """Requested moment target lies outside the mean-parameter space."""


class CalibrationFailure(AgentError):
    """Newton iteration failed to reach the moment target."""


MAX_ENUM_N = 6
CHUNG_LU_CAP = 1.0 - 1e-12


# ---------------------------------------------------------------------------
# agent kinds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TiltState:
    """Applied entropic-tilt parameters: a global edge shift and, for block
    models, a symmetric blockwise shift matrix."""

    lambda_edge: float = 0.0
    lambda_block: tuple | None = None
    applied: bool = False


@dataclass(frozen=True)
class ER:
    p: float
    tilt: TiltState = TiltState()

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise AgentError("ER edge probability must lie in (0,1)")


@dataclass(frozen=True)
class SBM:
    """Block model with node assignment c : [n] -> {0..K-1} and symmetric
    rate matrix with entries in (0,1)."""

    assignment: tuple
    matrix: tuple
    tilt: TiltState = TiltState()

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if not np.allclose(m, m.T, atol=0.0):
            raise AgentError("SBM rate matrix must be symmetric")
        if np.any(m <= 0.0) or np.any(m >= 1.0):
            raise AgentError("SBM rates must lie in the open interval (0,1)")
        c = np.asarray(self.assignment, dtype=int)
        if c.min() < 0 or c.max() >= m.shape[0]:
            raise AgentError("assignment labels must index the rate matrix")

    @staticmethod
    def make(assignment, matrix, tilt=TiltState()) -> "SBM":
        return SBM(tuple(np.asarray(assignment, dtype=int).tolist()),
                   tuple(map(tuple, np.asarray(matrix, dtype=float))), tilt)

    @property
    def n(self) -> int:
        return len(self.assignment)


@dataclass(frozen=True)
class RDPG:
    """Logistic random dot product agent: P(edge ij) = sigmoid(z_i.z_j + b)."""

    positions: tuple
    intercept: float = 0.0
    tilt: TiltState = TiltState()

    @staticmethod
    def make(positions, intercept=0.0, tilt=TiltState()) -> "RDPG":
        z = np.atleast_2d(np.asarray(positions, dtype=float))
        return RDPG(tuple(map(tuple, z)), float(intercept), tilt)

    @property
    def n(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class ChungLu:
    """Product-weight agent: P(edge ij) = min(theta_i theta_j, cap)."""

    theta: tuple
    tilt: TiltState = TiltState()

    def __post_init__(self):
        if np.any(np.asarray(self.theta, dtype=float) < 0.0):
            raise AgentError("Chung-Lu weights must be nonnegative")

    @staticmethod
    def make(theta, tilt=TiltState()) -> "ChungLu":
        return ChungLu(tuple(np.asarray(theta, dtype=float).tolist()), tilt)

    @property
    def n(self) -> int:
        return len(self.theta)


@dataclass(frozen=True)
class DegHist:
    """Degree-bin agent: nodes carry a bin label, edges use bin-pair rates."""

    node_bins: tuple
    rates: tuple
    bin_edges: tuple = ()
    tilt: TiltState = TiltState()

    @staticmethod
    def make(node_bins, rates, bin_edges=(), tilt=TiltState()) -> "DegHist":
        return DegHist(tuple(np.asarray(node_bins, dtype=int).tolist()),
                       tuple(map(tuple, np.asarray(rates, dtype=float))),
                       tuple(np.asarray(bin_edges, dtype=float).tolist()), tilt)

    @property
    def n(self) -> int:
        return len(self.node_bins)


AgentModel = ER | SBM | RDPG | ChungLu | DegHist


# ---------------------------------------------------------------------------
# closed-form tilts
# ---------------------------------------------------------------------------

def tilt_er(p: float, lam: float) -> float:
    """Entropic edge tilt of an independent-edge probability.

    p' = e^lam p / (e^lam p + 1 - p), i.e. a shift of lam in log-odds.
    """
    if not 0.0 < p < 1.0:
        raise AgentError("edge tilt needs p in the open interval (0,1)")
    return float(expit(logit(p) + lam))


def tilt_sbm(matrix, lam_matrix) -> np.ndarray:
    """Blockwise log-odds shift of a block rate matrix."""
    b = np.asarray(matrix, dtype=float)
    lam = np.asarray(lam_matrix, dtype=float)
    if lam.shape != b.shape:
        raise AgentError("tilt matrix shape must match the rate matrix")
    if not np.allclose(lam, lam.T, atol=0.0):
        raise AgentError("blockwise tilts must be symmetric")
    if np.any(b <= 0.0) or np.any(b >= 1.0):
        raise AgentError("block rates must lie in (0,1)")
    return expit(logit(b) + lam)


def tilt_rdpg(agent: RDPG, lam: float) -> RDPG:
    """Global edge tilt of a logistic dot-product agent: intercept shift."""
    return replace(agent, intercept=agent.intercept + lam,
                   tilt=TiltState(lambda_edge=agent.tilt.lambda_edge + lam, applied=True))


def apply_tilt(agent: AgentModel, tilt: TiltState) -> AgentModel:
    """Return the tilted agent within its own family."""
    if isinstance(agent, ER):
        return replace(agent, p=tilt_er(agent.p, tilt.lambda_edge),
                       tilt=replace(tilt, applied=True))
    if isinstance(agent, SBM):
        lam = (np.asarray(tilt.lambda_block, dtype=float) if tilt.lambda_block is not None
               else np.full((len(agent.matrix),) * 2, tilt.lambda_edge))
        return SBM.make(agent.assignment, tilt_sbm(agent.matrix, lam),
                        replace(tilt, applied=True))
    if isinstance(agent, RDPG):
        return tilt_rdpg(agent, tilt.lambda_edge)
    raise AgentError(f"no closed-form tilt for {type(agent).__name__}")


# ---------------------------------------------------------------------------
# edge probabilities
# ---------------------------------------------------------------------------

def edge_prob_matrix(agent: AgentModel, n: int) -> np.ndarray:
    """n x n symmetric edge-probability matrix with zero diagonal."""
    if isinstance(agent, ER):
        mat = np.full((n, n), agent.p)
    elif isinstance(agent, SBM):
        if agent.n != n:
            raise AgentError(f"SBM assignment sized for {agent.n}, not {n}")
        c = np.asarray(agent.assignment, dtype=int)
        mat = np.asarray(agent.matrix, dtype=float)[np.ix_(c, c)]
    elif isinstance(agent, RDPG):
        if agent.n != n:
            raise AgentError(f"RDPG positions sized for {agent.n}, not {n}")
        z = np.asarray(agent.positions, dtype=float)
        mat = expit(z @ z.T + agent.intercept)
    elif isinstance(agent, ChungLu):
        if agent.n != n:
            raise AgentError(f"Chung-Lu weights sized for {agent.n}, not {n}")
        th = np.asarray(agent.theta, dtype=float)
        mat = np.minimum(np.outer(th, th), CHUNG_LU_CAP)
    elif isinstance(agent, DegHist):
        if agent.n != n:
            raise AgentError(f"DegHist bins sized for {agent.n}, not {n}")
        b = np.asarray(agent.node_bins, dtype=int)
        mat = np.asarray(agent.rates, dtype=float)[np.ix_(b, b)]
    else:
        raise AgentError(f"unknown agent kind {type(agent).__name__}")
    np.fill_diagonal(mat, 0.0)
    return mat


# ---------------------------------------------------------------------------
# exhaustive enumeration of small graph spaces
# ---------------------------------------------------------------------------

class GraphEnumeration:
    """All simple graphs on n <= 6 vertices, bitmask-indexed.

    Edge-indexed bitmasks run over the n(n-1)/2 vertex pairs in
    lexicographic (i < j) order; bit ``k`` of a mask is pair ``pairs[k]``.
    """

    _cache: dict = {}

    def __init__(self, n: int):
        if n > MAX_ENUM_N:
            raise AgentError(f"enumeration supported only up to n = {MAX_ENUM_N}")
        if n < 2:
            raise AgentError("need at least two vertices")
        self.n = n
        self.pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        self.n_pairs = len(self.pairs)
        self.n_graphs = 1 << self.n_pairs
        masks = np.arange(self.n_graphs, dtype=np.uint32)
        # (n_graphs, n_pairs) edge indicators
        self.edge_bits = ((masks[:, None] >> np.arange(self.n_pairs)[None, :]) & 1).astype(np.int8)
        self.degrees = np.zeros((self.n_graphs, n), dtype=np.int16)
        for k, (i, j) in enumerate(self.pairs):
            self.degrees[:, i] += self.edge_bits[:, k]
            self.degrees[:, j] += self.edge_bits[:, k]
        self._pair_index = {p: k for k, p in enumerate(self.pairs)}

    @classmethod
    def get(cls, n: int) -> "GraphEnumeration":
        if n not in cls._cache:
            cls._cache[n] = cls(n)
        return cls._cache[n]

    def pair_index(self, i: int, j: int) -> int:
        return self._pair_index[(min(i, j), max(i, j))]

    def edge_counts(self) -> np.ndarray:
        return self.edge_bits.sum(axis=1).astype(np.int64)

    def triangle_counts(self) -> np.ndarray:
        counts = np.zeros(self.n_graphs, dtype=np.int64)
        for i, j, k in itertools.combinations(range(self.n), 3):
            counts += (self.edge_bits[:, self.pair_index(i, j)]
                       * self.edge_bits[:, self.pair_index(i, k)]
                       * self.edge_bits[:, self.pair_index(j, k)]).astype(np.int64)
        return counts

    def kstar_counts(self, k: int) -> np.ndarray:
        # degrees are at most n-1, so a small lookup table suffices
        table = np.array([math.comb(d, k) for d in range(self.n)], dtype=np.int64)
        return table[self.degrees].sum(axis=1)

    def wedge_counts(self) -> np.ndarray:
        return self.kstar_counts(2)

    def block_counts(self, assignment) -> np.ndarray:
        """Edge counts per unordered block pair (a <= b), stacked."""
        c = np.asarray(assignment, dtype=int)
        k = int(c.max()) + 1
        cols = []
        for a in range(k):
            for b in range(a, k):
                sel = [idx for idx, (i, j) in enumerate(self.pairs)
                       if {c[i], c[j]} == ({a} if a == b else {a, b})]
                cols.append(self.edge_bits[:, sel].sum(axis=1).astype(np.int64)
                            if sel else np.zeros(self.n_graphs, dtype=np.int64))
        return np.stack(cols, axis=1)

    def permute(self, probs: np.ndarray, perm) -> np.ndarray:
        """Pushforward of a pmf under a vertex permutation."""
        perm = list(perm)
        new_bit_order = [self.pair_index(perm[i], perm[j]) for (i, j) in self.pairs]
        weights = 1 << np.arange(self.n_pairs, dtype=np.uint32)
        new_masks = (self.edge_bits[:, new_bit_order].astype(np.uint32) * weights).sum(axis=1)
        out = np.zeros_like(probs)
        out[new_masks] = probs
        return out


# ---------------------------------------------------------------------------
# ERGM specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErgmSpec:
    """Exponential-family graph model on a stacked statistic vector.

    ``stats`` is an ordered tuple of descriptors: ("edges",),
    ("triangles",), ("wedges",), ("kstar", k), or
    ("block_counts", assignment-tuple).
    """

    stats: tuple
    theta: tuple
    n: int

    def __post_init__(self):
        if len(self.theta) != stat_dimension(self.stats):
            raise AgentError("theta length must match the stacked statistic dimension")

    @staticmethod
    def make(stats, theta, n) -> "ErgmSpec":
        return ErgmSpec(tuple(tuple(s) for s in stats),
                        tuple(np.asarray(theta, dtype=float).tolist()), n)


def stat_dimension(stats) -> int:
    dim = 0
    for s in stats:
        if s[0] == "block_counts":
            k = int(max(s[1])) + 1
            dim += k * (k + 1) // 2
        elif s[0] in ("edges", "triangles", "wedges"):
            dim += 1
        elif s[0] == "kstar":
            dim += 1
        else:
            raise AgentError(f"unknown statistic {s[0]!r}")
    return dim


def statistic_matrix(enum: GraphEnumeration, stats) -> np.ndarray:
    """(n_graphs, dim) matrix of stacked sufficient statistics."""
    cols = []
    for s in stats:
        if s[0] == "edges":
            cols.append(enum.edge_counts()[:, None])
        elif s[0] == "triangles":
            cols.append(enum.triangle_counts()[:, None])
        elif s[0] == "wedges":
            cols.append(enum.wedge_counts()[:, None])
        elif s[0] == "kstar":
            cols.append(enum.kstar_counts(int(s[1]))[:, None])
        elif s[0] == "block_counts":
            cols.append(enum.block_counts(s[1]))
        else:
            raise AgentError(f"unknown statistic {s[0]!r}")
    return np.concatenate(cols, axis=1).astype(float)


def er_as_ergm(p: float, n: int) -> ErgmSpec:
    """ER model as an edge-statistic exponential family, theta = logit(p)."""
    return ErgmSpec.make([("edges",)], [float(logit(p))], n)


def ergm_stack_tilt(weighted_specs, tau) -> ErgmSpec:
    """Log-linear pool of exponential-family agents plus an entropic tilt.

    Input is a list of (ErgmSpec, omega) with omega >= 0 summing to 1;
    ``tau`` is stacked across the agents' statistics.  The pooled model has
    the concatenated statistic and parameter blocks omega_j theta_j + tau_j.
    """
    omegas = np.array([w for _, w in weighted_specs], dtype=float)
    if np.any(omegas < 0) or abs(omegas.sum() - 1.0) > 1e-9:
        raise AgentError("pool weights must be nonnegative and sum to 1")
    ns = {spec.n for spec, _ in weighted_specs}
    if len(ns) != 1:
        raise AgentError("all pooled agents must share the vertex count")
    tau = np.asarray(tau, dtype=float)
    total_dim = sum(stat_dimension(spec.stats) for spec, _ in weighted_specs)
    if tau.size != total_dim:
        raise AgentError(f"tau has length {tau.size}, stacked dimension is {total_dim}")
    stats, theta = [], []
    offset = 0
    for spec, omega in weighted_specs:
        dim = stat_dimension(spec.stats)
        stats.extend(spec.stats)
        theta.extend(omega * np.asarray(spec.theta) + tau[offset:offset + dim])
        offset += dim
    return ErgmSpec.make(stats, theta, ns.pop())


# ---------------------------------------------------------------------------
# pmfs on small graph spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphPmf:
    """Exhaustive pmf over all graphs on n vertices (bitmask order)."""

    n: int
    probs: np.ndarray = field(repr=False)
    log_normalizer: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if np.any(p < -1e-15):
            raise AgentError("pmf has negative entries")
        if abs(p.sum() - 1.0) > 1e-12:
            raise AgentError(f"pmf sums to {p.sum()}, not 1")

    def tv_distance(self, other: "GraphPmf") -> float:
        return 0.5 * float(np.abs(self.probs - other.probs).sum())

    def degree_pmf(self, vertex: int = 0) -> np.ndarray:
        """Marginal degree distribution of one vertex."""
        enum = GraphEnumeration.get(self.n)
        deg = enum.degrees[:, vertex]
        out = np.zeros(self.n)
        np.add.at(out, deg, self.probs)
        return out


def exact_enumeration_pmf(model, n: int | None = None) -> GraphPmf:
    """Exhaustive pmf of an agent or exponential-family spec, n <= 6.

    For exponential-family specs the log normalizer psi(theta) is recorded
    on the result.
    """
    if isinstance(model, ErgmSpec):
        enum = GraphEnumeration.get(model.n)
        stat = statistic_matrix(enum, model.stats)
        logits = stat @ np.asarray(model.theta, dtype=float)
        psi = float(logsumexp(logits))
        return GraphPmf(model.n, np.exp(logits - psi), log_normalizer=psi)
    if n is None:
        n = model.n  # node-indexed agents know their size
    enum = GraphEnumeration.get(n)
    pmat = edge_prob_matrix(model, n)
    p_pair = np.array([pmat[i, j] for (i, j) in enum.pairs])
    p_pair = np.clip(p_pair, 1e-300, 1.0 - 1e-16)
    logp = enum.edge_bits @ np.log(p_pair) + (1 - enum.edge_bits) @ np.log1p(-p_pair)
    probs = np.exp(logp)
    return GraphPmf(n, probs / probs.sum())


def mixture_pmf(pmfs, alphas, prior) -> tuple[GraphPmf, np.ndarray]:
    """Mixture synthesis: reweight each agent pmf, then mix.

    ``alphas`` holds one nonnegative weight array per agent (or None for a
    flat weight).  With a_j the normalizer of alpha_j p_j, the synthesized
    pmf is sum_j pi~_j f_j with f_j = alpha_j p_j / a_j and
    pi~_j proportional to pi_j a_j.

    Returns (pmf, updated mixture weights).
    """
    prior = np.asarray(prior, dtype=float)
    if np.any(prior < 0) or abs(prior.sum() - 1.0) > 1e-9:
        raise AgentError("prior weights must be a simplex vector")
    if len(pmfs) != prior.size:
        raise AgentError("one prior weight per agent pmf")
    ns = {p.n for p in pmfs}
    if len(ns) != 1:
        raise AgentError("agent pmfs must share the vertex count")
    n = ns.pop()
    a = np.empty(prior.size)
    tilted = []
    for j, pmf in enumerate(pmfs):
        alpha = alphas[j] if alphas is not None and alphas[j] is not None else 1.0
        weighted = np.asarray(alpha, dtype=float) * pmf.probs
        a[j] = weighted.sum()
        tilted.append(weighted)
    if np.all(a * prior == 0.0):
        raise AgentError("degenerate mixture: every tilted agent has zero mass")
    pi_new = prior * a
    pi_new = pi_new / pi_new.sum()
    probs = sum(pi_new[j] * tilted[j] / a[j] for j in range(prior.size) if pi_new[j] > 0)
    return GraphPmf(n, probs / probs.sum()), pi_new


def edge_tilt_weights(n: int, lam: float) -> np.ndarray:
    """Entropic weight exp(lam * edge count) per graph, bitmask order."""
    enum = GraphEnumeration.get(n)
    return np.exp(lam * enum.edge_counts().astype(float))


def stat_tilt_weights(n: int, stats, tau) -> np.ndarray:
    """Entropic weight exp(tau . T(A)) per graph for a stacked statistic."""
    enum = GraphEnumeration.get(n)
    return np.exp(statistic_matrix(enum, stats) @ np.asarray(tau, dtype=float))


# ---------------------------------------------------------------------------
# moment calibration
# ---------------------------------------------------------------------------

def _newton_calibrate(stat: np.ndarray, base_logits: np.ndarray, target: np.ndarray,
                      tol: float = 1e-8, max_iter: int = 200) -> np.ndarray:
    """Solve E_{tau}[T] = target for the tilt tau by damped Newton.

    ``base_logits`` are the unnormalized log probabilities of the baseline;
    the mean map is computed by exact summation over all graphs.
    """
    lo, hi = stat.min(axis=0), stat.max(axis=0)
    if np.any(target <= lo) or np.any(target >= hi):
        raise InfeasibleTarget(
            f"target {target} outside the open mean-parameter box ({lo}, {hi})")
    tau = np.zeros(stat.shape[1])

    def mean_cov(t):
        logw = base_logits + stat @ t
        w = np.exp(logw - logsumexp(logw))
        mu = w @ stat
        centered = stat - mu
        cov = (centered * w[:, None]).T @ centered
        return mu, cov

    mu, cov = mean_cov(tau)
    resid = np.linalg.norm(mu - target, np.inf)
    for _ in range(max_iter):
        if resid <= tol:
            return tau
        step = np.linalg.solve(cov + 1e-12 * np.eye(cov.shape[0]), target - mu)
        # step halving keeps the iterate where the mean map stays informative
        for _ in range(30):
            cand = tau + step
            mu_c, cov_c = mean_cov(cand)
            r_c = np.linalg.norm(mu_c - target, np.inf)
            if np.isfinite(r_c) and r_c < resid:
                tau, mu, cov, resid = cand, mu_c, cov_c, r_c
                break
            step *= 0.5
        else:
            break
    if resid > tol:
        raise CalibrationFailure(f"Newton stalled at residual {resid:.3e}")
    return tau


def calibrate_moment(model, target, n: int | None = None):
    """KL-optimal entropic tilt hitting a moment target.

    ER: ``target`` is the expected edge count; the tilt is the closed-form
    log-odds shift.  SBM: ``target`` is the expected edge count per
    unordered block pair.  RDPG: ``target`` is the expected edge count; the
    scalar intercept shift is found by Newton on the exact mean map (the
    log-odds shift of the mean probability is the starting point).
    Exponential-family specs (n <= 6): stacked tilt tau by damped Newton on
    the enumerated mean map.
    """
    if isinstance(model, ER):
        if n is None:
            raise AgentError("ER calibration needs the vertex count n")
        m_n = n * (n - 1) // 2
        if not 0.0 < target < m_n:
            raise InfeasibleTarget(f"edge target must lie in (0, {m_n})")
        lam = float(logit(target / m_n) - logit(model.p))
        return TiltState(lambda_edge=lam)

    if isinstance(model, SBM):
        c = np.asarray(model.assignment, dtype=int)
        b = np.asarray(model.matrix, dtype=float)
        k = b.shape[0]
        counts = np.zeros((k, k))
        for a in range(k):
            for bb in range(a, k):
                if a == bb:
                    na = int(np.sum(c == a))
                    counts[a, a] = na * (na - 1) / 2
                else:
                    counts[a, bb] = counts[bb, a] = np.sum(c == a) * np.sum(c == bb)
        target = np.asarray(target, dtype=float)
        lam = np.zeros((k, k))
        for a in range(k):
            for bb in range(a, k):
                if counts[a, bb] == 0:
                    continue
                frac = target[a, bb] / counts[a, bb]
                if not 0.0 < frac < 1.0:
                    raise InfeasibleTarget(f"block ({a},{bb}) target outside (0, {counts[a, bb]})")
                lam[a, bb] = lam[bb, a] = float(logit(frac) - logit(b[a, bb]))
        return TiltState(lambda_block=tuple(map(tuple, lam)))

    if isinstance(model, RDPG):
        z = np.asarray(model.positions, dtype=float)
        nn = z.shape[0]
        iu = np.triu_indices(nn, k=1)
        dots = (z @ z.T)[iu] + model.intercept
        m_n = dots.size
        if not 0.0 < target < m_n:
            raise InfeasibleTarget(f"edge target must lie in (0, {m_n})")
        lam = float(logit(target / m_n) - logit(float(np.mean(expit(dots)))))
        # scalar Newton polish: the mean map lam -> sum expit(dots + lam)
        for _ in range(200):
            probs = expit(dots + lam)
            resid = probs.sum() - target
            if abs(resid) <= 1e-8:
                break
            deriv = np.sum(probs * (1.0 - probs))
            lam -= resid / deriv
        else:
            raise CalibrationFailure("RDPG intercept calibration did not converge")
        return TiltState(lambda_edge=lam)

    if isinstance(model, ErgmSpec):
        enum = GraphEnumeration.get(model.n)
        stat = statistic_matrix(enum, model.stats)
        base_logits = stat @ np.asarray(model.theta, dtype=float)
        return _newton_calibrate(stat, base_logits, np.asarray(target, dtype=float))

    raise AgentError(f"no calibration rule for {type(model).__name__}")
