"""Graphon kernels, L2 geometry, structural functionals, and spectral radii.

A graphon is a symmetric measurable kernel w : [0,1]^2 -> [0,1].  Every kind
implemented here is piecewise constant in its latent coordinate, so pairwise
L2 quantities and structural functionals admit exact block-measure sums; a
midpoint-rule quadrature path is kept as the generic fallback and as a
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit


class GraphonError(ValueError):
    pass


# ---------------------------------------------------------------------------
# step maps (piecewise-constant functions on [0,1])
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepMap:
    """Piecewise-constant map [0,1] -> R^d given by breakpoints and values.

    ``boundaries`` has K+1 strictly increasing entries starting at 0 and
    ending at 1; ``values`` has K rows (scalar values allowed for d=1).
    """

    boundaries: tuple
    values: tuple

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if b.ndim != 1 or b.size < 2:
            raise GraphonError("boundaries must be a 1-d sequence of length >= 2")
        if b[0] != 0.0 or b[-1] != 1.0:
            raise GraphonError("boundaries must start at 0 and end at 1")
        if np.any(np.diff(b) <= 0):
            raise GraphonError("boundaries must be strictly increasing")
        if len(self.values) != b.size - 1:
            raise GraphonError("need exactly one value per interval")

    @property
    def k(self) -> int:
        return len(self.values)

    def measures(self) -> np.ndarray:
        return np.diff(np.asarray(self.boundaries, dtype=float))

    def piece_index(self, x) -> np.ndarray:
        b = np.asarray(self.boundaries, dtype=float)
        idx = np.searchsorted(b[1:-1], np.asarray(x, dtype=float), side="right")
        return idx

    def __call__(self, x):
        vals = np.asarray(self.values, dtype=float)
        return vals[self.piece_index(x)]


def uniform_step_map(values) -> StepMap:
    """StepMap with equal-measure pieces."""
    values = tuple(np.asarray(values).tolist()) if np.ndim(values) > 1 else tuple(values)
    k = len(values)
    bounds = tuple(np.linspace(0.0, 1.0, k + 1).tolist())
    return StepMap(bounds, values)


# ---------------------------------------------------------------------------
# graphon kinds
# ---------------------------------------------------------------------------

class Graphon:
    """Base class; subclasses implement vectorized ``evaluate``."""

    def evaluate(self, x, y):
        raise NotImplementedError

    def __call__(self, x, y):
        return self.evaluate(x, y)

    @property
    def bounded_unit(self) -> bool:
        """True when values are guaranteed to lie in [0,1]."""
        return True


@dataclass(frozen=True)
class Constant(Graphon):
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise GraphonError(f"constant level {self.p} outside [0,1]")

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.float64(self.p), np.broadcast(x, y).shape).copy()


@dataclass(frozen=True)
class Block(Graphon):
    """Piecewise-constant graphon: K blocks with symmetric rate matrix."""

    boundaries: tuple
    matrix: tuple

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
            raise GraphonError("block boundaries must increase strictly from 0 to 1")
        m = np.asarray(self.matrix, dtype=float)
        k = b.size - 1
        if m.shape != (k, k):
            raise GraphonError(f"rate matrix must be {k}x{k}")
        if not np.allclose(m, m.T, atol=0.0):
            raise GraphonError("rate matrix must be symmetric")
        if np.any(m < 0.0) or np.any(m > 1.0):
            raise GraphonError("block rates must lie in [0,1]")

    @staticmethod
    def from_arrays(boundaries, matrix) -> "Block":
        return Block(tuple(np.asarray(boundaries, dtype=float).tolist()),
                     tuple(map(tuple, np.asarray(matrix, dtype=float))))

    @property
    def k(self) -> int:
        return len(self.matrix)

    def measures(self) -> np.ndarray:
        return np.diff(np.asarray(self.boundaries, dtype=float))

    def piece_index(self, x) -> np.ndarray:
        b = np.asarray(self.boundaries, dtype=float)
        return np.searchsorted(b[1:-1], np.asarray(x, dtype=float), side="right")

    def evaluate(self, x, y):
        m = np.asarray(self.matrix, dtype=float)
        return m[self.piece_index(x), self.piece_index(y)]


@dataclass(frozen=True)
class LogisticLowRank(Graphon):
    """w(x,y) = sigmoid(z(x).z(y) + intercept) with piecewise-constant z."""

    latent: StepMap
    intercept: float = 0.0

    def evaluate(self, x, y):
        zx = np.atleast_2d(self.latent(x))
        zy = np.atleast_2d(self.latent(y))
        dots = np.sum(np.asarray(zx, dtype=float) * np.asarray(zy, dtype=float), axis=-1)
        out = expit(dots + self.intercept)
        if np.isscalar(x) and np.isscalar(y):
            return float(out.reshape(-1)[0])
        return out


@dataclass(frozen=True)
class ProductWeight(Graphon):
    """w(x,y) = min(theta(x) * theta(y), 1) with piecewise-constant theta >= 0."""

    weights: StepMap

    def __post_init__(self):
        if np.any(np.asarray(self.weights.values, dtype=float) < 0.0):
            raise GraphonError("product weights must be nonnegative")

    def evaluate(self, x, y):
        return np.minimum(np.asarray(self.weights(x)) * np.asarray(self.weights(y)), 1.0)


@dataclass(frozen=True)
class LinearCombo(Graphon):
    """beta0 + sum_j beta_j * parts[j]; optionally clipped into [0,1].

    Unclipped combinations may leave [0,1]; ``bounded_unit`` reports this.
    """

    beta: tuple
    parts: tuple
    clipped: bool = False

    def __post_init__(self):
        if len(self.beta) != len(self.parts) + 1:
            raise GraphonError("beta must have one intercept plus one weight per part")

    @staticmethod
    def make(beta, parts, clipped=False) -> "LinearCombo":
        return LinearCombo(tuple(np.asarray(beta, dtype=float).tolist()), tuple(parts), clipped)

    def evaluate(self, x, y):
        beta = np.asarray(self.beta, dtype=float)
        out = np.full(np.broadcast(np.asarray(x, dtype=float), y).shape, beta[0])
        for b_j, part in zip(beta[1:], self.parts):
            out = out + b_j * np.asarray(part.evaluate(x, y))
        if self.clipped:
            out = np.clip(out, 0.0, 1.0)
        return out

    @property
    def bounded_unit(self) -> bool:
        return self.clipped


def evaluate(w: Graphon, x, y):
    """Evaluate a graphon; total on the unit square and symmetric by design."""
    return w.evaluate(x, y)


# ---------------------------------------------------------------------------
# block reduction
# ---------------------------------------------------------------------------

def _merge_boundaries(list_of_bounds) -> np.ndarray:
    merged = np.unique(np.concatenate([np.asarray(b, dtype=float) for b in list_of_bounds]))
    keep = np.concatenate([[True], np.diff(merged) > 1e-14])
    merged = merged[keep]
    merged[0], merged[-1] = 0.0, 1.0
    return merged


def as_block(w: Graphon) -> Block:
    """Exact piecewise-constant representation of ``w``.

    All supported kinds are block graphons after refining breakpoints, which
    is what makes the L2 geometry computable in closed form.
    """
    if isinstance(w, Block):
        return w
    if isinstance(w, Constant):
        return Block.from_arrays([0.0, 1.0], [[w.p]])
    if isinstance(w, LogisticLowRank):
        b = np.asarray(w.latent.boundaries, dtype=float)
        z = np.asarray(w.latent.values, dtype=float)
        if z.ndim == 1:
            z = z[:, None]
        mat = expit(z @ z.T + w.intercept)
        return Block.from_arrays(b, mat)
    if isinstance(w, ProductWeight):
        b = np.asarray(w.weights.boundaries, dtype=float)
        th = np.asarray(w.weights.values, dtype=float)
        mat = np.minimum(np.outer(th, th), 1.0)
        return Block.from_arrays(b, mat)
    if isinstance(w, LinearCombo):
        part_blocks = [as_block(p) for p in w.parts]
        bounds = _merge_boundaries([pb.boundaries for pb in part_blocks] or [[0.0, 1.0]])
        mids = 0.5 * (bounds[:-1] + bounds[1:])
        beta = np.asarray(w.beta, dtype=float)
        mat = np.full((mids.size, mids.size), beta[0])
        for b_j, pb in zip(beta[1:], part_blocks):
            mat += b_j * np.asarray(pb.matrix, dtype=float)[np.ix_(pb.piece_index(mids), pb.piece_index(mids))]
        if w.clipped:
            mat = np.clip(mat, 0.0, 1.0)
        # bypass Block's [0,1] validation for unclipped combinations
        blk = object.__new__(Block)
        object.__setattr__(blk, "boundaries", tuple(bounds.tolist()))
        object.__setattr__(blk, "matrix", tuple(map(tuple, mat)))
        return blk
    raise GraphonError(f"cannot reduce {type(w).__name__} to blocks")


def common_refinement(w: Graphon, w2: Graphon):
    """Block matrices of both graphons on a shared partition.

    Returns (measures, M, M2).
    """
    b1, b2 = as_block(w), as_block(w2)
    bounds = _merge_boundaries([b1.boundaries, b2.boundaries])
    mids = 0.5 * (bounds[:-1] + bounds[1:])
    i1, i2 = b1.piece_index(mids), b2.piece_index(mids)
    m1 = np.asarray(b1.matrix, dtype=float)[np.ix_(i1, i1)]
    m2 = np.asarray(b2.matrix, dtype=float)[np.ix_(i2, i2)]
    return np.diff(bounds), m1, m2


# ---------------------------------------------------------------------------
# quadrature and L2 geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Midpoint rule on a uniform g x g grid; blocks computed exactly.

    ``tri_g`` caps the grid used for the O(g^3) triangle integral on the
    generic path.
    """

    g: int = 256
    tri_g: int = 128
    exact_blocks: bool = True

    def __post_init__(self):
        if self.g < 2:
            raise GraphonError("quadrature grid must have g >= 2")

    def midpoints(self, g=None) -> np.ndarray:
        g = self.g if g is None else g
        return (np.arange(g) + 0.5) / g


DEFAULT_QUAD = QuadratureSpec()


def grid_values(w: Graphon, g: int) -> np.ndarray:
    x = (np.arange(g) + 0.5) / g
    return np.asarray(w.evaluate(x[:, None], x[None, :]), dtype=float)


def _blockable(*ws) -> bool:
    try:
        for w in ws:
            as_block(w)
        return True
    except GraphonError:
        return False


def l2_inner(w: Graphon, w2: Graphon, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """L2 inner product <w, w2> over the unit square."""
    if quad.exact_blocks and _blockable(w, w2):
        mu, m1, m2 = common_refinement(w, w2)
        return float(mu @ (m1 * m2) @ mu)
    v1, v2 = grid_values(w, quad.g), grid_values(w2, quad.g)
    return float(np.mean(v1 * v2))


def l2_distance(w: Graphon, w2: Graphon, quad: QuadratureSpec = DEFAULT_QUAD,
                with_error=False):
    """||w - w2||_2, exact for block-reducible pairs.

    With ``with_error=True`` the generic quadrature path also returns a
    half-grid difference as an error estimate (0.0 on the exact path).
    """
    if quad.exact_blocks and _blockable(w, w2):
        mu, m1, m2 = common_refinement(w, w2)
        d = float(np.sqrt(mu @ (m1 - m2) ** 2 @ mu))
        return (d, 0.0) if with_error else d
    diff_sq = lambda g: float(np.mean((grid_values(w, g) - grid_values(w2, g)) ** 2))
    d = float(np.sqrt(diff_sq(quad.g)))
    if with_error:
        d_half = float(np.sqrt(diff_sq(max(2, quad.g // 2))))
        return d, abs(d - d_half)
    return d


def gram_and_target(features, w_star: Graphon, quad: QuadratureSpec = DEFAULT_QUAD):
    """Gram matrix and target vector of (1, w_1, ..., w_J) against w_star.

    The constant function is prepended internally, so G is (J+1)x(J+1) and
    symmetric positive semidefinite.
    """
    if not features:
        raise GraphonError("need at least one feature graphon")
    basis = [Constant(1.0)] + list(features)
    d = len(basis)
    gram = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            gram[i, j] = gram[j, i] = l2_inner(basis[i], basis[j], quad)
    target = np.array([l2_inner(b, w_star, quad) for b in basis])
    return gram, target


# ---------------------------------------------------------------------------
# structural functionals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionalSet:
    """Edge, triangle, wedge, clustering and degree-function summaries."""

    edge: float
    triangle: float
    wedge: float
    clustering: float
    degree_grid: np.ndarray = field(repr=False)


def functionals(w: Graphon, quad: QuadratureSpec = DEFAULT_QUAD) -> FunctionalSet:
    """Edge density e, triangle density t, wedge density s, clustering t/s.

    e is the double integral of w, d_w the row integral, s the integral of
    d_w^2, and t the triple integral of w(x,y)w(y,z)w(x,z).  Clustering is 0
    when s = 0.
    """
    grid = quad.midpoints()
    if quad.exact_blocks and _blockable(w):
        blk = as_block(w)
        mu = blk.measures()
        mat = np.asarray(blk.matrix, dtype=float)
        deg = mat @ mu
        e = float(mu @ deg)
        s = float(mu @ deg ** 2)
        t = float(np.einsum("a,b,c,ab,bc,ac->", mu, mu, mu, mat, mat, mat))
        d_grid = deg[blk.piece_index(grid)]
    else:
        g = min(quad.g, quad.tri_g)
        vals = grid_values(w, g)
        deg = vals.mean(axis=1)
        e = float(deg.mean())
        s = float(np.mean(deg ** 2))
        t = float(np.einsum("ab,bc,ac->", vals, vals, vals)) / g ** 3
        xi = np.minimum((grid * g).astype(int), g - 1)
        d_grid = deg[xi]
    clustering = t / s if s > 0 else 0.0
    return FunctionalSet(edge=e, triangle=t, wedge=s, clustering=clustering,
                         degree_grid=np.asarray(d_grid, dtype=float))


@dataclass(frozen=True)
class LipschitzBudget:
    """Functional error bounds implied by an L2 distance of ``delta``."""

    delta: float
    s0: float
    edge_bound: float
    degree_bound: float
    triangle_bound: float
    wedge_bound: float
    clustering_bound: float


def lipschitz_budget(delta: float, s0: float) -> LipschitzBudget:
    """Transfer an L2 graphon error into functional error bounds.

    Edge density and the degree function are 1-Lipschitz, triangles are
    3-Lipschitz, wedges 2-Lipschitz, and clustering obeys the
    (3/s0 + 2/s0^2) bound on the region where the wedge density stays
    above s0.
    """
    if delta < 0:
        raise GraphonError("delta must be nonnegative")
    if s0 <= 0:
        raise GraphonError("clustering bound needs a positive wedge floor s0")
    return LipschitzBudget(
        delta=delta,
        s0=s0,
        edge_bound=delta,
        degree_bound=delta,
        triangle_bound=3.0 * delta,
        wedge_bound=2.0 * delta,
        clustering_bound=(3.0 / s0 + 2.0 / s0 ** 2) * delta,
    )


# ---------------------------------------------------------------------------
# integral-operator spectral radius
# ---------------------------------------------------------------------------

def spectral_radius(w: Graphon, grid_g: int = 256, tol: float = 1e-10,
                    max_iter: int = 10_000) -> float:
    """Spectral radius of the integral operator f -> int w(x,.)f.

    Power iteration on the g x g midpoint discretization (entries w/g),
    deterministic all-ones start.
    """
    if grid_g < 8:
        raise GraphonError("spectral grid must have g >= 8")
    mat = grid_values(w, grid_g) / grid_g
    v = np.ones(grid_g)
    rho = 0.0
    for _ in range(max_iter):
        nv = mat @ v
        norm = np.linalg.norm(nv)
        if norm == 0.0:
            return 0.0
        nv /= norm
        new_rho = float(nv @ (mat @ nv))
        if abs(new_rho - rho) <= tol * max(1.0, abs(new_rho)):
            return new_rho
        rho, v = new_rho, nv
    return rho


def spectral_bracket(beta, parts, grid_g: int = 256):
    """Agent-level bracket for the spectral radius of a nonnegative combo.

    For w = beta0 + sum_j beta_j w_j with beta_j >= 0,
    max_j beta_j rho_j <= rho <= sum_j beta_j rho_j, where the intercept
    contributes through the constant-1 kernel (rho = 1).

    Returns (lower, upper, rho_combo).
    """
    beta = np.asarray(beta, dtype=float)
    if beta.size != len(parts) + 1:
        raise GraphonError("beta must carry an intercept plus one weight per part")
    if np.any(beta < 0):
        raise GraphonError("spectral bracket requires nonnegative coefficients")
    rhos = np.array([1.0] + [spectral_radius(p, grid_g) for p in parts])
    terms = beta * rhos
    combo = LinearCombo.make(beta, parts, clipped=False)
    rho_combo = spectral_radius(combo, grid_g)
    return float(terms.max()), float(terms.sum()), rho_combo
