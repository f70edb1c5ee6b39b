"""Closed-walk machinery behind the moment method.

A closed walk is a sequence (i_1, ..., i_k) with consecutive entries distinct
and i_k != i_1, closed by the implicit edge {i_k, i_1}; k counts edges
traversed.  Walks split into the tree class C1 and the remainder C2, with two
regimes: the dense classification requires every edge traversed exactly
twice, the sparse one only that the underlying simple graph is a tree.

Alongside: Catalan numbers, semicircle and sparse-limit moments, the
multiplicity-reduction coefficients, exhaustive walk enumeration with
(e, b, g) histograms, and a Monte Carlo trace oracle that checks the
closed-walk expansion against the spectral trace on tiny instances.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .decomp import SimpleGraph, connected_components, walk_graph_stats
from .errors import InvalidParameterError, InvalidWalkError, SizeGuardError
from .rng import PRNG_ALGORITHM, derive_seed, generator
from .sphere import calibrate_tau, sample_unit_vectors

ENUMERATION_GUARD = 10**8


@dataclass(frozen=True)
class ClosedWalk:
    """Vertex sequence (i_1, ..., i_k); the closing edge {i_k, i_1} is implicit."""

    vertices: tuple[int, ...]

    def __post_init__(self):
        seq = tuple(self.vertices)
        object.__setattr__(self, "vertices", seq)
        if len(seq) < 2:
            raise InvalidWalkError("a closed walk needs at least two vertices")
        for a, b in zip(seq, seq[1:]):
            if a == b:
                raise InvalidWalkError(f"consecutive repeated vertex {a}")
        if seq[0] == seq[-1]:
            raise InvalidWalkError("last vertex must differ from the first")

    @property
    def k(self) -> int:
        return len(self.vertices)

    def edge_multiplicities(self) -> Counter:
        seq = self.vertices
        k = len(seq)
        return Counter(
            (min(seq[i], seq[(i + 1) % k]), max(seq[i], seq[(i + 1) % k]))
            for i in range(k)
        )


class WalkClass(Enum):
    C1_DENSE = "C1_dense"
    C2_DENSE = "C2_dense"
    C1_SPARSE = "C1_sparse"
    C2_SPARSE = "C2_sparse"


@dataclass(frozen=True)
class MomentValue:
    """A reference moment: order k, value, and which limiting law it is from."""

    k: int
    value: float
    regime: str
    alpha: float | None = None

    def __post_init__(self):
        if self.k % 2 == 1 and self.value != 0.0:
            raise InvalidParameterError("odd moments of the reference laws vanish")


def catalan(m: int) -> int:
    """The m-th Catalan number binom(2m, m) / (m + 1), exact."""
    if m != int(m) or m < 0:
        raise InvalidParameterError(f"m must be a nonnegative integer, got {m!r}")
    if m > 30:
        raise InvalidParameterError(f"m={m} exceeds the 64-bit overflow guard (30)")
    m = int(m)
    return math.comb(2 * m, m) // (m + 1)


def semicircle_moment(k: int) -> MomentValue:
    """k-th moment of the semicircle law: 0 for odd k, Catalan(k/2) for even."""
    if k < 0:
        raise InvalidParameterError("moment order must be nonnegative")
    value = 0.0 if k % 2 else float(catalan(k // 2))
    return MomentValue(k=k, value=value, regime="semicircle")


def nu_alpha_moment(k: int, alpha: float) -> MomentValue:
    """k-th moment of the sparse limit law nu_alpha.

    Zero for odd k; for k = 2m it is sum over l = 1..m of Catalan(l) *
    alpha^(l - m).  As alpha -> infinity this decreases to the semicircle
    moment.  The 0-th moment is 1 (total mass).
    """
    if alpha <= 0.0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    if k < 0:
        raise InvalidParameterError("moment order must be nonnegative")
    if k % 2:
        value = 0.0
    elif k == 0:
        value = 1.0
    else:
        m = k // 2
        value = float(sum(catalan(l) * alpha ** (l - m) for l in range(1, m + 1)))
    return MomentValue(k=k, value=value, regime="nu_alpha", alpha=alpha)


def closed_tree_walk_pattern_counts(k: int) -> dict[int, int]:
    """Canonical closed tree walks of length k, bucketed by tree edge count.

    A pattern is a closed walk whose underlying graph is a tree, with labels
    in first-visit order; the number of walks on n labeled vertices whose
    graph is a tree with l edges equals counts[l] * n(n-1)...(n-l).  Counted
    by direct recursion over walks on a growing tree (each step moves to the
    parent, an existing child, or a fresh child; closed tree walks traverse
    every edge an even number of times, so odd k gives an empty table).
    """
    if k != int(k) or k < 2:
        raise InvalidParameterError(f"walk length must be an integer >= 2, got {k!r}")
    if k > 16:
        raise InvalidParameterError("pattern counting is capped at k <= 16")
    if k % 2:
        return {}
    counts: Counter = Counter()
    parent = [-1]
    children: list[list[int]] = [[]]
    depth = [0]

    def extend(current: int, steps_left: int, edges: int) -> None:
        if steps_left == 0:
            if current == 0:
                counts[edges] += 1
            return
        # prune: must be able to return to the root with matching parity
        if depth[current] > steps_left or (steps_left - depth[current]) % 2:
            return
        if parent[current] != -1:
            extend(parent[current], steps_left - 1, edges)
        for child in children[current]:
            extend(child, steps_left - 1, edges)
        fresh = len(parent)
        parent.append(current)
        children.append([])
        depth.append(depth[current] + 1)
        children[current].append(fresh)
        extend(fresh, steps_left - 1, edges + 1)
        children[current].pop()
        parent.pop()
        children.pop()
        depth.pop()

    extend(0, k, 0)
    return dict(counts)


def sparse_tree_moment(k: int, alpha: float) -> MomentValue:
    """k-th sparse-limit moment with exact tree-walk pattern counts.

    Same tree-sum structure as :func:`nu_alpha_moment` but with the
    enumeration-derived pattern counts in place of Catalan numbers; the two
    agree for k <= 4 and diverge from k = 6 on, where edges traversed more
    than twice admit several interleavings per tree.  This reference matches
    simulated sparse spectra; see the k = 6 discussion in the README.
    """
    if alpha <= 0.0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    if k < 0:
        raise InvalidParameterError("moment order must be nonnegative")
    if k % 2:
        value = 0.0
    elif k == 0:
        value = 1.0
    else:
        m = k // 2
        table = closed_tree_walk_pattern_counts(k)
        value = float(sum(count * alpha ** (l - m) for l, count in table.items()))
    return MomentValue(k=k, value=value, regime="sparse_tree", alpha=alpha)


def multiplicity_reduce(k: int, p: float) -> tuple[float, float]:
    """Coefficients (alpha_k, beta_k) with (a - p)^k = alpha_k (a - p) + beta_k
    for a in {0, 1}.

    alpha_k = (1-p)^k - (-p)^k lies in [0, 1]; |beta_k| <= 2 p (1-p).
    """
    if k != int(k) or k < 1:
        raise InvalidParameterError(f"k must be a positive integer, got {k!r}")
    if not (0.0 < p < 1.0):
        raise InvalidParameterError(f"p must be in (0, 1), got {p}")
    alpha_k = (1.0 - p) ** k - (-p) ** k
    beta_k = p * (1.0 - p) ** k + (1.0 - p) * (-p) ** k
    return alpha_k, beta_k


def classify_walk(walk, regime: str) -> WalkClass:
    """C1 versus C2, under the dense or sparse definition.

    Dense C1: the underlying simple graph is a tree and every edge is
    traversed exactly twice.  Sparse C1: the underlying graph is a tree,
    multiplicities unconstrained.
    """
    if regime not in ("dense", "sparse"):
        raise InvalidParameterError(f"regime must be 'dense' or 'sparse', got {regime!r}")
    if not isinstance(walk, ClosedWalk):
        walk = ClosedWalk(tuple(walk))
    multiplicities = walk.edge_multiplicities()
    v = len(set(walk.vertices))
    is_tree = len(multiplicities) == v - 1  # walk graphs are always connected
    if regime == "sparse":
        return WalkClass.C1_SPARSE if is_tree else WalkClass.C2_SPARSE
    if is_tree and all(count == 2 for count in multiplicities.values()):
        return WalkClass.C1_DENSE
    return WalkClass.C2_DENSE


def _check_enumeration_guard(n: int, k: int) -> None:
    if n < 2:
        raise InvalidParameterError("enumeration needs n >= 2")
    if k < 2:
        raise InvalidParameterError("closed walks need length k >= 2")
    bound = n * (n - 1) ** (k - 1)
    if bound > ENUMERATION_GUARD:
        raise SizeGuardError(
            f"n * (n-1)^(k-1) = {bound} exceeds {ENUMERATION_GUARD}; "
            "use the Monte Carlo oracle instead of exhaustive enumeration"
        )


def enumerate_closed_walks(n: int, k: int):
    """Yield every closed walk (i_1, ..., i_k) on vertices 0..n-1 exactly once,
    in lexicographic order."""
    _check_enumeration_guard(n, k)
    seq = [0] * k

    def extend(pos: int):
        if pos == k:
            if seq[-1] != seq[0]:
                yield ClosedWalk(tuple(seq))
            return
        for vertex in range(n):
            if vertex == seq[pos - 1]:
                continue
            seq[pos] = vertex
            yield from extend(pos + 1)

    for start in range(n):
        seq[0] = start
        yield from extend(1)


def count_walks_by_stats(n: int, k: int) -> dict[tuple[int, int, int], int]:
    """Exact histogram of closed walks keyed by (e, b, g) of their graph."""
    _check_enumeration_guard(n, k)
    buckets: Counter = Counter()
    for walk in enumerate_closed_walks(n, k):
        stats = walk_graph_stats(walk)
        buckets[(stats.e, stats.b, stats.g)] += 1
    return dict(buckets)


def counting_bound(n: int, k: int, e: int, b: int, g: int) -> int:
    """The cap n^(e+1-g) * k^(2(k-b+g)) on the walk count of an (e, b, g) bucket."""
    return n ** (e + 1 - g) * k ** (2 * (k - b + g))


def tree_walk_count(n: int, k: int) -> int:
    """Exact number of dense-C1 walks of length k on n labeled vertices.

    For k = 2m these are depth-first traversals of rooted planar trees with
    m + 1 labeled vertices: Catalan(m) * n (n-1) ... (n-m).  Zero for odd k.
    """
    if k % 2:
        return 0
    m = k // 2
    labelings = 1
    for i in range(m + 1):
        labelings *= max(n - i, 0)
    return catalan(m) * labelings


def brute_trace_oracle(
    n: int, d: int, p: float, k: int, trials: int, seed: int
) -> dict:
    """Monte Carlo closed-walk expansion of the normalized trace moment.

    For each trial, fresh latent vectors give a centered adjacency Q; every
    closed walk contributes its product of Q entries, aggregated into the
    tree part S1 and the remainder S2 under the dense classification and the
    normalization n^(k/2+1) (p(1-p))^(k/2).  The spectral trace of
    (Q/sqrt(np(1-p)))^k is computed per trial as a cross-check; the two
    totals agree identically up to floating-point error.
    """
    _check_enumeration_guard(n, k)
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    if not (0.0 < p < 1.0):
        raise InvalidParameterError(f"p must be in (0, 1), got {p}")

    cap = calibrate_tau(p, d)
    walks = list(enumerate_closed_walks(n, k))
    walk_array = np.array([w.vertices for w in walks], dtype=np.intp)
    tree_mask = np.array(
        [classify_walk(w, "dense") is WalkClass.C1_DENSE for w in walks]
    )
    idx_from = walk_array
    idx_to = np.roll(walk_array, -1, axis=1)

    norm = n ** (k / 2 + 1) * (p * (1.0 - p)) ** (k / 2)
    scale = math.sqrt(n * p * (1.0 - p))

    s1 = np.empty(trials)
    s2 = np.empty(trials)
    spectral = np.empty(trials)
    for trial in range(trials):
        vectors = sample_unit_vectors(n, d, derive_seed(seed, trial)).data
        gram = vectors @ vectors.T
        q = (gram >= cap.tau).astype(np.float64) - p
        np.fill_diagonal(q, 0.0)
        products = q[idx_from, idx_to].prod(axis=1)
        s1[trial] = products[tree_mask].sum() / norm
        s2[trial] = products[~tree_mask].sum() / norm
        spectral[trial] = np.trace(np.linalg.matrix_power(q / scale, k)) / n

    def mean_se(values: np.ndarray) -> tuple[float, float]:
        se = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
        return float(values.mean()), se

    s1_hat, s1_se = mean_se(s1)
    s2_hat, s2_se = mean_se(s2)
    total_hat, total_se = mean_se(s1 + s2)
    spectral_hat, spectral_se = mean_se(spectral)
    return {
        "parameters": {"n": n, "d": d, "p": p, "k": k, "tau": cap.tau},
        "prng": {"algorithm": PRNG_ALGORITHM, "seed": seed},
        "trials": trials,
        "walk_count": len(walks),
        "tree_walk_count": int(tree_mask.sum()),
        "S1_hat": s1_hat,
        "S2_hat": s2_hat,
        "total_hat": total_hat,
        "spectral_total": spectral_hat,
        "s1_tree_prediction": int(tree_mask.sum()) / n ** (k / 2 + 1),
        "standard_errors": {
            "S1": s1_se,
            "S2": s2_se,
            "total": total_se,
            "spectral": spectral_se,
        },
    }


def tree_moment_check(
    tree: SimpleGraph, d: int, p: float, trials: int, seed: int, chunk: int = 20000
) -> dict:
    """Monte Carlo estimate of E prod_e Q_e^2 over a tree's edges.

    Compared against the leaf-peeling value (p(1-p))^{#edges}; the report
    carries the estimate, its standard error, and the reference.
    """
    if tree.m != tree.n - 1 or len(connected_components(tree)) != 1:
        raise InvalidParameterError("input graph is not a tree")
    if not (0.0 < p < 1.0):
        raise InvalidParameterError(f"p must be in (0, 1), got {p}")
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")

    cap = calibrate_tau(p, d)
    edge_u = np.array([u for u, _ in tree.edges], dtype=np.intp)
    edge_v = np.array([v for _, v in tree.edges], dtype=np.intp)
    rng = generator(seed)
    total = 0.0
    total_sq = 0.0
    remaining = trials
    while remaining > 0:
        batch = min(chunk, remaining)
        x = rng.standard_normal((batch, tree.n, d))
        x /= np.linalg.norm(x, axis=2, keepdims=True)
        inner = np.einsum("bed,bed->be", x[:, edge_u, :], x[:, edge_v, :])
        q = (inner >= cap.tau).astype(np.float64) - p
        values = np.prod(q * q, axis=1)
        total += values.sum()
        total_sq += (values * values).sum()
        remaining -= batch
    mean = total / trials
    variance = max(total_sq / trials - mean * mean, 0.0)
    se = math.sqrt(variance / max(trials - 1, 1))
    return {
        "parameters": {"d": d, "p": p, "edges": tree.m, "tau": cap.tau},
        "prng": {"algorithm": PRNG_ALGORITHM, "seed": seed},
        "trials": trials,
        "estimate": mean,
        "standard_error": se,
        "reference": (p * (1.0 - p)) ** tree.m,
    }
