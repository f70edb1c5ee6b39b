"""Adjacency construction for geometric and Erdos-Renyi graphs.

The canonical graph representation is a sorted edge list (dense storage is
wasteful in sparse regimes); a dense symmetric 0/1 view is materialized on
demand for spectral work.  Centering subtracts the off-diagonal mean p and
keeps the diagonal at exactly zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError
from .rng import generator
from .sphere import CapParams, UnitVectorSet


@dataclass(frozen=True)
class Adjacency:
    """Simple undirected graph: vertex count and sorted (i < j) edge pairs."""

    n: int
    edges: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edges", edges)
        if self.n < 1:
            raise InvalidParameterError("graph needs at least one vertex")
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n:
                raise InvalidParameterError("edge endpoint out of range")
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise InvalidParameterError("edges must satisfy i < j (no self-loops)")
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            object.__setattr__(self, "edges", edges)
            if np.any((np.diff(edges[:, 0]) == 0) & (np.diff(edges[:, 1]) == 0)):
                raise InvalidParameterError("duplicate edge")

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    def dense(self) -> np.ndarray:
        """Symmetric 0/1 matrix with zero diagonal."""
        a = np.zeros((self.n, self.n))
        if self.m:
            i, j = self.edges[:, 0], self.edges[:, 1]
            a[i, j] = 1.0
            a[j, i] = 1.0
        return a

    @classmethod
    def from_dense(cls, matrix: np.ndarray) -> "Adjacency":
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidParameterError("adjacency matrix must be square")
        if not np.array_equal(matrix, matrix.T):
            raise InvalidParameterError("adjacency matrix must be symmetric")
        if np.any(np.diag(matrix) != 0):
            raise InvalidParameterError("adjacency matrix must have zero diagonal")
        i, j = np.nonzero(np.triu(matrix, 1))
        return cls(n=matrix.shape[0], edges=np.column_stack([i, j]))


@dataclass(frozen=True)
class CenteredMatrix:
    """The centered view: entry (i, j) = A_ij - p off the diagonal, 0 on it."""

    base: Adjacency
    p: float

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise InvalidParameterError(f"p must be in (0, 1), got {self.p}")

    @property
    def n(self) -> int:
        return self.base.n

    def dense(self) -> np.ndarray:
        q = self.base.dense()
        q -= self.p
        np.fill_diagonal(q, 0.0)
        return q


def geometric_graph(vectors: UnitVectorSet, cap: CapParams) -> Adjacency:
    """Edge {i, j} iff <v_i, v_j> >= tau, for all i < j.

    Ties at exactly tau count as edges (a measure-zero event, pinned for
    reproducibility).
    """
    if vectors.d != cap.d:
        raise InvalidParameterError(
            f"vectors have dimension {vectors.d}, cap calibrated for d={cap.d}"
        )
    gram = vectors.data @ vectors.data.T
    upper = np.triu(gram >= cap.tau, 1)
    i, j = np.nonzero(upper)
    return Adjacency(n=vectors.n, edges=np.column_stack([i, j]))


def erdos_renyi(n: int, p: float, seed: int) -> Adjacency:
    """Each pair {i, j} included independently with probability p."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if not (0.0 <= p <= 1.0):
        raise InvalidParameterError(f"p must be in [0, 1], got {p}")
    rng = generator(seed)
    rows = []
    # row-at-a-time keeps memory at O(n) and the draw order well defined
    for i in range(n - 1):
        hits = np.nonzero(rng.random(n - 1 - i) < p)[0]
        if hits.size:
            rows.append(np.column_stack([np.full(hits.size, i), i + 1 + hits]))
    edges = np.concatenate(rows) if rows else np.empty((0, 2), dtype=np.int64)
    return Adjacency(n=n, edges=edges)


def center(adjacency: Adjacency, p: float) -> CenteredMatrix:
    """The matrix A - p off the diagonal (diagonal stays zero)."""
    return CenteredMatrix(base=adjacency, p=p)


def save_edge_list(adjacency: Adjacency, path, metadata: dict | None = None) -> None:
    """Write the plain-text edge-list format: "n m" header, one "i j" line
    per edge (0-indexed).  Optional metadata goes to `<path>.meta.json`."""
    path = Path(path)
    lines = [f"{adjacency.n} {adjacency.m}"]
    lines.extend(f"{i} {j}" for i, j in adjacency.edges)
    path.write_text("\n".join(lines) + "\n")
    if metadata is not None:
        Path(str(path) + ".meta.json").write_text(json.dumps(metadata, indent=2) + "\n")


def load_edge_list(path) -> tuple[Adjacency, dict | None]:
    """Read the edge-list format; returns the graph and metadata if present."""
    path = Path(path)
    edges = []
    with path.open() as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise InvalidParameterError(f"{path}:1: expected header 'n m'")
        n, m = int(header[0]), int(header[1])
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InvalidParameterError(f"{path}:{lineno}: expected 'i j'")
            edges.append((int(parts[0]), int(parts[1])))
    if len(edges) != m:
        raise InvalidParameterError(
            f"{path}: header promises {m} edges, found {len(edges)}"
        )
    meta_path = Path(str(path) + ".meta.json")
    metadata = json.loads(meta_path.read_text()) if meta_path.exists() else None
    return Adjacency(n=n, edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2)), metadata
