"""Structural graph decompositions and closed-walk statistics.

Pieces:

- bridge finding (linear-time low-link DFS),
- the block-cut tree: 2-edge-connected components joined by bridge-spanned
  subtrees, with the junction vertices sitting on both sides,
- ear decomposition of a 2-edge-connected graph via DFS chains, canonical
  under an ascending-vertex-id visit order, first ear a cycle through a
  chosen root,
- per-walk statistics (v, e, g, c, t, b, ears per component) feeding the
  closed-walk contribution bound 2^t p^(v-1) (C tau)^(c-2g) (C sqrt(log 1/p))^(g-t).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .errors import (
    DisconnectedGraphError,
    InvalidParameterError,
    InvalidWalkError,
    NotTwoEdgeConnectedError,
)

Edge = tuple[int, int]


def _norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected simple graph on vertices 0..n-1."""

    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError("graph needs at least one vertex")
        seen = set()
        normalized = []
        for u, v in self.edges:
            if u == v:
                raise InvalidParameterError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidParameterError(f"edge ({u}, {v}) out of range")
            e = _norm_edge(u, v)
            if e in seen:
                raise InvalidParameterError(f"duplicate edge {e}")
            seen.add(e)
            normalized.append(e)
        object.__setattr__(self, "edges", tuple(sorted(normalized)))
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    @classmethod
    def from_edges(cls, n: int, edges) -> "SimpleGraph":
        return cls(n=n, edges=tuple(tuple(e) for e in edges))

    @classmethod
    def from_adjacency(cls, adjacency) -> "SimpleGraph":
        """Build from a graphgen.Adjacency (or anything with .n and .edges)."""
        return cls(n=adjacency.n, edges=tuple(map(tuple, adjacency.edges)))

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)


def connected_components(graph: SimpleGraph) -> list[list[int]]:
    """Vertex lists of the connected components, each sorted ascending."""
    seen = [False] * graph.n
    components = []
    for start in range(graph.n):
        if seen[start]:
            continue
        seen[start] = True
        stack = [start]
        comp = [start]
        while stack:
            v = stack.pop()
            for w in graph.neighbors(v):
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
                    comp.append(w)
        components.append(sorted(comp))
    return components


def find_bridges(graph: SimpleGraph) -> frozenset[Edge]:
    """All edges whose removal increases the number of connected components.

    Iterative low-link DFS; works on disconnected input.
    """
    n = graph.n
    disc = [-1] * n
    low = [0] * n
    parent = [-1] * n
    bridges = set()
    timer = 0
    for start in range(n):
        if disc[start] != -1:
            continue
        disc[start] = low[start] = timer
        timer += 1
        stack = [(start, iter(graph.neighbors(start)))]
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    parent[w] = v
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, iter(graph.neighbors(w))))
                    advanced = True
                    break
                if w != parent[v]:
                    low[v] = min(low[v], disc[w])
            if not advanced:
                stack.pop()
                if stack:
                    u = stack[-1][0]
                    low[u] = min(low[u], low[v])
                    if low[v] > disc[u]:
                        bridges.add(_norm_edge(u, v))
    return frozenset(bridges)


@dataclass(frozen=True)
class GraphComponent:
    """A vertex/edge subset of a larger graph (labels from the parent)."""

    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]


@dataclass(frozen=True)
class BlockCutTree:
    """2-edge-connected components joined by bridge-spanned subtrees."""

    two_edge_connected_components: tuple[GraphComponent, ...]
    bridge_components: tuple[GraphComponent, ...]
    bridges: frozenset[Edge]
    junctions: frozenset[int]


def _edge_subgraph_components(
    vertices, adjacency: dict[int, list[int]]
) -> list[GraphComponent]:
    seen = set()
    components = []
    for start in sorted(vertices):
        if start in seen:
            continue
        seen.add(start)
        stack = [start]
        comp_vertices = [start]
        comp_edges = set()
        while stack:
            v = stack.pop()
            for w in adjacency.get(v, ()):
                comp_edges.add(_norm_edge(v, w))
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
                    comp_vertices.append(w)
        components.append(
            GraphComponent(tuple(sorted(comp_vertices)), tuple(sorted(comp_edges)))
        )
    return components


def block_cut_tree(graph: SimpleGraph) -> BlockCutTree:
    """Decompose a connected graph into 2-edge-connected components and
    bridge components; junction vertices touch both a bridge and a component.
    """
    components = connected_components(graph)
    if len(components) > 1:
        a, b = components[0][0], components[1][0]
        raise DisconnectedGraphError(
            f"graph is disconnected: vertex {a} and vertex {b} "
            "lie in different components",
            witnesses=(a, b),
        )

    bridges = find_bridges(graph)
    non_bridge_adj: dict[int, list[int]] = {}
    bridge_adj: dict[int, list[int]] = {}
    for u, v in graph.edges:
        target = bridge_adj if (u, v) in bridges else non_bridge_adj
        target.setdefault(u, []).append(v)
        target.setdefault(v, []).append(u)

    two_edge_connected = _edge_subgraph_components(non_bridge_adj.keys(), non_bridge_adj)
    bridge_components = _edge_subgraph_components(bridge_adj.keys(), bridge_adj)
    junctions = frozenset(non_bridge_adj.keys() & bridge_adj.keys())
    return BlockCutTree(
        two_edge_connected_components=tuple(two_edge_connected),
        bridge_components=tuple(bridge_components),
        bridges=bridges,
        junctions=junctions,
    )


@dataclass(frozen=True)
class EarDecomposition:
    """Ears as vertex paths; the first is a closed cycle through `root`."""

    ears: tuple[tuple[int, ...], ...]
    root: int

    @property
    def ear_count(self) -> int:
        return len(self.ears)

    def ear_lengths(self) -> tuple[int, ...]:
        """Edge counts per ear."""
        return tuple(len(ear) - 1 for ear in self.ears)


def is_two_edge_connected(graph: SimpleGraph) -> bool:
    if graph.n < 3:
        return False
    if len(connected_components(graph)) > 1:
        return False
    return not find_bridges(graph)


def _require_two_edge_connected(graph: SimpleGraph) -> None:
    components = connected_components(graph)
    if len(components) > 1:
        raise NotTwoEdgeConnectedError(
            "graph is disconnected",
            violation=(components[0][0], components[1][0]),
        )
    if graph.n < 3:
        raise NotTwoEdgeConnectedError(
            f"graph on {graph.n} vertices has no cycle", violation=None
        )
    bridges = find_bridges(graph)
    if bridges:
        witness = min(bridges)
        raise NotTwoEdgeConnectedError(
            f"graph has a bridge {witness}", violation=witness
        )


def ear_decomposition(graph: SimpleGraph, root: int = 0) -> EarDecomposition:
    """Canonical ear decomposition of a 2-edge-connected graph.

    DFS from `root` with children visited in ascending vertex id; every back
    edge, processed at its ancestor endpoint in discovery order, opens a
    chain that follows tree edges upward until it meets an earlier ear.  The
    first chain is the cycle through `root`; later chains are open ears
    (possibly single-edge chords, tallied by callers).
    """
    if not (0 <= root < graph.n):
        raise InvalidParameterError(f"root {root} out of range")
    _require_two_edge_connected(graph)

    disc = [-1] * graph.n
    parent = [-1] * graph.n
    preorder = []
    disc[root] = 0
    preorder.append(root)
    stack = [(root, iter(graph.neighbors(root)))]
    timer = 1
    while stack:
        v, it = stack[-1]
        for w in it:
            if disc[w] == -1:
                parent[w] = v
                disc[w] = timer
                timer += 1
                preorder.append(w)
                stack.append((w, iter(graph.neighbors(w))))
                break
        else:
            stack.pop()

    tree_edges = {_norm_edge(v, parent[v]) for v in range(graph.n) if parent[v] != -1}
    back_at: dict[int, list[int]] = {}
    for u, v in graph.edges:
        if (u, v) in tree_edges:
            continue
        ancestor, descendant = (u, v) if disc[u] < disc[v] else (v, u)
        back_at.setdefault(ancestor, []).append(descendant)

    ears = []
    visited = [False] * graph.n
    visited[root] = True
    for w in preorder:
        for x in sorted(back_at.get(w, ())):
            path = [w, x]
            if not visited[x]:
                visited[x] = True
                cur = parent[x]
                while not visited[cur]:
                    path.append(cur)
                    visited[cur] = True
                    cur = parent[cur]
                path.append(cur)
            ears.append(tuple(path))
    return EarDecomposition(ears=tuple(ears), root=root)


@dataclass(frozen=True)
class EarValidation:
    valid: bool
    violation: str | None = None


def validate_ears(graph: SimpleGraph, candidate: EarDecomposition) -> EarValidation:
    """Check the three defining conditions of an ear decomposition.

    Violations are reported, not raised: (1) the first ear is a simple cycle
    (through the recorded root, when one is recorded), (2) later ears are
    paths with new internal vertices and previously seen endpoints, (3) the
    ears partition the edge set exactly.
    """
    if not candidate.ears:
        return EarValidation(False, "no ears")

    used_edges: set[Edge] = set()
    graph_edges = graph.edge_set()

    def walk_edges(path, label):
        for a, b in zip(path, path[1:]):
            if a == b:
                return f"{label} repeats vertex {a} consecutively"
            e = _norm_edge(a, b)
            if e not in graph_edges:
                return f"{label} uses non-edge {e}"
            if e in used_edges:
                return f"{label} reuses edge {e}"
            used_edges.add(e)
        return None

    first = candidate.ears[0]
    if len(first) < 4 or first[0] != first[-1] or len(set(first[:-1])) != len(first) - 1:
        return EarValidation(False, "first ear is not a simple cycle")
    if candidate.root is not None and candidate.root not in first:
        return EarValidation(False, "first ear does not contain the root")
    problem = walk_edges(first, "first ear")
    if problem:
        return EarValidation(False, problem)

    seen_vertices = set(first)
    for index, ear in enumerate(candidate.ears[1:], start=2):
        label = f"ear {index}"
        if len(ear) < 2:
            return EarValidation(False, f"{label} has no edges")
        if ear[0] not in seen_vertices or ear[-1] not in seen_vertices:
            return EarValidation(False, f"{label} endpoint not in earlier ears")
        interior = ear[1:-1]
        if len(set(interior)) != len(interior):
            return EarValidation(False, f"{label} repeats an internal vertex")
        if any(v in seen_vertices for v in interior):
            return EarValidation(False, f"{label} reuses an internal vertex")
        problem = walk_edges(ear, label)
        if problem:
            return EarValidation(False, problem)
        seen_vertices.update(ear)

    if used_edges != graph_edges:
        missing = sorted(graph_edges - used_edges)
        return EarValidation(False, f"edges not covered by any ear: {missing}")
    return EarValidation(True, None)


@dataclass(frozen=True, eq=False)
class WalkGraphStats:
    """Statistics of the simple graph spanned by a closed walk.

    v, e: vertex and edge counts; g = e - v + 1 (the excess, equal to the
    total ear count); c: edges inside 2-edge-connected components; t: number
    of length-2 ears; b: edges traversed exactly once; s_per_component: ear
    counts per 2-edge-connected component; length_one_ears: chord ears, kept
    in their own tally.
    """

    v: int
    e: int
    g: int
    c: int
    t: int
    b: int
    s_per_component: tuple[int, ...]
    length_one_ears: int
    multiplicities: dict


def _parse_closed_walk(walk) -> list[int]:
    seq = list(getattr(walk, "vertices", walk))
    if len(seq) >= 2 and seq[0] == seq[-1]:
        seq = seq[:-1]  # explicit closure is allowed on input
    if len(seq) < 2:
        raise InvalidWalkError("a closed walk needs at least two distinct vertices")
    for a, b in zip(seq, seq[1:]):
        if a == b:
            raise InvalidWalkError(f"consecutive repeated vertex {a}")
    if seq[0] == seq[-1]:
        raise InvalidWalkError("walk closes early: last vertex equals the first")
    return seq


def walk_graph_stats(walk) -> WalkGraphStats:
    """Build the walk's simple graph and extract its decomposition statistics.

    The walk is the sequence (i_1, ..., i_k) closed by the implicit edge
    {i_k, i_1}; each of the k traversals counts toward edge multiplicity.
    Per-component ear decompositions are rooted at the smallest junction
    vertex of the component (smallest vertex if it has no junction).
    """
    seq = _parse_closed_walk(walk)
    k = len(seq)
    multiplicities: Counter = Counter(
        _norm_edge(seq[i], seq[(i + 1) % k]) for i in range(k)
    )

    labels = sorted(set(seq))
    index = {label: i for i, label in enumerate(labels)}
    graph = SimpleGraph.from_edges(
        len(labels), ((index[u], index[v]) for u, v in multiplicities)
    )
    tree = block_cut_tree(graph)

    v, e = graph.n, graph.m
    g = e - v + 1
    c = sum(len(comp.edges) for comp in tree.two_edge_connected_components)
    s_per_component = []
    t = 0
    length_one = 0
    for comp in tree.two_edge_connected_components:
        junctions_here = sorted(tree.junctions & set(comp.vertices))
        comp_root = junctions_here[0] if junctions_here else comp.vertices[0]
        sub, mapping = _induced_relabeled(graph, comp.vertices)
        ears = ear_decomposition(sub, root=mapping[comp_root])
        s_per_component.append(ears.ear_count)
        lengths = ears.ear_lengths()
        t += sum(1 for length in lengths if length == 2)
        length_one += sum(1 for length in lengths if length == 1)

    return WalkGraphStats(
        v=v,
        e=e,
        g=g,
        c=c,
        t=t,
        b=sum(1 for count in multiplicities.values() if count == 1),
        s_per_component=tuple(s_per_component),
        length_one_ears=length_one,
        multiplicities=dict(multiplicities),
    )


def _induced_relabeled(graph: SimpleGraph, vertices) -> tuple[SimpleGraph, dict]:
    """Induced subgraph on `vertices`, relabeled to 0..len-1.

    Returns the subgraph and the old-label -> new-label mapping.
    """
    mapping = {label: i for i, label in enumerate(sorted(vertices))}
    keep = set(vertices)
    edges = [
        (mapping[u], mapping[v]) for u, v in graph.edges if u in keep and v in keep
    ]
    return SimpleGraph.from_edges(len(mapping), edges), mapping


def contribution_bound(
    stats: WalkGraphStats, p: float, tau: float, C: float = 1.0
) -> float:
    """Evaluate 2^t p^(v-1) (C tau)^(c-2g) (C sqrt(log(1/p)))^(g-t).

    The constant C is explicit because the bound only fixes it abstractly;
    log is natural.  Negative exponents are evaluated as ordinary powers.
    """
    if not (0.0 < p < 1.0):
        raise InvalidParameterError(f"p must be in (0, 1), got {p}")
    if tau <= 0.0:
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    if C <= 0.0:
        raise InvalidParameterError(f"C must be positive, got {C}")
    if stats.g < stats.t:
        raise InvalidParameterError(
            f"stats violate g >= t (g={stats.g}, t={stats.t}); "
            "not a valid walk-graph decomposition"
        )
    return (
        2.0**stats.t
        * p ** (stats.v - 1)
        * (C * tau) ** (stats.c - 2 * stats.g)
        * (C * math.sqrt(math.log(1.0 / p))) ** (stats.g - stats.t)
    )
