"""Chordal graph structure: recognition, clique forests, separations.

Vertices are strings and every derived object (clique, separator, ordering)
is reported in sorted order with deterministic tie-breaking, so repeated
runs on the same graph produce identical structures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import NotChordal, SupportMismatch


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with string vertex labels."""

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        verts = tuple(sorted(str(v) for v in self.vertices))
        if len(set(verts)) != len(verts):
            raise SupportMismatch(f"duplicate vertices in {verts}")
        vset = set(verts)
        seen = set()
        for u, v in self.edges:
            u, v = str(u), str(v)
            if u == v:
                raise SupportMismatch(f"loop at vertex {u!r}")
            if u not in vset or v not in vset:
                raise SupportMismatch(f"edge ({u!r}, {v!r}) leaves the vertex set")
            seen.add((min(u, v), max(u, v)))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    def adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def has_edge(self, u: str, v: str) -> bool:
        return (min(u, v), max(u, v)) in set(self.edges)

    def induced(self, keep: Iterable[str]) -> "Graph":
        keep = set(keep)
        unknown = keep - set(self.vertices)
        if unknown:
            raise SupportMismatch(f"vertices {sorted(unknown)} not in graph")
        edges = [e for e in self.edges if e[0] in keep and e[1] in keep]
        return Graph(tuple(sorted(keep)), tuple(edges))


@dataclass(frozen=True)
class ChordalStructure:
    """Cliques, junction forest and separator multiplicities of a chordal graph.

    ``cliques`` are sorted tuples listed lexicographically; ``forest_edges``
    are index pairs into that list; ``separators`` maps each distinct
    separator to the number of forest edges realizing it; ``peo`` is a
    perfect elimination ordering (reverse maximum cardinality search order).
    """

    cliques: tuple[tuple[str, ...], ...]
    forest_edges: tuple[tuple[int, int], ...]
    separators: Mapping[tuple[str, ...], int]
    peo: tuple[str, ...]


def mcs(g: Graph) -> tuple[tuple[str, ...], bool]:
    """Maximum cardinality search with the chordality test attached.

    Returns the visit order and whether the graph is chordal.  Ties in the
    weight are broken toward the smallest label, so the order is a pure
    function of the graph.
    """
    adj = g.adjacency()
    weight = {v: 0 for v in g.vertices}
    unnumbered = set(g.vertices)
    order: list[str] = []
    earlier: dict[str, set[str]] = {}
    while unnumbered:
        best = max(weight[v] for v in unnumbered)
        v = min(u for u in unnumbered if weight[u] == best)
        earlier[v] = adj[v] - unnumbered
        order.append(v)
        unnumbered.remove(v)
        for u in adj[v] & unnumbered:
            weight[u] += 1
    pos = {v: i for i, v in enumerate(order)}
    chordal = True
    for v in order:
        prev = earlier[v]
        if len(prev) <= 1:
            continue
        parent = max(prev, key=lambda u: pos[u])
        if not (prev - {parent}) <= adj[parent]:
            chordal = False
            break
    return tuple(order), chordal


def chordal_structure(g: Graph) -> ChordalStructure:
    """Cliques, junction forest and separators; raises NotChordal otherwise.

    The junction forest is the maximum weight spanning forest of the clique
    intersection graph (weight = overlap size), built by Kruskal's rule with
    lexicographic tie-breaking on the clique pair.
    """
    order, chordal = mcs(g)
    if not chordal:
        raise NotChordal(f"graph on {g.vertices} has no perfect elimination ordering")
    adj = g.adjacency()
    pos = {v: i for i, v in enumerate(order)}
    candidates = []
    for v in order:
        prev = {u for u in adj[v] if pos[u] < pos[v]}
        candidates.append(frozenset(prev | {v}))
    maximal = [c for c in candidates
               if not any(c < other for other in candidates)]
    cliques = tuple(sorted(set(tuple(sorted(c)) for c in maximal)))

    pairs = []
    for i in range(len(cliques)):
        for j in range(i + 1, len(cliques)):
            overlap = set(cliques[i]) & set(cliques[j])
            if overlap:
                pairs.append((-len(overlap), cliques[i], cliques[j], i, j))
    pairs.sort()
    parent = list(range(len(cliques)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    forest: list[tuple[int, int]] = []
    seps: dict[tuple[str, ...], int] = {}
    for _, ci, cj, i, j in pairs:
        ri, rj = find(i), find(j)
        if ri == rj:
            continue
        parent[ri] = rj
        forest.append((i, j))
        sep = tuple(sorted(set(ci) & set(cj)))
        seps[sep] = seps.get(sep, 0) + 1
    return ChordalStructure(
        cliques=cliques,
        forest_edges=tuple(sorted(forest)),
        separators=seps,
        peo=tuple(reversed(order)),
    )


def separates(g: Graph, a: Iterable[str], b: Iterable[str],
              d: Iterable[str]) -> bool:
    """Whether every path from a to b meets d.

    The three sets must be pairwise disjoint subsets of the vertices; they
    need not cover the graph, and paths through uncovered vertices count.
    """
    a, b, d = set(a), set(b), set(d)
    vset = set(g.vertices)
    for name, block in (("first", a), ("second", b), ("separator", d)):
        if not block <= vset:
            raise SupportMismatch(
                f"{name} block {sorted(block - vset)} not in graph vertices"
            )
    if a & b or a & d or b & d:
        raise SupportMismatch("separation blocks must be pairwise disjoint")
    if not a or not b:
        return True
    adj = g.adjacency()
    frontier = set(a)
    reached = set(a)
    while frontier:
        nxt = set()
        for v in frontier:
            for u in adj[v]:
                if u in d or u in reached:
                    continue
                if u in b:
                    return False
                nxt.add(u)
        reached |= nxt
        frontier = nxt
    return True


def decompositions(g: Graph) -> tuple[tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]], ...]:
    """All decompositions (A, B, D) of the vertex set.

    A and B are nonempty, D induces a complete subgraph, the three parts
    partition the vertices, and D separates A from B.  Each unordered
    {A, B} pair appears once, with the part containing the smallest vertex
    listed first.
    """
    verts = g.vertices
    n = len(verts)
    adj = g.adjacency()
    found = []
    for code in range(3 ** n):
        groups: tuple[list[str], list[str], list[str]] = ([], [], [])
        c = code
        for v in verts:
            groups[c % 3].append(v)
            c //= 3
        a, b, d = groups
        if not a or not b:
            continue
        if a[0] > b[0]:
            continue
        if any(not g.has_edge(u, v) for i, u in enumerate(d) for v in d[i + 1:]):
            continue
        if any(g.has_edge(u, v) for u in a for v in b):
            continue
        found.append((tuple(a), tuple(b), tuple(d)))
    return tuple(sorted(found))
