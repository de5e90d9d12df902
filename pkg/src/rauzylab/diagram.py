"""Reduced Rauzy diagrams: split graphs over unlabeled combinatorial types."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .combinatorics import (
    BOTTOM,
    TOP,
    GeneralizedPermutation,
    SelfCritical,
    canonical,
    critical_bands,
    split_type,
)
from .geometry import configuration_space


class NotFound(RuntimeError):
    pass


def direction_feasible(perm: GeneralizedPermutation, side: str) -> bool:
    """Whether the side's critical band is wider on an open subset of ``W``.

    ``W`` is a polytope, so the open half-space meets its relative interior
    exactly when it contains a vertex.
    """
    t, b = critical_bands(perm)
    if t == b:
        return False
    w, l = (t, b) if side == TOP else (b, t)
    return any(v[w - 1] > v[l - 1] for v in configuration_space(perm).vertices)


def successors(perm: GeneralizedPermutation):
    """Labeled ``(side, target, (winner, loser))`` for each admissible split direction."""
    out = []
    for side in (TOP, BOTTOM):
        if not direction_feasible(perm, side):
            continue
        try:
            new, rec = split_type(perm, side)
        except SelfCritical:
            continue
        out.append((side, new, (rec.winner, rec.loser)))
    return out


@dataclass(frozen=True)
class DiagramNode:
    id: int
    canonical: GeneralizedPermutation


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    winner_side: str


@dataclass
class RauzyDiagram:
    nodes: list[DiagramNode]
    edges: list[Edge]
    sinks: list[frozenset[int]]

    def index(self) -> dict[GeneralizedPermutation, int]:
        return {n.canonical: n.id for n in self.nodes}

    def node_of(self, perm: GeneralizedPermutation) -> int:
        return self.index()[canonical(perm)]

    def out_edges(self, node: int) -> list[Edge]:
        return [e for e in self.edges if e.source == node]

    def sink_of(self, node: int) -> Optional[frozenset[int]]:
        return next((s for s in self.sinks if node in s), None)

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {"id": n.id, "top": list(n.canonical.top), "bottom": list(n.canonical.bottom)}
                for n in self.nodes
            ],
            "edges": [
                {"source": e.source, "target": e.target, "winner_side": e.winner_side}
                for e in self.edges
            ],
            "sinks": [sorted(s) for s in self.sinks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_dot(self) -> str:
        in_sink = {i for s in self.sinks for i in s}
        lines = ["digraph rauzy {", "  node [shape=box, fontname=monospace];"]
        for n in self.nodes:
            label = f"{' '.join(map(str, n.canonical.top))}\\n{' '.join(map(str, n.canonical.bottom))}"
            color = "lightblue" if n.id in in_sink else "white"
            lines.append(f'  n{n.id} [label="{label}", style=filled, fillcolor={color}];')
        for e in self.edges:
            lines.append(f'  n{e.source} -> n{e.target} [label="{e.winner_side}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_diagram(seed: GeneralizedPermutation) -> RauzyDiagram:
    start = canonical(seed)
    ids = {start: 0}
    order = [start]
    edges = []
    queue = deque([start])
    while queue:
        p = queue.popleft()
        for side, new, _ in successors(p):
            c = canonical(new)
            if c not in ids:
                ids[c] = len(order)
                order.append(c)
                queue.append(c)
            edges.append(Edge(ids[p], ids[c], side))
    nodes = [DiagramNode(i, p) for i, p in enumerate(order)]
    g = RauzyDiagram(nodes, edges, [])
    g.sinks = find_sinks(g)
    return g


def strongly_connected_components(n: int, adj: list[list[int]]) -> list[list[int]]:
    """Iterative Tarjan."""
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack, comps = [], []
    counter = 0
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for j in range(i, len(adj[v])):
                u = adj[v][j]
                if index[u] is None:
                    work.append((v, j + 1))
                    work.append((u, 0))
                    recurse = True
                    break
                if on_stack[u]:
                    low[v] = min(low[v], index[u])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    u = stack.pop()
                    on_stack[u] = False
                    comp.append(u)
                    if u == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comps


def find_sinks(g: RauzyDiagram) -> list[frozenset[int]]:
    n = len(g.nodes)
    adj = [[] for _ in range(n)]
    for e in g.edges:
        adj[e.source].append(e.target)
    sinks = []
    for comp in strongly_connected_components(n, adj):
        members = set(comp)
        if all(u in members for v in comp for u in adj[v]):
            sinks.append(frozenset(comp))
    return sorted(sinks, key=min)


def shortest_sequence(g: RauzyDiagram, source: int, target: int) -> Optional[list[Edge]]:
    prev: dict[int, Optional[Edge]] = {source: None}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        if v == target:
            path = []
            while prev[v] is not None:
                path.append(prev[v])
                v = prev[v].source
            return path[::-1]
        for e in g.out_edges(v):
            if e.target not in prev:
                prev[e.target] = e
                queue.append(e.target)
    return None


def find_positive_sequence(start: GeneralizedPermutation, max_states: int = 2_000_000) -> list[tuple[int, int]]:
    """Shortest labeled split sequence from ``start`` whose matrix is entrywise positive.

    Breadth-first over (labeled type, zero pattern of Q).  Patterns only gain
    ones, so the state space is finite.
    """
    d = start.d
    full = (1 << d) - 1
    pattern0 = tuple(1 << j for j in range(d))  # bitmask of nonzero rows per column
    state0 = (start, pattern0)
    prev = {state0: None}
    queue = deque([state0])
    while queue:
        state = queue.popleft()
        perm, pat = state
        if all(c == full for c in pat):
            seq = []
            while prev[state] is not None:
                state, move = prev[state]
                seq.append(move)
            return seq[::-1]
        for _, new, (w, l) in successors(perm):
            cols = list(pat)
            cols[l - 1] |= cols[w - 1]
            nxt = (new, tuple(cols))
            if nxt not in prev:
                prev[nxt] = (state, (w, l))
                if len(prev) > max_states:
                    raise NotFound("state budget exhausted")
                queue.append(nxt)
    raise NotFound(f"no positive sequence from {start}")


def enumerate_sequences(g: RauzyDiagram, node: int, k: int) -> list[tuple[str, ...]]:
    """All split-direction words of length ``1..k`` that can be followed from ``node``."""
    out = []
    frontier = [((), node)]
    for _ in range(k):
        nxt = []
        for word, v in frontier:
            for e in g.out_edges(v):
                w = word + (e.winner_side,)
                out.append(w)
                nxt.append((w, e.target))
        frontier = nxt
    return out
