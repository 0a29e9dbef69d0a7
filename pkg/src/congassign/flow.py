"""Integral maximum flow on two-layer source/sink networks.

The networks used throughout the package share one shape: a source feeding a
first layer of nodes, arcs from the first layer into a second layer, and the
second layer draining into a sink.  The solver side puts posts in the first
layer and agents in the second; the exact oracle reverses the roles.  All
capacities are machine integers, there is no scaling and no floating point.

``max_flow`` is deterministic: augmenting paths are found breadth-first with
nodes visited in arc construction order, so identical inputs (including arc
order) produce identical flows.  Downstream consumers rely on this to get
reproducible obstruction sets and traces.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from .model import Verdict, Witness


class Arc(NamedTuple):
    tail: str
    head: str
    capacity: int


@dataclass(frozen=True)
class FlowNetwork:
    """A directed network s -> left layer -> right layer -> t.

    Arcs must respect the layering and name at most one arc per ordered node
    pair; violations raise ``ValueError`` at construction.
    """

    source: str
    sink: str
    left: tuple[str, ...]
    right: tuple[str, ...]
    arcs: tuple[Arc, ...]

    def __post_init__(self):
        names = (self.source, *self.left, *self.right, self.sink)
        if len(set(names)) != len(names):
            raise ValueError("network node names are not unique")
        source, sink = self.source, self.sink
        left = set(self.left)
        right = set(self.right)
        pairs: set[tuple[str, str]] = set()
        for tail, head, capacity in self.arcs:
            if capacity < 0:
                raise ValueError(f"negative capacity on arc ({tail},{head})")
            pair = (tail, head)
            if pair in pairs:
                raise ValueError(f"duplicate arc ({tail},{head})")
            pairs.add(pair)
            if tail == source:
                ok = head in left
            elif tail in left:
                ok = head in right
            else:
                ok = tail in right and head == sink
            if not ok:
                raise ValueError(
                    f"arc ({tail},{head}) references an unknown node or breaks the layering"
                )


@dataclass(frozen=True)
class Flow:
    """An integral flow: one value per arc, keyed ``(tail, head)``."""

    values: dict[tuple[str, str], int]
    value: int


def max_flow(network: FlowNetwork) -> Flow:
    """Compute a maximum integral flow of the network.

    Uses breadth-first level graphs with blocking augmentation; ties are
    broken by arc construction order, which makes the returned flow a pure
    function of the input.
    """
    index: dict[str, int] = {network.source: 0}
    for node in network.left:
        index[node] = len(index)
    for node in network.right:
        index[node] = len(index)
    index[network.sink] = len(index)
    size = len(index)
    s, t = 0, size - 1

    heads: list[int] = []
    resid: list[int] = []
    adj: list[list[int]] = [[] for _ in range(size)]
    slot = 0
    for tail, head, capacity in network.arcs:
        u, w = index[tail], index[head]
        adj[u].append(slot)
        heads.append(w)
        resid.append(capacity)
        adj[w].append(slot + 1)
        heads.append(u)
        resid.append(0)
        slot += 2

    total = _dinic(size, s, t, heads, resid, adj)
    values = {
        (arc[0], arc[1]): arc[2] - resid[2 * i] for i, arc in enumerate(network.arcs)
    }
    return Flow(values, total)


def _dinic(
    size: int,
    s: int,
    t: int,
    heads: list[int],
    resid: list[int],
    adj: list[list[int]],
) -> int:
    """Core loop on integer arrays; mutates ``resid`` to the residual capacities."""
    total = 0
    level = [-1] * size
    pointer = [0] * size
    degree = [len(arcs) for arcs in adj]
    while True:
        for i in range(size):
            level[i] = -1
        level[s] = 0
        queue = deque((s,))
        pop = queue.popleft
        push = queue.append
        while queue:
            u = pop()
            lu = level[u] + 1
            for e in adj[u]:
                w = heads[e]
                if level[w] < 0 and resid[e] > 0:
                    level[w] = lu
                    push(w)
        if level[t] < 0:
            return total
        for i in range(size):
            pointer[i] = 0
        path: list[int] = []
        u = s
        while True:
            if u == t:
                bottleneck = resid[path[0]]
                for e in path:
                    r = resid[e]
                    if r < bottleneck:
                        bottleneck = r
                for e in path:
                    resid[e] -= bottleneck
                    resid[e ^ 1] += bottleneck
                total += bottleneck
                path.clear()
                u = s
                continue
            arcs_u = adj[u]
            target = level[u] + 1
            p = pointer[u]
            deg = degree[u]
            advanced = False
            while p < deg:
                e = arcs_u[p]
                if resid[e] > 0 and level[heads[e]] == target:
                    pointer[u] = p
                    path.append(e)
                    u = heads[e]
                    advanced = True
                    break
                p += 1
            if advanced:
                continue
            pointer[u] = p
            if u == s:
                break
            e = path.pop()
            u = heads[e ^ 1]
            pointer[u] += 1


def check_flow(network: FlowNetwork, flow: Flow, require_maximum: bool = False) -> Verdict:
    """Verify capacity bounds, conservation and (optionally) maximality.

    Maximality is certified by the absence of an augmenting path in the
    residual graph; when one exists it is reported in the witness note.
    Raises ``ValueError`` if the flow's arcs do not match the network.
    """
    arc_pairs = {(a.tail, a.head) for a in network.arcs}
    if set(flow.values) != arc_pairs:
        raise ValueError("flow arcs do not match the network")

    witnesses: list[Witness] = []
    for arc in network.arcs:
        f = flow.values[(arc.tail, arc.head)]
        if f < 0 or f > arc.capacity:
            witnesses.append(
                Witness(
                    "capacity",
                    note=f"arc ({arc.tail},{arc.head}): flow {f} outside [0,{arc.capacity}]",
                )
            )

    inflow: dict[str, int] = {}
    outflow: dict[str, int] = {}
    for arc in network.arcs:
        f = flow.values[(arc.tail, arc.head)]
        outflow[arc.tail] = outflow.get(arc.tail, 0) + f
        inflow[arc.head] = inflow.get(arc.head, 0) + f
    for node in (*network.left, *network.right):
        i = inflow.get(node, 0)
        o = outflow.get(node, 0)
        if i != o:
            witnesses.append(
                Witness("conservation", note=f"node {node}: inflow {i} != outflow {o}")
            )
    sink_in = inflow.get(network.sink, 0)
    if flow.value != sink_in:
        witnesses.append(
            Witness("value", note=f"declared value {flow.value} != sink inflow {sink_in}")
        )

    if require_maximum and not witnesses:
        path = _augmenting_path(network, flow)
        if path is not None:
            witnesses.append(
                Witness("not-maximum", note="augmenting path: " + " -> ".join(path))
            )
    return Verdict.from_witnesses(witnesses)


def _augmenting_path(network: FlowNetwork, flow: Flow) -> list[str] | None:
    """A source-to-sink path in the residual graph, or None if the flow is maximum."""
    forward: dict[str, list[tuple[str, int]]] = {}
    for arc in network.arcs:
        f = flow.values[(arc.tail, arc.head)]
        forward.setdefault(arc.tail, []).append((arc.head, arc.capacity - f))
        forward.setdefault(arc.head, []).append((arc.tail, f))
    parent: dict[str, str] = {}
    queue = deque([network.source])
    seen = {network.source}
    while queue:
        u = queue.popleft()
        for w, residual in forward.get(u, ()):
            if residual > 0 and w not in seen:
                seen.add(w)
                parent[w] = u
                if w == network.sink:
                    path = [w]
                    while path[-1] != network.source:
                        path.append(parent[path[-1]])
                    return path[::-1]
                queue.append(w)
    return None
