"""Deciding and constructing competitive assignments.

The solver works in two stages.

Stage one reduces the general question to instances where a competitive
assignment must keep every post occupied.  For each candidate count ``k`` of
empty posts, the instance is padded with ``k`` filler agents (each willing to
take any original post alone, with a long fallback chain on a reserve post)
and an anchor gadget of two reserve posts pinned by two anchor agents.  In
any competitive assignment of the padded instance with no empty post, the
anchors sit alone on their reserve posts, each filler sits alone on an
original post, and the original agents stay on original posts, so dropping
the padding recovers a competitive assignment of the original instance.

Stage two decides the no-empty-post question by an iterative flow
computation.  A table ``T`` keeps a per-post minimum congestion, starting at
one everywhere.  Situations ``(a, d)`` are *valid* until explicitly
invalidated; each round builds a network with source arcs of capacity
``T[a]`` into post nodes, unit arcs from each post to the agents whose best
still-valid tier contains that post at its table congestion, and unit arcs
from agents to the sink.  A flow saturating every agent yields a competitive
assignment with ``|blocks(a)| = T[a]``.  Otherwise an unsaturated agent seeds
an obstruction: a set of posts whose combined quota is too small for the
agents insisting on them.  Those posts' table congestions are invalidated and
incremented, and the loop repeats while the table total stays within the
number of agents.

Tie-breaking is deterministic everywhere (lowest construction index for the
seed agent, the obstruction's post scan and the invalidation order), so
solves are reproducible, including their traces.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SolverInvariantError
from .flow import Arc, Flow, FlowNetwork, _dinic, max_flow
from .model import Assignment, Instance, fresh_name


@dataclass(frozen=True)
class ExtendedInstance:
    """An instance padded for the no-empty-post solver.

    ``inner`` is the padded instance; ``original`` the instance it extends.
    ``filler_agents`` hold the agents meant to occupy the ``empty_posts``
    original posts that a competitive assignment would leave empty;
    ``anchor_agents`` pin the two ``reserve_posts``.
    """

    inner: Instance
    original: Instance
    empty_posts: int
    filler_agents: tuple[str, ...]
    anchor_agents: tuple[str, str]
    reserve_posts: tuple[str, str]


@dataclass(frozen=True)
class Obstruction:
    """A deficient post/agent pair certifying that no saturating flow exists.

    ``posts`` is exactly the set of in-neighbours of ``agents`` in the
    network; every post in it has a smaller source capacity than its number
    of out-arcs into ``agents``, and the capacities sum to less than
    ``len(agents)``.  ``seed`` is the unsaturated agent the search grew from.
    """

    posts: tuple[str, ...]
    agents: tuple[str, ...]
    seed: str


class ValidityState:
    """The minimum-congestion table plus the set of invalidated situations."""

    __slots__ = ("posts", "table", "invalid")

    def __init__(self, posts, table, invalid=()):
        self.posts = tuple(posts)
        self.table = dict(table)
        self.invalid = frozenset(invalid)

    @classmethod
    def initial(cls, instance: Instance) -> "ValidityState":
        return cls(instance.posts, {a: 1 for a in instance.posts})

    def is_valid(self, post: str, congestion: int) -> bool:
        return (post, congestion) not in self.invalid

    @property
    def total(self) -> int:
        return sum(self.table.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ValidityState):
            return NotImplemented
        return (
            self.posts == other.posts
            and self.table == other.table
            and self.invalid == other.invalid
        )

    def __repr__(self) -> str:
        return f"ValidityState(table={self.table}, invalid={sorted(self.invalid)})"


@dataclass(frozen=True)
class IterationRecord:
    """One round of the no-empty-post loop, as recorded in a trace."""

    index: int
    table_before: dict[str, int]
    table_after: dict[str, int]
    network: FlowNetwork
    flow: Flow
    flow_value: int
    obstruction: Obstruction | None
    invalidated: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class NoEmptySolve:
    """Result of the no-empty-post solver: an assignment or a certified no."""

    assignment: Assignment | None
    trace: tuple[IterationRecord, ...] | None = None

    @property
    def found(self) -> bool:
        return self.assignment is not None


@dataclass(frozen=True)
class KAttempt:
    empty_posts: int
    extension: ExtendedInstance
    solve: NoEmptySolve


@dataclass(frozen=True)
class CpSolve:
    """Result of the general solver.

    ``assignment`` is a competitive assignment of the original instance or
    None; ``empty_posts`` is the successful padding size.  ``attempts`` holds
    the per-padding traces when tracing was requested.
    """

    assignment: Assignment | None
    empty_posts: int | None
    attempts: tuple[KAttempt, ...] | None = None

    @property
    def found(self) -> bool:
        return self.assignment is not None


def extend_instance(instance: Instance, empty_posts: int) -> ExtendedInstance:
    """Pad an instance for the no-empty-post solver.

    ``empty_posts`` is the number of original posts a competitive assignment
    is allowed to leave empty; it must lie between ``max(0, m - n)`` (fewer
    agents than posts force that many posts empty) and ``m - 1`` (some post
    is always occupied).
    """
    n, m = instance.n, instance.m
    k = empty_posts
    lo = max(0, m - n)
    if not lo <= k <= m - 1:
        raise ValueError(f"empty_posts must be in [{lo}, {m - 1}], got {k}")

    taken_agents = set(instance.agents)
    fillers = []
    for z in range(1, k + 1):
        name = fresh_name(f"u{z}", taken_agents)
        taken_agents.add(name)
        fillers.append(name)
    anchor1 = fresh_name("p1", taken_agents)
    taken_agents.add(anchor1)
    anchor2 = fresh_name("p2", taken_agents)
    taken_posts = set(instance.posts)
    reserve1 = fresh_name("b1", taken_posts)
    taken_posts.add(reserve1)
    reserve2 = fresh_name("b2", taken_posts)

    posts = (*instance.posts, reserve1, reserve2)
    agents = (*instance.agents, *fillers, anchor1, anchor2)

    # The new posts are appended, so the original canonical structures keep
    # their post indices and are reused wholesale.
    r1, r2 = m, m + 1
    prefs: dict[str, tuple] = {}
    tiers_by_ix: list[tuple] = []
    rank_by_ix: list[dict] = []
    maxcong_by_ix: list[tuple] = []

    chain = tuple(((reserve1, d),) for d in range(1, k + 3))
    chain_ix = tuple(((r1, d),) for d in range(1, k + 3))
    for vi, v in enumerate(instance.agents):
        original_tiers = instance.prefs[v]
        prefs[v] = original_tiers + chain
        tiers_by_ix.append(instance.tiers_by_ix[vi] + chain_ix)
        rank = dict(instance.rank_by_ix[vi])
        base = len(original_tiers)
        for d in range(1, k + 3):
            rank[(r1, d)] = base + d - 1
        rank_by_ix.append(rank)
        maxcong_by_ix.append((*instance.maxcong_by_ix[vi], k + 2, 0))

    filler_chain = k + n - m + 2
    filler_tiers = (
        tuple((a, 1) for a in instance.posts),
        *(((reserve1, d),) for d in range(1, filler_chain + 1)),
    )
    filler_tiers_ix = (
        tuple((ai, 1) for ai in range(m)),
        *(((r1, d),) for d in range(1, filler_chain + 1)),
    )
    filler_rank = {(ai, 1): 0 for ai in range(m)}
    for d in range(1, filler_chain + 1):
        filler_rank[(r1, d)] = d
    filler_maxcong = (*(1,) * m, filler_chain, 0)
    for u in fillers:
        prefs[u] = filler_tiers
        tiers_by_ix.append(filler_tiers_ix)
        rank_by_ix.append(filler_rank)
        maxcong_by_ix.append(filler_maxcong)

    anchor_chain = k + n + 1
    prefs[anchor1] = (
        ((reserve1, 1),),
        *(((reserve2, d),) for d in range(1, anchor_chain + 1)),
    )
    tiers_by_ix.append((((r1, 1),), *(((r2, d),) for d in range(1, anchor_chain + 1))))
    rank1 = {(r1, 1): 0}
    for d in range(1, anchor_chain + 1):
        rank1[(r2, d)] = d
    rank_by_ix.append(rank1)
    maxcong_by_ix.append((*(0,) * m, 1, anchor_chain))
    prefs[anchor2] = (
        ((reserve2, 1),),
        *(((reserve1, d),) for d in range(1, anchor_chain + 1)),
    )
    tiers_by_ix.append((((r2, 1),), *(((r1, d),) for d in range(1, anchor_chain + 1))))
    rank2 = {(r2, 1): 0}
    for d in range(1, anchor_chain + 1):
        rank2[(r1, d)] = d
    rank_by_ix.append(rank2)
    maxcong_by_ix.append((*(0,) * m, anchor_chain, 1))

    inner = Instance._from_parts(
        posts, agents, prefs, tiers_by_ix, rank_by_ix, maxcong_by_ix
    )
    return ExtendedInstance(
        inner=inner,
        original=instance,
        empty_posts=k,
        filler_agents=tuple(fillers),
        anchor_agents=(anchor1, anchor2),
        reserve_posts=(reserve1, reserve2),
    )


def restrict_assignment(extension: ExtendedInstance, assignment: Assignment) -> Assignment:
    """Project an assignment of the padded instance back to the original one.

    Expects a competitive assignment of ``extension.inner`` with no empty
    post, whose shape is then forced: anchors alone on the reserve posts,
    fillers alone on original posts, original agents on posts their original
    list mentions.  Posts held by a filler become empty; any shape violation
    raises ``SolverInvariantError`` since it signals a solver bug.
    """
    inner = extension.inner
    original = extension.original
    anchor1, anchor2 = extension.anchor_agents
    reserve1, reserve2 = extension.reserve_posts
    fillers = set(extension.filler_agents)

    if assignment.blocks.get(reserve1) != frozenset({anchor1}):
        raise SolverInvariantError(
            f"anchor {anchor1} must sit alone on {reserve1}, "
            f"got {sorted(assignment.blocks.get(reserve1, ()))}"
        )
    if assignment.blocks.get(reserve2) != frozenset({anchor2}):
        raise SolverInvariantError(
            f"anchor {anchor2} must sit alone on {reserve2}, "
            f"got {sorted(assignment.blocks.get(reserve2, ()))}"
        )

    blocks: dict[str, frozenset[str]] = {}
    for post in original.posts:
        block = assignment.blocks.get(post, frozenset())
        held_by_fillers = block & fillers
        if held_by_fillers:
            if len(block) != 1:
                raise SolverInvariantError(
                    f"filler on {post} must sit alone, got {sorted(block)}"
                )
            blocks[post] = frozenset()
        else:
            blocks[post] = block
    placed = set()
    for post, block in blocks.items():
        for v in block:
            if v not in original.agent_index:
                raise SolverInvariantError(f"unexpected agent {v} on original post {post}")
            if original.max_congestion(v, post) < 1:
                raise SolverInvariantError(f"agent {v} landed on unlisted post {post}")
            placed.add(v)
    missing = set(original.agents) - placed
    if missing:
        raise SolverInvariantError(
            f"original agent {sorted(missing)[0]} is not on an original post"
        )
    if inner.n != len(assignment.owner):
        raise SolverInvariantError("assignment does not cover the padded instance")
    return Assignment.from_blocks(original, blocks)


def _top_valid_tier(
    instance: Instance, state: ValidityState, agent_ix: int, start: int = 0
) -> tuple[int, list[tuple[int, int]]]:
    """First tier index holding a valid situation, with its valid members."""
    tiers = instance.tiers_by_ix[agent_ix]
    posts = instance.posts
    invalid = state.invalid
    for t in range(start, len(tiers)):
        members = [
            (ai, d) for ai, d in tiers[t] if (posts[ai], d) not in invalid
        ]
        if members:
            return t, members
    agent = instance.agents[agent_ix]
    raise SolverInvariantError(
        f"agent {agent} has no valid situation left; the loop bound was breached"
    )


def _assemble_network(
    instance: Instance, table, tops: list[list[tuple[int, int]]]
) -> FlowNetwork:
    taken = set(instance.posts) | set(instance.agents)
    source = fresh_name("s", taken)
    sink = fresh_name("t", taken | {source})
    arcs = [Arc(source, a, table[a]) for a in instance.posts]
    for vi, members in enumerate(tops):
        v = instance.agents[vi]
        for ai, _d in members:
            arcs.append(Arc(instance.posts[ai], v, 1))
    arcs.extend(Arc(v, sink, 1) for v in instance.agents)
    return FlowNetwork(
        source=source,
        sink=sink,
        left=instance.posts,
        right=instance.agents,
        arcs=tuple(arcs),
    )


def build_network(instance: Instance, state: ValidityState) -> FlowNetwork:
    """Build the flow network for the current table and validity state.

    Source arcs carry the table congestions, each agent contributes unit arcs
    from every post of its best still-valid tier (all ties included) and a
    unit arc to the sink.  Raises ``SolverInvariantError`` if some agent has
    no valid situation, which cannot happen while the table total stays
    within the number of agents.
    """
    tops = [
        _top_valid_tier(instance, state, vi)[1] for vi in range(instance.n)
    ]
    return _assemble_network(instance, state.table, tops)


def derive_assignment(network: FlowNetwork, flow: Flow) -> Assignment:
    """Read an assignment off a flow that saturates every agent.

    Each agent joins the unique post whose arc carries its unit.  Raises
    ``ValueError`` when the flow is not saturating.
    """
    if flow.value != len(network.right):
        raise ValueError(
            f"flow value {flow.value} does not saturate all {len(network.right)} agents"
        )
    blocks: dict[str, set[str]] = {post: set() for post in network.left}
    placed = set()
    for arc in network.arcs:
        if arc.tail in blocks and arc.head != network.sink:
            if flow.values[(arc.tail, arc.head)] == 1:
                blocks[arc.tail].add(arc.head)
                placed.add(arc.head)
    if placed != set(network.right):
        raise ValueError("flow does not place every agent")
    return Assignment(blocks)


def find_obstruction(network: FlowNetwork, flow: Flow) -> Obstruction:
    """Grow an obstruction from an unsaturated agent of a maximum flow.

    Starting from the lowest-index agent with no sink flow, repeatedly pick
    the lowest-index post outside the set with an arc into the collected
    agents, add it, and add every agent that post currently serves.  The
    result is a deficient pair: every collected post is over-demanded and the
    collected source capacities sum to less than the number of collected
    agents.  Raises ``ValueError`` on a saturating flow.
    """
    if flow.value == len(network.right):
        raise ValueError("flow saturates every agent; no obstruction exists")
    seed = None
    for v in network.right:
        if flow.values.get((v, network.sink), 0) == 0:
            seed = v
            break
    if seed is None:
        raise ValueError("no unsaturated agent found")

    out_arcs: dict[str, list[str]] = {a: [] for a in network.left}
    for arc in network.arcs:
        if arc.tail in out_arcs and arc.head != network.sink:
            out_arcs[arc.tail].append(arc.head)

    agents = [seed]
    agent_set = {seed}
    posts: list[str] = []
    post_set: set[str] = set()
    while True:
        chosen = None
        for a in network.left:
            if a in post_set:
                continue
            if any(v in agent_set for v in out_arcs[a]):
                chosen = a
                break
        if chosen is None:
            break
        posts.append(chosen)
        post_set.add(chosen)
        for v in out_arcs[chosen]:
            if flow.values[(chosen, v)] == 1 and v not in agent_set:
                agents.append(v)
                agent_set.add(v)
    return Obstruction(posts=tuple(posts), agents=tuple(agents), seed=seed)


def apply_obstruction(state: ValidityState, obstruction: Obstruction) -> ValidityState:
    """Invalidate the table situation of every obstructed post and bump it.

    Posts are processed in construction order; for each, ``(a, T[a])``
    becomes invalid and ``T[a]`` grows by one.  Returns a new state.
    """
    post_order = {a: i for i, a in enumerate(state.posts)}
    table = dict(state.table)
    invalid = set(state.invalid)
    for a in sorted(obstruction.posts, key=post_order.__getitem__):
        invalid.add((a, table[a]))
        table[a] += 1
    return ValidityState(state.posts, table, invalid)


def solve_cp_no_empty(instance: Instance, keep_trace: bool = False) -> NoEmptySolve:
    """Decide whether a competitive assignment with no empty post exists.

    Returns the assignment when one exists (its per-post congestions equal
    the final table) and a certified no otherwise.  With ``keep_trace`` the
    result carries one record per round: table snapshots, the network, the
    flow, the obstruction and the invalidated situations.

    The loop runs on integer arrays for speed but mirrors the public
    operations exactly: the same arc order feeds the same flow routine, so
    traces match what ``build_network``/``max_flow``/``find_obstruction``
    would produce.  Networks are rebuilt and flows recomputed from scratch
    every round.
    """
    n, m = instance.n, instance.m
    posts = instance.posts
    agents = instance.agents
    tiers = instance.tiers_by_ix
    tab = [1] * m
    total_tab = m
    pointers = [0] * n
    trace: list[IterationRecord] | None = [] if keep_trace else None
    size = m + n + 2
    s, t = 0, size - 1
    z = 0
    while total_tab <= n:
        z += 1
        # Best still-valid tier per agent; a situation (a, d) is valid
        # exactly when d >= tab[a], and the tier pointer only advances.
        tops: list[list[tuple[int, int]]] = []
        for vi in range(n):
            agent_tiers = tiers[vi]
            ti = pointers[vi]
            while True:
                if ti >= len(agent_tiers):
                    raise SolverInvariantError(
                        f"agent {agents[vi]} has no valid situation left;"
                        " the loop bound was breached"
                    )
                members = [(ai, d) for ai, d in agent_tiers[ti] if d >= tab[ai]]
                if members:
                    break
                ti += 1
            pointers[vi] = ti
            tops.append(members)

        # Arcs in the same order as build_network: source, per-agent, sink.
        heads: list[int] = []
        resid: list[int] = []
        adj: list[list[int]] = [[] for _ in range(size)]
        slot = 0
        for ai in range(m):
            adj[s].append(slot)
            heads.append(1 + ai)
            resid.append(tab[ai])
            adj[1 + ai].append(slot + 1)
            heads.append(s)
            resid.append(0)
            slot += 2
        agent_arcs: list[tuple[int, int, int]] = []
        for vi in range(n):
            vnode = 1 + m + vi
            for ai, _d in tops[vi]:
                anode = 1 + ai
                adj[anode].append(slot)
                heads.append(vnode)
                resid.append(1)
                adj[vnode].append(slot + 1)
                heads.append(anode)
                resid.append(0)
                agent_arcs.append((ai, vi, slot))
                slot += 2
        sink_base = slot
        for vi in range(n):
            vnode = 1 + m + vi
            adj[vnode].append(slot)
            heads.append(t)
            resid.append(1)
            adj[t].append(slot + 1)
            heads.append(vnode)
            resid.append(0)
            slot += 2

        value = _dinic(size, s, t, heads, resid, adj)

        if value == n:
            blocks: dict[str, set[str]] = {a: set() for a in posts}
            for ai, vi, arc_slot in agent_arcs:
                if resid[arc_slot] == 0:
                    blocks[posts[ai]].add(agents[vi])
            assignment = Assignment(blocks)
            if trace is not None:
                table = {posts[ai]: tab[ai] for ai in range(m)}
                network = _assemble_network(instance, table, tops)
                flow = _materialize_flow(network, tab, resid, agent_arcs, sink_base, n)
                trace.append(
                    IterationRecord(
                        index=z,
                        table_before=table,
                        table_after=dict(table),
                        network=network,
                        flow=flow,
                        flow_value=value,
                        obstruction=None,
                        invalidated=(),
                    )
                )
            return NoEmptySolve(assignment, tuple(trace) if trace is not None else None)

        # Grow the obstruction from the lowest-index unsaturated agent.
        seed_vi = next(
            vi for vi in range(n) if resid[sink_base + 2 * vi] == 1
        )
        post_out: list[list[tuple[int, int]]] = [[] for _ in range(m)]
        for ai, vi, arc_slot in agent_arcs:
            post_out[ai].append((vi, arc_slot))
        in_agents = bytearray(n)
        in_agents[seed_vi] = 1
        agent_list = [seed_vi]
        in_posts = bytearray(m)
        post_list: list[int] = []
        while True:
            chosen = -1
            for ai in range(m):
                if in_posts[ai]:
                    continue
                if any(in_agents[vi] for vi, _slot in post_out[ai]):
                    chosen = ai
                    break
            if chosen < 0:
                break
            in_posts[chosen] = 1
            post_list.append(chosen)
            for vi, arc_slot in post_out[chosen]:
                if resid[arc_slot] == 0 and not in_agents[vi]:
                    in_agents[vi] = 1
                    agent_list.append(vi)

        if trace is not None:
            table = {posts[ai]: tab[ai] for ai in range(m)}
            network = _assemble_network(instance, table, tops)
            flow = _materialize_flow(network, tab, resid, agent_arcs, sink_base, n)
            obstruction = Obstruction(
                posts=tuple(posts[ai] for ai in post_list),
                agents=tuple(agents[vi] for vi in agent_list),
                seed=agents[seed_vi],
            )
            invalidated = tuple((posts[ai], tab[ai]) for ai in sorted(post_list))
            table_after = dict(table)
            for ai in sorted(post_list):
                table_after[posts[ai]] += 1
            trace.append(
                IterationRecord(
                    index=z,
                    table_before=table,
                    table_after=table_after,
                    network=network,
                    flow=flow,
                    flow_value=value,
                    obstruction=obstruction,
                    invalidated=invalidated,
                )
            )
        for ai in post_list:
            tab[ai] += 1
            total_tab += 1
    return NoEmptySolve(None, tuple(trace) if trace is not None else None)


def _materialize_flow(
    network: FlowNetwork,
    tab: list[int],
    resid: list[int],
    agent_arcs: list[tuple[int, int, int]],
    sink_base: int,
    n: int,
) -> Flow:
    """Flow values for the materialized network, read off the engine arrays."""
    values: dict[tuple[str, str], int] = {}
    m = len(tab)
    for ai in range(m):
        arc = network.arcs[ai]
        values[(arc.tail, arc.head)] = tab[ai] - resid[2 * ai]
    for offset, (_ai, _vi, arc_slot) in enumerate(agent_arcs):
        arc = network.arcs[m + offset]
        values[(arc.tail, arc.head)] = 1 - resid[arc_slot]
    for vi in range(n):
        arc = network.arcs[m + len(agent_arcs) + vi]
        values[(arc.tail, arc.head)] = 1 - resid[sink_base + 2 * vi]
    value = sum(1 - resid[sink_base + 2 * vi] for vi in range(n))
    return Flow(values, value)


def solve_cp(instance: Instance, keep_trace: bool = False) -> CpSolve:
    """Decide whether a competitive assignment exists, and construct one.

    Tries every admissible number of empty posts in increasing order, each
    time padding the instance and running the no-empty-post solver; the first
    success is projected back to the original instance.  Returns a certified
    no when every padding fails.
    """
    n, m = instance.n, instance.m
    attempts: list[KAttempt] | None = [] if keep_trace else None
    for k in range(max(0, m - n), m):
        extension = extend_instance(instance, k)
        result = solve_cp_no_empty(extension.inner, keep_trace)
        if attempts is not None:
            attempts.append(KAttempt(k, extension, result))
        if result.found:
            restricted = restrict_assignment(extension, result.assignment)
            return CpSolve(
                assignment=restricted,
                empty_posts=k,
                attempts=tuple(attempts) if attempts is not None else None,
            )
    return CpSolve(
        assignment=None,
        empty_posts=None,
        attempts=tuple(attempts) if attempts is not None else None,
    )
