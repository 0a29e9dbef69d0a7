"""Core model for congested assignment problems.

An instance assigns agents to posts, where agents care both about the post
they land on and about how crowded it is.  A *situation* is a pair
``(post, congestion)``; each agent ranks situations by a weak order (a
sequence of indifference tiers) that is strictly decreasing in congestion for
any fixed post.  Agent ``v`` lists post ``a`` at congestions
``1 .. max_congestion(v, a)``, and the listed situation counts of each agent
sum to the number of agents.

Situations missing from an agent's list form an implicit bottom tier:
strictly worse than every listed situation, mutually indifferent.  An agent
that ends up *on* an unlisted situation (its post is more crowded than its
list covers) is reported by the checkers as a dedicated "overflow" violation.

Three solution concepts are supported:

* Nash stability (NS): no agent strictly gains by moving to another post,
  counting itself in the target congestion.
* Envy-freeness (EF): no agent strictly prefers the situation of another
  agent.
* Competitiveness (CP): envy-freeness plus no agent strictly prefers any
  empty post at congestion one.

All objects are immutable after construction and every function here is
pure, so concurrent use on shared instances is safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

Situation = tuple[str, int]

NS = "NS"
EF = "EF"
CP = "CP"
CONCEPTS = (NS, EF, CP)

PREFER1 = "prefer1"
PREFER2 = "prefer2"
INDIFFERENT = "indifferent"

#: Rank assigned to situations outside an agent's list (the bottom tier).
UNLISTED_RANK = 1 << 30


def fresh_name(base: str, taken: Iterable[str]) -> str:
    """Return ``base``, prefixed with underscores until it avoids ``taken``."""
    taken = set(taken)
    name = base
    while name in taken:
        name = "_" + name
    return name


@dataclass(frozen=True)
class Witness:
    """One violation record produced by a checker.

    ``kind`` identifies the violation: ``"deviation"`` (profitable move,
    Nash stability), ``"envy"`` (preferring an occupied post), ``"empty-post"``
    (preferring an empty post at congestion one), ``"overflow"`` (agent sits
    beyond its listed congestions), or one of the instance-validation kinds.
    """

    kind: str
    agent: str = ""
    post: str | None = None
    envied: str | None = None
    current: Situation | None = None
    preferred: Situation | None = None
    note: str = ""

    def describe(self) -> str:
        if self.kind in ("deviation", "envy", "empty-post"):
            p, pd = self.preferred
            c, cd = self.current
            return f"{self.agent} prefers ({p},{pd}) to ({c},{cd})"
        if self.kind == "overflow":
            c, cd = self.current
            return f"{self.agent} sits at ({c},{cd}) beyond its listed congestions"
        return self.note or self.kind


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check: ``holds`` is true iff ``witnesses`` is empty."""

    holds: bool
    witnesses: tuple[Witness, ...] = ()

    @staticmethod
    def from_witnesses(witnesses: Iterable[Witness]) -> "Verdict":
        ws = tuple(witnesses)
        return Verdict(not ws, ws)


class Instance:
    """A congested assignment instance.

    Parameters are the ordered post identifiers, the ordered agent
    identifiers, and one preference list per agent: a sequence of tiers, each
    tier an iterable of ``(post, congestion)`` situations.  Tiers are stored
    in canonical form (situations sorted by post index, then congestion).

    Construction performs structural checks only (known identifiers, positive
    congestions, one list per agent); the semantic invariants of a
    well-formed instance are reported by :func:`validate_instance`.
    """

    __slots__ = (
        "posts",
        "agents",
        "prefs",
        "post_index",
        "agent_index",
        "tiers_by_ix",
        "rank_by_ix",
        "maxcong_by_ix",
    )

    def __init__(
        self,
        posts: Sequence[str],
        agents: Sequence[str],
        prefs: Mapping[str, Sequence[Iterable[Situation]]],
    ):
        posts = tuple(posts)
        agents = tuple(agents)
        if not posts:
            raise ValueError("an instance needs at least one post")
        if not agents:
            raise ValueError("an instance needs at least one agent")
        if len(set(posts)) != len(posts):
            raise ValueError("duplicate post identifier")
        if len(set(agents)) != len(agents):
            raise ValueError("duplicate agent identifier")
        self.posts = posts
        self.agents = agents
        self.post_index = {a: i for i, a in enumerate(posts)}
        self.agent_index = {v: i for i, v in enumerate(agents)}

        unknown = set(prefs) - set(agents)
        if unknown:
            raise ValueError(f"preference list for unknown agent {sorted(unknown)[0]!r}")

        m = len(posts)
        post_index = self.post_index
        canonical: dict[str, tuple[tuple[Situation, ...], ...]] = {}
        tiers_by_ix = []
        rank_by_ix = []
        maxcong_by_ix = []
        for v in agents:
            if v not in prefs:
                raise ValueError(f"missing preference list for agent {v!r}")
            row = [0] * m
            rank: dict[tuple[int, int], int] = {}
            canon_tiers = []
            ix_tiers = []
            for t, tier in enumerate(prefs[v]):
                entries = []
                for post, cong in tier:
                    ai = post_index.get(post)
                    if ai is None:
                        raise ValueError(f"agent {v!r} ranks unknown post {post!r}")
                    if type(cong) is not int or cong < 1:
                        raise ValueError(
                            f"agent {v!r}: congestion must be a positive integer, got {cong!r}"
                        )
                    entries.append((ai, cong, post))
                if len(entries) == 1:
                    ai, cong, post = entries[0]
                    canon_tiers.append(((post, cong),))
                    ix_tiers.append(((ai, cong),))
                    if (ai, cong) not in rank:
                        rank[(ai, cong)] = t
                    if cong > row[ai]:
                        row[ai] = cong
                    continue
                entries.sort()
                canon_tiers.append(tuple((post, cong) for _ai, cong, post in entries))
                ix_tiers.append(tuple((ai, cong) for ai, cong, _post in entries))
                for ai, cong, _post in entries:
                    if (ai, cong) not in rank:
                        rank[(ai, cong)] = t
                    if cong > row[ai]:
                        row[ai] = cong
            canonical[v] = tuple(canon_tiers)
            tiers_by_ix.append(tuple(ix_tiers))
            rank_by_ix.append(rank)
            maxcong_by_ix.append(tuple(row))
        self.prefs = canonical
        self.tiers_by_ix = tuple(tiers_by_ix)
        self.rank_by_ix = tuple(rank_by_ix)
        self.maxcong_by_ix = tuple(maxcong_by_ix)

    @classmethod
    def _from_parts(
        cls, posts, agents, prefs, tiers_by_ix, rank_by_ix, maxcong_by_ix
    ) -> "Instance":
        """Assemble an instance from precomputed canonical structures.

        Internal bypass for builders (instance extension) that already hold
        the canonical tier/rank/maxcong form; the caller guarantees
        consistency.
        """
        obj = cls.__new__(cls)
        obj.posts = tuple(posts)
        obj.agents = tuple(agents)
        obj.post_index = {a: i for i, a in enumerate(obj.posts)}
        obj.agent_index = {v: i for i, v in enumerate(obj.agents)}
        obj.prefs = dict(prefs)
        obj.tiers_by_ix = tuple(tiers_by_ix)
        obj.rank_by_ix = tuple(rank_by_ix)
        obj.maxcong_by_ix = tuple(maxcong_by_ix)
        return obj

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def m(self) -> int:
        return len(self.posts)

    def max_congestion(self, agent: str, post: str) -> int:
        """Largest listed congestion of ``agent`` for ``post`` (0 if absent)."""
        try:
            vi = self.agent_index[agent]
        except KeyError:
            raise KeyError(f"unknown agent {agent!r}") from None
        try:
            ai = self.post_index[post]
        except KeyError:
            raise KeyError(f"unknown post {post!r}") from None
        return self.maxcong_by_ix[vi][ai]

    def situation_rank(self, agent: str, situation: Situation) -> int:
        """Tier index of ``situation`` for ``agent``; UNLISTED_RANK if absent."""
        post, cong = situation
        try:
            vi = self.agent_index[agent]
        except KeyError:
            raise KeyError(f"unknown agent {agent!r}") from None
        try:
            ai = self.post_index[post]
        except KeyError:
            raise KeyError(f"unknown post {post!r}") from None
        if not isinstance(cong, int) or isinstance(cong, bool) or cong < 1:
            raise ValueError(f"congestion must be a positive integer, got {cong!r}")
        return self.rank_by_ix[vi].get((ai, cong), UNLISTED_RANK)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.posts == other.posts
            and self.agents == other.agents
            and self.prefs == other.prefs
        )

    def __hash__(self) -> int:
        return hash((self.posts, self.agents, tuple(self.prefs.items())))

    def __repr__(self) -> str:
        return f"Instance(posts={len(self.posts)}, agents={len(self.agents)})"


class Assignment:
    """A partition of agents over posts.

    ``blocks`` maps every post to the (possibly empty) frozenset of agents on
    it; ``owner`` maps every agent to its post.  Use :meth:`from_blocks` or
    :meth:`from_owner` to build an assignment validated against an instance.
    """

    __slots__ = ("blocks", "owner")

    def __init__(self, blocks: Mapping[str, Iterable[str]]):
        normalized: dict[str, frozenset[str]] = {}
        owner: dict[str, str] = {}
        for post, members in blocks.items():
            block = frozenset(members)
            normalized[post] = block
            for agent in sorted(block):
                if agent in owner:
                    raise ValueError(f"agent {agent!r} assigned to more than one post")
                owner[agent] = post
        self.blocks = normalized
        self.owner = owner

    @classmethod
    def from_blocks(
        cls, instance: Instance, blocks: Mapping[str, Iterable[str]]
    ) -> "Assignment":
        for post in blocks:
            if post not in instance.post_index:
                raise ValueError(f"unknown post {post!r}")
        full = {post: frozenset(blocks.get(post, ())) for post in instance.posts}
        assignment = cls(full)
        missing = set(instance.agents) - set(assignment.owner)
        if missing:
            raise ValueError(f"agent {sorted(missing)[0]!r} is unassigned")
        extra = set(assignment.owner) - set(instance.agents)
        if extra:
            raise ValueError(f"unknown agent {sorted(extra)[0]!r}")
        return assignment

    @classmethod
    def from_owner(cls, instance: Instance, owner: Mapping[str, str]) -> "Assignment":
        blocks: dict[str, set[str]] = {post: set() for post in instance.posts}
        for agent, post in owner.items():
            if agent not in instance.agent_index:
                raise ValueError(f"unknown agent {agent!r}")
            if post not in blocks:
                raise ValueError(f"unknown post {post!r}")
            blocks[post].add(agent)
        missing = set(instance.agents) - set(owner)
        if missing:
            raise ValueError(f"agent {sorted(missing)[0]!r} is unassigned")
        return cls(blocks)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Assignment):
            return NotImplemented
        return self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash(frozenset(self.blocks.items()))

    def __repr__(self) -> str:
        parts = ", ".join(
            f"{post}:{{{','.join(sorted(block))}}}"
            for post, block in self.blocks.items()
            if block
        )
        return f"Assignment({parts})"


@dataclass(frozen=True)
class CongestionProfile:
    """Per-post congestion counts of an assignment."""

    sizes: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.sizes.values())

    def as_tuple(self, posts: Sequence[str]) -> tuple[int, ...]:
        return tuple(self.sizes[a] for a in posts)


def congestion_profile(assignment: Assignment) -> CongestionProfile:
    """The congestion profile of an assignment (empty posts included)."""
    return CongestionProfile({post: len(block) for post, block in assignment.blocks.items()})


def max_congestion(instance: Instance, agent: str, post: str) -> int:
    """Largest congestion with which ``post`` appears in ``agent``'s list.

    Returns 0 when the post never appears.  Raises ``KeyError`` for unknown
    identifiers.
    """
    return instance.max_congestion(agent, post)


def compare_tuples(
    instance: Instance, agent: str, first: Situation, second: Situation
) -> str:
    """Compare two situations in an agent's weak order.

    Returns ``"prefer1"``, ``"prefer2"`` or ``"indifferent"``.  Situations
    outside the agent's list sit in a shared bottom tier: strictly worse than
    everything listed and indifferent to each other.
    """
    r1 = instance.situation_rank(agent, first)
    r2 = instance.situation_rank(agent, second)
    if r1 < r2:
        return PREFER1
    if r2 < r1:
        return PREFER2
    return INDIFFERENT


def validate_instance(instance: Instance) -> Verdict:
    """Check the well-formedness invariants of an instance.

    A valid instance lists, per agent and post, the congestions
    ``1..max_congestion`` exactly once each, in strictly increasing tier
    position, with no tier holding one post twice, and with every agent
    listing at least as many situations as there are agents (the lower bound
    is what keeps the solvers from running out of acceptable situations;
    longer lists are harmless and do occur).  Violations are reported as
    witnesses, never raised.
    """
    witnesses: list[Witness] = []
    n = instance.n
    for v in instance.agents:
        tiers = instance.prefs[v]
        seen: dict[Situation, int] = {}
        per_post: dict[str, dict[int, int]] = {}
        for t, tier in enumerate(tiers):
            if not tier:
                witnesses.append(
                    Witness("empty-tier", agent=v, note=f"{v}: tier {t + 1} is empty")
                )
                continue
            posts_in_tier: set[str] = set()
            for post, cong in tier:
                if (post, cong) in seen:
                    witnesses.append(
                        Witness(
                            "duplicate-situation",
                            agent=v,
                            post=post,
                            current=(post, cong),
                            note=f"{v}: ({post},{cong}) listed more than once",
                        )
                    )
                else:
                    seen[(post, cong)] = t
                    per_post.setdefault(post, {})[cong] = t
                if post in posts_in_tier:
                    witnesses.append(
                        Witness(
                            "tier-post-clash",
                            agent=v,
                            post=post,
                            current=(post, cong),
                            note=f"{v}: tier {t + 1} holds post {post} twice",
                        )
                    )
                posts_in_tier.add(post)
        for post, congestions in per_post.items():
            top = max(congestions)
            for d in range(1, top + 1):
                if d not in congestions:
                    witnesses.append(
                        Witness(
                            "congestion-gap",
                            agent=v,
                            post=post,
                            current=(post, d),
                            note=(
                                f"{v}: congestions for {post} are not contiguous,"
                                f" ({post},{d}) is missing"
                            ),
                        )
                    )
            ordered = sorted(congestions)
            for lo, hi in zip(ordered, ordered[1:]):
                if congestions[lo] >= congestions[hi]:
                    witnesses.append(
                        Witness(
                            "congestion-order",
                            agent=v,
                            post=post,
                            current=(post, hi),
                            note=(
                                f"{v}: ({post},{hi}) must sit strictly below"
                                f" ({post},{lo})"
                            ),
                        )
                    )
        listed = len(seen)
        if listed < n:
            witnesses.append(
                Witness(
                    "short-list",
                    agent=v,
                    note=f"{v}: lists {listed} situations, fewer than the {n} agents",
                )
            )
    return Verdict.from_witnesses(witnesses)


def _consistent(instance: Instance, assignment: Assignment) -> None:
    if set(assignment.owner) != set(instance.agents):
        raise ValueError("assignment does not cover exactly the instance's agents")
    for post in assignment.blocks:
        if post not in instance.post_index:
            raise ValueError(f"assignment uses unknown post {post!r}")


def check(instance: Instance, assignment: Assignment, concept: str) -> Verdict:
    """Check an assignment for Nash stability, envy-freeness or competitiveness.

    Every violating (agent, target) pair yields one witness, so the witness
    list is exhaustive and deterministic (agents in instance order, targets
    in post order).  An agent assigned beyond its listed congestions is
    reported with a dedicated "overflow" witness and fails every concept.
    """
    if concept not in CONCEPTS:
        raise ValueError(f"unknown concept {concept!r}")
    _consistent(instance, assignment)
    sizes = {post: len(assignment.blocks.get(post, frozenset())) for post in instance.posts}
    witnesses: list[Witness] = []
    for v in instance.agents:
        vi = instance.agent_index[v]
        rank = instance.rank_by_ix[vi]
        maxcong = instance.maxcong_by_ix[vi]
        a_star = assignment.owner[v]
        ai_star = instance.post_index[a_star]
        d_star = sizes[a_star]
        own = (a_star, d_star)
        own_rank = rank.get((ai_star, d_star), UNLISTED_RANK)
        if d_star > maxcong[ai_star]:
            witnesses.append(Witness("overflow", agent=v, post=a_star, current=own))
        for b in instance.posts:
            if b == a_star:
                continue
            bi = instance.post_index[b]
            d_b = sizes[b]
            if concept == NS:
                target = d_b + 1
                kind = "deviation"
            elif concept == EF:
                if d_b == 0:
                    continue
                target = d_b
                kind = "envy"
            else:
                target = max(d_b, 1)
                kind = "envy" if d_b else "empty-post"
            if rank.get((bi, target), UNLISTED_RANK) < own_rank:
                envied = None
                if kind == "envy":
                    envied = min(assignment.blocks[b], key=instance.agent_index.__getitem__)
                witnesses.append(
                    Witness(
                        kind,
                        agent=v,
                        post=b,
                        envied=envied,
                        current=own,
                        preferred=(b, target),
                    )
                )
    return Verdict.from_witnesses(witnesses)


def satisfies(instance: Instance, owner_ix: Sequence[int], concept: str) -> bool:
    """Fast witness-free concept check on an owner vector (post index per agent).

    Agrees with :func:`check` on the corresponding assignment; used by the
    brute-force enumerators.
    """
    m = instance.m
    sizes = [0] * m
    for ai in owner_ix:
        sizes[ai] += 1
    ns = concept == NS
    ef = concept == EF
    for vi, ai_star in enumerate(owner_ix):
        rank = instance.rank_by_ix[vi]
        d_star = sizes[ai_star]
        if d_star > instance.maxcong_by_ix[vi][ai_star]:
            return False
        own_rank = rank.get((ai_star, d_star), UNLISTED_RANK)
        for bi in range(m):
            if bi == ai_star:
                continue
            d_b = sizes[bi]
            if ns:
                target = d_b + 1
            elif ef:
                if d_b == 0:
                    continue
                target = d_b
            else:
                target = d_b if d_b else 1
            if rank.get((bi, target), UNLISTED_RANK) < own_rank:
                return False
    return True
