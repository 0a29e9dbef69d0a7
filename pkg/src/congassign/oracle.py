"""Exact desk-scale existence deciders for NS/EF/CP assignments.

Whether an assignment satisfies any of the three concepts depends only on
each agent's own post and the congestion profile.  The oracle therefore
enumerates congestion profiles (post counts bounded by the largest listed
congestion of any agent, lexicographic order) and, per profile, computes the
posts each agent may sit on without violating the concept; filling every post
to its exact count then becomes a degree-constrained flow problem.  Agents
with identical preference lists are interchangeable, so they are grouped and
routed through one network node per group.

This is exponential in the number of posts but polynomial in the number of
agents, which is what makes it usable as ground truth for instances with few
posts and many agents.  A brute-force enumerator over all owner mappings
cross-checks the profile oracle at tiny scale.
"""

from __future__ import annotations

from itertools import product
from typing import Iterator, Mapping

from .errors import ResourceGuardError
from .flow import Arc, FlowNetwork, max_flow
from .model import (
    CONCEPTS,
    CP,
    EF,
    NS,
    UNLISTED_RANK,
    Assignment,
    CongestionProfile,
    Instance,
    fresh_name,
    satisfies,
)

#: Largest number of profiles the exact solver will scan.
PROFILE_GUARD = 10**6

#: Largest number of owner mappings the brute-force enumerator will scan.
BRUTE_FORCE_GUARD = 10**7


def _caps(instance: Instance) -> tuple[int, ...]:
    return tuple(
        max(instance.maxcong_by_ix[vi][ai] for vi in range(instance.n))
        for ai in range(instance.m)
    )


def _profile_count(caps: tuple[int, ...], total: int, minimum: int) -> int:
    ways = [0] * (total + 1)
    ways[0] = 1
    for cap in caps:
        nxt = [0] * (total + 1)
        for r in range(total + 1):
            w = ways[r]
            if not w:
                continue
            hi = min(cap, total - r)
            for v in range(minimum, hi + 1):
                nxt[r + v] += w
        ways = nxt
    return ways[total]


def _profile_tuples(
    caps: tuple[int, ...], total: int, minimum: int
) -> Iterator[tuple[int, ...]]:
    m = len(caps)
    suffix_cap = [0] * (m + 1)
    for i in reversed(range(m)):
        suffix_cap[i] = suffix_cap[i + 1] + caps[i]
    current = [0] * m

    def rec(i: int, remaining: int) -> Iterator[tuple[int, ...]]:
        if i == m:
            if remaining == 0:
                yield tuple(current)
            return
        tail = m - i - 1
        lo = max(minimum, remaining - suffix_cap[i + 1])
        hi = min(caps[i], remaining - minimum * tail)
        for v in range(lo, hi + 1):
            current[i] = v
            yield from rec(i + 1, remaining - v)

    return rec(0, total)


def enumerate_profiles(
    instance: Instance, require_nonempty: bool = False
) -> Iterator[CongestionProfile]:
    """All congestion profiles summing to the agent count, lexicographically.

    Per-post counts are capped by the largest congestion any agent lists for
    the post.  With ``require_nonempty`` every post must hold at least one
    agent.
    """
    caps = _caps(instance)
    minimum = 1 if require_nonempty else 0
    for sizes in _profile_tuples(caps, instance.n, minimum):
        yield CongestionProfile(dict(zip(instance.posts, sizes)))


def _pref_classes(instance: Instance) -> list[list[int]]:
    """Agent indices grouped by identical preference lists, in first-agent order."""
    groups: dict[tuple, list[int]] = {}
    for vi, v in enumerate(instance.agents):
        groups.setdefault(instance.prefs[v], []).append(vi)
    return list(groups.values())


def _class_allowed(
    instance: Instance, rep_ix: int, sizes: tuple[int, ...], concept: str
) -> list[int]:
    """Posts an agent of this preference class may occupy under the profile."""
    rank = instance.rank_by_ix[rep_ix]
    m = len(sizes)
    if concept == NS:
        dev = [rank.get((bi, sizes[bi] + 1), UNLISTED_RANK) for bi in range(m)]
        min1 = min(dev)
        count1 = dev.count(min1)
        min2 = min((r for r in dev if r != min1), default=UNLISTED_RANK)
        allowed = []
        for ai in range(m):
            if sizes[ai] == 0:
                continue
            own = rank.get((ai, sizes[ai]), UNLISTED_RANK)
            if own >= UNLISTED_RANK:
                continue
            bound = min1 if (dev[ai] > min1 or count1 > 1) else min2
            if own <= bound:
                allowed.append(ai)
        return allowed

    best_occupied = UNLISTED_RANK
    for bi in range(m):
        if sizes[bi]:
            r = rank.get((bi, sizes[bi]), UNLISTED_RANK)
            if r < best_occupied:
                best_occupied = r
    if best_occupied >= UNLISTED_RANK:
        return []
    if concept == CP:
        for bi in range(m):
            if sizes[bi] == 0 and rank.get((bi, 1), UNLISTED_RANK) < best_occupied:
                return []
    return [
        ai
        for ai in range(m)
        if sizes[ai] and rank.get((ai, sizes[ai]), UNLISTED_RANK) == best_occupied
    ]


def _fill_profile(
    instance: Instance,
    classes: list[list[int]],
    sizes: tuple[int, ...],
    concept: str,
) -> dict[str, str] | None:
    """Owner mapping realizing the profile under the concept, or None."""
    allowed_by_class = []
    for members in classes:
        allowed = _class_allowed(instance, members[0], sizes, concept)
        if not allowed:
            return None
        allowed_by_class.append(allowed)

    demand = [0] * instance.m
    for allowed, members in zip(allowed_by_class, classes):
        for ai in allowed:
            demand[ai] += len(members)
    if any(sizes[ai] > demand[ai] for ai in range(instance.m)):
        return None

    occupied = [ai for ai in range(instance.m) if sizes[ai]]
    taken = set(instance.posts) | set(instance.agents)
    source = fresh_name("s", taken)
    sink = fresh_name("t", taken | {source})
    class_nodes = [fresh_name(f"g{ci}", taken) for ci in range(len(classes))]
    arcs = [
        Arc(source, class_nodes[ci], len(members))
        for ci, members in enumerate(classes)
    ]
    for ci, allowed in enumerate(allowed_by_class):
        size = len(classes[ci])
        arcs.extend(Arc(class_nodes[ci], instance.posts[ai], size) for ai in allowed)
    arcs.extend(Arc(instance.posts[ai], sink, sizes[ai]) for ai in occupied)
    network = FlowNetwork(
        source=source,
        sink=sink,
        left=tuple(class_nodes),
        right=tuple(instance.posts[ai] for ai in occupied),
        arcs=tuple(arcs),
    )
    flow = max_flow(network)
    if flow.value != instance.n:
        return None

    owner: dict[str, str] = {}
    for ci, members in enumerate(classes):
        cursor = 0
        for ai in allowed_by_class[ci]:
            units = flow.values.get((class_nodes[ci], instance.posts[ai]), 0)
            for _ in range(units):
                owner[instance.agents[members[cursor]]] = instance.posts[ai]
                cursor += 1
    return owner


def feasible_with_profile(
    instance: Instance, profile, concept: str
) -> Assignment | None:
    """A concept-satisfying assignment with the given congestion profile, or None.

    ``profile`` maps posts to counts (missing posts count zero) and must sum
    to the number of agents.  Sound and complete for the profile: a witness
    is returned exactly when one with these counts exists, because concept
    satisfaction depends only on each agent's own post and the counts.
    """
    if concept not in CONCEPTS:
        raise ValueError(f"unknown concept {concept!r}")
    mapping: Mapping[str, int] = profile.sizes if isinstance(profile, CongestionProfile) else profile
    for post in mapping:
        if post not in instance.post_index:
            raise ValueError(f"unknown post {post!r} in profile")
    sizes = tuple(int(mapping.get(a, 0)) for a in instance.posts)
    if any(s < 0 for s in sizes):
        raise ValueError("profile counts must be non-negative")
    if sum(sizes) != instance.n:
        raise ValueError(
            f"profile sums to {sum(sizes)}, expected {instance.n}"
        )
    owner = _fill_profile(instance, _pref_classes(instance), sizes, concept)
    return None if owner is None else Assignment.from_owner(instance, owner)


def solve_exact(
    instance: Instance, concept: str, require_nonempty: bool = False
) -> Assignment | None:
    """Decide concept existence exactly by scanning congestion profiles.

    Returns the witness of the lexicographically first feasible profile, or
    None.  Raises :class:`ResourceGuardError` when the instance admits more
    than ``PROFILE_GUARD`` profiles.
    """
    if concept not in CONCEPTS:
        raise ValueError(f"unknown concept {concept!r}")
    caps = _caps(instance)
    minimum = 1 if require_nonempty else 0
    count = _profile_count(caps, instance.n, minimum)
    if count > PROFILE_GUARD:
        raise ResourceGuardError(
            f"{count} profiles exceed the guard of {PROFILE_GUARD}"
        )
    classes = _pref_classes(instance)
    for sizes in _profile_tuples(caps, instance.n, minimum):
        owner = _fill_profile(instance, classes, sizes, concept)
        if owner is not None:
            return Assignment.from_owner(instance, owner)
    return None


def enumerate_all_assignments(
    instance: Instance, concept: str
) -> tuple[int, Assignment | None]:
    """Count concept-satisfying assignments by brute force over owner maps.

    Returns the count and the first witness in lexicographic owner order.
    Raises :class:`ResourceGuardError` when ``m ** n`` exceeds the guard.
    """
    if concept not in CONCEPTS:
        raise ValueError(f"unknown concept {concept!r}")
    n, m = instance.n, instance.m
    if m**n > BRUTE_FORCE_GUARD:
        raise ResourceGuardError(
            f"{m}**{n} owner mappings exceed the guard of {BRUTE_FORCE_GUARD}"
        )
    count = 0
    witness: Assignment | None = None
    for owner_ix in product(range(m), repeat=n):
        if satisfies(instance, owner_ix, concept):
            count += 1
            if witness is None:
                witness = Assignment.from_owner(
                    instance,
                    {instance.agents[vi]: instance.posts[ai] for vi, ai in enumerate(owner_ix)},
                )
    return count, witness
