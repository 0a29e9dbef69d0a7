"""Exact cover by 3-sets, and its reduction to envy-free assignment existence.

An exact-cover instance has a universe of ``3n`` elements and ``m`` three
element subsets; a cover is a choice of pairwise disjoint subsets whose union
is the whole universe.  The reduction consumes the *strict* restriction where
every element occurs in exactly three subsets (forcing ``m = 3n``) and emits
a congested assignment instance that admits an envy-free assignment exactly
when a cover exists: one post per subset, an element agent per element that
only accepts its three containing subsets (at congestions one to three, tied
across subsets) before a long fallback chain, ``2m`` roamer agents that want
any subset post at congestion one or two, and ``2m`` sitter agents competing
for the fallback posts.  The roamers rule out subset posts holding one or two
element agents, the sitters rule out element agents fleeing to the fallback
post, and together they force every element agent onto a subset post in
blocks of exactly three.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ResourceGuardError
from .model import EF, Assignment, Instance, Verdict, Witness, check, fresh_name


@dataclass(frozen=True)
class X3CInstance:
    """A universe of elements plus identified 3-element subsets.

    ``sets`` holds ``(set_id, members)`` pairs; members are kept sorted by
    element index.
    """

    elements: tuple[str, ...]
    sets: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        if len(set(self.elements)) != len(self.elements):
            raise ValueError("duplicate element identifier")
        ids = [set_id for set_id, _ in self.sets]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate set identifier")
        known = set(self.elements)
        for set_id, members in self.sets:
            for e in members:
                if e not in known:
                    raise ValueError(f"set {set_id!r} mentions unknown element {e!r}")

    @property
    def set_ids(self) -> tuple[str, ...]:
        return tuple(set_id for set_id, _ in self.sets)


@dataclass(frozen=True)
class ExactCover:
    """Indices (and ids) of pairwise disjoint sets covering the universe."""

    indices: tuple[int, ...]
    ids: tuple[str, ...]


def make_x3c(elements, sets) -> X3CInstance:
    """Build an instance with members canonically sorted by element index."""
    elements = tuple(elements)
    order = {e: i for i, e in enumerate(elements)}
    canonical = tuple(
        (set_id, tuple(sorted(members, key=order.__getitem__)))
        for set_id, members in sets
    )
    return X3CInstance(elements, canonical)


def validate_x3c(x: X3CInstance, strict: bool = False) -> Verdict:
    """Check set sizes; under ``strict`` also the exactly-three-occurrences rule.

    Strict instances additionally need the universe size to be a multiple of
    three and as many sets as elements.
    """
    witnesses: list[Witness] = []
    for set_id, members in x.sets:
        if len(set(members)) != 3:
            witnesses.append(
                Witness(
                    "set-size",
                    note=f"set {set_id} has {len(set(members))} distinct elements, expected 3",
                )
            )
    if strict:
        if len(x.elements) % 3 != 0:
            witnesses.append(
                Witness(
                    "universe-size",
                    note=f"{len(x.elements)} elements is not a multiple of 3",
                )
            )
        occurrences = {e: 0 for e in x.elements}
        for _set_id, members in x.sets:
            for e in set(members):
                occurrences[e] += 1
        for e in x.elements:
            if occurrences[e] != 3:
                witnesses.append(
                    Witness(
                        "occurrence",
                        note=f"element {e} occurs in {occurrences[e]} sets, expected 3",
                    )
                )
        if len(x.sets) != len(x.elements):
            witnesses.append(
                Witness(
                    "set-count",
                    note=f"{len(x.sets)} sets for {len(x.elements)} elements, expected equality",
                )
            )
    return Verdict.from_witnesses(witnesses)


def reduce_x3c_to_ef(x: X3CInstance) -> Instance:
    """Emit the assignment instance whose envy-free solvability decides the cover.

    Requires strict validity.  Posts are the set ids plus two fallback posts;
    agents are the elements, ``2m`` roamers and ``2m`` sitters, with the list
    lengths arranged so every agent ranks exactly as many situations as there
    are agents.
    """
    verdict = validate_x3c(x, strict=True)
    if not verdict.holds:
        raise ValueError(
            "reduction needs a strict instance: " + verdict.witnesses[0].describe()
        )
    n_elements = len(x.elements)  # 3n in cover terms
    m = len(x.sets)
    total_agents = n_elements + 4 * m

    taken_posts = set(x.set_ids)
    fallback1 = fresh_name("b1", taken_posts)
    taken_posts.add(fallback1)
    fallback2 = fresh_name("b2", taken_posts)
    posts = (*x.set_ids, fallback1, fallback2)

    taken_agents = set(x.elements)
    roamers = []
    for z in range(1, 2 * m + 1):
        name = fresh_name(f"p{z}", taken_agents)
        taken_agents.add(name)
        roamers.append(name)
    sitters = []
    for z in range(1, 2 * m + 1):
        name = fresh_name(f"q{z}", taken_agents)
        taken_agents.add(name)
        sitters.append(name)
    agents = (*x.elements, *roamers, *sitters)

    containing: dict[str, list[str]] = {e: [] for e in x.elements}
    for set_id, members in x.sets:
        for e in set(members):
            containing[e].append(set_id)

    prefs: dict[str, list[tuple]] = {}
    element_chain = total_agents - 9
    for e in x.elements:
        own_posts = containing[e]
        tiers = [tuple((a, d) for a in own_posts) for d in (1, 2, 3)]
        tiers.extend(((fallback2, d),) for d in range(1, element_chain + 1))
        prefs[e] = tiers
    roamer_tiers = [
        tuple((a, 1) for a in x.set_ids),
        tuple((a, 2) for a in x.set_ids),
    ]
    roamer_tiers.extend(((fallback1, d),) for d in range(1, 2 * m + n_elements + 1))
    for p in roamers:
        prefs[p] = list(roamer_tiers)
    sitter_tiers = [((fallback2, d),) for d in range(1, 2 * m + 1)]
    sitter_tiers.extend(((fallback1, d),) for d in range(1, 2 * m + n_elements + 1))
    for q in sitters:
        prefs[q] = list(sitter_tiers)

    return Instance(posts, agents, prefs)


def exact_cover_exists(x: X3CInstance) -> ExactCover | None:
    """Brute-force search for an exact cover; first hit in lexicographic order.

    Works on any instance (strict or not).  Raises
    :class:`ResourceGuardError` beyond 20 sets.
    """
    if len(x.sets) > 20:
        raise ResourceGuardError(f"{len(x.sets)} sets exceed the brute-force guard of 20")
    universe = frozenset(x.elements)
    members = [frozenset(ms) for _sid, ms in x.sets]

    chosen: list[int] = []

    def search(start: int, covered: frozenset[str]) -> tuple[int, ...] | None:
        if covered == universe:
            return tuple(chosen)
        for j in range(start, len(members)):
            if covered & members[j]:
                continue
            chosen.append(j)
            found = search(j + 1, covered | members[j])
            if found is not None:
                return found
            chosen.pop()
        return None

    found = search(0, frozenset())
    if found is None:
        return None
    return ExactCover(found, tuple(x.set_ids[j] for j in found))


def cover_from_assignment(
    x: X3CInstance, reduced: Instance, assignment: Assignment
) -> ExactCover:
    """Extract the cover encoded by an envy-free assignment of the reduction.

    The cover is the set of subset posts holding element agents.  Raises
    ``ValueError`` when the assignment is not envy-free or does not have the
    shape envy-freeness forces (element agents on containing subset posts, in
    blocks of three, covering each element once).
    """
    verdict = check(reduced, assignment, EF)
    if not verdict.holds:
        raise ValueError(
            "assignment is not envy-free: " + verdict.witnesses[0].describe()
        )
    member_sets = {set_id: frozenset(ms) for set_id, ms in x.sets}
    index_of = {set_id: j for j, (set_id, _ms) in enumerate(x.sets)}
    covered: list[str] = []
    indices: set[int] = set()
    for e in x.elements:
        post = assignment.owner[e]
        if post not in member_sets or e not in member_sets[post]:
            raise ValueError(f"element agent {e} sits on {post}, not a containing subset post")
        indices.add(index_of[post])
        covered.append(e)
    for j in sorted(indices):
        set_id = x.sets[j][0]
        block = assignment.blocks[set_id] & set(x.elements)
        if block != member_sets[set_id]:
            raise ValueError(
                f"subset post {set_id} holds {sorted(block)}, expected all of {sorted(member_sets[set_id])}"
            )
    if len(covered) != len(x.elements):
        raise ValueError("some element is not covered")
    ordered = tuple(sorted(indices))
    return ExactCover(ordered, tuple(x.sets[j][0] for j in ordered))


def random_strict_x3c(cover_size: int, rng: random.Random) -> X3CInstance:
    """Sample a strict instance: ``3n`` elements, ``3n`` sets, three occurrences each.

    Element slots (three per element) are shuffled and chunked into sets;
    chunks with repeated elements are rejected and redrawn.
    """
    if cover_size < 1:
        raise ValueError("cover_size must be positive")
    n_elements = 3 * cover_size
    elements = tuple(f"u{i}" for i in range(1, n_elements + 1))
    while True:
        slots = [e for e in elements for _ in range(3)]
        rng.shuffle(slots)
        chunks = [slots[i : i + 3] for i in range(0, len(slots), 3)]
        if all(len(set(chunk)) == 3 for chunk in chunks):
            sets = [(f"S{j}", tuple(chunk)) for j, chunk in enumerate(chunks, start=1)]
            return make_x3c(elements, sets)
