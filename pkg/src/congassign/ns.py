"""Nash-stable assignment construction.

A Nash-stable assignment always exists and is built constructively: agents
enter one at a time in input order, each taking a best response against the
current placement, after which agents with a strictly improving deviation
move (best response, lowest agent index first) until nobody gains.  Because
only the post that just gained an agent can make its occupants unhappy, the
settling phase tracks that single post; a final sweep re-verifies the whole
placement before returning.

A step budget of ``4 * n^2 * m`` converts any unexpected cycling into a loud
failure instead of a hang; the dynamics provably settles long before that.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ResourceGuardError
from .model import (
    UNLISTED_RANK,
    Assignment,
    Instance,
    Situation,
)


@dataclass(frozen=True)
class Move:
    """One placement or deviation: ``source`` is None for an entering agent."""

    agent: str
    source: str | None
    target: str
    before: Situation | None
    after: Situation


@dataclass(frozen=True)
class NsRun:
    assignment: Assignment
    moves: tuple[Move, ...]
    steps: int


def _best_response_ix(
    instance: Instance, sizes: list[int], current: int, agent_ix: int
) -> int:
    """Best-response post index; ties go to the lowest post index.

    ``current`` is the agent's post index or -1 when unassigned.  An assigned
    agent keeps its post unless some target is strictly better.
    """
    rank = instance.rank_by_ix[agent_ix]
    if current >= 0:
        best_rank = rank.get((current, sizes[current]), UNLISTED_RANK)
        best_post = current
    else:
        best_rank = UNLISTED_RANK + 1
        best_post = -1
    for bi in range(instance.m):
        if bi == current:
            continue
        r = rank.get((bi, sizes[bi] + 1), UNLISTED_RANK)
        if r < best_rank:
            best_rank = r
            best_post = bi
    return best_post


def best_response(instance: Instance, placement, agent: str) -> str:
    """The post an agent would pick against a (possibly partial) placement.

    ``placement`` maps agents to posts (an :class:`Assignment` works too).
    The agent evaluates staying at its current post at its current congestion
    against joining each other post with itself counted in; it moves only for
    a strict improvement, breaking ties by lowest post index.
    """
    owner = placement.owner if isinstance(placement, Assignment) else dict(placement)
    if agent not in instance.agent_index:
        raise KeyError(f"unknown agent {agent!r}")
    sizes = [0] * instance.m
    for v, post in owner.items():
        if v not in instance.agent_index:
            raise KeyError(f"unknown agent {v!r} in placement")
        if post not in instance.post_index:
            raise KeyError(f"unknown post {post!r} in placement")
        sizes[instance.post_index[post]] += 1
    current = instance.post_index[owner[agent]] if agent in owner else -1
    return instance.posts[_best_response_ix(instance, sizes, current, instance.agent_index[agent])]


def ns_run(instance: Instance) -> NsRun:
    """Run the insertion dynamics and return the assignment with its move log."""
    n, m = instance.n, instance.m
    posts = instance.posts
    agents = instance.agents
    owner_ix = [-1] * n
    sizes = [0] * m
    budget = 4 * n * n * m
    steps = 0
    moves: list[Move] = []

    def deviate(vi: int, target: int) -> None:
        nonlocal steps
        old = owner_ix[vi]
        before = (posts[old], sizes[old])
        sizes[old] -= 1
        owner_ix[vi] = target
        sizes[target] += 1
        steps += 1
        if steps > budget:
            raise ResourceGuardError(
                f"step budget {budget} exceeded; the dynamics should have settled"
            )
        moves.append(Move(agents[vi], posts[old], posts[target], before, (posts[target], sizes[target])))

    def first_improver(upto: int, only_post: int | None) -> tuple[int, int] | None:
        for ui in range(upto):
            if only_post is not None and owner_ix[ui] != only_post:
                continue
            bi = _best_response_ix(instance, sizes, owner_ix[ui], ui)
            if bi != owner_ix[ui]:
                return ui, bi
        return None

    for vi in range(n):
        target = _best_response_ix(instance, sizes, -1, vi)
        owner_ix[vi] = target
        sizes[target] += 1
        steps += 1
        moves.append(Move(agents[vi], None, posts[target], None, (posts[target], sizes[target])))
        # Only occupants of the post that just grew can want to leave.
        grown = target
        while True:
            found = first_improver(vi + 1, grown)
            if found is None:
                break
            ui, bi = found
            deviate(ui, bi)
            grown = bi

    # Full sweep: settles anything the single-post tracking might have missed.
    while True:
        found = first_improver(n, None)
        if found is None:
            break
        deviate(*found)

    assignment = Assignment.from_owner(
        instance, {agents[vi]: posts[owner_ix[vi]] for vi in range(n)}
    )
    return NsRun(assignment, tuple(moves), steps)


def ns_solve(instance: Instance) -> Assignment:
    """Construct a Nash-stable assignment (one always exists)."""
    return ns_run(instance).assignment
