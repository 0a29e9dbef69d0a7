"""Seeded random instance generation.

Each agent draws its per-post maximum congestions as a uniform random
composition of the agent count into one non-negative part per post, so the
listed situation counts always sum correctly.  The situations are then laid
out in a uniformly random order compatible with the fixed-post chains
(higher congestion never before lower), and adjacent situations are merged
into shared tiers with the configured probability, skipping merges that
would put one post twice into a tier.  Everything is driven by one seeded
generator, so equal specs produce equal instances.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .model import Instance


@dataclass(frozen=True)
class RandomSpec:
    agents: int
    posts: int
    seed: int
    tie_prob: float = 0.0

    def __post_init__(self):
        if self.agents < 1:
            raise ValueError("agents must be at least 1")
        if self.posts < 1:
            raise ValueError("posts must be at least 1")
        if not 0.0 <= self.tie_prob <= 1.0:
            raise ValueError("tie_prob must lie in [0, 1]")


def _composition(rng: random.Random, total: int, parts: int) -> list[int]:
    """Uniform composition of ``total`` into ``parts`` non-negative parts."""
    if parts == 1:
        return [total]
    bars = sorted(rng.sample(range(total + parts - 1), parts - 1))
    result = []
    previous = -1
    for bar in bars:
        result.append(bar - previous - 1)
        previous = bar
    result.append(total + parts - 2 - previous)
    return result


def gen_random(spec: RandomSpec) -> Instance:
    """Generate a valid instance; deterministic for a fixed spec."""
    rng = random.Random(spec.seed)
    n, m = spec.agents, spec.posts
    posts = tuple(f"a{j}" for j in range(1, m + 1))
    agents = tuple(f"v{i}" for i in range(1, n + 1))
    prefs: dict[str, list[tuple]] = {}
    for v in agents:
        maxcong = _composition(rng, n, m)
        available = [(j, 1) for j in range(m) if maxcong[j] >= 1]
        ordered: list[tuple[int, int]] = []
        while available:
            pick = rng.randrange(len(available))
            j, d = available.pop(pick)
            ordered.append((j, d))
            if d + 1 <= maxcong[j]:
                available.append((j, d + 1))
        tiers: list[list[tuple[str, int]]] = [[(posts[ordered[0][0]], ordered[0][1])]]
        tier_posts = {ordered[0][0]}
        for j, d in ordered[1:]:
            merge = rng.random() < spec.tie_prob
            if merge and j not in tier_posts:
                tiers[-1].append((posts[j], d))
                tier_posts.add(j)
            else:
                tiers.append([(posts[j], d)])
                tier_posts = {j}
        prefs[v] = [tuple(tier) for tier in tiers]
    return Instance(posts, agents, prefs)
