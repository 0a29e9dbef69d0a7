import random

import pytest

from congassign import (
    RandomSpec,
    gen_random,
    make_x3c,
    parse_assignment,
    parse_instance,
)

# Two posts, three agents; one competitive assignment exists.
EX1_TEXT = """\
posts a1 a2
agent v1 : a1@1 > a2@1 = a1@2
agent v2 : a1@1 = a2@1 > a1@2
agent v3 : a1@1 > a1@2 > a2@1
"""

# Two posts, two identical agents; envy-free exists, competitive does not.
EX2_TEXT = """\
posts a1 a2
agent v1 : a1@1 > a2@1 > a2@2
agent v2 : a1@1 > a2@1 > a2@2
"""


@pytest.fixture
def ex1():
    return parse_instance(EX1_TEXT)


@pytest.fixture
def ex2():
    return parse_instance(EX2_TEXT)


@pytest.fixture
def pi1(ex1):
    return parse_assignment("assign a1 : v2 v3\nassign a2 : v1\n", ex1)


@pytest.fixture
def pi2(ex1):
    return parse_assignment("assign a1 : v1 v3\nassign a2 : v2\n", ex1)


def random_instances(count, max_agents, max_posts, seed, ties=(0.0, 0.25, 0.5, 0.9)):
    """Seeded stream of valid random instances for property sweeps."""
    rng = random.Random(seed)
    for _ in range(count):
        spec = RandomSpec(
            agents=rng.randint(1, max_agents),
            posts=rng.randint(1, max_posts),
            seed=rng.randrange(2**62),
            tie_prob=rng.choice(ties),
        )
        yield gen_random(spec)


@pytest.fixture
def instances():
    return random_instances


# Six elements, six pairwise-intersecting triples: strict, but no two
# disjoint sets exist, so no exact cover.
X3C_NO_INSTANCE = make_x3c(
    [f"u{i}" for i in range(1, 7)],
    [
        ("S1", ("u1", "u2", "u3")),
        ("S2", ("u1", "u2", "u4")),
        ("S3", ("u3", "u4", "u5")),
        ("S4", ("u3", "u4", "u6")),
        ("S5", ("u1", "u5", "u6")),
        ("S6", ("u2", "u5", "u6")),
    ],
)

X3C_YES_INSTANCE = make_x3c(
    ["u1", "u2", "u3"],
    [("S1", ("u1", "u2", "u3")), ("S2", ("u1", "u2", "u3")), ("S3", ("u1", "u2", "u3"))],
)
