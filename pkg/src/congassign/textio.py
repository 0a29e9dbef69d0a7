"""Line-oriented text formats for instances, assignments and exact-cover inputs.

Instance grammar (UTF-8, ``#`` starts a comment, blank lines ignored)::

    posts a1 a2
    agent v1 : a1@1 > a2@1 = a1@2

One ``posts`` line first, then one ``agent`` line per agent.  A preference
list is a ``>``-separated sequence of tiers, a tier an ``=``-separated
sequence of situations, a situation ``<post>@<congestion>`` with a positive
decimal congestion.

Assignment grammar: one ``assign <post> : <agent>...`` line per non-empty
post (omitted posts are empty).  Exact-cover grammar: ``elements <count>``
declaring a universe ``u1..u<count>``, then ``set <id> : <element>...``
lines.

Parsers report syntax problems with line and column; semantic validation of
parsed instances is a separate step (``validate_instance``).  Writers emit
canonical form: tiers in list order, situations within a tier sorted by post
index then congestion, so ``write(parse(text))`` is a fixed point.
"""

from __future__ import annotations

import re

from .model import Assignment, Instance
from .x3c import X3CInstance, make_x3c

_TOKEN = re.compile(r"\S+")
_SITUATION = re.compile(r"^(.*)@(\d+)$")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


def _lines(text: str):
    """Significant lines as (line_number, [(token, column), ...])."""
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]
        if tokens:
            yield number, tokens


def parse_instance(text: str) -> Instance:
    """Parse instance text; raises :class:`ParseError` on syntax problems."""
    posts: list[str] | None = None
    agents: list[str] = []
    prefs: dict[str, list[tuple]] = {}
    for number, tokens in _lines(text):
        keyword, column = tokens[0]
        if keyword == "posts":
            if posts is not None:
                raise ParseError("duplicate posts line", number, column)
            if len(tokens) < 2:
                raise ParseError("posts line needs at least one identifier", number, column)
            posts = []
            for token, col in tokens[1:]:
                if token in posts:
                    raise ParseError(f"duplicate post {token!r}", number, col)
                posts.append(token)
        elif keyword == "agent":
            if posts is None:
                raise ParseError("posts line must come before agents", number, column)
            if len(tokens) < 3 or tokens[2][0] != ":":
                raise ParseError("expected 'agent <id> : <preferences>'", number, column)
            name, name_col = tokens[1]
            if name in prefs:
                raise ParseError(f"duplicate agent {name!r}", number, name_col)
            tiers = _parse_tiers(tokens[3:], posts, number, column)
            agents.append(name)
            prefs[name] = tiers
        else:
            raise ParseError(f"unknown directive {keyword!r}", number, column)
    if posts is None:
        raise ParseError("missing posts line", 1, 1)
    if not agents:
        raise ParseError("no agents declared", 1, 1)
    return Instance(posts, agents, prefs)


def _parse_tiers(tokens, posts, number, column):
    if not tokens:
        raise ParseError("empty preference list", number, column)
    tiers: list[list[tuple[str, int]]] = []
    expect_situation = True
    current: list[tuple[str, int]] = []
    for token, col in tokens:
        if token in (">", "="):
            if expect_situation:
                raise ParseError(f"unexpected {token!r}", number, col)
            if token == ">":
                tiers.append(current)
                current = []
            expect_situation = True
        else:
            if not expect_situation:
                raise ParseError(f"expected '>' or '=' before {token!r}", number, col)
            match = _SITUATION.match(token)
            if not match or not match.group(1):
                raise ParseError(
                    f"expected '<post>@<congestion>', got {token!r}", number, col
                )
            post, congestion = match.group(1), int(match.group(2))
            if post not in posts:
                raise ParseError(f"unknown post {post!r}", number, col)
            if congestion < 1:
                raise ParseError("congestion must be positive", number, col)
            if (post, congestion) in current:
                raise ParseError(
                    f"situation {token!r} repeated within a tier", number, col
                )
            current.append((post, congestion))
            expect_situation = False
    if expect_situation:
        raise ParseError("preference list ends with a separator", number, tokens[-1][1])
    tiers.append(current)
    return [tuple(tier) for tier in tiers]


def write_instance(instance: Instance) -> str:
    lines = ["posts " + " ".join(instance.posts)]
    for v in instance.agents:
        tiers = [
            " = ".join(f"{post}@{cong}" for post, cong in tier)
            for tier in instance.prefs[v]
        ]
        lines.append(f"agent {v} : " + " > ".join(tiers))
    return "\n".join(lines) + "\n"


def parse_assignment(text: str, instance: Instance) -> Assignment:
    """Parse assignment text and validate it against the instance."""
    blocks: dict[str, list[str]] = {}
    placed: dict[str, int] = {}
    for number, tokens in _lines(text):
        keyword, column = tokens[0]
        if keyword != "assign":
            raise ParseError(f"unknown directive {keyword!r}", number, column)
        if len(tokens) < 3 or tokens[2][0] != ":":
            raise ParseError("expected 'assign <post> : <agents>'", number, column)
        post, post_col = tokens[1]
        if post not in instance.post_index:
            raise ParseError(f"unknown post {post!r}", number, post_col)
        if post in blocks:
            raise ParseError(f"duplicate assignment line for post {post!r}", number, post_col)
        members = []
        for agent, col in tokens[3:]:
            if agent not in instance.agent_index:
                raise ParseError(f"unknown agent {agent!r}", number, col)
            if agent in placed:
                raise ParseError(f"agent {agent!r} placed twice", number, col)
            placed[agent] = number
            members.append(agent)
        blocks[post] = members
    return Assignment.from_blocks(instance, blocks)


def write_assignment(instance: Instance, assignment: Assignment) -> str:
    lines = []
    for post in instance.posts:
        block = assignment.blocks.get(post, frozenset())
        if block:
            members = sorted(block, key=instance.agent_index.__getitem__)
            lines.append(f"assign {post} : " + " ".join(members))
    return "\n".join(lines) + "\n" if lines else ""


def parse_x3c(text: str) -> X3CInstance:
    """Parse exact-cover text: an ``elements`` count plus ``set`` lines."""
    elements: tuple[str, ...] | None = None
    sets: list[tuple[str, tuple[str, ...]]] = []
    ids: set[str] = set()
    for number, tokens in _lines(text):
        keyword, column = tokens[0]
        if keyword == "elements":
            if elements is not None:
                raise ParseError("duplicate elements line", number, column)
            if len(tokens) != 2 or not tokens[1][0].isdigit():
                raise ParseError("expected 'elements <count>'", number, column)
            count = int(tokens[1][0])
            elements = tuple(f"u{i}" for i in range(1, count + 1))
        elif keyword == "set":
            if elements is None:
                raise ParseError("elements line must come before sets", number, column)
            if len(tokens) < 3 or tokens[2][0] != ":":
                raise ParseError("expected 'set <id> : <elements>'", number, column)
            set_id, id_col = tokens[1]
            if set_id in ids:
                raise ParseError(f"duplicate set {set_id!r}", number, id_col)
            members = []
            for element, col in tokens[3:]:
                if element not in elements:
                    raise ParseError(f"unknown element {element!r}", number, col)
                members.append(element)
            ids.add(set_id)
            sets.append((set_id, tuple(members)))
        else:
            raise ParseError(f"unknown directive {keyword!r}", number, column)
    if elements is None:
        raise ParseError("missing elements line", 1, 1)
    return make_x3c(elements, sets)


def write_x3c(x: X3CInstance) -> str:
    lines = [f"elements {len(x.elements)}"]
    for set_id, members in x.sets:
        lines.append(f"set {set_id} : " + " ".join(members))
    return "\n".join(lines) + "\n"
