import itertools

import pytest

from congassign import (
    CP,
    EF,
    INDIFFERENT,
    NS,
    PREFER1,
    PREFER2,
    Assignment,
    Instance,
    check,
    compare_tuples,
    congestion_profile,
    max_congestion,
    parse_instance,
    satisfies,
    validate_instance,
)

from conftest import EX1_TEXT, random_instances


def test_validate_worked_examples(ex1, ex2):
    assert validate_instance(ex1).holds
    assert validate_instance(ex2).holds


def test_validate_minimal_instance():
    inst = parse_instance("posts a1\nagent v1 : a1@1\n")
    assert validate_instance(inst).holds


def test_validate_short_list():
    # Drop (a1,2) from v1: its list covers 2 situations for 3 agents.
    text = EX1_TEXT.replace("agent v1 : a1@1 > a2@1 = a1@2", "agent v1 : a1@1 > a2@1")
    verdict = validate_instance(parse_instance(text))
    assert not verdict.holds
    kinds = {(w.kind, w.agent) for w in verdict.witnesses}
    assert ("short-list", "v1") in kinds
    assert all(w.agent == "v1" for w in verdict.witnesses)


def test_validate_congestion_gap():
    inst = Instance(["a1"], ["v1", "v2"], {
        "v1": [((("a1"), 1),), (("a1", 3),)],
        "v2": [(("a1", 1),), (("a1", 2),)],
    })
    verdict = validate_instance(inst)
    kinds = {w.kind for w in verdict.witnesses}
    assert "congestion-gap" in kinds


def test_validate_congestion_order():
    inst = Instance(["a1", "a2"], ["v1", "v2"], {
        "v1": [(("a1", 2),), (("a1", 1),)],
        "v2": [(("a1", 1),), (("a2", 1),)],
    })
    verdict = validate_instance(inst)
    assert {w.kind for w in verdict.witnesses} >= {"congestion-order"}


def test_validate_duplicate_and_tier_clash():
    inst = Instance(["a1", "a2"], ["v1", "v2"], {
        "v1": [(("a1", 1), ("a1", 2))],
        "v2": [(("a1", 1),), (("a1", 1),)],
    })
    verdict = validate_instance(inst)
    kinds = {w.kind for w in verdict.witnesses}
    assert "tier-post-clash" in kinds
    assert "duplicate-situation" in kinds


def test_validate_empty_tier():
    inst = Instance(["a1"], ["v1"], {"v1": [(("a1", 1),), ()]})
    assert {w.kind for w in validate_instance(inst).witnesses} == {"empty-tier"}


def test_instance_structural_errors():
    with pytest.raises(ValueError):
        Instance([], ["v1"], {"v1": []})
    with pytest.raises(ValueError):
        Instance(["a1", "a1"], ["v1"], {"v1": [(("a1", 1),)]})
    with pytest.raises(ValueError):
        Instance(["a1"], ["v1"], {})
    with pytest.raises(ValueError):
        Instance(["a1"], ["v1"], {"v1": [(("a9", 1),)]})
    with pytest.raises(ValueError):
        Instance(["a1"], ["v1"], {"v1": [(("a1", 0),)]})
    with pytest.raises(ValueError):
        Instance(["a1"], ["v1"], {"v1": [(("a1", 1),)], "v2": [(("a1", 1),)]})


def test_max_congestion_values(ex1):
    for v in ("v1", "v2", "v3"):
        assert max_congestion(ex1, v, "a1") == 2
        assert max_congestion(ex1, v, "a2") == 1


def test_max_congestion_absent_post():
    inst = parse_instance("posts a1 a2\nagent v1 : a1@1\n")
    assert max_congestion(inst, "v1", "a2") == 0


def test_max_congestion_unknown_ids(ex1):
    with pytest.raises(KeyError):
        max_congestion(ex1, "nope", "a1")
    with pytest.raises(KeyError):
        max_congestion(ex1, "v1", "nope")


def test_compare_tuples_worked_example(ex1):
    assert compare_tuples(ex1, "v1", ("a2", 1), ("a1", 2)) == INDIFFERENT
    assert compare_tuples(ex1, "v3", ("a1", 2), ("a2", 1)) == PREFER1
    assert compare_tuples(ex1, "v2", ("a1", 2), ("a2", 1)) == PREFER2
    for v in ("v1", "v2", "v3"):
        assert compare_tuples(ex1, v, ("a1", 1), ("a1", 1)) == INDIFFERENT


def test_compare_tuples_unlisted_is_bottom(ex1):
    # (a2,2) and (a2,3) are outside every list.
    assert compare_tuples(ex1, "v1", ("a1", 2), ("a2", 2)) == PREFER1
    assert compare_tuples(ex1, "v1", ("a2", 2), ("a2", 3)) == INDIFFERENT


def test_compare_tuples_unknown_identifiers(ex1):
    with pytest.raises(KeyError):
        compare_tuples(ex1, "v9", ("a1", 1), ("a1", 2))
    with pytest.raises(KeyError):
        compare_tuples(ex1, "v1", ("a9", 1), ("a1", 2))
    with pytest.raises(ValueError):
        compare_tuples(ex1, "v1", ("a1", 0), ("a1", 2))


def test_compare_is_total_preorder():
    for inst in random_instances(25, 4, 3, seed=11):
        n = inst.n
        situations = [(a, d) for a in inst.posts for d in range(1, n + 2)]
        for v in inst.agents:
            for s1, s2, s3 in itertools.combinations(situations, 3):
                c12 = compare_tuples(inst, v, s1, s2)
                c23 = compare_tuples(inst, v, s2, s3)
                c13 = compare_tuples(inst, v, s1, s3)
                if c12 == PREFER1 and c23 in (PREFER1, INDIFFERENT):
                    assert c13 == PREFER1
                if c12 == INDIFFERENT and c23 == INDIFFERENT:
                    assert c13 == INDIFFERENT


def test_listed_congestion_strictly_decreasing():
    for inst in random_instances(25, 5, 3, seed=12):
        for v in inst.agents:
            for a in inst.posts:
                top = max_congestion(inst, v, a)
                for d in range(1, top):
                    assert compare_tuples(inst, v, (a, d), (a, d + 1)) == PREFER1


def test_congestion_profile(ex1, ex2, pi2):
    assert congestion_profile(pi2).sizes == {"a1": 2, "a2": 1}
    everyone = Assignment.from_owner(ex1, {v: "a1" for v in ex1.agents})
    assert congestion_profile(everyone).sizes == {"a1": 3, "a2": 0}
    ef = Assignment.from_owner(ex2, {"v1": "a2", "v2": "a2"})
    assert congestion_profile(ef).sizes == {"a1": 0, "a2": 2}
    assert congestion_profile(ef).total == 2


def test_check_worked_example_one(ex1, pi1, pi2):
    assert check(ex1, pi1, NS).holds
    verdict = check(ex1, pi1, CP)
    assert not verdict.holds
    assert len(verdict.witnesses) == 1
    witness = verdict.witnesses[0]
    assert witness.describe() == "v2 prefers (a2,1) to (a1,2)"
    assert witness.agent == "v2" and witness.envied == "v1" and witness.kind == "envy"
    # no empty post, so envy-freeness fails the same way
    assert [w.describe() for w in check(ex1, pi1, EF).witnesses] == [
        "v2 prefers (a2,1) to (a1,2)"
    ]
    assert check(ex1, pi2, CP).holds
    assert check(ex1, pi2, EF).holds
    assert check(ex1, pi2, NS).holds


def test_check_worked_example_two(ex2):
    both = Assignment.from_owner(ex2, {"v1": "a2", "v2": "a2"})
    assert check(ex2, both, EF).holds
    verdict = check(ex2, both, CP)
    assert not verdict.holds
    assert {w.describe() for w in verdict.witnesses} == {
        "v1 prefers (a1,1) to (a2,2)",
        "v2 prefers (a1,1) to (a2,2)",
    }
    assert all(w.kind == "empty-post" for w in verdict.witnesses)


def test_check_overflow(ex2):
    crowded = Assignment.from_owner(ex2, {"v1": "a1", "v2": "a1"})
    for concept in (NS, EF, CP):
        verdict = check(ex2, crowded, concept)
        assert not verdict.holds
        assert any(w.kind == "overflow" for w in verdict.witnesses)


def test_check_rejects_bad_inputs(ex1, pi2):
    with pytest.raises(ValueError):
        check(ex1, pi2, "XX")
    partial = Assignment({"a1": {"v1"}})
    with pytest.raises(ValueError):
        check(ex1, partial, NS)


def test_cp_implies_ef_and_coincidence():
    for inst in random_instances(120, 4, 3, seed=13):
        m, n = inst.m, inst.n
        for owner_ix in itertools.product(range(m), repeat=n):
            owner = {inst.agents[i]: inst.posts[j] for i, j in enumerate(owner_ix)}
            assignment = Assignment.from_owner(inst, owner)
            cp = check(inst, assignment, CP)
            ef = check(inst, assignment, EF)
            if cp.holds:
                assert ef.holds
            sizes = congestion_profile(assignment).sizes
            if all(sizes[a] >= 1 for a in inst.posts):
                assert cp.holds == ef.holds


def test_satisfies_agrees_with_check():
    for inst in random_instances(60, 4, 3, seed=14):
        m, n = inst.m, inst.n
        for owner_ix in itertools.product(range(m), repeat=n):
            owner = {inst.agents[i]: inst.posts[j] for i, j in enumerate(owner_ix)}
            assignment = Assignment.from_owner(inst, owner)
            for concept in (NS, EF, CP):
                assert satisfies(inst, owner_ix, concept) == check(
                    inst, assignment, concept
                ).holds


def test_check_witnesses_deterministic(ex1, pi1):
    first = check(ex1, pi1, CP)
    second = check(ex1, pi1, CP)
    assert first == second


def test_assignment_constructors(ex1):
    with pytest.raises(ValueError):
        Assignment.from_owner(ex1, {"v1": "a1", "v2": "a1"})  # v3 missing
    with pytest.raises(ValueError):
        Assignment.from_owner(ex1, {"v1": "a9", "v2": "a1", "v3": "a1"})
    with pytest.raises(ValueError):
        Assignment.from_blocks(ex1, {"a1": ["v1", "v2"], "a2": ["v1"]})
    with pytest.raises(ValueError):
        Assignment.from_blocks(ex1, {"a9": ["v1"]})
    a = Assignment.from_blocks(ex1, {"a1": ["v1", "v3"], "a2": ["v2"]})
    b = Assignment.from_owner(ex1, {"v1": "a1", "v3": "a1", "v2": "a2"})
    assert a == b
    assert a.owner["v2"] == "a2"
    assert a.blocks["a2"] == frozenset({"v2"})
