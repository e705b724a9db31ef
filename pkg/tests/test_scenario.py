import pytest
from hypothesis import given, strategies as st

from hypercontext.scenario import (
    BOT, TOP, JointOutcome, Scenario, ScenarioValidationError, UnknownContext, build_n_cycle,
    enumerate_joint_outcomes, validate_scenario,
)


def codes(exc_info):
    return [i.code for i in exc_info.value.issues]


def test_five_cycle_document_validates():
    doc = {
        "measurements": [f"A{i}" for i in range(5)],
        "outcomes": [BOT, TOP],
        "contexts": [["A0", "A1"], ["A1", "A2"], ["A2", "A3"], ["A3", "A4"], ["A4", "A0"]],
    }
    s = validate_scenario(doc)
    assert s == build_n_cycle(5)
    assert len(s.measurements) == 5 and len(s.contexts) == 5


def test_single_measurement_scenario():
    s = validate_scenario({"measurements": ["A0"], "contexts": [["A0"]], "outcomes": [BOT, TOP]})
    assert s.contexts == (("A0",),)


def test_maximality_violation_names_offender():
    with pytest.raises(ScenarioValidationError) as e:
        validate_scenario({"measurements": ["A0", "A1"], "contexts": [["A0", "A1"], ["A0"]],
                           "outcomes": [BOT, TOP]})
    assert codes(e) == ["MaximalityViolation"]
    assert "['A0']" in e.value.issues[0].detail and "['A0', 'A1']" in e.value.issues[0].detail


def test_all_violations_reported_together():
    with pytest.raises(ScenarioValidationError) as e:
        validate_scenario({"measurements": ["A0", "A1", "A2"], "contexts": [["A0", "A1"], ["A1"]],
                           "outcomes": []})
    assert set(codes(e)) == {"EmptyStructure", "CoverViolation", "MaximalityViolation"}


@pytest.mark.parametrize("doc, code", [
    ({"measurements": [], "contexts": [], "outcomes": [TOP]}, "EmptyStructure"),
    ({"measurements": ["A", "A"], "contexts": [["A"]], "outcomes": [TOP]}, "DuplicateLabel"),
    ({"measurements": ["A"], "contexts": [["A"], ["A"]], "outcomes": [TOP]}, "DuplicateContext"),
    ({"measurements": ["A"], "contexts": [["A", "B"]], "outcomes": [TOP]}, "UnknownMeasurement"),
    ({"measurements": ["A"], "contexts": [["A"]], "outcomes": [TOP], "extra": 1}, "Schema"),
    ({"measurements": ["A,B"], "contexts": [["A,B"]], "outcomes": [TOP]}, "BadLabel"),
])
def test_structural_errors(doc, code):
    with pytest.raises(ScenarioValidationError) as e:
        validate_scenario(doc)
    assert code in codes(e)


def test_triangle():
    s = build_n_cycle(3)
    assert s.contexts == (("A0", "A1"), ("A1", "A2"), ("A2", "A0"))


@pytest.mark.parametrize("n", [2, 1, 0, -3])
def test_short_cycles_rejected(n):
    with pytest.raises(ScenarioValidationError):
        build_n_cycle(n)


@given(st.integers(min_value=3, max_value=40))
def test_cycles_always_validate(n):
    s = build_n_cycle(n)
    assert validate_scenario(s.to_json()) == s
    covered = set().union(*map(set, s.contexts))
    assert covered == set(s.measurements)
    for a in s.contexts:
        for b in s.contexts:
            assert not set(a) < set(b)


def test_enumeration_order():
    s = build_n_cycle(5)
    outs = enumerate_joint_outcomes(s, 2)
    assert [o.values for o in outs] == [(BOT, BOT), (BOT, TOP), (TOP, BOT), (TOP, TOP)]
    assert all(o.measurements == ("A2", "A3") for o in outs)


def test_global_enumeration():
    s = build_n_cycle(5)
    outs = enumerate_joint_outcomes(s, s.measurements)
    assert len(outs) == 32 == len(set(outs))
    assert outs[0].values == (BOT,) * 5 and outs[-1].values == (TOP,) * 5


def test_size_one_context():
    s = Scenario(("A0",), (("A0",),))
    assert len(enumerate_joint_outcomes(s, 0)) == 2


def test_unknown_context():
    s = build_n_cycle(5)
    with pytest.raises(UnknownContext):
        enumerate_joint_outcomes(s, ("A0", "A2"))
    with pytest.raises(UnknownContext):
        enumerate_joint_outcomes(s, 7)


def test_context_references_agree():
    s = build_n_cycle(5)
    assert s.context_index(4) == s.context_index("A4,A0") == s.context_index(["A0", "A4"]) == 4


@given(st.integers(3, 7), st.data())
def test_enumeration_count_and_stability(n, data):
    s = build_n_cycle(n)
    k = data.draw(st.integers(0, n - 1))
    first = enumerate_joint_outcomes(s, k)
    assert len(first) == len(s.outcomes) ** len(s.contexts[k]) == len(set(first))
    assert first == enumerate_joint_outcomes(s, k)


def test_joint_outcome_domain_must_match():
    with pytest.raises(ValueError):
        JointOutcome(("A0", "A1"), (TOP,))
    o = JointOutcome(("A0", "A1"), (TOP, BOT))
    assert o.assignment == {"A0": TOP, "A1": BOT} and o["A1"] == BOT


def test_scenario_is_immutable():
    s = build_n_cycle(3)
    with pytest.raises(AttributeError):
        s.measurements = ("x",)
