import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlgen.errors import InheritanceCycleError, ModelError, UnresolvedReferenceError
from mlgen.model import (PropertyDef, QualifiedName, Reference, dump_model, load_model,
                         model_to_dict, render_value)

from conftest import block, make_model


def test_minimal_model():
    m = load_model(json.dumps({"blocks": [block("P::A")]}).encode())
    assert len(m.blocks) == 1
    assert m.machines == ()
    assert m.block("P::A").name == "A"


def test_unresolved_part_names_target():
    doc = {"blocks": [block("P::B", parts=["Q::Missing"])]}
    with pytest.raises(UnresolvedReferenceError, match="Q::Missing"):
        load_model(json.dumps(doc))


def test_parse_error_has_location():
    with pytest.raises(ModelError, match=r"line 2 column"):
        load_model(b'{"blocks": [\n  oops]}')


def test_duplicate_qualified_name():
    with pytest.raises(ModelError, match="duplicate qualified name"):
        make_model([block("P::A"), block("P::A")])


def test_unknown_key_rejected():
    with pytest.raises(ModelError, match="unknown keys"):
        load_model(json.dumps({"blocks": [{"qualifiedName": "A", "colour": "red"}]}))


def test_inheritance_cycle_named():
    sts = [{"name": "A", "kind": "data", "parents": ["B"]},
           {"name": "B", "kind": "data", "parents": ["A"]}]
    with pytest.raises(InheritanceCycleError) as exc:
        make_model([], sts)
    assert set(exc.value.cycle) == {"A", "B"}


def test_parts_cycle_rejected():
    with pytest.raises(InheritanceCycleError, match="parts"):
        make_model([block("A", parts=["B"]), block("B", parts=["A"])])


def test_ml_task_must_derive_from_root():
    with pytest.raises(ModelError, match="inherit from 'ML'"):
        make_model([], [{"name": "Loose", "kind": "ml-task"}])


def test_mandatory_with_default_rejected():
    sts = [{"name": "S", "kind": "ml-task", "parents": ["ML"],
            "properties": [{"name": "p", "type": "string", "mandatory": True, "default": "x"}]}]
    with pytest.raises(ModelError, match="mandatory"):
        make_model([], sts)


def test_kwargs_property_def_rejected():
    sts = [{"name": "S", "kind": "ml-task", "parents": ["ML"],
            "properties": [{"name": "**extra", "type": "string"}]}]
    with pytest.raises(ModelError, match=r"\*\*"):
        make_model([], sts)


def test_attribute_stereotype_must_be_data():
    sts = [{"name": "Task", "kind": "ml-task", "parents": ["ML"]}]
    attrs = [{"name": "date", "value": "date", "stereotypes": ["Task"]}]
    with pytest.raises(ModelError, match="not a data stereotype"):
        make_model([block("A", attributes=attrs)], sts)


def test_property_type_checked():
    sts = [{"name": "S", "kind": "ml-task", "parents": ["ML"],
            "properties": [{"name": "n", "type": "number"}]}]
    with pytest.raises(ModelError, match="does not match type"):
        make_model([block("A", stereotypes=[{"stereotype": "S", "values": {"n": "ten"}}])], sts)


def test_state_orders_unique():
    doc = {"blocks": [block("A")], "stateMachines": [{"name": "M", "states": [
        {"name": "a", "order": 1, "block": "A"}, {"name": "b", "order": 1, "block": "A"}]}]}
    with pytest.raises(ModelError, match="repeated"):
        load_model(json.dumps(doc))


def test_weather_fixture(weather_model):
    assert len(weather_model.blocks) >= 5
    assert len(weather_model.machines) == 1
    states = weather_model.machine().ordered_states()
    assert len(states) == 5
    assert [s.order for s in states] == sorted(s.order for s in states)
    assert str(states[0].block) == "Weather::Sensor_Log"


# -- effective properties ----------------------------------------------------

TEXT_CSV = [
    {"name": "TextFile", "kind": "ml-task", "parents": ["ML"],
     "properties": [{"name": "Path", "type": "string", "mandatory": True}]},
    {"name": "CSV", "kind": "ml-task", "parents": ["TextFile"],
     "properties": [{"name": "Separator", "type": "string", "default": ","}]},
]


def test_effective_properties_inherit_path():
    m = make_model([block("Sensor_Log", stereotypes=[
        {"stereotype": "CSV", "values": {"Path": "./weather.csv"}}])], TEXT_CSV)
    props = m.effective_properties(m.block("Sensor_Log"), "CSV")
    assert list(props) == ["Path", "Separator"]
    assert props["Path"][1] == "./weather.csv"
    assert props["Separator"] == (PropertyDef("Separator", "string", False, ","), None)


def test_effective_properties_empty():
    m = make_model([block("A", stereotypes=["ML"])])
    assert m.effective_properties(m.block("A"), "ML") == {}


def test_effective_properties_not_applied():
    m = make_model([block("A")])
    with pytest.raises(ModelError, match="not applied"):
        m.effective_properties(m.block("A"), "ML")


def test_diamond_linearization():
    # A <- B, A <- C, D <- (B, C); C overrides p
    sts = [
        {"name": "A", "kind": "ml-task", "parents": ["ML"],
         "properties": [{"name": "p", "type": "string", "default": "from A"}]},
        {"name": "B", "kind": "ml-task", "parents": ["A"]},
        {"name": "C", "kind": "ml-task", "parents": ["A"],
         "properties": [{"name": "p", "type": "string", "default": "from C"}]},
        {"name": "D", "kind": "ml-task", "parents": ["B", "C"]},
    ]
    m = make_model([block("X", stereotypes=["D"])], sts)
    assert m.linearize("D") == ("D", "B", "C", "A", "ML")
    props = m.effective_properties(m.block("X"), "D")
    assert props["p"][0].default == "from C"


def test_missing_mandatory_reported_not_raised():
    m = make_model([block("A", stereotypes=["CSV"])], TEXT_CSV)
    assert m.missing_mandatory(m.block("A")) == [("CSV", "Path")]


def test_connected_inputs_order():
    m = make_model([block("A"), block("B"), block("T", parts=["B", "A"]), block("E")])
    assert [b.name for b in m.connected_inputs(m.block("T"))] == ["B", "A"]
    assert m.connected_inputs(m.block("E")) == []


def test_connected_inputs_weather(weather_model):
    split = weather_model.block("Weather::TrainSplit")
    assert [b.name for b in weather_model.connected_inputs(split)] == ["Merge_DF"]


def test_reference_attribute():
    m = make_model([block("A"), block("B", attributes=[{"name": "src", "ref": "A"}])])
    assert m.block("B").attribute("src").value == Reference(QualifiedName(("A",)))


@pytest.mark.parametrize("value, text", [
    (0.2, "0.2"), (1e-05, "1e-05"), (3, "3"), (True, "True"), (False, "False"), ("a b", "a b")])
def test_render_value(value, text):
    assert render_value(value) == text


def test_roundtrip_weather(weather_model):
    again = load_model(dump_model(weather_model))
    assert model_to_dict(again) == model_to_dict(weather_model)


names = st.text(alphabet="abcdefgh_", min_size=1, max_size=6)


@st.composite
def random_models(draw):
    n = draw(st.integers(1, 6))
    qns = [f"P::b{i}" for i in range(n)]
    blocks = []
    for i, qn in enumerate(qns):
        # parts only point backwards: always acyclic
        parts = draw(st.lists(st.sampled_from(qns[:i]), unique=True)) if i else []
        attrs = [{"name": a, "value": draw(st.one_of(
                    st.integers(-5, 5), st.floats(allow_nan=False, allow_infinity=False),
                    st.booleans(), names))}
                 for a in draw(st.lists(names, unique=True, max_size=3))]
        comments = draw(st.lists(st.text(max_size=10), max_size=2))
        blocks.append(block(qn, parts, attributes=attrs, comments=comments))
    return make_model(blocks, states=draw(st.lists(st.sampled_from(qns), max_size=3, unique=True)))


@given(random_models())
@settings(max_examples=100)
def test_roundtrip_property(m):
    again = load_model(dump_model(m))
    assert model_to_dict(again) == model_to_dict(m)
    assert dump_model(again) == dump_model(m)
