from pathlib import Path

import pytest

from mlgen import load_model, parse_mapping
from mlgen.model import model_from_dict

WEATHER = Path(__file__).resolve().parent.parent / "fixtures" / "weather"
WEATHER_MODEL = WEATHER / "weather.model.json"
WEATHER_MAPPING = WEATHER / "mapping.json"
WEATHER_TEMPLATES = WEATHER / "templates"
WEATHER_GOLDEN = WEATHER / "expected.ipynb"


@pytest.fixture
def weather_model():
    return load_model(WEATHER_MODEL.read_bytes())


@pytest.fixture
def weather_mapping():
    return parse_mapping(WEATHER_MAPPING.read_bytes())


def block(qn, parts=(), stereotypes=(), attributes=(), comments=()):
    """Terse block dict for hand-built test models."""
    return {"qualifiedName": qn, "parts": list(parts),
            "appliedStereotypes": list(stereotypes),
            "attributes": list(attributes), "comments": list(comments)}


def make_model(blocks, stereotypes=(), states=None, machine="M"):
    doc = {"stereotypes": [{"name": "ML", "kind": "ml-task"}, *stereotypes],
           "blocks": list(blocks)}
    if states is not None:
        doc["stateMachines"] = [{"name": machine, "states": [
            {"name": f"s{i}", "order": i, "block": b} for i, b in enumerate(states)]}]
    return model_from_dict(doc)


# -- acceptance summary ------------------------------------------------------

_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::", 1)[1]
    if report.when == "call" or report.outcome != "passed":
        if _acceptance.get(name) != "FAIL":
            _acceptance[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in _acceptance.items():
        terminalreporter.write_line(f"{verdict}  {name}")
