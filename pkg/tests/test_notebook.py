import json
import sys

import nbformat
import pytest

from mlgen.contexts import build_contexts
from mlgen.errors import GenerationError
from mlgen.mapping import MappingConfig
from mlgen.notebook import (CODE, MARKDOWN, Cell, Notebook, compose, serialize,
                            trim_blank_lines, validate_syntax)
from mlgen.templates import Snippet

from conftest import block, make_model


def registry_with(snippets, comments=None):
    comments = comments or {}
    names = list(snippets)
    m = make_model([block(n, comments=comments.get(n, ())) for n in names], states=names)
    reg = build_contexts(m, m.machine())
    for n, (imports, body) in snippets.items():
        reg[n].snippet = Snippet(body, imports)
    return reg


def test_shared_import_once_in_cell0():
    reg = registry_with({"A": (["import pandas as pd"], "a = pd.DataFrame()"),
                         "B": (["import pandas as pd", "import numpy as np"], "b = np.ones(1)")})
    nb = compose(reg)
    assert nb.cells[0] == Cell(CODE, "import pandas as pd\nimport numpy as np")
    assert sum("import pandas" in c.source for c in nb.cells) == 1


def test_comment_precedes_code():
    reg = registry_with({"A": (["import os"], "x = os.sep")}, {"A": ["# Title"]})
    assert [c.kind for c in compose(reg).cells] == [CODE, MARKDOWN, CODE]


def test_no_imports_no_import_cell():
    reg = registry_with({"A": ([], "x = 1")}, {"A": ["one", "two"]})
    assert compose(reg).cells == [Cell(MARKDOWN, "one"), Cell(MARKDOWN, "two"), Cell(CODE, "x = 1")]


def test_empty_registry():
    m = make_model([])
    from mlgen.contexts import ContextRegistry
    assert compose(ContextRegistry(m)).cells == []


def test_missing_snippet():
    m = make_model([block("A")], states=["A"])
    with pytest.raises(GenerationError, match="A"):
        compose(build_contexts(m, m.machine()))


def test_trim():
    reg = registry_with({"A": ([], "\n\nx = 1\n\n\n\ny = 2\n  \n")})
    assert compose(reg, MappingConfig(trim_empty_lines=True)).cells[0].source == "x = 1\n\ny = 2"
    assert compose(reg).cells[0].source == "\n\nx = 1\n\n\n\ny = 2\n  "


@pytest.mark.parametrize("text, expected", [
    ("", ""), ("\n\n", ""), ("a\n\n\nb", "a\n\nb"), ("  \na\n \n", "a")])
def test_trim_blank_lines(text, expected):
    assert trim_blank_lines(text) == expected


def test_serialize_empty():
    doc = json.loads(serialize(Notebook()))
    assert doc == {"cells": [], "metadata": {}, "nbformat": 4, "nbformat_minor": 5}
    nbformat.validate(nbformat.reads(serialize(Notebook()).decode(), as_version=4))


def test_serialize_one_code_cell():
    doc = json.loads(serialize(Notebook([Cell(CODE, "x = 1")])))
    cell = doc["cells"][0]
    assert cell["cell_type"] == "code"
    assert cell["source"] == ["x = 1"]
    assert cell["outputs"] == [] and cell["execution_count"] is None


def test_serialize_lines_and_kernel():
    data = serialize(Notebook([Cell(MARKDOWN, "a\nb\n\nc"), Cell(CODE, "")], "python3"))
    doc = json.loads(data)
    assert doc["cells"][0]["source"] == ["a\n", "b\n", "\n", "c"]
    assert doc["cells"][1]["source"] == []
    assert doc["metadata"]["kernelspec"]["name"] == "python3"
    assert list(doc) == ["cells", "metadata", "nbformat", "nbformat_minor"]
    nbformat.validate(nbformat.reads(data.decode(), as_version=4))


def test_serialize_deterministic():
    nb = Notebook([Cell(MARKDOWN, "ü"), Cell(CODE, "x = {'a': 1}")])
    assert serialize(nb) == serialize(nb)


def write(tmp_path, *sources):
    path = tmp_path / "nb.ipynb"
    path.write_bytes(serialize(Notebook([Cell(CODE, s) for s in sources])))
    return path


def test_valid_no_warnings(tmp_path):
    assert validate_syntax(write(tmp_path, "x = (1, [2])", "s = ')'  # (")) == []


def test_unbalanced_paren_warns(tmp_path):
    warnings = validate_syntax(write(tmp_path, "ok = 1", "x = f(1"))
    assert len(warnings) == 1
    assert warnings[0].startswith("cell 1") and "'('" in warnings[0]


def test_markdown_not_checked(tmp_path):
    path = tmp_path / "nb.ipynb"
    path.write_bytes(serialize(Notebook([Cell(MARKDOWN, "smile :)")])))
    assert validate_syntax(path) == []


def test_validator_failure_is_warning(tmp_path):
    path = write(tmp_path, "x = 1")
    cmd = f"{sys.executable} -c \"import sys; print('bad', sys.argv[1]); sys.exit(1)\" {{file}}"
    warnings = validate_syntax(path, cmd)
    assert len(warnings) == 1
    assert "status 1" in warnings[0] and f"bad {path}" in warnings[0]


def test_validator_success(tmp_path):
    assert validate_syntax(write(tmp_path, "x = 1"), f"{sys.executable} -c pass {{file}}") == []


def test_validator_missing_binary(tmp_path):
    warnings = validate_syntax(write(tmp_path, "x = 1"), "no-such-validator-xyz {file}")
    assert len(warnings) == 1 and "could not be run" in warnings[0]
