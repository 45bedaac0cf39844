"""Regenerate the weather golden notebook and report.

Run only after inspecting a diff of the new output by hand; the golden
file is the regression oracle for tests/test_golden.py.
"""

import sys
from pathlib import Path

from mlgen import GenerateOptions, generate, load_model, parse_mapping

HERE = Path(__file__).resolve().parent.parent / "fixtures" / "weather"


def main():
    out = HERE / "expected.ipynb"
    report = generate(
        load_model((HERE / "weather.model.json").read_bytes()),
        parse_mapping((HERE / "mapping.json").read_bytes()),
        HERE / "templates", out, GenerateOptions())
    sys.stdout.write(report.to_text())


if __name__ == "__main__":
    main()
