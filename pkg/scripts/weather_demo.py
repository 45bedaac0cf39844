"""Check, inspect and generate the bundled weather pipeline.

    python scripts/weather_demo.py [out.ipynb]
"""

import sys
from pathlib import Path

from mlgen.cli import main

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "weather"


def run():
    out = sys.argv[1] if len(sys.argv) > 1 else "weather.ipynb"
    common = ["--model", str(FIXTURE / "weather.model.json"),
              "--mapping", str(FIXTURE / "mapping.json"),
              "--templates", str(FIXTURE / "templates")]
    if main(["check", *common]):
        return 1
    main(["inspect", "contexts", "--model", str(FIXTURE / "weather.model.json")])
    return main(["generate", *common, "--out", out])


if __name__ == "__main__":
    sys.exit(run())
