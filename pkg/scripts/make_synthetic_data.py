"""Regenerate data/synthetic_eex.csv and data/synthetic_powernext.csv from configs/synthetic_series.yaml."""
import shutil
import sys
import tempfile
from pathlib import Path

from cointjump.cli import main

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as tmp:
        code = main(["simulate", "--config", str(ROOT / "configs" / "synthetic_series.yaml"), "--out", tmp])
        if code:
            sys.exit(code)
        shutil.copy(Path(tmp) / "series1.csv", ROOT / "data" / "synthetic_eex.csv")
        shutil.copy(Path(tmp) / "series2.csv", ROOT / "data" / "synthetic_powernext.csv")
    print("data/synthetic_eex.csv and data/synthetic_powernext.csv updated")
