"""Run every ``cointjump reproduce`` target and summarize the exit codes."""
import sys
import time
from pathlib import Path

from cointjump.cli import main

if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("reproduce_out")
    codes = {}
    for target in ("table2", "table3", "fig1", "fig2"):
        t0 = time.perf_counter()
        codes[target] = main(["reproduce", target, "--out", str(out)])
        print(f"{target}: exit {codes[target]} ({time.perf_counter() - t0:.1f}s)")
    sys.exit(max(codes.values()))
