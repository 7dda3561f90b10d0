"""Lay out a few generated graphs with the linear preset and write SVGs."""
import sys
from pathlib import Path

from fasttsnet.cli import main

OUT = Path(sys.argv[1] if len(sys.argv) > 1 else "layouts")
OUT.mkdir(exist_ok=True)
for spec in ("gen:grid:20x20", "gen:cycle:200", "gen:ba:500:2"):
    stem = spec.replace(":", "_")
    main(["layout", "--graph", spec, "--out", str(OUT / f"{stem}.txt"), "--svg", str(OUT / f"{stem}.svg")])
    main(["metrics", "--graph", spec, "--layout", str(OUT / f"{stem}.txt")])
