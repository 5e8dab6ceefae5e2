"""Budget sweep through the command line: CSV rows plus an SVG chart.

Equivalent shell session:

    graph-al gen --seed 400 --out g.json
    graph-al sweep --graph g.json --budgets 10,20,40 --methods random,centrality,uncertainty \\
        --runs 5 --out sweep.csv --svg sweep.svg
"""

import tempfile
from pathlib import Path

from graph_al.cli import main
from graph_al.report import read_csv

with tempfile.TemporaryDirectory() as d:
    d = Path(d)
    main(["gen", "--seed", "400", "--out", str(d / "g.json")])
    main(["sweep", "--graph", str(d / "g.json"), "--budgets", "10,20,40",
          "--methods", "random,centrality,uncertainty", "--runs", "5",
          "--out", str(d / "sweep.csv"), "--svg", str(d / "sweep.svg")])
    text = (d / "sweep.csv").read_text()
    print("\n".join(line for line in text.splitlines() if line.startswith("#")))
    rows = [r for r in read_csv(text) if r["run"] not in ("mean", "std")]
    for m in ("random", "centrality", "uncertainty"):
        for b in ("10", "20", "40"):
            vals = [float(r["micro_f1"]) for r in rows if r["method"] == m and r["budget"] == b]
            print(f"{m:12s} budget {b:>3s}  mean micro-F1 {sum(vals) / len(vals):.4f}")
    print("svg bytes:", (d / "sweep.svg").stat().st_size)
