"""
Driving the command-line tool
=============================

Writes a small prediction file and runs each subcommand of ``tta-lab``
in-process, printing the reports.  The same commands work from a shell,
e.g. ``tta-lab optimize --input preds.csv --output report.json``.
"""

# %%
import json
import tempfile
from pathlib import Path

import numpy as np

from tta_lab import PredictionSet, write_predictions
from tta_lab.cli import main

work = Path(tempfile.mkdtemp())
rng = np.random.default_rng(2)
y = rng.normal(size=300)
shared = rng.normal(size=300)
preds = np.column_stack([y + shared, y + shared + 0.1 * rng.normal(size=300), y + 2 * rng.normal(size=300)])
write_predictions(PredictionSet(y, preds, ("identity", "flip", "noisy")), work / "preds.csv")

# %%
for cmd in ("estimate-gamma", "optimize", "prune", "decompose"):
    out = work / f"{cmd}.json"
    code = main([cmd, "--input", str(work / "preds.csv"), "--output", str(out)])
    print(f"--- {cmd} (exit {code})")
    print(json.dumps(json.loads(out.read_text())["report"], indent=1)[:600])

# %%
code = main(["simulate", "--rho-grid", "0.1,0.33,0.66,0.99", "--n-trials", "500",
             "--format", "csv", "--output", str(work / "fig1.csv")])
print((work / "fig1.csv").read_text())

# %%
code = main(["verify", "--output", str(work / "verify.json")])
print("verify exit code:", code)
