"""
Studies, files and the command line
===================================

Every study is available as a function and as a subcommand of
``python3 -m mcfv``.  Here a small EOC study is run both ways and the
written CSV read back.
"""

import csv
import subprocess
import sys
import tempfile
from pathlib import Path

from mcfv.cli import diagnose
from mcfv.config import load_config
from mcfv.studies import run_eoc, run_single

configs = Path(__file__).resolve().parents[1] / "configs"
spec = load_config(configs / "manufactured.ini")

report, rel = run_eoc(spec, meshes=[8, 16, 32])
for row in report.rows:
    print(row["N"], row["rho1_eoc"], row.get("rho1_err"))
print("relative entropy:", [round(r["H"], 6) for r in rel.rows])

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp)
    run_dir = run_single(load_config(configs / "uniform_1d.ini"), out / "uniform")
    print("run files:", sorted(p.name for p in run_dir.iterdir()))
    print("diagnose:", diagnose(run_dir))

    cmd = [sys.executable, "-m", "mcfv", "eoc", str(configs / "manufactured.ini"), "-o", str(out / "eoc")]
    print("$", " ".join(cmd[1:]))
    subprocess.run(cmd, check=True)
    with open(out / "eoc" / "report_eoc.csv") as fh:
        for row in csv.DictReader(fh):
            print(row["N"], row["rho1_err"], row["rho1_eoc"])
