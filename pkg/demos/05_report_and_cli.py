"""The full pipeline and its command-line front end.

full_report measures the bias first.  Components below the threshold get
NED := ED, the others get a divergent ED plus a dedicated NED estimate.  A
containment diagnostic then checks Lyapunov inside NED inside ED per
component.  The same pipeline runs from the shell as `dichospec report`.

Run with:  python3 demos/05_report_and_cli.py
"""
# %% Library call
import io
import os
import tempfile

from dichospec import builtin, full_report
from dichospec.cli import main

report = full_report(builtin("intro-diagonal"))
for j in (1, 2):
    lyap, ned, ed = report.intervals(j)
    print(f"component {j} ({report.bias.decision(j)}):")
    print(f"  Lyapunov [{lyap.lower:+.4f}, {lyap.upper:+.4f}]")
    print(f"  NED      [{ned.lower:+.4f}, {ned.upper:+.4f}]")
    print(f"  ED       [{ed.lower:+.4g}, {ed.upper:+.4g}] divergent={ed.divergent}")
print("containment violations:", report.containment_violations)

# %% The same through the CLI, driven by an INI file
config = """
[system]
builtin = planar-nubg

[bias]
H = 100
T1 = 1e4
T2 = 1e5
"""
with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "bias.ini")
    with open(path, "w") as fh:
        fh.write(config)
    out = io.StringIO()
    status = main(["bias", "--config", path, "--format", "table"], stdout=out)
    print(f"\n$ dichospec bias --config bias.ini --format table   (exit {status})")
    print(out.getvalue())
