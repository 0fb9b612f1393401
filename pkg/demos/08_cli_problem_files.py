"""The command-line front end: problem files in, reports out.

`walkergeom check` runs the requested residual checks against a metric or
extension problem file, `build` emits the built extension's components as a
metric problem, and `transport` runs the file's transport section.  Reports
are deterministic for a fixed (file, seed) pair.
"""

import json
import pathlib
import tempfile

from walkergeom.cli import main

HERE = pathlib.Path(__file__).parent
spec_path = str(HERE / "specs" / "extension_r1m1.json")

print("=== check (text report)")
main(["check", spec_path])

print("=== build (component expressions)")
main(["build", spec_path])

print("=== transport section")
main(["transport", spec_path])

print("=== structured report round trip")
with tempfile.TemporaryDirectory() as tmp:
    out = pathlib.Path(tmp) / "report.json"
    code = main(["check", spec_path, "--format", "report-structured",
                 "--output", str(out), "--samples", "40"])
    payload = json.loads(out.read_text())
    print("exit code:", code, " verdict:", payload["verdict"],
          " checks:", len(payload["checks"]))

print("=== a failing problem exits 1")
with tempfile.TemporaryDirectory() as tmp:
    bad = pathlib.Path(tmp) / "identity.json"
    bad.write_text(json.dumps({
        "kind": "metric", "n": 2,
        "g_1_1": "1", "g_2_2": "1",
        "checks": ["null"],
    }))
    print("exit code:", main(["check", str(bad)]))
