"""Quadratic MPECs from JSON documents, and the command line front end."""

import json
import os
import subprocess
import sys
import tempfile

from mpecfunnel import dump_quadratic_mpec, load_quadratic_mpec, solve

# min (x1-2)^2 + (x2-1)^2 (constant dropped), x1 + x2 = 1, 0 <= x1 _|_ x2 >= 0
text = dump_quadratic_mpec(P=[[2, 0], [0, 2]], c=[-4, -2],
                           G=([[1, 0]], [0]), H=([[0, 1]], [0]),
                           h=([[1, 1]], [-1]), x0=[1.5, 0.5], name="mixed_file")
problem = load_quadratic_mpec(text)
print(solve(problem).x_final)

with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "mixed.json")
    with open(path, "w") as fh:
        fh.write(text)
    result_path = os.path.join(tmp, "result.json")
    cmd = [sys.executable, "-m", "mpecfunnel", "solve", "--problem", path,
           "--trace", os.path.join(tmp, "trace.csv"), "--result", result_path]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    print(proc.stdout, "exit code", proc.returncode)
    with open(result_path) as fh:
        print(json.load(fh)["class"])
