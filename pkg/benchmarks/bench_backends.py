"""Compare the numba and numpy kernel backends on the hot workloads.

Runs each workload in a subprocess per backend (the flag is read at import
time) and prints a timing table.

Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOADS = {
    "bessel_zero_table": """
import numpy as np, mushroom.specfun as sf
cache = sf.ZeroCache(None)
for n in range(1, 201):
    cache.zeros(n, 40, save=False)
""",
    "quasimode_count_lambda150": """
from mushroom.geometry import MushroomGeometry
import mushroom.quasimodes as qm
import mushroom.specfun as sf
qm.counting(MushroomGeometry(1, 2, 1), 0.05, 150.0, cache=sf.ZeroCache(None))
""",
    "trace_1e6_bounces": """
import numpy as np
from mushroom import _kernels as K
N = 10**6
bx = np.empty(N); by = np.empty(N); bdx = np.empty(N); bdy = np.empty(N)
bw = np.empty(N, dtype=np.int64); bt = np.empty(N)
nb, tt, r = K.trace_mushroom(1.0, 2.0, 1.0, 0.3, -0.4, 0.6, 0.8,
                             N, 1e18, bx, by, bdx, bdy, bw, bt)
assert nb == N
""",
    "airy_zeros_k1000": """
import mushroom.specfun as sf
sf.airy_zeros(1000)
""",
}

QUICK_SCALE = {
    "bessel_zero_table": "for n in range(1, 51):",
    "trace_1e6_bounces": "N = 10**5",
}

RUNNER = """
import json, time, sys
import mushroom._backend as B
code = sys.stdin.read()
compiled = compile(code, "<workload>", "exec")
# one warm-up pass so numba compilation does not pollute the timing
exec(compiled, {})
t0 = time.perf_counter()
exec(compiled, {})
dt = time.perf_counter() - t0
print(json.dumps({"backend": B.BACKEND, "seconds": dt}))
"""


def run(name, code, backend):
    env = dict(os.environ, MUSHROOM_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", RUNNER], input=code,
                          capture_output=True, text=True, env=env)
    if proc.returncode != 0:
        raise RuntimeError(f"{name} [{backend}] failed:\n{proc.stderr}")
    payload = json.loads(proc.stdout.strip().splitlines()[-1])
    assert payload["backend"] == backend
    return payload["seconds"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true",
                    help="smaller workloads (CI-sized)")
    args = ap.parse_args()
    rows = []
    for name, code in WORKLOADS.items():
        if args.quick and name in QUICK_SCALE:
            patch = QUICK_SCALE[name]
            key = patch.split("=")[0].split()[-1] if "=" in patch else None
            if name == "bessel_zero_table":
                code = code.replace("for n in range(1, 201):", patch)
            else:
                code = code.replace("N = 10**6", patch)
        t_nb = run(name, code, "numba")
        t_np = run(name, code, "numpy")
        rows.append((name, t_nb, t_np, t_np / t_nb))
    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'numba [s]':>10}  {'numpy [s]':>10}  "
          f"{'speedup':>8}")
    for name, t_nb, t_np, speed in rows:
        print(f"{name:<{width}}  {t_nb:>10.3f}  {t_np:>10.3f}  {speed:>7.1f}x")


if __name__ == "__main__":
    main()
