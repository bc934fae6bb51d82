"""Compare the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--log2n 17] [--repeat 5]

Each backend runs in a fresh interpreter because the backend flag is read
from the environment. The first (compile) call is excluded from the timings.
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from mfxwl import _accel
from mfxwl.core import MomentGrid, partition_table
from mfxwl.dwt import haar_pyramid
from mfxwl.leaders import wavelet_leaders

log2n, repeat = int(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
x, y = np.cumsum(rng.standard_normal((2, 1 << log2n)), axis=1)
grid = MomentGrid.uniform((-4, 4), (-4, 4), 0.5)

def run():
    t0 = time.perf_counter()
    Lx = wavelet_leaders(haar_pyramid(x))
    Ly = wavelet_leaders(haar_pyramid(y))
    t1 = time.perf_counter()
    t = partition_table(Lx, Ly, grid)
    t2 = time.perf_counter()
    return t1 - t0, t2 - t1, t.log_S

run()
lead, part = [], []
for _ in range(repeat):
    a, b, logS = run()
    lead.append(a); part.append(b)
print(json.dumps({"backend": _accel.backend_name(), "leaders": min(lead), "partition": min(part),
                  "checksum": float(np.nansum(logS))}))
"""


def run_backend(disable, log2n, repeat):
    env = dict(os.environ)
    if disable:
        env["MFXWL_DISABLE_NUMBA"] = "1"
    else:
        env.pop("MFXWL_DISABLE_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", CHILD, str(log2n), str(repeat)],
                         env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--log2n", type=int, default=17)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rows = [run_backend(False, args.log2n, args.repeat), run_backend(True, args.log2n, args.repeat)]
    print(f"N = 2^{args.log2n}, 17x17 moment grid, best of {args.repeat}")
    print(f"{'backend':<8} {'leaders (s)':>12} {'partition (s)':>14}")
    for r in rows:
        print(f"{r['backend']:<8} {r['leaders']:>12.4f} {r['partition']:>14.4f}")
    nb, npy = rows
    print(f"speedup  {npy['leaders'] / nb['leaders']:>12.1f}x {npy['partition'] / nb['partition']:>13.1f}x")
    rel = abs(nb["checksum"] - npy["checksum"]) / abs(npy["checksum"])
    print(f"checksum relative difference {rel:.1e}")


if __name__ == "__main__":
    main()
