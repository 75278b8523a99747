"""Compare the compiled and pure-Python kernels.

Micro timings call both kernel modules directly on the same inputs; the
end-to-end timings run the checker in a subprocess per backend so that the
import-time selection is exercised as users see it.

    python benchmarks/bench_kernels.py [--repeat N] [--horizon K]
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from pomdp_cegar import _pykernels

try:
    from pomdp_cegar import _ckernels
except ImportError:
    _ckernels = None

END_TO_END = """
import time
from pomdp_cegar import coarsest_partition, corresponding_waz, model_check, parity_chain, parse_spec, quotient
from pomdp_cegar.kernels import BACKEND
w = corresponding_waz(parity_chain(20))
m0 = quotient(w, coarsest_partition(w))
spec = parse_spec('P<=0.45 [ true U<={k} "fail" ]')
start = time.perf_counter()
for _ in range({repeat}):
    model_check(m0, spec, early_exit=False, memo_budget=10 ** 7)
print(BACKEND, (time.perf_counter() - start) / {repeat})
"""


def micro_inputs(rng, n=40, big=False):
    rows = []
    for _ in range(n):
        succ = rng.sample(range(n), 4)
        rows.append([(j, rng.randint(1, 10 ** 6)) for j in succ])
    scale = 10 ** 40 if big else 10 ** 4
    vec = tuple(rng.randint(0, scale) for _ in range(n))
    zgroups = [tuple(range(0, n, 2)), tuple(range(1, n, 2))]
    edges = [(u, v, rng.randint(1, 50)) for u in range(n) for v in rng.sample(range(n), 3) if u != v]
    return rows, vec, zgroups, edges


def micro(repeat):
    rng = random.Random(1)
    results = []
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    for label, big in (("small ints", False), ("big ints", True)):
        rows, vec, zgroups, edges = micro_inputs(rng, big=big)
        for name, fn in (("propagate", lambda m: m.propagate(rows, vec)),
                         ("children", lambda m: m.children(rows, vec, zgroups)),
                         ("max_flow", lambda m: m.max_flow(40, edges, 0, 39))):
            row = [f"{name} ({label})"]
            for _, mod in backends:
                t = min(timeit.repeat(lambda: fn(mod), number=200, repeat=repeat)) / 200
                row.append(t)
            results.append(row)
    return [b for b, _ in backends], results


def end_to_end(horizon, repeat):
    out = {}
    for flag in ("1", ""):
        env = dict(os.environ, POMDP_CEGAR_PURE_PYTHON=flag)
        code = END_TO_END.format(k=horizon, repeat=repeat)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        name, secs = res.stdout.split()
        out[name] = float(secs)
    return out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--horizon", type=int, default=14, help="depth for the end-to-end check")
    args = parser.parse_args(argv)

    names, rows = micro(args.repeat)
    print(f"{'kernel':28}" + "".join(f"{n:>14}" for n in names) + ("      speed-up" if len(names) > 1 else ""))
    for label, *times in rows:
        line = f"{label:28}" + "".join(f"{t * 1e6:11.1f} us" for t in times)
        if len(times) > 1:
            line += f"{times[0] / times[1]:13.2f}x"
        print(line)
    e2e = end_to_end(args.horizon, max(1, args.repeat // 2))
    print(f"\nexact check of the first quotient, horizon {args.horizon}, no early exit:")
    for name, secs in e2e.items():
        print(f"  {name:8} {secs:8.3f} s")
    if len(e2e) == 2:
        print(f"  speed-up {e2e['python'] / e2e['cython']:.2f}x")


if __name__ == "__main__":
    main()
