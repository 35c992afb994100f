"""Time the compiled and numpy stepping kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--sites 512 4096 32768] [--steps 1000]

Each timing is the best of ``--repeat`` runs; the results of both backends are
also compared so a speedup from a wrong kernel cannot go unnoticed.
"""

import argparse
import json
import timeit

import numpy as np

from dtqw_lab import kernels
from dtqw_lab.coin import build_coin, hadamard


def _inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    a /= np.linalg.norm(a)
    phase = np.exp(1j * rng.uniform(-np.pi, np.pi, n))
    return a[:, 0].copy(), a[:, 1].copy(), phase


def bench(n, steps, repeat):
    up, down, phase = _inputs(n)
    coin = build_coin(hadamard()).entries()
    cases = {
        "walk": lambda mod: mod.walk_steps(up, down, coin, None, steps, False),
        "walk+potential": lambda mod: mod.walk_steps(up, down, coin, phase, steps, False),
        "dirac": lambda mod: mod.dirac_steps(up, down, 0.98, 0.199, steps),
    }
    compiled = kernels.compiled_backend()
    rows = []
    for name, call in cases.items():
        t_py = min(timeit.repeat(lambda: call(kernels.python_backend), number=1, repeat=repeat))
        row = {"kernel": name, "sites": n, "steps": steps, "python_s": t_py}
        if compiled is not None:
            t_c = min(timeit.repeat(lambda: call(compiled), number=1, repeat=repeat))
            a, b = call(compiled), call(kernels.python_backend)
            row.update(
                compiled_s=t_c,
                speedup=t_py / t_c,
                max_diff=float(max(np.max(np.abs(a[0] - b[0])), np.max(np.abs(a[1] - b[1])))),
            )
        rows.append(row)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sites", type=int, nargs="+", default=[512, 4096, 32768])
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print rows as JSON")
    args = ap.parse_args()

    rows = [r for n in args.sites for r in bench(n, args.steps, args.repeat)]
    if args.json:
        print(json.dumps(rows, indent=1))
        return
    if kernels.compiled_backend() is None:
        print("compiled extension not built; timing the numpy backend only")
    print(f"{'kernel':<16}{'sites':>8}{'steps':>7}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>9}{'max diff':>10}")
    for r in rows:
        print(
            f"{r['kernel']:<16}{r['sites']:>8}{r['steps']:>7}{r['python_s']:>12.4f}"
            f"{r.get('compiled_s', float('nan')):>12.4f}{r.get('speedup', float('nan')):>9.1f}"
            f"{r.get('max_diff', float('nan')):>10.1e}"
        )


if __name__ == "__main__":
    main()
