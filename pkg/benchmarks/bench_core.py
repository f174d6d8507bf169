"""Compiled core vs pure-Python fallback on the hot kernels.

    python3 benchmarks/bench_core.py [--repeat 5] [--n 500]

Prints the best-of-N wall time per operation and backend, plus the speed-up.
"""
import argparse
import timeit

import numpy as np

from lssvm_pso import _backend

KERNELS = {"linear": (0, 0.0, 0.0), "polynomial": (1, 2.0, 1.0), "rbf": (2, 1.5, 0.0), "mlp": (3, 0.5, -0.2)}


def cases(n, length):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(n, 6))
    close = 50 * np.exp(np.cumsum(rng.normal(0, 0.02, length)))
    high, low = close * 1.01, close * 0.99
    typical = (high + low + close) / 3
    volume = rng.integers(1, 10_000, length).astype(float)
    for name, (code, p1, p2) in KERNELS.items():
        yield f"gram_sym {name} n={n}", lambda m, c=code, a=p1, b=p2: m.gram_sym(X, c, a, b)
    yield f"gram_cross rbf {n}x{n}", lambda m: m.gram_cross(X, X, 2, 1.5, 0.0)
    yield f"rsi len={length}", lambda m: m.rsi(close, 14)
    yield f"mfi len={length}", lambda m: m.mfi(typical, volume, 14)
    yield f"stoch_k len={length}", lambda m: m.stoch_k(high, low, close, 14)
    yield f"ema len={length}", lambda m: m.ema(close, 0.15)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=500, help="Gram matrix size")
    ap.add_argument("--length", type=int, default=100_000, help="indicator series length")
    args = ap.parse_args()

    backends = sorted(_backend.BACKENDS)
    if "compiled" not in backends:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'operation':<28}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for label, fn in cases(args.n, args.length):
        times = {}
        for b in backends:
            mod = _backend.BACKENDS[b]
            times[b] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = f"{label:<28}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
        if len(backends) > 1:
            row += f"{times['python'] / times['compiled']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
