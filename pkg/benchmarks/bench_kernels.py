"""Compiled vs pure-Python kernels: RK4 radial shooting and marching squares.

Run ``python3 benchmarks/bench_kernels.py``.  Each kernel is timed on both
backends with the best of several repeats, and outputs are compared.
"""
import argparse
import timeit

import numpy as np

from finslerlab import _pure
from finslerlab.kernels import EXPONENTIAL

try:
    from finslerlab import _core
except ImportError:
    _core = None


def _cases(steps, grid):
    h = 10.0 / steps
    rk = (EXPONENTIAL, 1.0, 0.0, 3, 0.1, -0.001, -0.0333, h, steps, 1e12)
    x = np.linspace(-1.5, 1.5, grid)
    X, Y = np.meshgrid(x, x, indexing="ij")
    u = np.ascontiguousarray(1.0 - np.sqrt(X**2 / 1.3 + Y**2))
    return rk, (u, 0.4)


def bench(steps=20000, grid=512, repeat=5):
    rk, cc = _cases(steps, grid)
    rows = []
    for name, args in (("rk4_radial", rk), ("contour_cells", cc)):
        t_py = min(timeit.repeat(lambda: getattr(_pure, name)(*args), number=1, repeat=repeat))
        if _core is None:
            rows.append((name, t_py, float("nan"), float("nan"), float("nan")))
            continue
        t_c = min(timeit.repeat(lambda: getattr(_core, name)(*args), number=1, repeat=repeat))
        a, b = getattr(_pure, name)(*args), getattr(_core, name)(*args)
        diff = max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) for x, y in zip(a, b))
        rows.append((name, t_py, t_c, t_py / t_c, diff))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--grid", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()
    print(f"{'kernel':<15}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max diff':>12}")
    for name, tp, tc, sp, d in bench(a.steps, a.grid, a.repeat):
        print(f"{name:<15}{tp:>12.4g}{tc:>12.4g}{sp:>10.1f}{d:>12.2e}")


if __name__ == "__main__":
    main()
