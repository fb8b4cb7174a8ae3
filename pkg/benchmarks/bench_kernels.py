"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py --repeat 5
"""
import argparse
import random
import timeit

from fab._kernels import compiled_backend, python_backend
from fab.fixtures import get_fixture


def cases(rnd):
    ed = get_fixture("even-depth")
    n = len(ed.H)
    # S7 from a transposition and a 7-cycle: 5040 elements
    s7 = [(1, 0, 2, 3, 4, 5, 6), (1, 2, 3, 4, 5, 6, 0)]
    mats = [tuple(tuple(rnd.randint(0, 3) for _ in range(6)) for _ in range(6)) for _ in range(2)]
    table = [[rnd.randrange(16) for _ in range(16)] for _ in range(16)]
    masks = [rnd.getrandbits(16) for _ in range(200)]
    xs = [tuple(rnd.randrange(40) for _ in range(40)) for _ in range(200)]
    return {
        "closure S7": lambda k: k.closure(s7, 7),
        "closure even-depth V": lambda k: k.closure(ed.algebra.gens, n),
        "orbit x200": lambda k: [k.orbit(x, 40) for x in xs],
        "compose x200": lambda k: [k.compose(x, y) for x, y in zip(xs, xs[1:])],
        "mat_mul 6x6 x100": lambda k: [k.mat_mul(mats[0], mats[1], 2, 1) for _ in range(100)],
        "sumset x200": lambda k: [k.sumset(a, b, table) for a, b in zip(masks, masks[1:])],
        "imageset x200": lambda k: [k.imageset(a, table[0]) for a in masks],
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--number", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    backends = [("python", python_backend)]
    if compiled_backend is not None:
        backends.append(("cython", compiled_backend))
    else:
        print("compiled kernels not built; timing the fallback only")
    print(f"{'kernel':24s}" + "".join(f"{nm:>12s}" for nm, _ in backends) + "     speedup")
    for name, fn in cases(random.Random(args.seed)).items():
        ts = [min(timeit.repeat(lambda: fn(k), number=args.number, repeat=args.repeat)) / args.number
              for _, k in backends]
        sp = f"{ts[0] / ts[1]:10.1f}x" if len(ts) > 1 else ""
        print(f"{name:24s}" + "".join(f"{t * 1e3:10.3f}ms" for t in ts) + sp)


if __name__ == "__main__":
    main()
