"""Compare the compiled and numpy kernel backends on the valley scenario.

    python benchmarks/bench_backends.py --size 512 --steps 10
"""

import argparse
import time

from swflood import PhysicalParams, Stepper, backend
from swflood.stepper import KERNEL_IDS, STAGES, StageTimings
from swflood.validation.terrains import valley


def time_backend(name, ter, s0, src, steps, skip, workers):
    stp = Stepper(ter, PhysicalParams(), sources=src, skip=skip, workers=workers, backend=name)
    stp.step(s0.copy())
    s = s0.copy()
    tm = StageTimings(steps=0)
    t = time.perf_counter()
    for _ in range(steps):
        tm.add(stp.step(s).timings)
    return time.perf_counter() - t, tm, s


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--steps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--no-skip", action="store_true")
    args = ap.parse_args(argv)

    names = backend.available()
    ter, s0, src = valley(args.size, seed=args.seed)
    print(f"valley {args.size}x{args.size}, {args.steps} steps, skip={not args.no_skip}, "
          f"workers={args.workers}")
    runs = {}
    for name in names:
        runs[name] = time_backend(name, ter, s0, src, args.steps, not args.no_skip, args.workers)
        print(f"{name:<8} {runs[name][0]:8.3f} s  ({1e3 * runs[name][0] / args.steps:.1f} ms/step)")
    if len(runs) == 2:
        (wc, tc, sc), (wn, tn, sn) = runs["cython"], runs["numpy"]
        print(f"compiled speedup {wn / wc:.2f}x, states bitwise equal: {sc.bitwise_equal(sn)}")
        print(f"{'stage':<12} {'kernel':<6} {'cython ms':>10} {'numpy ms':>10} {'ratio':>7}")
        for k in STAGES:
            a = 1e3 * tc.seconds[k] / args.steps
            b = 1e3 * tn.seconds[k] / args.steps
            print(f"{k:<12} {KERNEL_IDS[k]:<6} {a:>10.2f} {b:>10.2f} {b / a if a else 0:>7.1f}")


if __name__ == "__main__":
    main()
