"""Time the compiled and pure-Python kernels side by side.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints best-of-repeat seconds per call and the speedup for each kernel.
"""
import argparse
import timeit

from mzcalc import kernels

CASES = {
    "residue_sum n=10^5": lambda impl: kernels.residue_sum(100_003, 10**7 + 19, 0, 100_003, impl=impl),
    "perturbed_sum n=10^4": lambda impl: kernels.perturbed_sum(
        10_007, 10_007 / (4 * 10**7 - 1), 10**7, 0, 10_007, impl=impl),
    "path_sum 3 loops K=10^4": lambda impl: kernels.path_sum(
        [97, 101, 103], [1, -1, 1], 10**6 + 3, 49, 10_000, impl=impl),
    "path_sum 7 loops K=10^4": lambda impl: kernels.path_sum(
        [3, 5, 7, 11, 13, 17, 19], [-1, 1, 1, -1, 1, -1, 1], 9_699_691, 7, 10_000, impl=impl),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; timing the Python fallback only")
    names = list(backends)
    print(f"{'kernel':<26}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in CASES.items():
        best = {}
        for name, impl in backends.items():
            results = {fn(impl) for _ in range(2)}
            assert len(results) == 1
            best[name] = min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat))
        row = f"{label:<26}" + "".join(f"{best[n]:>11.5f}s" for n in names)
        if len(names) > 1:
            row += f"{best['python'] / best['cython']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
