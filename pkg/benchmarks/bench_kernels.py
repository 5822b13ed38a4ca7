"""Compare the compiled and pure-Python kernels on the hot paths.

    python3 benchmarks/bench_kernels.py [--quick]
"""
import argparse
import random
import time

from tmdtochain import tmdto
from tmdtochain._backend import available
from tmdtochain.tmdto import TableSpec


def timed(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run(quick=False):
    rows, t = (256, 16) if quick else (1024, 16)
    spec = TableSpec(j=0, ell=20, M=rows, t=t, seed=1)
    challenges = [random.Random(2).getrandbits(20) for _ in range(200 if quick else 5000)]
    prefix = bytes(range(40))
    pow_calls = 20 if quick else 500
    results = {}
    for k in available():
        table = tmdto.build_table(spec, 32, kernels=k)
        starts = table.starts
        view = table.view(k)

        def invert_all():
            for c in challenges:
                k.invert(view, c, t, 32, 20, True)

        def pow_all():
            for s in range(pow_calls):
                k.mini_pow(prefix, s * 7919, 8, 1 << 16)

        results[k.NAME] = {
            "table build": timed(lambda: k.chain_ends(starts, t, 32, 20, True)),
            "invert": timed(invert_all),
            "mini-pow d=8": timed(pow_all),
        }
    return results


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true", help="small workloads")
    args = parser.parse_args(argv)
    results = run(args.quick)
    names = list(results)
    print(f"{'kernel':<14}" + "".join(f"{n:>14}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for task in next(iter(results.values())):
        cells = [results[n][task] for n in names]
        line = f"{task:<14}" + "".join(f"{c * 1e3:>12.2f}ms" for c in cells)
        if len(cells) == 2:
            line += f"{cells[1] / cells[0]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
