"""Compare the Cython and pure-Python hot kernels.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat 5]``
"""
import argparse
import timeit

import numpy as np

from degen_control import kernels


def cases():
    x = np.linspace(0.0, 199.0, 20001)
    lam = (np.arange(1, 13) * np.pi) ** 2
    f = np.cos(np.linspace(0.0, 40.0, 2049))
    h = 1.0 / 2048
    return {
        "jv nu=0.5 (20k pts)": lambda k: k.jv(0.5, x),
        "jv nu=17 (20k pts)": lambda k: k.jv(17.0, x),
        "duhamel_final 12x2049": lambda k: k.duhamel_final(lam, f, h),
        "duhamel_path 12x2049": lambda k: k.duhamel_path(lam, f, h),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    names = kernels.available()
    print(f"{'case':28s}" + "".join(f"{n:>14s}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, fn in cases().items():
        times = []
        for n in names:
            impl = kernels.get(n)
            fn(impl)
            times.append(min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat)))
        row = f"{label:28s}" + "".join(f"{t * 1e3:12.2f}ms" for t in times)
        if len(names) > 1:
            row += f"   {times[names.index('python')] / times[names.index('cython')]:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
