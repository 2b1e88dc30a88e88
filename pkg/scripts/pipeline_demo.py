"""Walk one half of the symbolic pipeline and print the size of every stage.

With --show the final stage is printed in full.
"""

import argparse
import time

from nctorus import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--half", choices=("functions", "forms"), default="functions")
    ap.add_argument("--through", choices=cli.STAGES, default="curvature")
    ap.add_argument("--show", action="store_true")
    args = ap.parse_args()

    t = time.perf_counter()
    rep = cli.run_pipeline(args.half, args.through)
    for st in rep["stages"]:
        print(f"{st['stage']:>11}: {st['terms']:5d} terms")
    print(f"{time.perf_counter() - t:.1f}s")
    if args.show:
        print(rep["stages"][-1]["text"].replace("; ", "\n"))


if __name__ == "__main__":
    main()
