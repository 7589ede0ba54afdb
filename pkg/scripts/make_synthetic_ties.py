"""Write a synthetic tie CSV whose outcomes follow the scenario-2 model.

Useful for exercising `nwci analyze` end to end without the real dataset.
"""

import argparse

import numpy as np

from nwci.uefa import synthetic_ties, write_ties


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--n", type=int, default=1353)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    write_ties(synthetic_ties(args.n, np.random.default_rng(args.seed)), args.out)
    print(f"wrote {args.n} ties to {args.out}")


if __name__ == "__main__":
    main()
