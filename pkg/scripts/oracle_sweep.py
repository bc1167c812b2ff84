"""Compare the closed-form objective with the sampled global minimum across dimensions.

For each dimension, prints how often the oracle beat the closed form (it never
should) and how close the refined oracle got to it.
"""
import argparse
import time

import numpy as np

from plucker_correction import VecPair, correct_lmpc
from plucker_correction.oracle import global_min_search_batch


def sweep(dim, inputs, samples, seed, refine):
    rows = np.random.default_rng(seed).uniform(-1, 1, (inputs, 2 * dim))
    pairs = [VecPair.from_flat(r) for r in rows]
    lm = [correct_lmpc(p).objective for p in pairs]
    t0 = time.perf_counter()
    reps = global_min_search_batch(pairs, samples, seed, refine=refine, method_objectives=lm)
    rel = np.array([(r.best_objective - r.method_objective) / r.method_objective for r in reps])
    return rel, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", default="2,3,4,8")
    ap.add_argument("--inputs", type=int, default=200)
    ap.add_argument("--samples", type=int, default=10 ** 4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-refine", action="store_true")
    args = ap.parse_args()
    print("dim  beaten  median_rel_gap  max_rel_gap  seconds")
    for dim in map(int, args.dims.split(",")):
        rel, dt = sweep(dim, args.inputs, args.samples, args.seed, not args.no_refine)
        beaten = int((rel < -1e-9).sum())
        print(f"{dim:3d}  {beaten:6d}  {np.median(rel):14.3e}  {rel.max():11.3e}  {dt:7.2f}")


if __name__ == "__main__":
    main()
