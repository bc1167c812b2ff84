"""Accuracy of each method as b approaches a.

Evaluated literally, the closed form divides by 1 - alpha^2, which vanishes as
a -> +-b, so its error grows roughly like eps / d^2 for relative separation d.
The default evaluation and the SVD routes stay near eps. Objective errors are
measured against a 50-digit mpmath evaluation of the same closed form.
"""
import argparse

import mpmath
import numpy as np

from plucker_correction import VecPair, correct_bs, correct_lmpc
from plucker_correction.bs import correct_bs_lsvd

mpmath.mp.dps = 50


def exact_objective(a, b):
    a = [mpmath.mpf(v) for v in a]
    b = [mpmath.mpf(v) for v in b]
    p = mpmath.fsum(x * y for x, y in zip(a, b))
    q = mpmath.fsum(x * x for x in a + b)
    alpha = 2 * p / (q + mpmath.sqrt(q * q - 4 * p * p))
    x = [(ai - alpha * bi) / (1 - alpha ** 2) for ai, bi in zip(a, b)]
    y = [(bi - alpha * ai) / (1 - alpha ** 2) for ai, bi in zip(a, b)]
    return mpmath.fsum((ai - xi) ** 2 for ai, xi in zip(a, x)) + \
        mpmath.fsum((bi - yi) ** 2 for bi, yi in zip(b, y))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--per-level", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print("separation  lmpc_rel_err  direct_rel_err  bs_rel_err  lsvd_rel_err  lmpc_klein  direct_klein")
    for k in range(1, 8):
        d = 10.0 ** -k
        errs = {"lmpc": [], "direct": [], "bs": [], "lsvd": [], "klein": [], "dklein": []}
        for _ in range(args.per_level):
            a = rng.uniform(-1, 1, 3)
            b = a + d * np.linalg.norm(a) * rng.normal(size=3) / np.sqrt(3)
            pair = VecPair(a, b)
            ref = exact_objective(a, b)
            res = correct_lmpc(pair)
            lit = correct_lmpc(pair, form="direct")
            for key, val in (("lmpc", res.objective), ("direct", lit.objective),
                             ("bs", correct_bs(pair).objective),
                             ("lsvd", correct_bs_lsvd(pair).objective)):
                errs[key].append(float(abs(val - ref) / ref))
            for key, r in (("klein", res), ("dklein", lit)):
                errs[key].append(abs(r.x @ r.y) / (1 + np.linalg.norm(r.x) * np.linalg.norm(r.y)))
        print(f"{d:10.0e}  {max(errs['lmpc']):12.2e}  {max(errs['direct']):14.2e}  "
              f"{max(errs['bs']):10.2e}  {max(errs['lsvd']):12.2e}  {max(errs['klein']):10.2e}  "
              f"{max(errs['dklein']):12.2e}")


if __name__ == "__main__":
    main()
