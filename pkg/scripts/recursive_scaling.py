"""Queries needed by the recursive algorithm as the search space grows.

For each register size the recursion is run until the success probability
passes 1/2; the log-log slope of queries against 1/α is compared with the
exponent 1 + p implied by the noise level.

    python3 scripts/recursive_scaling.py --delta 0.2 --min-qubits 6 --max-qubits 18
"""

import argparse
import math

import numpy as np

from robust_search.search import RecursiveUnitary, exponent_p
from robust_search.selective import NoiseSpec, sample_perturbed_inversion
from robust_search.statevector import TargetSet, WalshHadamard, target_projection


def queries_to_half(n_qubits, delta, seed, max_level=12):
    dim = 1 << n_qubits
    t = TargetSet(dim, (dim // 3,))
    ns = NoiseSpec(delta_t=delta, delta_0=delta, seed=seed)
    s0 = sample_perturbed_inversion(dim, [0], ns, "zero")
    st = sample_perturbed_inversion(dim, t, ns, "target")
    u = WalshHadamard(dim)
    for level in range(max_level + 1):
        op = RecursiveUnitary(u, s0, st, level)
        a = target_projection(op.column0(), t)
        if a * a >= 0.5:
            return op.queries, a
    return None, a


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", type=float, default=0.2)
    ap.add_argument("--min-qubits", type=int, default=6)
    ap.add_argument("--max-qubits", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    xs, ys = [], []
    print("n_qubits,inv_alpha,queries,final_alpha")
    for n in range(args.min_qubits, args.max_qubits + 1, 2):
        q, a = queries_to_half(n, args.delta, args.seed)
        print(f"{n},{2 ** (n / 2):.6g},{q},{a:.6f}")
        if q:
            xs.append(math.log(2 ** (n / 2)))
            ys.append(math.log(q))
    if len(xs) >= 2:
        slope = np.polyfit(xs, ys, 1)[0]
        print(f"# fitted exponent {slope:.3f}; predicted 1+p = {1 + exponent_p(args.delta, args.delta):.3f}")


if __name__ == "__main__":
    main()
