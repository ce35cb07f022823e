"""Peak target probability of the analog search Hamiltonians against the perturbation s/α.

    python3 scripts/hamiltonian_scan.py --n-qubits 8 --ratios 0 0.5 1 2 4 8
"""

import argparse
import math

from robust_search.hamiltonian import build_hamiltonian, scan_target_probability
from robust_search.search import compute_subspace_frame
from robust_search.selective import build_selective_rotation
from robust_search.statevector import TargetSet, WalshHadamard


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-qubits", type=int, default=8)
    ap.add_argument("--ratios", type=float, nargs="+", default=[0, 0.5, 1, 2, 4, 8])
    ap.add_argument("--phi", type=float, default=math.pi / 2, help="rotation angle for the 'new' kind")
    ap.add_argument("--samples", type=int, default=4001)
    args = ap.parse_args(argv)

    dim = 1 << args.n_qubits
    t = TargetSet(dim, (5,))
    u = WalshHadamard(dim)
    alpha = dim ** -0.5
    t_max = 4 * math.pi / alpha
    print("kind,s_over_alpha,peak_time,peak_probability")
    for r in args.ratios:
        h = build_hamiltonian("fg_perturbed", u, t, s=r * alpha)
        sc = scan_target_probability(h, t, t_max, args.samples)
        print(f"fg_perturbed,{r},{sc.peak_time:.6g},{sc.peak_probability:.6g}")
    rt = build_selective_rotation(dim, t, args.phi)
    h = build_hamiltonian("new", u, t, rt=rt)
    frame = compute_subspace_frame(u, rt, t)
    for label, measure in (("new:target", t), ("new:tau", frame.tau), ("new:sigma", frame.sigma)):
        sc = scan_target_probability(h, measure, t_max, args.samples)
        print(f"{label},,{sc.peak_time:.6g},{sc.peak_probability:.6g}")


if __name__ == "__main__":
    main()
