"""Run the Hoffman-Ostenhof, Lieb-Oxford and Hardy-Lieb-Thirring probes on a few d=1 states.

    python3 scripts/manybody_probes.py --seed 3
"""

import argparse

import numpy as np

from coulomb_gn import manybody, profiles
from coulomb_gn.acceptance import random_grid_state


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--s", type=float, default=0.25, help="order for the energy probe")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    bump = profiles.parametric("bump", (0.5, 0.8), 1)
    states = {f"bump x{N}": manybody.WavefunctionN.product(bump, N) for N in (2, 3)}
    states["random grid N=2"] = random_grid_state(rng, 2, 48)

    print("Hoffman-Ostenhof  (lhs <= rhs)")
    for name, psi in states.items():
        for s in (0.5, 1.0):
            r = manybody.hoffman_ostenhof_report(psi, s)
            print(f"  {name:<16} s={s:<4} lhs={r.lhs:.6g} rhs={r.rhs:.6g} gap={r.gap:+.3e}")

    print("Lieb-Oxford  (residual >= 0)")
    for name, psi in states.items():
        for g in (0.25, 0.5):
            r = manybody.lieb_oxford_report(psi, g)
            print(f"  {name:<16} gamma={g:<4} residual={r.residual:+.4e} rho*/rho ratio={r.maximal_ratio:.3f}")

    print(f"Hardy-Lieb-Thirring at s={args.s}")
    for name, psi in states.items():
        r = manybody.hlt_report(psi, args.s)
        print(f"  {name:<16} E={r.energy:+.5g} repulsion={r.repulsion:.5g} C_emp={r.empirical_constant:.4g}")


if __name__ == "__main__":
    main()
