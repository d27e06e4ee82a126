"""Multistart simplex search for the largest GN ratio over a Gaussian-shell mixture family.

    python3 scripts/best_constant_search.py --budget 200 --starts 4
"""

import argparse
import json
from pathlib import Path

from coulomb_gn import inequality, params, profiles
from coulomb_gn.quad import QuadratureSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget", type=int, default=200)
    ap.add_argument("--starts", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--target-rel-err", type=float, default=1e-5)
    ap.add_argument("--out", type=Path, default=Path("search_out.json"))
    args = ap.parse_args()

    ps = params.lions_params()
    spec = QuadratureSpec(target_rel_err=args.target_rel_err)
    single = inequality.gn_ratio(profiles.gaussian(3, 1.0), ps, spec).ratio
    res = inequality.estimate_best_constant(ps, inequality.mixture_family(3), budget=args.budget, spec=spec,
                                            starts=args.starts, seed=args.seed)
    print(f"single Gaussian ratio : {single:.8f}")
    print(f"search sup ratio      : {res.sup_ratio:.8f}  ({res.status}, {res.evaluations} evaluations)")
    print(f"argmax                : {[round(x, 4) for x in res.argmax]}")
    args.out.write_text(json.dumps({"single_gaussian": single, **res.to_json()}, indent=1))


if __name__ == "__main__":
    main()
