"""Growth of the bump-train ratio for an inadmissible exponent vs the Lions boundary case.

    python3 scripts/counterexample_scan.py --m 2 4 8 16 32 --out scan_out
"""

import argparse
import json
from pathlib import Path

from coulomb_gn import params
from coulomb_gn.acceptance import inadmissible_preset
from coulomb_gn.inequality import counterexample_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, nargs="+", default=[2, 4, 8, 16, 32])
    ap.add_argument("--out", type=Path, default=Path("scan_out"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    cases = {"inadmissible": inadmissible_preset(), "lions": params.lions_params()}
    summary = {}
    for name, ps in cases.items():
        res = counterexample_scan(ps, args.m)
        (args.out / f"{name}.csv").write_text(res.to_csv())
        summary[name] = {"gamma": res.gamma, "slope": res.slope, "predicted_slope": res.predicted_slope}
        print(f"{name:>12}: gamma={res.gamma:.4g}  fitted slope={res.slope:+.4f}  predicted={res.predicted_slope:+.4f}")
        for m, r in zip(res.m_values, res.ratio_pow):
            print(f"{'':>14}m={m:<4d} ratio^gamma={r:.6g}")
    (args.out / "summary.json").write_text(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
