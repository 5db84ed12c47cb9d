"""Certify sigma_1 for N = 3..20 and print the enclosure and gap tables.

Usage: python3 scripts/reproduce_table.py [--m 320] [--dps 140] [--json out.json]
"""

import argparse
import json
import time

from polygon_steklov import interval_core as ic
from polygon_steklov.asymptotics_constants import gap_verification
from polygon_steklov.certification import sigma_enclosure


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=320)
    ap.add_argument("--dps", type=int, default=140)
    ap.add_argument("--from", dest="n_from", type=int, default=3)
    ap.add_argument("--to", dest="n_to", type=int, default=20)
    ap.add_argument("--json", help="also write the rows here")
    args = ap.parse_args()
    encs, rows = [], []
    for n in range(args.n_from, args.n_to + 1):
        t = time.perf_counter()
        e = sigma_enclosure(n, args.m, args.dps)
        lo, hi = ic.endpoints_decimal(e.interval)
        dt = time.perf_counter() - t
        print(f"{n:3d}  {lo}  {hi}  width={float(e.width.mid()):.3e}  argmax_r={e.argmax_block}  {dt:.1f}s", flush=True)
        encs.append(e)
        rows.append({"N": n, "sigma_lo": lo, "sigma_hi": hi, "argmax_block": e.argmax_block, "seconds": round(dt, 2)})
    gaps = gap_verification(args.n_from, args.n_to, encs, strict=False)
    print("\nsmallest gaps")
    for g in sorted(gaps, key=lambda g: ic.exact_fraction(g.gap_lo))[:6]:
        print(f"{g.n_sides:3d}  {ic.render_lower(g.gap_lo)}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"sigma": rows, "gaps": [{"N": g.n_sides, "gap_lo": ic.render_lower(g.gap_lo)} for g in gaps]},
                      fh, indent=2)


if __name__ == "__main__":
    main()
