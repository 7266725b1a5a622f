"""
Per-link cost against node degree
=================================

The MPNN runs once per graph, so the remaining per-link cost comes from the
neighborhood work: the common-neighbor pool for NCN, and additionally one
inner NCN score per one-sided neighbor for NCNC-1. On d-regular ring
lattices that is about d for NCN and about d^2 for NCNC-1.
"""

from ncnc.bench import fit_slopes, run_bench, time_ratios

rows = run_bench(repeats=3)
for r in rows:
    print(f"{r.variant:5s} d={r.degree:5d}  {r.seconds_per_link * 1e6:10.2f} us/link")

for f in fit_slopes(rows):
    print(f"{f.variant}: log-log slope {f.slope:.2f} (R^2 {f.r2:.3f})")
print("ncnc/ncn:", {d: round(v, 1) for d, v in time_ratios(rows).items()})
