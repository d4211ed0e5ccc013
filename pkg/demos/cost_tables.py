"""Print the Lapin cost tables next to the published figures.

Run:  python demos/cost_tables.py
"""

from ringlpn.complexity import reproduce_tables

out = reproduce_tables()
print(f"{'factor':<22} {'k':>3} {'w':>3} {'logN':>4} {'printed':>8} {'ours':>8}  status")
for r in out["table_ii"]:
    print(f"{r['factor']:<22} {r['k']:>3} {r['w_printed']:>3} {r['log2_N']:>4}"
          f" {r['log2_c_star_printed']:>8.2f} {r['log2_c_star_computed']:>8.4f}  {r['status']}")
print()
for r in out["table_i"]:
    print(f"{r['algorithm']:<24} queries 2^{r['log2_queries']:<5g} time 2^{r['log2_time']:<8g}"
          f" memory 2^{r['log2_memory']:g}  [{r['source']}]")
