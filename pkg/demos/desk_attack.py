"""Recover the top coefficients of s mod f1 on a 33-bit toy ring.

Run:  python demos/desk_attack.py [seed]
"""

import sys
from fractions import Fraction

from ringlpn import load_ring
from ringlpn.attack import AttackParams, improved_min_k, run_generic, run_improved
from ringlpn.crtcode import build_generator
from ringlpn.oracle import NoiseSpec, make_oracle

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
ring = load_ring("desk33")
noise = NoiseSpec(Fraction(1, 20))
code = build_generator(ring.factors[0], ring.degree)
params = AttackParams(improved_min_k(code), 1 << 12, code.last_row(), noise)

print(f"ring  {ring.modulus}  =  {' * '.join(str(f) for f in ring.factors)}")
print(f"f1 = {code.f1}, relation weight {params.relation.weight}, k = {params.k}, N = {params.N}")

oracle = make_oracle(ring, noise, seed)
imp = run_improved(oracle, params, code)
gen = run_generic(make_oracle(ring, noise, seed), params, code, target="high")

print(f"improved: positions {imp.positions}")
print(f"  bits {[imp.bit_for(q) for q in imp.positions]}  success={imp.success}  score {imp.score} vs {imp.second_score}")
print(f"generic : bits {[gen.bit_for(q) for q in imp.positions]}  success={gen.success}")
