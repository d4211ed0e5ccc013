"""Listen to a tag answering one fixed challenge, then attack the transcripts.

For a fixed challenge c the pairs (r, z) are Ring-LPN samples whose secret
is s*pi(c) + s'.  Run:  python demos/lapin_eavesdrop.py
"""

from fractions import Fraction

from ringlpn import load_ring
from ringlpn.attack import AttackParams, attack_improved, improved_min_k
from ringlpn.crtcode import build_generator
from ringlpn.gf2poly import pmod
from ringlpn.lapin import eavesdrop, effective_secret, generate_keys, reader_verify
from ringlpn.oracle import NoiseSpec

LAM = 16
ring = load_ring("desk33")
noise = NoiseSpec(Fraction(1, 20))
keys = generate_keys(ring, seed=5)

runs = eavesdrop(keys, noise, 200, seed=5, lam=LAM)
ok = sum(reader_verify(keys, t.c, t.r, t.z, lam=LAM) for t in runs)
print(f"honest runs accepted: {ok}/200")

c = 0x1D2C
code = build_generator(ring.factors[0], ring.degree)
params = AttackParams(improved_min_k(code), 1 << 12, code.last_row(), noise)
samples = [t.as_sample() for t in eavesdrop(keys, noise, params.N, seed=6, fixed_challenge=c, lam=LAM)]
y = effective_secret(keys, c, LAM)
res = attack_improved(samples, params, code, truth=pmod(y.bits, code.f1.bits))
print(f"attack on {params.N} transcripts for c={c:#x}: success={res.success}, positions {res.positions}")
