"""CRT-based key recovery for Ring-LPN over a reducible modulus.

GF(2)[x] polynomials are Python ints (bit ``i`` is the coefficient of
``x^i``) wrapped in :class:`BinaryPolynomial` where convenience matters.
"""

from .attack import (
    AttackParams,
    AttackResult,
    LpnSample,
    attack_generic,
    attack_improved,
    birthday_merge,
    decision_test,
    distinguish,
    fwht,
    piling_up,
    run_generic,
    run_improved,
)
from .complexity import CostReport, cost_generic, cost_improved, optimize_params
from .crtcode import CrtCode, Relation, build_generator, gv_bound, min_weight_exact, min_weight_randomized
from .errors import (
    BatchTooLarge,
    ComponentTooLarge,
    DimensionTooLargeForExhaustive,
    FactorizationInvalid,
    FactorsNotCoprime,
    Infeasible,
    RankDeficient,
    RingLpnError,
)
from .gf2poly import BinaryPolynomial, format_poly, is_irreducible, parse_poly
from .lapin import LapinKeys, LapinTranscript, eavesdrop, pi_map, reader_verify, tag_respond
from .oracle import NoiseSpec, OracleHandle, batch, make_oracle, query
from .recovery import PartialSecret, build_reduced_lpn, full_recover, solve_reduced, strip_known
from .ring import RingElement, RingLpnSample, RingSpec, crt_lift, crt_split, load_ring, make_ring

__version__ = "0.1.0"
