"""Bit-operation cost model for the attack and reproduction of the
published per-factor and comparison tables for the Lapin instance.

Every quantity is kept as an exact ``int`` or ``Fraction``; logarithms
are taken only when reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .crtcode import best_known_relation, build_generator, gv_bound, row_weights
from .errors import Infeasible
from .ring import RingSpec

Number = int | Fraction


def log2(x: Number) -> float:
    """log2 of a positive int or Fraction without float overflow."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log2 of a non-positive number")
    return _log2_int(x.numerator) - _log2_int(x.denominator)


def _log2_int(n: int) -> float:
    shift = max(n.bit_length() - 60, 0)
    return math.log2(n >> shift) + shift


@dataclass(frozen=True)
class CostReport:
    l: int
    k: int
    N: int
    c1: Number
    c2: Number
    c3: Number
    c_star: Number
    queries: int
    memory_bits: int
    w: int | None = None
    epsilon: Fraction | None = None

    @property
    def condition_ok(self) -> bool | None:
        if self.w is None or self.epsilon is None:
            return None
        return theorem_condition(self.N, self.k, self.w, self.epsilon)

    @property
    def log2_c_star(self) -> float:
        return log2(self.c_star)

    @property
    def log2_generic(self) -> float:
        return log2(self.c1 + self.c2 + self.c3)

    @property
    def log2_memory(self) -> float:
        return log2(self.memory_bits)

    @property
    def log2_queries(self) -> float:
        return log2(self.queries)

    def to_json(self) -> dict:
        return {
            "l": self.l,
            "k": self.k,
            "log2_N": self.log2_queries,
            "w": self.w,
            "epsilon": str(self.epsilon) if self.epsilon is not None else None,
            "log2_c1": log2(self.c1),
            "log2_c2": log2(self.c2),
            "log2_c3": log2(self.c3),
            "log2_c_star": self.log2_c_star,
            "log2_memory": self.log2_memory,
            "condition_ok": self.condition_ok,
        }


def cost_generic(N: int, l: int, k: int) -> tuple[int, Fraction, int]:
    """``C1 = N l (2l+1)``, ``C2 = N l (1 + N/2^k)``, ``C3 = (l-k) 2^(l-k)``."""
    if N < 1 or l < 1 or not 0 <= k < l:
        raise ValueError("need N, l >= 1 and 0 <= k < l")
    c1 = N * l * (2 * l + 1)
    c2 = N * l * (1 + Fraction(N, 1 << k))
    c3 = (l - k) << (l - k)
    return c1, c2, c3


def cost_improved(
    N: int, l: int, k: int, w: int | None = None, epsilon: Fraction | None = None
) -> CostReport:
    """``C* = l (N + N^2/2^k) + (l-k) 2^(l-k)``."""
    c1, c2, c3 = cost_generic(N, l, k)
    c_star = l * (N + Fraction(N * N, 1 << k)) + ((l - k) << (l - k))
    queries, memory = memory_queries(N, l)
    eps = Fraction(epsilon) if epsilon is not None else None
    return CostReport(l, k, N, c1, c2, c3, _simplify(c_star), queries, memory, w, eps)


def _simplify(x: Fraction) -> Number:
    return x.numerator if x.denominator == 1 else x


def required_samples(epsilon: Number, d: int) -> Fraction:
    """``eps^(-4d)``: merged samples needed at bias ``eps^(2d)``."""
    eps = Fraction(epsilon)
    if not 0 < eps <= 1 or d < 1:
        raise ValueError("need 0 < epsilon <= 1 and d >= 1")
    return 1 / eps ** (4 * d)


def theorem_condition(N: int, k: int, w: int, epsilon: Number) -> bool:
    return Fraction(N * N, 1 << k) >= required_samples(epsilon, w)


def memory_queries(N: int, l: int) -> tuple[int, int]:
    return N, N * l


@dataclass(frozen=True)
class AggregateCost:
    search: Number
    all_factors: Number
    decision: Number
    search_factors: tuple[int, ...]

    @property
    def log2_search(self) -> float:
        return log2(self.search)

    @property
    def log2_all(self) -> float:
        return log2(self.all_factors)

    @property
    def log2_decision(self) -> float:
        return log2(self.decision)


def aggregate_search_cost(reports: Sequence[CostReport], easy: int = 3) -> AggregateCost:
    """Sum of the ``easy`` cheapest ``C*`` values.

    The remaining factors are recovered through the reduced LPN instance
    built from the known residues, whose cost is treated as negligible.
    Also returns the sum over every factor and the cheapest single
    factor (the distinguishing cost).
    """
    if not reports:
        raise ValueError("no cost reports")
    order = sorted(range(len(reports)), key=lambda i: Fraction(reports[i].c_star))
    chosen = order[: min(easy, len(reports))]
    search = sum((Fraction(reports[i].c_star) for i in chosen), Fraction(0))
    total = sum((Fraction(r.c_star) for r in reports), Fraction(0))
    decision = Fraction(reports[order[0]].c_star)
    return AggregateCost(
        _simplify(search), _simplify(total), _simplify(decision), tuple(sorted(chosen))
    )


def optimize_params(
    l: int,
    w: int,
    epsilon: Number,
    k_range: Iterable[int],
    log2n_range: Iterable[int],
) -> tuple[int, int, CostReport]:
    """Minimise ``C*`` over a ``(k, log2 N)`` grid.

    Constraints: ``N^2/2^k >= eps^(-4w)`` and ``l - k >= log2(N^2/2^k)``.
    Ties go to the smaller ``N``, then the smaller ``k``.  Raises
    Infeasible naming the binding constraint.
    """
    eps = Fraction(epsilon)
    need = required_samples(eps, w)
    ks = [k for k in k_range if 0 <= k < l]
    ns = list(log2n_range)
    best = None
    any_cond = any_size = False
    for n in ns:
        N = 1 << n
        for k in ks:
            cond = Fraction(N * N, 1 << k) >= need
            size = l - k >= 2 * n - k  # log2(N^2/2^k) = 2n - k exactly
            any_cond |= cond
            any_size |= size
            if not (cond and size):
                continue
            rep = cost_improved(N, l, k, w, eps)
            key = (Fraction(rep.c_star), N, k)
            if best is None or key < best[0]:
                best = (key, k, N, rep)
    if best is None:
        if not ks or not ns:
            raise Infeasible("empty parameter grid", "grid")
        if not any_cond:
            raise Infeasible("no grid point collects eps^-4w merged samples", "sample condition")
        if not any_size:
            raise Infeasible("no grid point keeps l - k >= log2(N^2/2^k)", "fwht sizing")
        raise Infeasible("the two constraints are never met together", "sample condition + fwht sizing")
    _, k, N, rep = best
    return k, N, rep


def security_advisor(
    ring: RingSpec, epsilon: Number, target_bits: int = 80, isd_iterations: int = 0, seed: int = 0
) -> list[dict]:
    """Per-factor weakness report against the CRT attack.

    A factor is flagged when ``eps^(-4d) < 2^target_bits`` for its best
    known relation weight ``d``.
    """
    eps = Fraction(epsilon)
    t = ring.degree
    out = []
    for i, fi in enumerate(ring.factors):
        l = fi.bits.bit_length() - 1
        code = build_generator(fi, t)
        weights = row_weights(code)
        rel = best_known_relation(code, isd_iterations, seed)
        floor = 4 * rel.weight * -math.log2(float(eps)) if eps < 1 else 0.0
        entry = {
            "factor": i,
            "l": l,
            "t": t,
            "best_weight": rel.weight,
            "last_row_weight": weights[-1],
            "min_row_weight": min(weights),
            "last_row_is_lightest": weights[-1] == min(weights),
            "gv_bound": gv_bound(t, l),
            "log2_sample_floor": floor,
            "flagged": floor < target_bits,
        }
        if len(ring.factors) == 1:
            entry["note"] = "single factor: no CRT reduction applies"
        out.append(entry)
    return out


# ----------------------------------------------------------------------
# published tables for the Lapin instance (eta = 1/6)

LAPIN_EPSILON = Fraction(2, 3)

# factor, k, w, log2 N, printed log2 C*
TABLE_II = (
    ("x^127+x^8+x^7+x^3+1", 65, 26, 63, 70.56),
    ("x^126+x^9+x^6+x^5+1", 63, 26, 62, 70.30),
    ("x^125+x^9+x^7+x^4+1", 63, 26, 62, 69.96),
    ("x^122+x^7+x^4+x^3+1", 60, 27, 62, 75.02),
    ("x^121+x^8+x^5+x+1", 58, 29, 63, 71.31),
)

# algorithm, log2 queries, log2 time, log2 memory (cost models not reproduced)
TABLE_I_EXTERNAL = (
    ("Levieil-Fouque", 82.0, 103.4, 100.6),
    ("Bernstein-Lange", 79.3, 102.9, 97.9),
)

TABLE_I_OURS = {"search": (63, 71.9, 70.0), "decision": (62, 70.0, 69.0)}

TOLERANCE = 0.05

# the printed C* of rows f4/f5 follow from the other row's parameters
# only to about 0.08 in log2, so the swap check is looser than TOLERANCE
SWAP_TOLERANCE = 0.1

# Cost-model values for the printed (k, N) of rows f4 and f5, pinned so that
# any drift in the cost model shows up as a failure
REGRESSION_LOG2_C_STAR = {3: 71.3923, 4: 74.9858}


def table_ii_reports() -> list[CostReport]:
    return [
        cost_improved(1 << n, int(f.split("+")[0][2:]), k, w, LAPIN_EPSILON)
        for f, k, w, n, _ in TABLE_II
    ]


def reproduce_tables(ring: RingSpec | None = None) -> dict:
    """Recompute both tables; each row carries its own PASS/FAIL verdict.

    Rows f4 and f5 are reported with status ``DISCREPANCY`` when their
    printed ``C*`` is matched by the other row's parameters instead of
    their own.
    """
    reports = table_ii_reports()
    computed_w = None
    if ring is not None:
        computed_w = [row_weights(build_generator(fi, ring.degree))[-1] for fi in ring.factors]
    rows = []
    for i, ((f, k, w, n, printed), rep) in enumerate(zip(TABLE_II, reports)):
        got = rep.log2_c_star
        ok = abs(got - printed) <= TOLERANCE
        status = "PASS" if ok else "FAIL"
        swapped_with = None
        if not ok:
            for j, other in enumerate(reports):
                if j != i and abs(other.log2_c_star - printed) <= SWAP_TOLERANCE:
                    status, swapped_with = "DISCREPANCY", j
        row = {
            "factor": f,
            "k": k,
            "w_printed": w,
            "log2_N": n,
            "log2_c_star_printed": printed,
            "log2_c_star_computed": round(got, 4),
            "condition_ok": rep.condition_ok,
            "status": status,
        }
        if computed_w is not None:
            row["w_computed"] = computed_w[i]
        if swapped_with is not None:
            row["printed_value_matches_row"] = swapped_with
        if i in REGRESSION_LOG2_C_STAR:
            row["regression_ok"] = abs(got - REGRESSION_LOG2_C_STAR[i]) < 1e-4
        rows.append(row)

    agg = aggregate_search_cost(reports)
    search_mem = max(reports[i].memory_bits for i in agg.search_factors)
    decision_rep = min(reports, key=lambda r: Fraction(r.c_star))
    search_queries = max(reports[i].N for i in agg.search_factors)
    ours = {
        "search": {
            "log2_queries": log2(search_queries),
            "log2_time": agg.log2_search,
            "log2_memory": log2(search_mem),
        },
        "decision": {
            "log2_queries": decision_rep.log2_queries,
            "log2_time": agg.log2_decision,
            "log2_memory": decision_rep.log2_memory,
        },
    }
    table_i = []
    for name, q, tm, mem in TABLE_I_EXTERNAL:
        table_i.append({"algorithm": name, "log2_queries": q, "log2_time": tm, "log2_memory": mem, "source": "external"})
    for variant, (q, tm, mem) in TABLE_I_OURS.items():
        got = ours[variant]
        # printed time/memory carry one decimal: compare at the printed precision
        ok = (
            abs(got["log2_queries"] - q) <= TOLERANCE
            and abs(got["log2_time"] - tm) <= TOLERANCE
            and abs(got["log2_memory"] - mem) <= TOLERANCE
        )
        table_i.append(
            {
                "algorithm": f"CRT attack ({variant})",
                "log2_queries": round(got["log2_queries"], 4),
                "log2_time": round(got["log2_time"], 4),
                "log2_memory": round(got["log2_memory"], 4),
                "printed": {"log2_queries": q, "log2_time": tm, "log2_memory": mem},
                "status": "PASS" if ok else "FAIL",
                "source": "computed",
            }
        )
    return {
        "table_ii": rows,
        "table_i": table_i,
        "aggregate": {
            "log2_search": round(agg.log2_search, 4),
            "log2_all_factors": round(agg.log2_all, 4),
            "log2_decision": round(agg.log2_decision, 4),
            "search_factors": list(agg.search_factors),
        },
    }
