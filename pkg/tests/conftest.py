import pytest

from ringlpn.gf2poly import BinaryPolynomial
from ringlpn.ring import load_ring, make_ring, ring_from_factors

# criterion number -> (description, passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        desc, ok, detail = ACCEPTANCE[n]
        line = f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {desc}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def lapin():
    return load_ring("lapin-621")


@pytest.fixture(scope="session")
def desk33():
    return load_ring("desk33")


@pytest.fixture(scope="session")
def desk3f():
    return load_ring("desk3f")


@pytest.fixture(scope="session")
def tiny():
    """GF(2)[x]/(x^3+1) with factors x+1 and x^2+x+1."""
    return make_ring(
        BinaryPolynomial.parse("x^3+1"),
        [BinaryPolynomial.parse("x+1"), BinaryPolynomial.parse("x^2+x+1")],
    )


@pytest.fixture(scope="session")
def small3():
    """Three coprime factors of degrees 5, 4, 3 (t = 12)."""
    return ring_from_factors(
        [BinaryPolynomial.parse(s) for s in ("x^5+x^2+1", "x^4+x+1", "x^3+x+1")]
    )
