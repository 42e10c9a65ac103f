import itertools

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from woodgames.structures import Signature, Structure, isomorphism_classes

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SIG_R = Signature.of(R=2)
SIG_LT = Signature.of(**{"<": 2})
SIG_KRIPKE = Signature.of(R=2, P=1, transition="R")


def chain(n: int, sig: Signature = SIG_R, name: str = "R") -> Structure:
    """Strict linear order 0 < 1 < ... < n-1."""
    return Structure(sig, n, {name: [(i, j) for i in range(n) for j in range(i + 1, n)]})


def edgeless(n: int, sig: Signature = SIG_R) -> Structure:
    return Structure(sig, n, {})


def kripke(n: int, edges=(), marked=(), point: int = 0) -> Structure:
    return Structure(SIG_KRIPKE, n, {"R": list(edges), "P": [(x,) for x in marked]}, point)


@st.composite
def structures(draw, sig: Signature = SIG_R, min_size: int = 0, max_size: int = 3, pointed: bool = False):
    n = draw(st.integers(min_size, max_size))
    tables = {}
    for name, arity in sig.relations:
        rows = list(itertools.product(range(n), repeat=arity))
        tables[name] = [r for r in rows if draw(st.booleans())] if rows else []
    point = draw(st.integers(0, n - 1)) if (pointed or sig.modal) and n else None
    return Structure(sig, n, tables, point)


@st.composite
def homs(draw, sig: Signature = SIG_R, max_size: int = 3):
    """A homomorphism M -> N: draw N and a map, then let M be the
    preimage structure restricted to a random subset of its tuples."""
    n = draw(structures(sig, 1, max_size))
    size = draw(st.integers(0, max_size))
    f = tuple(draw(st.integers(0, n.size - 1)) for _ in range(size))
    tables = {}
    for name, arity in sig.relations:
        rows = [r for r in itertools.product(range(size), repeat=arity)
                if tuple(f[x] for x in r) in n.relations[name]]
        tables[name] = [r for r in rows if draw(st.booleans())]
    return Structure(sig, size, tables), n, f


@pytest.fixture(scope="session")
def reps3():
    """One structure per isomorphism class, one binary relation, size ≤ 3."""
    return isomorphism_classes(SIG_R, 3)


# acceptance criteria report one line each at the end of the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
