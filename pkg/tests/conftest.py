from pathlib import Path

import pytest

from qcgeom import io, lie

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def torsion_model():
    """Jacobi-exact h=4 model with TSigma != 0, To = 0 and tau != 0."""
    return io.load_model(DATA / "torsion_model_h4.json")


@pytest.fixture(scope="session")
def solved():
    """Biquard solutions keyed by model label; each solve runs once per session."""
    cache = {}

    def get(label, model=None):
        if label not in cache:
            m = model if model is not None else lie.qh_model(int(label[3:]))
            cache[label] = (m,) + lie.solve_biquard(m)
        return cache[label]
    return get


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record the outcome line of an acceptance criterion for the terminal summary."""
    def record(number, ok, detail):
        ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
