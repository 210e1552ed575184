import numpy as np
import pytest

from kimgold.gf2field import make_field

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def ctx4():
    return make_field(4)


@pytest.fixture(scope="session")
def ctx5():
    return make_field(5)


@pytest.fixture(scope="session")
def ctx6():
    return make_field(6)


@pytest.fixture
def acceptance_log():
    def log(number, text, ok):
        line = f"[criterion {number:>2}] {'PASS' if ok else 'FAIL'}  {text}"
        _ACCEPTANCE.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


def monomial_coefficients(ctx, table):
    """Coefficient of x^e for 1 <= e <= 2^n - 2, recovered from a truth table.

    Uses sum_{x != 0} x^(d - e) = [d == e] over F_{2^n}; independent of any
    construction code.
    """
    xs = ctx.elements()[1:]
    vals = np.asarray(table)[1:]
    logs = ctx.log_arr[xs]
    out = {}
    for e in range(1, ctx.order):
        inv_pow = ctx.exp_arr[(-logs * e) % ctx.order]
        c = np.bitwise_xor.reduce(ctx.mul(vals, inv_pow))
        if c:
            out[e] = int(c)
    return out


@pytest.fixture(scope="session")
def coefficients():
    return monomial_coefficients
