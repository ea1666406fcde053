import pytest

import cpbounds as cp


@pytest.fixture(scope="session")
def gamma3():
    return cp.gamma(3)


@pytest.fixture(scope="session")
def green3_r8():
    return cp.green_table(3, 8)


@pytest.fixture(scope="session")
def ab3(green3_r8):
    a, b = cp.optimal_ab(green3_r8.gamma_value())
    return float(a), float(b)
