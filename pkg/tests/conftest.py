import numpy as np
import pytest

from cmzd.hardy import ComplexPolynomial, SignMode, make_rational


@pytest.fixture(scope="session")
def figure1():
    """1/(y+i): single pole parameter -i, unit residue, mass pi."""
    return make_rational(ComplexPolynomial([1.0]), [-1j])


@pytest.fixture(scope="session")
def u_two_pole():
    return make_rational(ComplexPolynomial([1.0]), [-1j, -1.0 - 2.0j])


@pytest.fixture(scope="session")
def u_three_pole():
    return make_rational(ComplexPolynomial([1.0, 0.3]), [-1j, -1.0 - 2.0j, 1.5 - 1.5j])


@pytest.fixture(scope="session")
def all_test_data(figure1, u_two_pole, u_three_pole):
    return [figure1, u_two_pole, u_three_pole]


@pytest.fixture(scope="session")
def focusing():
    return SignMode.FOCUSING


@pytest.fixture(scope="session")
def defocusing():
    return SignMode.DEFOCUSING


def sample_line(u, xs):
    """u evaluated on a real grid, vectorized through the P/Q form."""
    xs = np.asarray(xs, dtype=float)
    return u.numerator(xs) / u.denominator()(xs)
