import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from surflab import exprlang as E

CATALOG = [
    "exp(z)", "cosh(z)", "1 + z^2/4", "sin(2*z)*exp(-z)", "sqrt(1 + z^2)",
    "log(2 + z)/(1 + z^2)", "tan(z/2)", "tanh(3*z) - z^3", "atan(z)*cos(z)", "sinh(z)^2",
    "1/(3 + z)^2", "exp(-z^2)", "z^5 - 2*z^2 + 7", "cos(sin(z))", "sqrt(exp(z) + 1)",
    "log(cosh(z) + 2)", "(z + 2)^-3", "-z*sinh(-z)", "exp(z)/cosh(z)", "2*z + cosh(0*z)",
]


@pytest.mark.parametrize(
    "text, x, expected",
    [("2*z + cosh(0*z)", 1.0, 3.0), ("exp(-z^2)", 0.0, 1.0), ("sinh(z)", 0.0, 0.0), ("z^3 - 3*z", 2.0, 2.0)],
)
def test_evaluate_examples(text, x, expected):
    assert E.evaluate(E.parse(text), x) == expected


def test_syntax_error_offset():
    with pytest.raises(E.ExprSyntaxError) as info:
        E.parse("2*+z")
    assert info.value.offset == 2


@pytest.mark.parametrize("text", ["z^2.5", "2^z", "(z", "z)", "", "foo(z)", "y + 1", "u + z"])
def test_rejected_inputs(text):
    with pytest.raises(E.ExprSyntaxError):
        E.parse(text)


def test_evaluation_error_on_pole():
    with pytest.raises(E.EvaluationError):
        E.evaluate(E.parse("1/z"), 0.0)
    with pytest.raises(E.EvaluationError):
        E.evaluate(E.parse("log(z)"), np.array([1.0, -1.0]))


def test_derivative_printing():
    assert E.to_string(E.differentiate(E.parse("z^3"))) == "3*z^2"
    assert E.to_string(E.differentiate(E.parse("exp(z)"))) == "exp(z)"


def test_second_derivative_against_finite_difference():
    d2 = E.differentiate(E.differentiate(E.parse("cosh(z)")))
    s = E.parse("sinh(z)")
    h = 1e-3
    ev = lambda x: E.evaluate(s, x)
    fd = (8 * (ev(0.3 + h) - ev(0.3 - h)) - (ev(0.3 + 2 * h) - ev(0.3 - 2 * h))) / (12 * h)
    assert abs(E.evaluate(d2, 0.3) - fd) < 1e-9


@pytest.mark.parametrize("text", CATALOG)
def test_derivative_matches_central_difference(text):
    e = E.parse(text)
    de = E.differentiate(e)
    x = np.linspace(-0.8, 0.8, 17)
    h = 1e-3
    fd = (8 * (E.evaluate(e, x + h) - E.evaluate(e, x - h)) - (E.evaluate(e, x + 2 * h) - E.evaluate(e, x - 2 * h))) / (12 * h)
    exact = E.evaluate(de, x)
    assert np.all(np.abs(fd - exact) <= 1e-7 * (1 + np.abs(exact)))


@pytest.mark.parametrize("text", CATALOG)
def test_print_parse_round_trip(text):
    e = E.parse(text)
    again = E.parse(E.to_string(e))
    assert again == e
    x = np.linspace(-0.8, 0.8, 9)
    np.testing.assert_allclose(E.evaluate(again, x), E.evaluate(e, x), rtol=1e-14)


@pytest.mark.parametrize("text", CATALOG)
def test_compiled_matches_checked_evaluation(text):
    e = E.parse(text)
    x = np.linspace(-0.8, 0.8, 9)
    np.testing.assert_allclose(E.compile(e)(x), E.evaluate(e, x), rtol=1e-15)


def test_catalog_shortcuts():
    x = np.linspace(-1, 1, 5)
    assert E.evaluate(E.catalog("one"), 3.0) == 1.0
    np.testing.assert_allclose(E.evaluate(E.catalog("exp"), x), np.exp(x))
    np.testing.assert_allclose(E.evaluate(E.catalog("cosh", "u"), x), np.cosh(x))
    np.testing.assert_allclose(E.evaluate(E.catalog("linear(2,3)"), x), 2 + 3 * x)
    with pytest.raises(KeyError):
        E.catalog("nope")


def test_as_expr_accepts_numbers_and_text():
    assert E.evaluate(E.as_expr(2.5), 0.0) == 2.5
    assert E.evaluate(E.as_expr("1 + 0.3*v", "v"), 1.0) == pytest.approx(1.3)


@given(st.integers(-4, 6), st.floats(0.1, 2.0))
def test_integer_power_rule(n, x):
    e = E.parse(f"z^{n}")
    d = E.evaluate(E.differentiate(e), x)
    assert d == pytest.approx(n * x ** (n - 1), rel=1e-12, abs=1e-300)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_linearity_of_differentiation(a, b):
    e = E.parse(f"({a!r})*sin(z) + ({b!r})*exp(z)")
    x = np.linspace(-1, 1, 5)
    np.testing.assert_allclose(E.evaluate(E.differentiate(e), x), a * np.cos(x) + b * np.exp(x), atol=1e-12)
