import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from starmaj import expr as ex
from starmaj.errors import EvaluationError, InputError, ParseError
from starmaj.gallery import (F_TEXT, UPSILON_TEXT, upsilon_gradient_formula,
                             upsilon_hessian_formula)

F = ex.parse(F_TEXT, 1)
UPS = ex.parse(UPSILON_TEXT, 2)


# ---------------------------------------------------------------- parsing

def test_parse_examples():
    assert ex.arity(F) == 1
    assert ex.variables(UPS) == {0, 1}


@pytest.mark.parametrize("text,expected", [
    ("1 + 2*3", 7.0),
    ("2^3^2", 512.0),
    ("-2^2", -4.0),
    ("8/4/2", 1.0),
    ("10 - 4 - 3", 3.0),
    ("2^-1", 0.5),
    ("(1 + 2)*3", 9.0),
    ("max(1, 2) - min(1, 2)", 1.0),
    ("1.5e1", 15.0),
])
def test_precedence(text, expected):
    assert ex.evaluate(ex.parse(text, 0), np.zeros(0)) == expected


@pytest.mark.parametrize("text,offset", [
    ("x0 + ", 5),
    ("x0 $ 1", 3),
    ("foo(x0)", 0),
    ("x3", 0),
    ("(x0", 3),
    ("x0^x0", 2),
    ("max(x0)", 6),
])
def test_parse_errors(text, offset):
    with pytest.raises(ParseError) as info:
        ex.parse(text, 1)
    assert info.value.offset == offset
    assert 0 <= info.value.offset <= len(text)


def test_parse_modulus_variable():
    om = ex.parse_modulus("2*t^2")
    assert ex.evaluate(om, [3.0]) == 18.0


# ---------------------------------------------------------------- printing

def _atoms():
    nums = st.floats(0, 100, allow_nan=False).map(ex.Num)
    return st.one_of(nums, st.integers(0, 2).map(ex.Var))


def _exprs():
    exps = st.one_of(st.integers(0, 4).map(lambda k: ex.Num(float(k))),
                     st.integers(1, 3).map(lambda k: ex.Neg(ex.Num(float(k)))))
    return st.recursive(_atoms(), lambda kids: st.one_of(
        kids.map(ex.Neg),
        st.tuples(st.sampled_from("+-*/"), kids, kids).map(lambda t: ex.BinOp(*t)),
        st.tuples(kids, exps).map(lambda t: ex.Pow(*t)),
        st.tuples(st.sampled_from(["exp", "log", "abs", "sqrt"]), kids)
          .map(lambda t: ex.Call(t[0], (t[1],))),
        st.tuples(st.sampled_from(["max", "min"]), kids, kids)
          .map(lambda t: ex.Call(t[0], (t[1], t[2]))),
    ), max_leaves=12)


@given(_exprs())
@settings(max_examples=300)
def test_print_parse_fixpoint(e):
    text = ex.to_text(e)
    assert ex.parse(text, 3) == e
    assert ex.to_text(ex.parse(text, 3)) == text


def test_print_examples():
    assert ex.to_text(ex.parse("x0 - (x0 - 1)", 1)) == "x0 - (x0 - 1)"
    assert ex.to_text(ex.parse("(-x0)^2", 1)) == "(-x0)^2"
    assert ex.to_text(ex.parse("2.5*x0", 1)) == "2.5*x0"


# ---------------------------------------------------------------- evaluation

def test_eval_examples():
    assert ex.evaluate(F, [1.0]) == 0.0
    assert ex.evaluate(F, [0.0]) == 0.0
    with pytest.raises(EvaluationError):
        ex.evaluate(ex.parse("x0/x1", 2), [1.0, 0.0])


@pytest.mark.parametrize("text", ["log(x0)", "sqrt(x0 - 1)", "x0^0.5", "x0^-1", "1/x0"])
def test_domain_errors_name_first_row(text):
    X = np.array([[2.0], [1.5], [0.0], [-1.0]])
    with pytest.raises(EvaluationError) as info:
        ex.evaluate(ex.parse(text, 1), X)
    assert info.value.index in (2, 3)
    assert info.value.subexpr


def test_batch_matches_pointwise():
    X = np.random.default_rng(0).uniform(-2, 2, (30, 2))
    X[:, 1] += 3
    batch = ex.evaluate(UPS, X)
    assert np.allclose(batch, [ex.evaluate(UPS, x) for x in X], rtol=0, atol=0)


def test_dimension_too_small():
    with pytest.raises(InputError):
        ex.evaluate(UPS, [1.0])


# ---------------------------------------------------------------- derivatives

def _sympy(e):
    text = ex.to_text(e).replace("abs", "Abs")
    syms = sp.symbols("x0:3")
    return sp.sympify(text, locals={f"x{i}": s for i, s in enumerate(syms)}), syms


def test_derivative_of_f_matches_hand_formula():
    df = ex.differentiate(F, 0)
    xs = np.linspace(0, 10, 20)
    hand = 4 * xs**3 - 15 * xs**2 + 18 * xs - 5
    assert np.max(np.abs(ex.evaluate(df, xs[:, None]) - hand)) <= 1e-12 * 1e4


def test_derivative_constant_is_zero():
    assert ex.differentiate(ex.parse("3.5", 1), 0) == ex.Num(0.0)
    assert ex.differentiate(ex.parse("x1^2", 2), 0) == ex.Num(0.0)


def test_simplification():
    d = ex.differentiate(ex.parse("x0*x1 + 0", 2), 0)
    assert ex.to_text(d) == "x1"


@pytest.mark.parametrize("text", [
    F_TEXT, UPSILON_TEXT, "exp(x0)*x1 - log(x1)/x0", "sqrt(x0^2 + x1^2 + 1)",
    "x1^-2*x0^3", "exp(x0^2)", "x0/(1 + x1^2)",
])
def test_derivative_matches_sympy(text):
    e = ex.parse(text, 2)
    ref, syms = _sympy(e)
    rng = np.random.default_rng(1)
    P = np.column_stack([rng.uniform(0.5, 2, 20), rng.uniform(1, 3, 20)])
    for i in range(2):
        f = sp.lambdify(syms[:2], sp.diff(ref, syms[i]), "numpy")
        want = np.broadcast_to(f(P[:, 0], P[:, 1]), (20,))
        got = ex.evaluate(ex.differentiate(e, i), P)
        np.testing.assert_allclose(got, want, rtol=1e-11, atol=1e-11)


def test_kink_convention():
    at0 = np.zeros((1, 1))
    assert ex.evaluate(ex.differentiate(ex.parse("abs(x0)", 1), 0), at0)[0] == 0.0
    assert ex.evaluate(ex.differentiate(ex.parse("max(x0, 0)", 1), 0), at0)[0] == 0.0
    assert ex.evaluate(ex.differentiate(ex.parse("min(x0, 0)", 1), 0), at0)[0] == 0.0
    assert ex.evaluate(ex.differentiate(ex.parse("max(x0, 0)", 1), 0), [[1.0]])[0] == 1.0


def test_upsilon_formulas():
    rng = np.random.default_rng(7)
    P = np.column_stack([rng.uniform(-5, 1, 50), rng.uniform(1, 5, 50)])
    G = np.column_stack([ex.evaluate(g, P) for g in ex.gradient_exprs(UPS, 2)])
    assert np.max(np.abs(G - upsilon_gradient_formula(P[:, 0], P[:, 1]))) <= 1e-9
    H = np.stack([np.column_stack([ex.evaluate(h, P) for h in row])
                  for row in ex.hessian_exprs(UPS, 2)], axis=1)
    assert np.max(np.abs(H - upsilon_hessian_formula(P[:, 0], P[:, 1]))) <= 1e-9


def test_upsilon_closed_forms_against_sympy():
    # The closed forms themselves, checked against an independent CAS.
    x, y = sp.symbols("x y")
    u = -2 * x**3 / y**2 + 5 * x**2 / y + 6 * x
    gx = (-6 * x**2 + 10 * x * y + 6 * y**2) / y**2
    gy = x**2 * (4 * x - 5 * y) / y**3
    assert sp.simplify(sp.diff(u, x) - gx) == 0
    assert sp.simplify(sp.diff(u, y) - gy) == 0
    k = 6 * x - 5 * y
    assert sp.simplify(sp.diff(u, x, x) + 2 * k / y**2) == 0
    assert sp.simplify(sp.diff(u, x, y) - 2 * x * k / y**3) == 0
    assert sp.simplify(sp.diff(u, y, y) + 2 * x**2 * k / y**4) == 0
