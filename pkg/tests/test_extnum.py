import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sumzeros.extnum import (
    ExtArray,
    ExtComplex,
    add_arrays,
    ext_add,
    ext_log_abs,
    ext_mul,
    prod_arrays,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)
exps = st.integers(min_value=-10**9, max_value=10**9)


def test_normalized_mantissa():
    a = ExtComplex(12.0 + 5j, 3)
    assert 0.5 <= abs(a.mantissa) < 1
    assert a.to_complex() == pytest.approx((12 + 5j) * 8)


def test_zero():
    z = ExtComplex.from_complex(0j)
    assert z.is_zero()
    assert ext_log_abs(z) == -math.inf
    assert ext_mul(z, ExtComplex(1 + 1j, 10**6)).is_zero()


def test_add_absorbs_tiny_operand():
    big = ExtComplex(1.0, 5000)
    tiny = ExtComplex(1.0, -5000)
    assert ext_add(big, tiny) == big


def test_product_of_huge_factors(frozen):
    # 300 factors of magnitude e^100, each far beyond double range once multiplied
    f = np.exp(100.0) * np.exp(1j * np.linspace(0, 3, 300))
    m, e = prod_arrays(f)
    got = float(np.log(abs(m)) + e * math.log(2))
    assert got == pytest.approx(frozen["ext_product_log"], rel=1e-9)


@given(cplx, exps, cplx, exps)
def test_log_abs_additive_under_mul(a, ea, b, eb):
    if a == 0 or b == 0:
        return
    x, y = ExtComplex(a, ea), ExtComplex(b, eb)
    la, lb = ext_log_abs(x), ext_log_abs(y)
    lhs = ext_log_abs(ext_mul(x, y))
    # the right side is itself a sum that cancels when la ~ -lb
    cond = 4 * np.finfo(float).eps * (abs(la) + abs(lb))
    assert abs(lhs - (la + lb)) <= 1e-12 * max(abs(lhs), 1.0) + cond


@given(cplx, cplx)
def test_add_matches_complex_in_range(a, b):
    got = ext_add(ExtComplex.from_complex(a), ExtComplex.from_complex(b)).to_complex()
    assert abs(got - (a + b)) <= 1e-15 * (abs(a) + abs(b)) + 1e-300


@given(st.lists(st.tuples(cplx, cplx), min_size=1, max_size=20))
@settings(max_examples=50)
def test_array_ops_match_complex(pairs):
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    A, B = ExtArray(a), ExtArray(b)
    scale = np.abs(a) + np.abs(b) + 1e-300
    assert np.all(np.abs((A + B).to_complex() - (a + b)) <= 1e-15 * scale)
    assert np.all(np.abs((A - B).to_complex() - (a - b)) <= 1e-15 * scale)
    np.testing.assert_allclose((A * B).to_complex(), a * b, rtol=1e-14, atol=0)
    nz = b != 0
    np.testing.assert_allclose((A[nz] / B[nz]).to_complex(), a[nz] / b[nz], rtol=1e-14)


def test_from_polar_beyond_double_range():
    x = ExtArray.from_polar(np.array([5000.0, -3000.0, 0.0]), np.array([0.3, 1.0, 2.0]))
    np.testing.assert_allclose(x.log_abs(), [5000.0, -3000.0, 0.0], rtol=1e-13, atol=1e-12)
    np.testing.assert_allclose(x.angle(), [0.3, 1.0, 2.0], rtol=1e-12)
    c = x.to_complex()
    assert np.isinf(c[0].real) and c[1] == 0
    assert list(x.in_double_range()) == [False, False, True]


def test_sum_and_prod_reductions():
    rng = np.random.default_rng(3)
    v = rng.normal(size=(4, 50)) + 1j * rng.normal(size=(4, 50))
    X = ExtArray(v)
    np.testing.assert_allclose(X.sum(axis=1).to_complex(), v.sum(axis=1), rtol=1e-12)
    np.testing.assert_allclose(X.prod(axis=1).to_complex(), v.prod(axis=1), rtol=1e-12)


def test_sum_of_mixed_scales_keeps_dominant_term():
    X = ExtArray.concatenate([ExtArray.from_polar([4000.0], [0.0]), ExtArray(np.array([1.0]))])
    assert X.sum().log_abs() == pytest.approx(4000.0)


def test_indexing_and_assignment():
    X = ExtArray(np.arange(1, 6, dtype=complex))
    Y = X.copy()
    Y[1:3] = ExtArray.from_polar([900.0, 901.0], [0.0, 0.0])
    assert X[1].item().to_complex() == 2
    assert Y[2].log_abs() == pytest.approx(901.0)
    assert X.item(4).to_complex() == 5


def test_add_arrays_broadcasts():
    m, e = add_arrays(np.array([[0.5]]), np.array([[1]]), np.array([0.5, 0.75]), np.array([0, 2]))
    assert m.shape == (1, 2)
    got = np.ldexp(m.real, e)
    np.testing.assert_allclose(got, [[1.5, 4.0]])


def test_listed_small_cases():
    assert ext_mul(ExtComplex(0.5, 10), ExtComplex(0.5, 20)) == ExtComplex(0.5, 29)
    a = ExtComplex(0.3 - 0.6j, 17)
    assert ext_mul(a, ExtComplex(1.0, 0)) == a
    assert ext_add(a, ExtComplex(0j, 0)) == a
    assert ext_add(ExtComplex(0.5, 1), ExtComplex(0.5, 1)) == ExtComplex(0.5, 2)
    assert ext_add(a, -a).is_zero()
    assert ext_log_abs(ExtComplex(0.75, 100)) == pytest.approx(math.log(0.75) + 100 * math.log(2))


normal = st.floats(allow_nan=False, allow_infinity=False, allow_subnormal=False)


@given(st.builds(complex, normal, normal))
def test_round_trip_exact(z):
    # exact whenever neither part is subnormal relative to |z|
    parts = [abs(z.real), abs(z.imag)]
    assume(min(parts) == 0 or min(parts) >= max(parts) * 2.0 ** -1000)
    assert ExtComplex.from_complex(z).to_complex() == z


def test_round_trip_subnormal_component():
    # A subnormal part riding on a larger one cannot keep its low bits once the
    # mantissa is scaled into [0.5, 1); the loss is below the subnormal spacing
    # times the scale factor.
    z = complex(2.0, 2.225073858507e-311)
    back = ExtComplex.from_complex(z).to_complex()
    assert back.real == 2.0
    assert abs(back.imag - z.imag) <= 4 * 5e-324
