import math
import threading

import numpy as np
import pytest
from scipy.integrate import quad

from oracles import FROZEN_M, M_p_laplacian, v_p2_n2, v_p2_n3, v_p3_n2
from serrin_lab.exceptions import DomainError, ValidationError
from serrin_lab.nonlinearity import BoundedGradient, CustomNonlinearity, PLaplacian
from serrin_lab.radial import RadialSolution, make_radial


def test_frozen_m_matches_closed_form():
    for (p, n), m in FROZEN_M.items():
        assert M_p_laplacian(p, n) == pytest.approx(m, rel=1e-15)


@pytest.mark.parametrize(
    "p, n, R, c, K", [(2, 2, 1, 1, 1.0), (3, 2, 1, 1, 1.0), (2, 3, 2, 0.5, 2.0)]
)
def test_K(p, n, R, c, K):
    assert make_radial(PLaplacian(p), n, R, c).K == pytest.approx(K, rel=1e-15)


def test_point_values():
    s22 = make_radial(PLaplacian(2), 2, 1, 1)
    assert s22.v(0.5) == pytest.approx(math.log(2), abs=1e-10)
    s32 = make_radial(PLaplacian(3), 2, 1, 1)
    assert s32.v(0.25) == pytest.approx(1.0, abs=1e-10)
    assert s32.v_prime(0.25) == pytest.approx(-2.0, rel=1e-12)
    s23 = make_radial(PLaplacian(2), 3, 1, 1)
    assert s23.v_prime(0.5) == pytest.approx(-4.0, rel=1e-12)


CONFIGS = [
    (PLaplacian(1.5), 2), (PLaplacian(2), 2), (PLaplacian(2), 3), (PLaplacian(3), 2),
    (PLaplacian(4), 3), (BoundedGradient(4), 2), (BoundedGradient(1.5), 3),
]


@pytest.mark.parametrize("nl, n", CONFIGS, ids=lambda x: repr(x))
@pytest.mark.parametrize("R, c", [(1.0, 1.0), (2.0, 0.5)])
def test_boundary_and_first_integral(nl, n, R, c):
    sol = make_radial(nl, n, R, c)
    assert sol.v(R) == 0.0
    assert abs(sol.v_prime(R) + c) <= 1e-10
    radii = np.geomspace(1e-4 * R, R, 100)
    assert sol.first_integral_defect(radii) <= 1e-10


@pytest.mark.parametrize(
    "p, n, exact", [(2, 2, v_p2_n2), (2, 3, v_p2_n3), (3, 2, v_p3_n2)]
)
def test_closed_forms(p, n, exact):
    sol = make_radial(PLaplacian(p), n, 1.0, 1.0)
    for r in np.geomspace(0.01, 1.0, 50):
        assert abs(sol.v(r) - exact(r)) <= 1e-8


def test_monotone_and_derivative():
    sol = make_radial(BoundedGradient(4), 2, 1.0, 1.0)
    r = np.linspace(0.05, 1.0, 20)
    v = np.array([sol.v(x) for x in r])
    assert np.all(np.diff(v) < 0)
    for x in (0.1, 0.4, 0.8):
        h = 1e-5 * x
        fd = (sol.v(x + h) - sol.v(x - h)) / (2 * h)
        assert fd == pytest.approx(sol.v_prime(x), rel=1e-6)


def test_table_matches_pointwise():
    sol = make_radial(PLaplacian(3), 2, 1.0, 1.0)
    r, v, vp = sol.table(64)
    assert r[0] == pytest.approx(1e-4) and r[-1] == 1.0
    assert np.max(np.abs(v - v_p3_n2(r))) <= 1e-9
    assert np.allclose(vp, -1.0 / np.sqrt(r), rtol=1e-12)


def test_interpolant():
    sol = make_radial(PLaplacian(2), 2, 1.0, 1.0)
    f = sol.interpolant(0.05)
    r = np.linspace(0.05, 1.0, 1001)
    assert np.max(np.abs(f(r) - v_p2_n2(r))) <= 1e-10
    with pytest.raises(DomainError):
        f(0.01)


@pytest.mark.parametrize("p", [1.5, 2.0, 2.5, 3.0, 4.0])
@pytest.mark.parametrize("n", [2, 3])
def test_singular_value_dichotomy(p, n):
    sv = make_radial(PLaplacian(p), n, 1.0, 1.0).singular_value()
    if p > n:
        assert sv.kind == "finite"
        assert sv.value == pytest.approx(FROZEN_M[(p, n)], rel=1e-6)
    else:
        assert sv.kind == "infinite" and sv.value == math.inf


def test_singular_value_scaling_and_string():
    sv = make_radial(PLaplacian(3), 2, 2.0, 0.5).singular_value()
    assert sv.value == pytest.approx(2 * 0.5 * 2.0, rel=1e-8)
    assert str(make_radial(PLaplacian(3), 2, 1, 1).singular_value()) == "finite M=2"
    assert str(make_radial(PLaplacian(2), 2, 1, 1).singular_value()) == "infinite"


def test_bounded_gradient_singular_value():
    # large gradients near O: a(t) ~ t**2, so the integrand ~ rho**(-2/3) as for p=4
    sol = make_radial(BoundedGradient(4), 3, 1.0, 1.0)
    sv = sol.singular_value()
    assert sv.kind == "finite"
    direct, err = quad(lambda x: 3 * x * x * sol.integrand(x**3), 0.0, 1.0, epsabs=1e-12, limit=200)
    assert sv.value == pytest.approx(direct, rel=1e-8)


def test_lazy_M_is_thread_safe():
    sol = RadialSolution(PLaplacian(4), 2, 1.0, 1.0)
    out = []
    threads = [threading.Thread(target=lambda: out.append(sol.singular_value())) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len({id(x) for x in out}) == 1
    assert sol.M == pytest.approx(1.5, rel=1e-6)


def test_validation():
    with pytest.raises(ValidationError):
        make_radial(PLaplacian(2), 1, 1.0, 1.0)
    with pytest.raises(ValidationError):
        make_radial(PLaplacian(2), 2, -1.0, 1.0)
    with pytest.raises(ValidationError):
        make_radial(PLaplacian(2), 2, 1.0, 0.0)
    with pytest.raises(DomainError):
        make_radial(PLaplacian(2), 2, 1.0, 1.0).v(1.5)
    bad = CustomNonlinearity(lambda s: 1.0 / s, lambda s: -1.0 / s**2, 0.1, 1.0)
    with pytest.raises(ValidationError):
        make_radial(bad, 2, 1.0, 1.0)
