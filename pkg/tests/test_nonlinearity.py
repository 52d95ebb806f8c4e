import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from serrin_lab.exceptions import DomainError, FluxInversionError, ValidationError
from serrin_lab.nonlinearity import (
    BoundedGradient,
    CustomNonlinearity,
    PLaplacian,
    RegularizedNonlinearity,
    nonlinearity_from_config,
    verify_ellipticity,
)

BUILTINS = [PLaplacian(1.5), PLaplacian(2), PLaplacian(3), PLaplacian(4), BoundedGradient(4)]


@pytest.mark.parametrize(
    "nl, s, expected",
    [(PLaplacian(2), 5.0, 1.0), (PLaplacian(3), 2.0, 2.0), (BoundedGradient(4), 1.0, 2.0)],
)
def test_eval_a(nl, s, expected):
    assert nl.a(s) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize(
    "nl, s, expected",
    [(PLaplacian(3), 7.0, 2.0), (PLaplacian(1.5), 0.3, 0.5), (PLaplacian(1.5), 40.0, 0.5),
     (BoundedGradient(4), 1.0, 2.0)],
)
def test_ellipticity_ratio(nl, s, expected):
    assert nl.ellipticity_ratio(s) == pytest.approx(expected, rel=1e-14)


def test_p_laplacian_pole_at_zero():
    with pytest.raises(DomainError):
        PLaplacian(1.5).a(0.0)
    assert BoundedGradient(1.5).a(0.0) == 1.0


@pytest.mark.parametrize(
    "nl, t, expected",
    [(PLaplacian(3), 2.0, 4.0), (PLaplacian(2), 0.37, 0.37), (BoundedGradient(4), 1.0, 2.0),
     (PLaplacian(1.5), 0.0, 0.0)],
)
def test_flux(nl, t, expected):
    assert nl.flux(t) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize(
    "nl, s, expected",
    [(PLaplacian(3), 9.0, 3.0), (PLaplacian(2), 0.7, 0.7), (BoundedGradient(4), 2.0, 1.0),
     (PLaplacian(4), 0.0, 0.0)],
)
def test_invert_flux(nl, s, expected):
    assert nl.invert_flux(s) == pytest.approx(expected, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("nl", BUILTINS, ids=repr)
def test_round_trip_and_monotone(nl):
    s = np.geomspace(1e-8, 1e8, 100)
    b = nl.invert_flux(s)
    assert np.all(np.abs(nl.flux(b) - s) <= 1e-10 * np.maximum(1.0, s))
    assert np.all(np.diff(b) > 0)
    assert np.all(np.diff(nl.flux(np.geomspace(1e-6, 1e6, 100))) > 0)


@pytest.mark.parametrize("nl", BUILTINS, ids=repr)
def test_derivative_matches_finite_differences(nl):
    s = np.geomspace(1e-2, 1e2, 25)
    h = 1e-6 * s
    fd = (nl.a(s + h) - nl.a(s - h)) / (2 * h)
    exact = nl.a_prime(s)
    scale = np.maximum(np.abs(exact), 1e-8 * nl.a(s) / s)
    assert np.all(np.abs(fd - exact) <= 1e-6 * scale)


@given(st.floats(1.05, 8.0), st.floats(1e-6, 1e6))
def test_p_laplacian_ratio_identity(p, s):
    assert abs(PLaplacian(p).ellipticity_ratio(s) - (p - 1)) <= 1e-12 * p


@given(st.floats(1.05, 8.0), st.floats(-7, 7))
def test_round_trip_property(p, log_s):
    s = 10.0**log_s
    for nl in (PLaplacian(p), BoundedGradient(p)):
        assert abs(nl.flux(nl.invert_flux(s)) - s) <= 1e-12 * max(1.0, s)


def test_verify_ellipticity_examples():
    rep = verify_ellipticity(PLaplacian(2))
    assert rep.lambda_hat == rep.Lambda_hat == 1.0 and rep.passed
    bg = BoundedGradient(0.5, lambda_bound=0.5, Lambda_bound=1.0)
    rep = verify_ellipticity(bg)
    assert not rep.passed and rep.lambda_hat < 0
    inv = CustomNonlinearity(lambda s: 1.0 / s, lambda s: -1.0 / s**2, 0.1, 1.0)
    rep = verify_ellipticity(inv)
    assert not rep.passed
    assert rep.lambda_hat == pytest.approx(0.0, abs=1e-12)
    assert rep.to_dict()["pass"] is False


def test_bounded_gradient_ratio_range():
    for p in (1.5, 4.0):
        rep = verify_ellipticity(BoundedGradient(p))
        assert rep.passed
        assert min(1, p - 1) - 1e-12 <= rep.lambda_hat <= rep.Lambda_hat <= max(1, p - 1) + 1e-12


def test_custom_rejects_nonfinite():
    bad = CustomNonlinearity(lambda s: math.nan, lambda s: 0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        bad.a(1.0)


def test_invert_flux_reports_nonmonotone_flux():
    # flux t*a(t) = t*exp(-t) turns over at t = 1
    bad = CustomNonlinearity(lambda s: math.exp(-s), lambda s: -math.exp(-s), 0.1, 1.0)
    with pytest.raises(FluxInversionError) as info:
        bad.invert_flux(0.5)
    assert info.value.point is not None


def test_regularized_floor_and_smoothness():
    for base in (PLaplacian(1.5), PLaplacian(3), BoundedGradient(4)):
        reg = RegularizedNonlinearity(base, 1e-4)
        s = np.concatenate([[0.0], np.geomspace(1e-10, 1e3, 99)])
        a = reg.a(s)
        assert np.all(np.isfinite(a)) and np.all(a >= 1e-4)
        assert math.isfinite(reg.a_prime(0.0))


def test_regularized_ellipticity_is_reported():
    reg = RegularizedNonlinearity(PLaplacian(3), 1e-8)
    rep = verify_ellipticity(reg)
    assert rep.Lambda_hat <= 2.0 + 1e-9
    # near s = eps the ratio dips below 2 because of the sqrt(eps^2 + s^2) shift
    assert rep.lambda_hat >= 1.0


def test_config_round_trip_and_validation():
    nl = nonlinearity_from_config({"kind": "bounded_gradient", "p": 4.0})
    assert isinstance(nl, BoundedGradient) and nl.p == 4.0
    assert nonlinearity_from_config(PLaplacian(3).to_config()).p == 3.0
    with pytest.raises(ValidationError):
        nonlinearity_from_config({"kind": "p_laplacian", "p": 0.5})
    with pytest.raises(ValidationError):
        nonlinearity_from_config({"kind": "p_laplacian", "p": 2, "q": 1})
    with pytest.raises(ValidationError):
        nonlinearity_from_config({"kind": "cubic", "p": 2})
