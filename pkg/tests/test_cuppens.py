import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import pmf_char
from qid import AtomicSignedMeasure, LambdaOutOfRange, LatticePMF, char_exponent, cuppens_triplet, extract_triplet
from qid.cuppens import mass_identity_check, series_terms

SIGMA_12 = AtomicSignedMeasure.from_dict({1.0: 0.5, 2.0: 0.5})


@pytest.mark.parametrize("lam", [0.5, 0.3, 1.2])
def test_lambda_out_of_range(lam):
    with pytest.raises(LambdaOutOfRange):
        cuppens_triplet(lam, [0.0], SIGMA_12)


def test_sigma_must_avoid_the_dominant_atom():
    with pytest.raises(ValueError):
        cuppens_triplet(0.7, [1.0], SIGMA_12)


@given(st.floats(0.01, 0.98), st.sampled_from([1e-6, 1e-10, 1e-14]))
def test_series_terms_is_minimal(r, tol):
    K = series_terms(r, tol)
    bound = lambda k: r ** (k + 1) / ((k + 1) * (1 - r))  # noqa: E731
    assert bound(K) < tol
    assert K == 0 or bound(K - 1) >= tol


def test_lambda_one_is_a_point_mass():
    res = cuppens_triplet(1.0, [2.5], SIGMA_12)
    assert res.terms == 0 and len(res.triplet.nu.atomic) == 0 and res.triplet.gamma[0] == 2.5


def test_agrees_with_lattice_extraction():
    res = cuppens_triplet(0.6, [0.0], SIGMA_12, tol=1e-10)
    ext = extract_triplet(LatticePMF.from_dict({0: 0.6, 1: 0.2, 2: 0.2}), mass_tol=1e-12, refine=True)
    a, b = res.triplet.nu.atomic, ext.triplet.nu.atomic
    assert np.max(np.abs((a - b).weights)) <= 1e-9
    assert mass_identity_check(res) <= 1.1e-10


def test_slow_series_still_meets_its_bound():
    res = cuppens_triplet(0.51, [0.0], SIGMA_12, tol=1e-8)
    assert res.tail_bound < 1e-8
    assert mass_identity_check(res) <= 1e-8


@given(st.floats(0.55, 0.95), st.floats(-2.0, 2.0))
def test_exponent_reproduces_char_function(lam, z):
    a = np.array([0.5, -1.0])
    sigma = AtomicSignedMeasure.from_dict({(1.0, 0.0): 0.3, (0.0, 2.0): 0.7})
    res = cuppens_triplet(lam, a, sigma, tol=1e-13)
    zz = np.array([z, 0.7 * z])
    law = {tuple(a): lam, (1.0, 0.0): 0.3 * (1 - lam), (0.0, 2.0): 0.7 * (1 - lam)}
    assert abs(cmath.exp(char_exponent(res.triplet, zz)) - pmf_char(law, zz)) < 1e-11


def test_json_reports_tail_and_identity():
    data = cuppens_triplet(0.8, [0.0], SIGMA_12, tol=1e-12).to_json()
    assert data["tail_bound"] < 1e-12 and data["triplet"]["mode"] == "drift"
    assert data["mass_identity_residual"] == pytest.approx(0.0, abs=1e-11)
    assert math.isclose(data["rho_mass"], -math.log(0.8), abs_tol=1e-11)


def test_slow_series_with_point_mass_sigma():
    res = cuppens_triplet(0.51, [0.0], AtomicSignedMeasure.from_dict({1.0: 1.0}), tol=1e-8)
    assert res.terms == series_terms(0.49 / 0.51, 1e-8) == 392
    assert mass_identity_check(res) <= 1e-8
