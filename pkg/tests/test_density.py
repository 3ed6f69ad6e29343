import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import stable_gram_oracle, triplets
from qid import (AtomicSignedMeasure, CharTriplet, LatticePMF, QuasiLevyMeasure, StableTail, check_kallenberg,
                 check_orey, extract_triplet, gram_matrix, kallenberg_index)
from qid.density import DEFAULT_R_GRID, small_ball


def _stable(alpha, d=2, C=1.0, atoms=None):
    atomic = atoms if atoms is not None else AtomicSignedMeasure.empty(d)
    return CharTriplet.make(nu=QuasiLevyMeasure(atomic, StableTail(alpha, C, d)))


def test_gram_matrix_of_atoms_by_hand():
    m = AtomicSignedMeasure.from_dict({(0.5, 0.0): 2.0, (0.3, 0.4): 1.0, (3.0, 0.0): 5.0})
    expected = 2.0 * np.outer([0.5, 0], [0.5, 0]) + np.outer([0.3, 0.4], [0.3, 0.4])
    assert np.allclose(gram_matrix(m, 1.0), expected, atol=1e-15)


@pytest.mark.parametrize("d, alpha, r", [(1, 0.5, 0.1), (2, 1.0, 1.0), (3, 1.5, 0.1)])
def test_gram_matrix_of_stable_part(d, alpha, r):
    assert np.allclose(gram_matrix(_stable(alpha, d).nu, r), stable_gram_oracle(alpha, 1.0, d, r) * np.eye(d),
                       rtol=1e-13)


@given(triplets(with_stable=True), st.floats(1e-6, 2.0))
def test_sandwich_bounds_hold_exactly(t, r):
    sb = small_ball(t, r)
    assert sb.G_minus <= sb.g_minus <= t.dim * sb.G_minus
    assert sb.G_plus <= sb.g_plus


def test_index_domain():
    with pytest.raises(ValueError):
        kallenberg_index(_stable(1.5), 1.0)


def test_index_zero_without_positive_mass_near_origin():
    t = CharTriplet.make(nu=QuasiLevyMeasure(AtomicSignedMeasure.from_dict({5.0: 1.0})))
    assert kallenberg_index(t, 0.1) == 0.0


def test_stable_law_passes_on_grid():
    rep = check_kallenberg(_stable(1.5))
    assert rep.verdict == "condition_holds_on_grid"
    assert rep.sandwich_holds()
    assert math.isnan(rep.index[0])  # r = 1 carries no index


def test_stable_law_with_small_alpha_is_too_slow_for_the_rule():
    assert check_kallenberg(_stable(0.5, d=1)).verdict == "inconclusive"


def test_lattice_law_fails():
    t = extract_triplet(LatticePMF.from_dict({0: 0.7, 1: 0.3}), N=256).triplet
    rep = check_kallenberg(t)
    assert rep.verdict == "condition_fails"
    assert np.all(rep.index[1:] <= 0)


def test_gaussian_part_certifies():
    t = CharTriplet.make(A=np.eye(2))
    assert check_kallenberg(t).verdict == "smooth_density_certified_by_A"


def test_degenerate_gaussian_does_not_certify():
    t = CharTriplet.make(A=np.diag([1.0, 0.0]))
    assert check_kallenberg(t).verdict != "smooth_density_certified_by_A"


def test_r_grid_validation():
    with pytest.raises(ValueError):
        check_kallenberg(_stable(1.5), r_grid=[0.1, 0.5, 1e-6])
    with pytest.raises(ValueError):
        check_kallenberg(_stable(1.5), r_grid=[1.0, 0.1, 0.01])


def test_report_json_echoes_thresholds():
    data = check_kallenberg(_stable(1.5)).to_json()
    assert data["thresholds"]["growth"] == 10.0 and data["thresholds"]["floor"] == 1e3
    assert len(data["rows"]) == len(DEFAULT_R_GRID) and data["evidence_only"] is True


def test_orey_holds_for_stable_with_beta_two_minus_alpha():
    rep = check_orey(_stable(1.2), beta=0.8)
    assert rep.verdict == "holds_on_grid"
    assert np.allclose(rep.lower, stable_gram_oracle(1.2, 1.0, 2, 1.0), rtol=1e-12)


def test_orey_fails_for_smaller_beta():
    assert check_orey(_stable(1.2), beta=0.4).verdict == "fails_on_grid"


def test_orey_with_negative_atoms_away_from_origin():
    atoms = AtomicSignedMeasure.from_dict({(2.0, 0.0): -0.3})
    assert check_orey(_stable(1.2, atoms=atoms), beta=0.8).verdict == "holds_on_grid"


def test_lattice_noise_keeps_stable_verdict():
    atoms = AtomicSignedMeasure.from_dict({(1.5, 0.0): 0.4, (0.0, -3.0): -0.1})
    assert check_kallenberg(_stable(1.5, atoms=atoms)).verdict == "condition_holds_on_grid"


@given(st.floats(1e-5, 0.5), st.floats(1.0, 10.0))
def test_gram_matrix_is_loewner_monotone(r1, factor):
    t = _stable(1.3, atoms=AtomicSignedMeasure.from_dict({(0.1, 0.2): 1.0, (0.6, -0.1): 0.5}))
    diff = gram_matrix(t.nu.positive(), r1 * factor) - gram_matrix(t.nu.positive(), r1)
    assert np.linalg.eigvalsh(diff).min() >= -1e-14 * max(1.0, np.abs(diff).max())


def test_index_without_negative_part_reduces_to_g_plus_term():
    t = _stable(1.5)
    r = 0.01
    expected = small_ball(t, r).G_plus / (3 * r ** 2 * abs(math.log(r)))
    assert kallenberg_index(t, r) == pytest.approx(expected, rel=1e-14)


def test_orey_fails_for_lattice_law():
    t = extract_triplet(LatticePMF.from_dict({0: 0.7, 1: 0.3}), N=256).triplet
    assert check_orey(t, beta=1.0).verdict == "fails_on_grid"


def test_orey_beta_range():
    with pytest.raises(ValueError):
        check_orey(_stable(1.2), beta=2.0)
