"""Operator measures: projections, trace decomposition, exact classification."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opkernel.errors import InvalidMeasure, InvalidVector, SchemaError
from opkernel.hermitian import HermitianMatrix, is_psd, min_eigenvalue, trace
from opkernel.measures import (
    VERDICT_NOT_STRICT,
    VERDICT_STRICT,
    OperatorMeasure,
    ScalarMeasure,
    c0_membership,
    classify_radial,
    measure_from_json,
    measure_to_json,
    radon_nikodym,
    scalar_projection_measure,
    total_operator,
)
from opkernel.profiles import RadialProfile

I2 = np.eye(2)
E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


def random_psd(rng, dim):
    b = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return b.conj().T @ b


# ---------------------------------------------------------------- construction


def test_atoms_sorted_and_merged():
    mu = OperatorMeasure(2, [(2.0, I2), (1.0, I2), (2.0, I2)])
    assert [omega for omega, _ in mu.atoms] == [1.0, 2.0]
    assert np.allclose(mu.atoms[1][1].entries, 2 * I2)


def test_zero_atom_pruned_but_remembered():
    mu = OperatorMeasure(2, [(0.5, np.zeros((2, 2))), (1.0, I2)])
    assert len(mu) == 1
    assert mu.null_supports == (0.5,)


def test_rejects_negative_support():
    with pytest.raises(InvalidMeasure):
        OperatorMeasure(2, [(-1.0, I2)])


def test_rejects_indefinite_atom():
    with pytest.raises(InvalidMeasure):
        OperatorMeasure(2, [(1.0, np.diag([1.0, -1.0]))])


def test_scalar_measure_clamps_roundoff():
    sm = ScalarMeasure([(1.0, -1e-13)])
    assert sm.atoms == ((1.0, 0.0),)
    with pytest.raises(InvalidMeasure):
        ScalarMeasure([(1.0, -1e-6)])


# ---------------------------------------------------------------- projection


def test_projection_identity_direction():
    mu = OperatorMeasure(2, [(1.0, I2)])
    sm = scalar_projection_measure(mu, E1)
    assert sm.atoms == ((1.0, 1.0),)


def test_projection_scales_quadratically():
    mu = OperatorMeasure(2, [(1.0, I2)])
    sm = scalar_projection_measure(mu, 2.0 * E1)
    assert sm.atoms == ((1.0, 4.0),)


def test_projection_can_kill_an_atom():
    mu = OperatorMeasure(2, [(0.0, np.diag([1.0, 0.0])), (2.0, np.diag([0.0, 1.0]))])
    sm = scalar_projection_measure(mu, E2)
    # the killed atom is kept with weight zero
    assert sm.atoms == ((0.0, 0.0), (2.0, 1.0))


def test_projection_rejects_zero_vector():
    mu = OperatorMeasure(2, [(1.0, I2)])
    with pytest.raises(InvalidVector):
        scalar_projection_measure(mu, np.zeros(2))


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_projection_weights_nonnegative(seed):
    rng = np.random.default_rng(seed)
    mu = OperatorMeasure(3, [(float(k), random_psd(rng, 3)) for k in range(3)])
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    v /= np.linalg.norm(v)
    sm = scalar_projection_measure(mu, v)
    assert all(w >= 0.0 for _, w in sm.atoms)


# ---------------------------------------------------------------- radon-nikodym


def test_rn_rank_one():
    mu = OperatorMeasure(2, [(1.0, np.diag([4.0, 0.0]))])
    dec = radon_nikodym(mu)
    assert dec.trace_measure.atoms == ((1.0, 4.0),)
    assert np.allclose(dec.densities[0].entries, np.diag([1.0, 0.0]))


def test_rn_identity():
    mu = OperatorMeasure(2, [(1.0, I2)])
    dec = radon_nikodym(mu)
    assert dec.trace_measure.atoms == ((1.0, 2.0),)
    assert np.allclose(dec.densities[0].entries, I2 / 2)


def test_rn_null_atom_recorded():
    mu = OperatorMeasure(2, [(1.0, np.zeros((2, 2)))])
    dec = radon_nikodym(mu)
    assert dec.densities == ()
    assert dec.null_atoms == (1.0,)


@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_rn_reconstruction(seed, dim, natoms):
    rng = np.random.default_rng(seed)
    mu = OperatorMeasure(dim, [(float(k), random_psd(rng, dim)) for k in range(natoms)])
    dec = radon_nikodym(mu)
    recon = sum(
        w * dens.entries
        for (_, w), dens in zip(dec.trace_measure.atoms, dec.densities)
    )
    total = total_operator(mu).entries
    # division then re-multiplication: a couple of ulps, not exact
    assert np.max(np.abs(recon - total)) <= 4 * np.finfo(float).eps * max(
        1.0, np.max(np.abs(total))
    )
    for dens in dec.densities:
        assert abs(trace(dens) - 1.0) <= 1e-14
        assert is_psd(dens).ok


# ---------------------------------------------------------------- totals / c0


def test_total_operator_restriction():
    mu = OperatorMeasure(2, [(0.0, I2), (1.0, np.diag([1.0, 0.0]))])
    assert np.allclose(total_operator(mu, restrict_positive_support=True).entries, np.diag([1.0, 0.0]))
    assert np.allclose(total_operator(mu).entries, np.diag([2.0, 1.0]))


def test_total_operator_empty():
    mu = OperatorMeasure(2, [])
    assert np.allclose(total_operator(mu).entries, np.zeros((2, 2)))


def test_c0_membership():
    assert c0_membership(OperatorMeasure(2, [(1.0, I2)]))
    assert not c0_membership(OperatorMeasure(2, [(0.0, I2)]))
    # zero matrix at 0 is pruned, so the remainder decays
    assert c0_membership(OperatorMeasure(2, [(0.0, np.zeros((2, 2))), (1.0, I2)]))


# ---------------------------------------------------------------- classification


def test_classify_strict():
    mu = OperatorMeasure(2, [(1.0, I2)])
    res = classify_radial(mu, RadialProfile.gaussian())
    assert res.verdict == VERDICT_STRICT
    assert res.witness is None
    assert res.min_eigenvalue == pytest.approx(1.0, abs=1e-12)


def test_classify_all_mass_at_origin():
    mu = OperatorMeasure(2, [(0.0, I2)])
    res = classify_radial(mu, RadialProfile.gaussian())
    assert res.verdict == VERDICT_NOT_STRICT


def test_classify_rank_deficient_with_witness():
    mu = OperatorMeasure(2, [(1.0, np.diag([1.0, 0.0])), (2.0, np.diag([1.0, 0.0]))])
    res = classify_radial(mu, RadialProfile.omega(3))
    assert res.verdict == VERDICT_NOT_STRICT
    assert np.allclose(np.abs(res.witness), E2, atol=1e-12)


@given(st.integers(0, 10_000), st.floats(0.25, 64.0))
@settings(max_examples=40, deadline=None)
def test_classify_scaling_invariance(seed, c):
    """Positive rescaling of the measure must not change the verdict, and a
    NotStrict witness must stay in the same null span."""
    rng = np.random.default_rng(seed)
    g = random_psd(rng, 3)
    u = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    singular = u @ np.diag([1.0, 1.0, 0.0]) @ u.T  # rank-2 PSD
    for base in (g, singular):
        mu1 = OperatorMeasure(3, [(1.0, base)])
        mu2 = OperatorMeasure(3, [(1.0, c * base)])
        r1 = classify_radial(mu1, RadialProfile.gaussian())
        r2 = classify_radial(mu2, RadialProfile.gaussian())
        assert r1.verdict == r2.verdict
        if r1.verdict == VERDICT_NOT_STRICT:
            # same null space: both witnesses are killed by the total operator
            for res, mu in ((r1, mu1), (r2, mu2)):
                tot = total_operator(mu, restrict_positive_support=True).entries
                assert np.linalg.norm(tot @ res.witness) <= 1e-8 * max(
                    1.0, np.linalg.norm(tot)
                )


def test_not_strict_witness_has_no_projection_mass():
    mu = OperatorMeasure(2, [(1.0, np.diag([1.0, 0.0])), (2.0, np.diag([1.0, 0.0]))])
    res = classify_radial(mu, RadialProfile.gaussian())
    sm = scalar_projection_measure(mu, res.witness)
    assert all(w <= 1e-12 for omega, w in sm.atoms if omega > 0.0)


# ---------------------------------------------------------------- JSON


def test_json_roundtrip():
    mu = OperatorMeasure(
        2, [(0.0, np.array([[1.0, 0.5j], [-0.5j, 2.0]])), (1.5, I2)]
    )
    back = measure_from_json(measure_to_json(mu))
    assert back.dim == mu.dim
    assert len(back) == len(mu)
    for (o1, g1), (o2, g2) in zip(mu.atoms, back.atoms):
        assert o1 == o2
        assert np.array_equal(g1.entries, g2.entries)


def test_json_rejects_unknown_field():
    obj = measure_to_json(OperatorMeasure(2, [(1.0, I2)]))
    obj["extra"] = 1
    with pytest.raises(SchemaError):
        measure_from_json(obj)


def test_json_rejects_bool_as_number():
    obj = measure_to_json(OperatorMeasure(2, [(1.0, I2)]))
    obj["atoms"][0]["omega"] = True
    with pytest.raises(SchemaError):
        measure_from_json(obj)
