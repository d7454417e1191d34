"""Three-term operators, the matrix ODE reduction, and its dressing flow."""

import numpy as np
import pytest

from conftest import make_rng, random_invertible, random_matrix

from latticedress import nahm, ring
from latticedress.errors import (
    ParameterError,
    SeedInconsistent,
    StepCountOverflow,
)
from latticedress.verify import (
    _hermitian_triple,
    _nahm_constant_seed,
    _pauli_exact,
    _pauli_triple,
    _PAULI,
    _triple_y_operator,
)


def random_element(ctx, rng, scale=1.0):
    shape = (ctx.sites, ctx.dim, ctx.dim)
    return ring.RingElement(
        scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
    )


def random_three_term(ctx, rng, scale=0.6):
    return nahm.ThreeTermOperator(
        u=random_element(ctx, rng, scale),
        v=random_element(ctx, rng, scale),
        w=random_invertible(ctx, rng),
    )


def as_difference_operator(op):
    return ring.DifferenceOperator(-1, 1, {-1: op.w, 0: op.v, 1: op.u})


def test_triple_validation():
    eye = np.eye(2)
    with pytest.raises(ParameterError):
        nahm.NahmTriple(eye, eye, eye, alpha=0.0)
    with pytest.raises(ValueError):
        nahm.NahmTriple(eye, eye, np.eye(3), alpha=1.0)
    with pytest.raises(ValueError):
        nahm.NahmTriple(np.ones((2, 3)), np.ones((2, 3)), np.ones((2, 3)), alpha=1.0)


def test_field_map_and_roundtrip(rng):
    triple = _hermitian_triple(rng, 3, 0.7, alpha=1.3 - 0.2j, beta=0.4j)
    u, v, w, q, p = nahm.fields_to_coeffs(triple)
    a = triple.alpha
    assert np.allclose(u, 2j * a * (triple.phi1 + 1j * triple.phi2))
    assert np.allclose(v, 4.0 * triple.phi3)
    assert np.allclose(w, (2j / a) * (triple.phi1 - 1j * triple.phi2))
    assert np.allclose(q, v / 2.0)
    assert np.allclose(p, u + triple.beta * np.eye(3))
    p1, p2, p3 = nahm.coeffs_to_fields(u, v, w, a)
    assert np.allclose(p1, triple.phi1)
    assert np.allclose(p2, triple.phi2)
    assert np.allclose(p3, triple.phi3)
    with pytest.raises(ParameterError):
        nahm.coeffs_to_fields(u, v, w, 0.0)


def test_rhs_on_spin_triple():
    c0 = 0.3
    triple = _pauli_triple(c0)
    d1, d2, d3 = nahm.nahm_rhs(triple)
    assert np.allclose(d1, -4.0 * c0 ** 2 * _PAULI[0])
    assert np.allclose(d2, -4.0 * c0 ** 2 * _PAULI[1])
    assert np.allclose(d3, -4.0 * c0 ** 2 * _PAULI[2])


def test_integrator_is_fourth_order():
    c0, y_end = 0.3, 0.4
    exact = _pauli_exact(c0, y_end)
    errs = []
    for h in (0.02, 0.01):
        traj = nahm.integrate_nahm(_pauli_triple(c0), y_end, h)
        errs.append(float(np.linalg.norm(traj.phis[-1] - exact)))
    order = np.log2(errs[0] / errs[1])
    assert order > 3.8
    assert order < 4.5


def test_flow_preserves_hermiticity(rng):
    triple = _hermitian_triple(rng, 3, 0.4, alpha=1.0, beta=0.0)
    traj = nahm.integrate_nahm(triple, 0.3, 1e-3)
    end = traj.phis[-1]
    drift = max(
        float(np.linalg.norm(end[i] - end[i].conj().T)) for i in range(3)
    )
    assert drift < 1e-12


def test_integrator_validation():
    triple = _pauli_triple(0.3)
    with pytest.raises(ParameterError):
        nahm.integrate_nahm(triple, 0.4, 0.0)
    with pytest.raises(ParameterError):
        nahm.integrate_nahm(triple, -0.4, 0.01)
    with pytest.raises(StepCountOverflow):
        nahm.integrate_nahm(triple, 10.0, 1e-6)


def test_riccati_relation_of_reverse_built_operator(rng):
    ctx = ring.RingContext(6, 2)
    u = random_invertible(ctx, rng)
    v = random_element(ctx, rng, 0.5)
    phi = random_invertible(ctx, rng)
    mu = random_matrix(rng, 2)
    target = ctx.constant(mu)
    # w chosen so that L phi = mu phi exactly
    w = ring.mul(
        ring.mul(target, phi) - ring.mul(u, ring.shift(phi, 1)) - ring.mul(v, phi),
        ring.pointwise_inverse(ring.shift(phi, -1)),
    )
    op = nahm.ThreeTermOperator(u=u, v=v, w=w)
    sigma = ring.mul(ring.shift(phi, 1), ring.pointwise_inverse(phi))
    assert nahm.riccati_residual(op, sigma, mu) < 1e-11
    assert nahm.riccati_residual(op, sigma, mu + 0.1 * np.eye(2)) > 1e-3


def test_sigma_flow_matches_finite_difference(rng):
    ctx = ring.RingContext(5, 2)
    op = random_three_term(ctx, rng, scale=0.5)
    dop = as_difference_operator(op)
    M = ring.operator_matrix(dop)
    phi0 = random_invertible(ctx, rng)
    flat0 = phi0.values.reshape(ctx.sites * 2, 2)

    def sigma_at(dy):
        flat = nahm._expm(dy * M) @ flat0
        phi = ring.RingElement(flat.reshape(ctx.sites, 2, 2))
        return ring.mul(ring.shift(phi, 1), ring.pointwise_inverse(phi))

    h = 1e-3
    fd = (sigma_at(h).values - sigma_at(-h).values) / (2.0 * h)
    predicted = nahm.sigma_flow(op, sigma_at(0.0))
    err = np.linalg.norm(fd - predicted.values) / max(
        1.0, np.linalg.norm(predicted.values)
    )
    assert err < 1e-2


def test_dressing_preserves_spectrum(rng):
    ctx = ring.RingContext(6, 2)
    op = random_three_term(ctx, rng)
    dop = as_difference_operator(op)
    mu_seed, phi_seed = ring.block_seed(dop, [0, 1])
    mu2, psi = ring.block_seed(dop, [2, 3])
    sigma = ring.mul(ring.shift(phi_seed, 1), ring.pointwise_inverse(phi_seed))
    g = random_invertible(ctx, rng)
    dressed = nahm.dt_three_term(op, sigma, g, spectral_only=True)
    psi1 = ring.mul(g, ring.shift(psi, 1) - ring.mul(sigma, psi))
    gap = nahm.three_term_apply(dressed, psi1) - ring.mul(psi1, ctx.constant(mu2))
    assert ring.rel_residual(gap, psi1) < 1e-9
    with pytest.raises(ParameterError):
        nahm.dt_three_term(op, sigma, g, g_y=None, spectral_only=False)


def test_constant_seed_commutes(rng):
    triple = _hermitian_triple(rng, 2, 0.5, alpha=1.0, beta=0.0)
    u, v, w, _, _ = nahm.fields_to_coeffs(triple)
    sigma0 = _nahm_constant_seed(triple)

    def defect(sg):
        F = u @ sg + v + w @ np.linalg.inv(sg)
        return np.linalg.norm(F @ sg - sg @ F) / max(1.0, np.linalg.norm(F))

    assert defect(sigma0) < 1e-12
    loose = random_matrix(rng, 2) + 2.0 * np.eye(2)
    assert defect(loose) > 1e-2


def test_lax_compatibility_of_the_reduction(rng):
    triple = _hermitian_triple(rng, 3, 0.6, alpha=0.9 + 0.3j, beta=0.2)
    ctx = ring.RingContext(6, 3)
    u, v, w, q, p = nahm.fields_to_coeffs(triple)
    op = nahm.ThreeTermOperator(
        u=ctx.constant(u), v=ctx.constant(v), w=ctx.constant(w)
    )
    E = nahm.EvolutionOperator(q=ctx.constant(q), p=ctx.constant(p))
    r_u, r_v, r_w = nahm.compatibility_residuals(op, E, _triple_y_operator(ctx, triple))
    assert max(r_u, r_v, r_w) < 1e-12
    # the leftover T^2 band cancels for lattice-constant coefficients
    assert np.linalg.norm(p @ u - u @ p) < 1e-13


def test_dressing_flow_produces_a_solution(rng):
    triple = _hermitian_triple(rng, 2, 0.4, alpha=1.0, beta=0.0)
    traj = nahm.integrate_nahm(triple, 0.1, 1e-3)
    sigma0 = _nahm_constant_seed(triple)
    dressed = nahm.dress_nahm(traj, sigma0)
    assert dressed.seed_residual < 1e-10
    assert dressed.commutator_drift < 1e-8
    redo = nahm.integrate_nahm(dressed.triple_at(0), 0.1, 1e-3)
    end_gap = np.linalg.norm(redo.phis[-1] - dressed.phis[-1])
    assert end_gap / max(1.0, np.linalg.norm(dressed.phis[-1])) < 1e-8
    bad = random_matrix(rng, 2) + 2.0 * np.eye(2)
    with pytest.raises(SeedInconsistent):
        nahm.dress_nahm(traj, bad)
