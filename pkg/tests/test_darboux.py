"""First-order dressing of difference operators and the ratio flows."""

import numpy as np
import pytest

from conftest import make_rng, random_invertible, random_matrix, random_operator

from latticedress import darboux, ring
from latticedress.errors import InconsistentRecurrence, ParameterError


def eigen_blocks(op, d, count=2):
    """Consecutive spectral blocks with pairwise separated eigenvalues."""
    lam, _ = ring._sorted_spectrum(op)
    picked, vals = [], []
    for i in range(len(lam)):
        if all(abs(lam[i] - v) > 1e-4 for v in vals):
            picked.append(i)
            vals.append(lam[i])
        if len(picked) == count * d:
            break
    assert len(picked) == count * d
    return [
        ring.block_seed(op, picked[k * d:(k + 1) * d]) for k in range(count)
    ]


def test_make_seed_directions(ctx62, rng):
    phi = random_invertible(ctx62, rng)
    plus = darboux.make_seed(phi, direction="+")
    minus = darboux.make_seed(phi, direction="-")
    sp = ring.mul(phi, ring.pointwise_inverse(ring.shift(phi, 1)))
    sm = ring.mul(phi, ring.pointwise_inverse(ring.shift(phi, -1)))
    assert ring.rel_residual(plus.sigma - sp, sp) == 0.0
    assert ring.rel_residual(minus.sigma - sm, sm) == 0.0
    with pytest.raises(ParameterError):
        darboux.make_seed(phi, direction="x")


def test_wavefunction_map_annihilates_seed(ctx62, rng):
    for direction in ("+", "-"):
        phi = random_invertible(ctx62, rng)
        seed = darboux.make_seed(phi, direction=direction)
        out = darboux.dt_wavefunction(seed, phi)
        assert ring.rel_residual(out, phi) < 1e-14


def test_plus_dressing_covariance_and_closed_form(ctx62, rng):
    op = random_operator(ctx62, rng, -1, 2)
    (mu, phi), (mu2, psi) = eigen_blocks(op, 2)
    seed = darboux.make_seed(phi, mu=mu, direction="+")
    dressed = darboux.dt_potentials(op, seed)
    psi1 = darboux.dt_wavefunction(seed, psi)
    assert darboux.covariance_residual(dressed, psi1, mu2) < 1e-10
    closed = darboux.dt_potentials_closed_form(op, seed)
    for m in op.orders():
        gap = dressed.coeff(m) - closed.coeff(m)
        assert ring.rel_residual(gap, op.coeff(m)) < 1e-11
    # band endpoints are preserved by the dressing
    assert dressed.low == op.low and dressed.high == op.high


def test_minus_dressing_covariance(ctx62, rng):
    op = random_operator(ctx62, rng, -2, 1)
    (mu, phi), (mu2, psi) = eigen_blocks(op, 2)
    seed = darboux.make_seed(phi, mu=mu, direction="-")
    dressed = darboux.dt_potentials(op, seed)
    psi1 = darboux.dt_wavefunction(seed, psi)
    assert darboux.covariance_residual(dressed, psi1, mu2) < 1e-10


def test_closed_form_is_plus_only(ctx62, rng):
    phi = random_invertible(ctx62, rng)
    seed = darboux.make_seed(phi, direction="-")
    op = random_operator(ctx62, rng, -1, 1)
    with pytest.raises(ParameterError):
        darboux.dt_potentials_closed_form(op, seed)


def test_non_eigen_seed_fails_consistency(ctx62, rng):
    op = random_operator(ctx62, rng, -1, 2)
    phi = random_invertible(ctx62, rng)
    seed = darboux.make_seed(phi, direction="+")
    with pytest.raises(InconsistentRecurrence):
        darboux.dt_potentials(op, seed)


def test_stationary_flow_of_constant_eigenvalue_seed(ctx62, rng):
    # reverse-built first-order operator with L phi = mu phi
    phi = random_invertible(ctx62, rng)
    mu = random_matrix(rng, 2)
    u0 = ctx62.random(rng)
    seed = darboux.make_seed(phi, mu=mu, direction="+")
    mu_el = ring.constant_like(phi, mu)
    u1 = ring.mul(mu_el - u0, seed.sigma)
    op = ring.DifferenceOperator(0, 1, {0: u0, 1: u1})
    flow = darboux.sigma_t_evolution(op, seed)
    target = darboux.sigma_t_stationary(seed.sigma, mu)
    assert ring.rel_residual(flow - target, target, seed.sigma) < 1e-11
    # and the dressing recurrence closes with exactly that flow term
    dressed = darboux.dt_potentials(op, seed, sigma_t=target)
    chain_u1 = (
        u1
        + ring.mul(u0, seed.sigma)
        - ring.mul(seed.sigma, ring.shift(u0, 1))
        - target
    )
    assert ring.rel_residual(dressed.coeff(1) - chain_u1, u1) < 1e-11


def test_spectral_seed_has_zero_flow(ctx62, rng):
    op = random_operator(ctx62, rng, -1, 1)
    (mu, phi), _ = eigen_blocks(op, 2)
    seed = darboux.make_seed(phi, mu=mu, direction="+")
    flow = darboux.sigma_t_evolution(op, seed)
    assert ring.rel_residual(flow, seed.sigma) < 1e-10


def test_evolution_series_expansion_first_order(ctx62, rng):
    # for L = U0 + U1 T the series collapses to four terms, for any
    # invertible ratio element, eigen or not
    u0 = ctx62.random(rng)
    u1 = ctx62.random(rng)
    op = ring.DifferenceOperator(0, 1, {0: u0, 1: u1})
    phi = random_invertible(ctx62, rng)
    seed = darboux.make_seed(phi, direction="+")
    s = seed.sigma
    flow = darboux.sigma_t_evolution(op, seed)
    expanded = (
        ring.mul(u0, s)
        - ring.mul(s, ring.shift(u0, 1))
        + u1
        - ring.mul(
            ring.mul(s, ring.shift(u1, 1)),
            ring.pointwise_inverse(ring.shift(s, 1)),
        )
    )
    assert ring.rel_residual(flow - expanded, expanded) < 1e-12


def test_pair_residuals_vanish_for_affine_partner(ctx62, rng):
    u0 = ctx62.random(rng)
    u1 = ctx62.random(rng)
    c1, c2 = 0.7 - 0.2j, 1.9 + 0.4j
    v0 = c1 * ctx62.identity() + c2 * u0
    v1 = c2 * u1
    zero = ctx62.zeros()
    r0, r1, r2 = darboux.zs_pair_residuals(u0, u1, v0, v1, zero, zero)
    scale = max(1.0, u0.norm(), u1.norm())
    assert r0 / scale < 1e-13
    assert r1 / scale < 1e-13
    assert r2 / scale < 1e-13


def test_pair_residuals_detect_wrong_partner(ctx62, rng):
    u0 = ctx62.random(rng)
    u1 = ctx62.random(rng)
    v0 = ctx62.random(rng)
    v1 = ctx62.random(rng)
    zero = ctx62.zeros()
    residuals = darboux.zs_pair_residuals(u0, u1, v0, v1, zero, zero)
    assert max(residuals) > 1e-2
