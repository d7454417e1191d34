"""Acceptance battery: eight end-to-end criteria with pinned tolerances.

Each test measures first, prints exactly one summary line, then asserts,
so the measurements are reported even when a criterion fails. Run with
``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import json
import time

import numpy as np

from conftest import make_rng, random_invertible, random_matrix

from latticedress import bell, chains, cli, darboux, hirota, nahm, ring
from latticedress.verify import (
    _blocks_avoiding,
    _hirota_level1,
    _hermitian_triple,
    _left_eigen_plus,
    _nahm_constant_seed,
    _pauli_exact,
    _pauli_triple,
    _triple_y_operator,
)


def report(num, ok, detail):
    print("criterion %d: %s (%s)" % (num, "PASS" if ok else "FAIL", detail))


def random_element(ctx, rng, scale=1.0):
    shape = (ctx.sites, ctx.dim, ctx.dim)
    return ring.RingElement(
        scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
    )


def ratio_plus(phi):
    return ring.mul(phi, ring.pointwise_inverse(ring.shift(phi, 1)))


def ratio_minus(phi):
    return ring.mul(phi, ring.pointwise_inverse(ring.shift(phi, -1)))


def test_criterion_1_ordered_product_identities():
    t0 = time.perf_counter()
    worst = 0.0
    dims = (1, 2, 3)
    site_counts = (4, 8, 16)
    for trial in range(50):
        rng = make_rng(10_000 + trial)
        ctx = ring.RingContext(site_counts[trial % 3], dims[trial // 17])
        phi = random_invertible(ctx, rng)
        m = 1 + trial % 6
        sp = ratio_plus(phi)
        plus = ring.rel_residual(
            ring.mul(bell.bell_plus(sp, m), phi) - ring.shift(phi, m), phi
        )
        sm = ratio_minus(phi)
        minus = ring.rel_residual(
            ring.mul(bell.bell_minus(sm, m), ring.shift(phi, -1))
            - ring.shift(phi, m),
            phi,
        )
        worst = max(worst, plus, minus)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 5.0
    report(1, ok, "50 trials, worst residual %.2e, %.2fs" % (worst, elapsed))
    assert ok


def test_criterion_2_band_recurrence_covariance():
    t0 = time.perf_counter()
    worst_cov = 0.0
    worst_gap = 0.0
    min_sep = np.inf
    for trial in range(25):
        rng = make_rng(20_000 + trial)
        d = 1 + trial % 3
        ctx = ring.RingContext((8, 12, 16)[(trial // 3) % 3], d)
        low = -(trial % 4)
        high = 1 + trial % 3
        op = ring.DifferenceOperator(
            low, high, {m: random_element(ctx, rng) for m in range(low, high + 1)}
        )
        first, second = _blocks_avoiding(op, [], 2, gap=1e-4)
        mu1, phi1 = ring.block_seed(op, first)
        mu2, psi = ring.block_seed(op, second)
        min_sep = min(
            min_sep,
            min(abs(a - b) for a in np.diag(mu1) for b in np.diag(mu2)),
        )
        seed = darboux.make_seed(phi1, mu=mu1)
        dressed = darboux.dt_potentials(op, seed)
        psi1 = darboux.dt_wavefunction(seed, psi)
        worst_cov = max(worst_cov, darboux.covariance_residual(dressed, psi1, mu2))
        closed = darboux.dt_potentials_closed_form(op, seed)
        for m in range(low, high + 1):
            gap = closed.coeff(m) - dressed.coeff(m)
            worst_gap = max(
                worst_gap, ring.rel_residual(gap, dressed.coeff(m), op.coeff(m))
            )
    elapsed = time.perf_counter() - t0
    ok = (
        worst_cov <= 1e-8
        and worst_gap <= 1e-9
        and min_sep >= 1e-8
        and elapsed < 30.0
    )
    report(
        2,
        ok,
        "25 operators, covariance %.2e, recurrence vs closed %.2e, "
        "separation %.1e, %.2fs" % (worst_cov, worst_gap, min_sep, elapsed),
    )
    assert ok


def test_criterion_3_flow_term_consistency():
    worst = 0.0
    weakest = np.inf
    for trial in range(25):
        rng = make_rng(30_000 + trial)
        ctx = ring.RingContext((5, 7, 9)[trial % 3], 2 + trial % 2)
        op, seed, mu = _left_eigen_plus(ctx, rng)
        series = darboux.sigma_t_evolution(op, seed)
        stationary = darboux.sigma_t_stationary(seed.sigma, mu)
        weakest = min(weakest, ring.norm(stationary))
        worst = max(worst, ring.rel_residual(series - stationary, stationary))
    # weakest guards that the data was genuinely noncommuting
    ok = worst <= 1e-8 and weakest > 1e-3
    report(3, ok, "25 seeds, worst flow-term gap %.2e" % worst)
    assert ok


def test_criterion_4_tau_substitution():
    worst_second = 0.0
    for trial in range(25):
        rng = make_rng(40_000 + trial)
        grid = hirota.HirotaGrid(4, 4, 4, dim=2, wrap_j=True, wrap_r=True)
        tau = hirota.TauField(
            rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        )
        u, v = hirota.tau_to_potentials(grid, tau)
        _, second = hirota.compatibility_residuals(grid, u, v)
        worst_second = max(worst_second, second)
    data = _hirota_level1()
    first, _ = hirota.compatibility_residuals(
        data["grid"], data["u1"], data["v1"]
    )
    ok = worst_second <= 1e-12 and first <= 1e-9
    report(
        4,
        ok,
        "25 tau fields, second relation %.2e, dressed first relation %.2e"
        % (worst_second, first),
    )
    assert ok


def test_criterion_5_scalar_chain_closure():
    L = 8
    worst_chain = 0.0
    for q in range(1, 9):
        rng = make_rng(50_000 + q)

        def safe_pair():
            while True:
                a = rng.uniform(0.6, 1.4, L) * np.exp(
                    2j * np.pi * rng.uniform(size=L)
                )
                b = rng.uniform(0.6, 1.4, L) * np.exp(
                    2j * np.pi * rng.uniform(size=L)
                )
                if np.min(np.abs(np.roll(b, 1) - a)) > 0.25:
                    return a, b

        seq = [safe_pair() for _ in range(q + 1)]
        s = s0 = rng.normal(size=L) + 1j * rng.normal(size=L)
        for t in range(q):
            s = s * seq[t][0] / np.roll(seq[t + 1][1], 1)
        num = np.prod([seq[t][0] for t in range(q)], axis=0)
        den = np.prod([np.roll(seq[t][1], 1) for t in range(1, q + 1)], axis=0)
        closed = s0 * num / den
        worst_chain = max(
            worst_chain,
            float(np.linalg.norm(s - closed))
            / max(1.0, float(np.linalg.norm(closed))),
        )
    rng = make_rng(50_100)
    sigma0 = rng.uniform(0.5, 2.0, 9) * np.exp(1j * rng.uniform(-2.6, 2.6, 9))
    out = hirota.periodic_closure(sigma0, p=0, delta=0.5)
    links = [
        abs(out.phi[n + 1] - sigma0[(n + 1) % 9] * out.phi[n]) for n in range(8)
    ]
    closure_gap = max(links) / max(1.0, float(np.max(np.abs(out.phi))))
    ok = worst_chain <= 1e-10 and closure_gap <= 1e-10 and out.residual <= 1e-10
    report(
        5,
        ok,
        "iterated links q<=8 gap %.2e, closure links %.2e"
        % (worst_chain, closure_gap),
    )
    assert ok


def test_criterion_6_three_term_covariance():
    worst = 0.0
    for trial in range(25):
        rng = make_rng(60_000 + trial)
        d = 1 + trial % 3
        ctx = ring.RingContext((6, 8, 12)[trial % 3], d)
        op = nahm.ThreeTermOperator(
            u=random_element(ctx, rng, 0.6),
            v=random_element(ctx, rng, 0.6),
            w=random_invertible(ctx, rng),
        )
        dop = ring.DifferenceOperator(-1, 1, {-1: op.w, 0: op.v, 1: op.u})
        first, second = _blocks_avoiding(dop, [], 2, gap=1e-4)
        mu1, phi1 = ring.block_seed(dop, first)
        mu2, psi = ring.block_seed(dop, second)
        sigma = ring.mul(ring.shift(phi1, 1), ring.pointwise_inverse(phi1))
        g = random_invertible(ctx, rng)
        dressed = nahm.dt_three_term(op, sigma, g, spectral_only=True)
        psi1 = ring.mul(g, ring.shift(psi, 1) - ring.mul(sigma, psi))
        gap = nahm.three_term_apply(dressed, psi1) - ring.mul(
            psi1, ctx.constant(mu2)
        )
        worst = max(worst, ring.rel_residual(gap, psi1))
    # negative control: a ratio element not built from spectral data
    # must break the covariance visibly
    hits = 0
    rng = make_rng(61_000)
    ctx = ring.RingContext(6, 2)
    op = nahm.ThreeTermOperator(
        u=random_element(ctx, rng, 0.6),
        v=random_element(ctx, rng, 0.6),
        w=random_invertible(ctx, rng),
    )
    dop = ring.DifferenceOperator(-1, 1, {-1: op.w, 0: op.v, 1: op.u})
    first, second = _blocks_avoiding(dop, [], 2, gap=1e-4)
    mu2, psi = ring.block_seed(dop, second)
    g = random_invertible(ctx, rng)
    for _ in range(100):
        sigma_rand = random_invertible(ctx, rng)
        dressed = nahm.dt_three_term(op, sigma_rand, g, spectral_only=True)
        psi1 = ring.mul(g, ring.shift(psi, 1) - ring.mul(sigma_rand, psi))
        gap = nahm.three_term_apply(dressed, psi1) - ring.mul(
            psi1, ctx.constant(mu2)
        )
        if ring.rel_residual(gap, psi1) >= 1e-2:
            hits += 1
    ok = worst <= 1e-8 and hits >= 95
    report(
        6,
        ok,
        "25 seeds, worst covariance %.2e, negative control %d/100" % (worst, hits),
    )
    assert ok


def test_criterion_7_matrix_ode_dressing():
    t0 = time.perf_counter()
    c0, y_end = 0.3, 0.4
    exact = _pauli_exact(c0, y_end)
    errs = []
    for h in (0.02, 0.01):
        traj = nahm.integrate_nahm(_pauli_triple(c0), y_end, h)
        errs.append(float(np.linalg.norm(traj.phis[-1] - exact)))
    order = float(np.log2(errs[0] / errs[1]))

    rng = make_rng(70_000)
    triple = _hermitian_triple(rng, 3, 0.5, alpha=1.1 - 0.3j, beta=0.2)
    ctx = ring.RingContext(6, 3)
    u, v, w, q, p = nahm.fields_to_coeffs(triple)
    op = nahm.ThreeTermOperator(
        u=ctx.constant(u), v=ctx.constant(v), w=ctx.constant(w)
    )
    E = nahm.EvolutionOperator(q=ctx.constant(q), p=ctx.constant(p))
    compat = max(
        nahm.compatibility_residuals(op, E, _triple_y_operator(ctx, triple))
    )

    source = _hermitian_triple(make_rng(70_001), 2, 0.4, alpha=1.0, beta=0.0)
    traj = nahm.integrate_nahm(source, 0.5, 1e-3)
    dressed = nahm.dress_nahm(traj, _nahm_constant_seed(source))
    redo = nahm.integrate_nahm(dressed.triple_at(0), 0.5, 1e-3)
    end_gap = float(np.linalg.norm(redo.phis[-1] - dressed.phis[-1])) / max(
        1.0, float(np.linalg.norm(dressed.phis[-1]))
    )
    elapsed = time.perf_counter() - t0
    ok = order >= 3.8 and compat <= 1e-8 and end_gap <= 1e-6 and elapsed < 60.0
    report(
        7,
        ok,
        "stepper order %.3f, band residuals %.2e, dressed flow gap %.2e, %.2fs"
        % (order, compat, end_gap, elapsed),
    )
    assert ok


def test_criterion_8_cli_determinism(tmp_path):
    out1, out2 = tmp_path / "run1.json", tmp_path / "run2.json"
    code1 = cli.main(["verify", "--out", str(out1)])
    code2 = cli.main(["verify", "--out", str(out2)])
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    records = json.loads(b1)
    ok = code1 == 0 and code2 == 0 and b1 == b2 and len(records) >= 20
    report(
        8,
        ok,
        "exit codes %d/%d, %d checks, byte-identical %s"
        % (code1, code2, len(records), b1 == b2),
    )
    assert ok
