"""Three-term lattice operators, their dressing, and the Nahm reduction.

The operator here is L = u T + v + w T^{-1} acting on wavefunctions over
the periodic lattice, with a companion evolution operator E = q + p T
generating a flow psi_y = E psi. Compatibility of L psi = psi mu with the
flow is the Lax equation L_y = E L - L E, whose band coefficients are the
three residuals of compatibility_residuals (the T^2 band p T(u) = u T(p)
holds identically under the conventions used below).

Dressing uses the forward ratio element sigma = (T phi) phi^{-1} of an
invertible wavefunction phi, so the elementary map is psi -> g (T - sigma) psi
with a gauge factor g. Conjugating L through (T - sigma) matches bands
exactly once the zero-band closure T(F) sigma = sigma F holds, where

    F = u sigma + v + w (T^{-1} sigma)^{-1}

is the Riccati combination; block eigenvector seeds satisfy it
automatically. The same F drives the ratio-element flow sigma_y =
T(F) sigma - sigma F whenever phi itself flows by L (sigma_flow); under
the two-term flow psi_y = (q + p T) psi the ratio element instead obeys

    sigma_y = T(q) sigma + T(p) T(sigma) sigma - sigma q - sigma p sigma,

the form used when co-integrating a dressing along the flow.

The Nahm reduction packs a triple of matrices into lattice-constant
coefficients through an invertible linear map (fields_to_coeffs /
coeffs_to_fields) such that the Lax compatibility system is equivalent to
the Nahm equations phi1_y = 2i [phi2, phi3] (cyclic). integrate_nahm runs
the flow with a fixed-step RK4; dress_nahm co-integrates the triple, the
ratio element, and the gauge factor, and returns the dressed triple along
the way, which again solves the Nahm equations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    ParameterError,
    SeedInconsistent,
    StepCountOverflow,
)
from .ring import (
    RingElement,
    constant_like,
    mul,
    pointwise_inverse,
    rel_residual,
    shift,
)

MAX_STEPS = 10 ** 6


@dataclass
class ThreeTermOperator:
    """L = u T + v + w T^{-1} with ring-element coefficients."""

    u: RingElement
    v: RingElement
    w: RingElement


@dataclass
class EvolutionOperator:
    """E = q + p T, the generator of the y flow."""

    q: RingElement
    p: RingElement


@dataclass
class NahmTriple:
    """Three matrices with the scaling parameters of the reduction.

    phi1, phi2, phi3 are single d x d matrices (the reduction is
    lattice-constant). alpha is the spectral scale and must be nonzero;
    beta shifts the T-band of the evolution operator and is free.
    """

    phi1: np.ndarray
    phi2: np.ndarray
    phi3: np.ndarray
    alpha: complex
    beta: complex = 0.0

    def __post_init__(self):
        self.phi1 = np.asarray(self.phi1, dtype=np.complex128)
        self.phi2 = np.asarray(self.phi2, dtype=np.complex128)
        self.phi3 = np.asarray(self.phi3, dtype=np.complex128)
        shapes = {self.phi1.shape, self.phi2.shape, self.phi3.shape}
        if len(shapes) != 1 or self.phi1.ndim != 2 or (
            self.phi1.shape[0] != self.phi1.shape[1]
        ):
            raise ValueError("triple entries must be square matrices of equal shape")
        self.alpha = complex(self.alpha)
        self.beta = complex(self.beta)
        if self.alpha == 0:
            raise ParameterError("alpha must be nonzero")

    @property
    def dim(self) -> int:
        return self.phi1.shape[0]

    def stacked(self) -> np.ndarray:
        return np.stack([self.phi1, self.phi2, self.phi3])


@dataclass
class GaugeState:
    """Accumulated gauge data along a dressing flow.

    G is the integral of the gauge generator, g the actual gauge factor
    (integrated directly, not exp(G): the generator need not commute with
    itself across y), sigma the current ratio element, y the time.
    """

    G: np.ndarray
    g: np.ndarray
    sigma: np.ndarray
    y: float


def three_term_apply(op: ThreeTermOperator, psi: RingElement) -> RingElement:
    """(L psi)(n) = u(n) psi(n+1) + v(n) psi(n) + w(n) psi(n-1)."""
    return (
        mul(op.u, shift(psi, 1)) + mul(op.v, psi) + mul(op.w, shift(psi, -1))
    )


def _riccati_combination(op: ThreeTermOperator, sigma: RingElement) -> RingElement:
    return (
        mul(op.u, sigma)
        + op.v
        + mul(op.w, pointwise_inverse(shift(sigma, -1)))
    )


def riccati_residual(op: ThreeTermOperator, sigma: RingElement, mu) -> float:
    """Residual of the Riccati relation u sigma + v + w (T^{-1} sigma)^{-1} = mu.

    mu is a constant matrix (or scalar); the relation holds exactly when
    sigma is the forward ratio element of a left-eigenvalue wavefunction,
    L phi = mu phi.
    """
    F = _riccati_combination(op, sigma)
    gap = F - constant_like(sigma, mu)
    return rel_residual(gap, F)


def sigma_flow(op: ThreeTermOperator, sigma: RingElement) -> RingElement:
    """Ratio-element velocity induced by the flow phi_y = L phi.

    sigma_y = T(F) sigma - sigma F with the Riccati combination F. This is
    an identity in phi: F = (L phi) phi^{-1} makes both sides equal
    T(L phi) phi^{-1} restricted to the ratio variable.
    """
    F = _riccati_combination(op, sigma)
    return mul(shift(F, 1), sigma) - mul(sigma, F)


def dt_three_term(
    op: ThreeTermOperator,
    sigma: RingElement,
    g: RingElement,
    g_y: Optional[RingElement] = None,
    spectral_only: bool = False,
) -> ThreeTermOperator:
    """Dressed coefficients of g (T - sigma) L (T - sigma)^{-1} g^{-1}.

        u[1] = g T(u) T(g)^{-1}
        v[1] = g (T(v) - sigma u + T(u) T(sigma)) g^{-1}   [+ g_y g^{-1}]
        w[1] = g sigma w (T^{-1}(g sigma))^{-1}

    The g_y g^{-1} term belongs to the zero band whenever L is itself the
    generator of the y flow (psi_y = L psi); pass spectral_only=True to
    dress L as a pure spectral problem, in which case g_y is ignored.
    """
    u, v, w = op.u, op.v, op.w
    g_inv = pointwise_inverse(g)
    u1 = mul(mul(g, shift(u, 1)), pointwise_inverse(shift(g, 1)))
    core = shift(v, 1) - mul(sigma, u) + mul(shift(u, 1), shift(sigma, 1))
    v1 = mul(mul(g, core), g_inv)
    if not spectral_only:
        if g_y is None:
            raise ParameterError("g_y is required unless spectral_only is set")
        v1 = v1 + mul(g_y, g_inv)
    gs = mul(g, sigma)
    w1 = mul(mul(gs, w), pointwise_inverse(shift(gs, -1)))
    return ThreeTermOperator(u=u1, v=v1, w=w1)


def evolution_dt(
    E: EvolutionOperator,
    sigma: RingElement,
    g: RingElement,
    g_y: RingElement,
) -> EvolutionOperator:
    """Dressed evolution operator: the flow generator seen by dressed states.

        p[1] = g T(p) T(g)^{-1}
        q[1] = g (T(q) - sigma p + T(p) T(sigma)) g^{-1} + g_y g^{-1}
    """
    q, p = E.q, E.p
    g_inv = pointwise_inverse(g)
    p1 = mul(mul(g, shift(p, 1)), pointwise_inverse(shift(g, 1)))
    core = shift(q, 1) - mul(sigma, p) + mul(shift(p, 1), shift(sigma, 1))
    q1 = mul(mul(g, core), g_inv) + mul(g_y, g_inv)
    return EvolutionOperator(q=q1, p=p1)


def compatibility_residuals(
    op: ThreeTermOperator, E: EvolutionOperator, op_y: ThreeTermOperator
):
    """Band residuals of the Lax equation L_y = E L - L E.

    Returns (r_u, r_v, r_w), the relative norms of

        u_y - (q u + p T(v) - u T(q) - v p)
        v_y - (q v + p T(w) - v q - w T^{-1}(p))
        w_y - (q w - w T^{-1}(q))

    The remaining T^2 band, p T(u) - u T(p), vanishes identically for the
    conventions used by the Nahm reduction (p = u + beta on a
    lattice-constant background) and is not reported.
    """
    u, v, w = op.u, op.v, op.w
    q, p = E.q, E.p
    du = op_y.u - (mul(q, u) + mul(p, shift(v, 1)) - mul(u, shift(q, 1)) - mul(v, p))
    dv = op_y.v - (
        mul(q, v) + mul(p, shift(w, 1)) - mul(v, q) - mul(w, shift(p, -1))
    )
    dw = op_y.w - (mul(q, w) - mul(w, shift(q, -1)))
    r_u = rel_residual(du, u, v, q, p)
    r_v = rel_residual(dv, v, w, q, p)
    r_w = rel_residual(dw, w, q)
    return r_u, r_v, r_w


# -- the Nahm reduction --------------------------------------------------------


def fields_to_coeffs(triple: NahmTriple):
    """Lattice-constant Lax coefficients of a Nahm triple.

        u = 2 i alpha (phi1 + i phi2)
        v = 4 phi3
        w = (2 i / alpha) (phi1 - i phi2)
        p = u + beta I
        q = v / 2

    Returns the tuple (u, v, w, q, p) of d x d matrices. The map is a
    linear bijection between triples and (u, v, w); with it, the three
    Lax band equations become exactly the Nahm system nahm_rhs.
    """
    a = triple.alpha
    u = 2j * a * (triple.phi1 + 1j * triple.phi2)
    v = 4.0 * triple.phi3
    w = (2j / a) * (triple.phi1 - 1j * triple.phi2)
    p = u + triple.beta * np.eye(triple.dim)
    q = v / 2.0
    return u, v, w, q, p


def coeffs_to_fields(u, v, w, alpha):
    """Inverse of fields_to_coeffs on the spectral coefficients.

        phi1 = -i (u / alpha + alpha w) / 4
        phi2 = (alpha w - u / alpha) / 4
        phi3 = v / 4
    """
    if alpha == 0:
        raise ParameterError("alpha must be nonzero")
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    phi1 = -1j * (u / alpha + alpha * w) / 4.0
    phi2 = (alpha * w - u / alpha) / 4.0
    phi3 = v / 4.0
    return phi1, phi2, phi3


def nahm_rhs(triple: NahmTriple):
    """Right-hand side of the Nahm system.

        phi1_y = 2i [phi2, phi3]
        phi2_y = 2i [phi3, phi1]
        phi3_y = 2i [phi1, phi2]

    Hermitian triples stay Hermitian under this flow (each commutator of
    Hermitian matrices is anti-Hermitian, and the 2i restores Hermiticity).
    """
    p1, p2, p3 = triple.phi1, triple.phi2, triple.phi3
    return (
        2j * (p2 @ p3 - p3 @ p2),
        2j * (p3 @ p1 - p1 @ p3),
        2j * (p1 @ p2 - p2 @ p1),
    )


def _stacked_rhs(phis: np.ndarray) -> np.ndarray:
    p1, p2, p3 = phis
    return np.stack(
        [
            2j * (p2 @ p3 - p3 @ p2),
            2j * (p3 @ p1 - p1 @ p3),
            2j * (p1 @ p2 - p2 @ p1),
        ]
    )


@dataclass
class NahmTrajectory:
    """Fixed-step RK4 trajectory of a Nahm triple."""

    ys: np.ndarray
    phis: np.ndarray  # shape (K+1, 3, d, d)
    alpha: complex
    beta: complex
    step: float

    def triple_at(self, k: int) -> NahmTriple:
        p = self.phis[k]
        return NahmTriple(p[0], p[1], p[2], alpha=self.alpha, beta=self.beta)


def _step_count(y_end: float, step: float) -> int:
    if not y_end > 0:
        raise ParameterError(f"integration span must be positive, got {y_end}")
    if not step > 0:
        raise ParameterError(f"step must be positive, got {step}")
    n = max(1, int(round(y_end / step)))
    if n > MAX_STEPS:
        raise StepCountOverflow(
            f"{n} steps requested, budget is {MAX_STEPS}"
        )
    return n


def integrate_nahm(triple: NahmTriple, y_end: float, step: float) -> NahmTrajectory:
    """Integrate the Nahm system by classical RK4 with a fixed step.

    The step is adjusted to divide y_end exactly (never enlarged by more
    than rounding); more than 10^6 steps raises StepCountOverflow.
    """
    n = _step_count(y_end, step)
    h = y_end / n
    phis = np.empty((n + 1, 3, triple.dim, triple.dim), dtype=np.complex128)
    phis[0] = triple.stacked()
    state = phis[0].copy()
    for k in range(n):
        k1 = _stacked_rhs(state)
        k2 = _stacked_rhs(state + 0.5 * h * k1)
        k3 = _stacked_rhs(state + 0.5 * h * k2)
        k4 = _stacked_rhs(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        phis[k + 1] = state
    ys = np.linspace(0.0, y_end, n + 1)
    return NahmTrajectory(ys=ys, phis=phis, alpha=triple.alpha, beta=triple.beta, step=h)


def _expm(A: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a Taylor core."""
    A = np.asarray(A, dtype=np.complex128)
    nrm = np.linalg.norm(A)
    s = 0
    if nrm > 0.25:
        s = int(np.ceil(np.log2(nrm / 0.25)))
    B = A / (2 ** s)
    X = np.eye(A.shape[0], dtype=np.complex128)
    term = np.eye(A.shape[0], dtype=np.complex128)
    for k in range(1, 21):
        term = term @ B / k
        X = X + term
    for _ in range(s):
        X = X @ X
    return X


@dataclass
class DressedTrajectory:
    """Dressing of a Nahm trajectory by one ratio element.

    phis holds the dressed triple at every grid point, gauge the final
    gauge state, seed_residual the commutation defect of the seed, and
    commutator_drift the largest relative defect of [F, sigma] seen along
    the way (it should stay at round-off for a genuine seed).
    """

    ys: np.ndarray
    phis: np.ndarray  # shape (K+1, 3, d, d)
    alpha: complex
    beta: complex
    gauge: GaugeState
    seed_residual: float
    commutator_drift: float

    def triple_at(self, k: int) -> NahmTriple:
        p = self.phis[k]
        return NahmTriple(p[0], p[1], p[2], alpha=self.alpha, beta=self.beta)


def dress_nahm(
    traj: NahmTrajectory, sigma0, G0=None, tol: float = 1e-9
) -> DressedTrajectory:
    """Dress a Nahm trajectory through a constant-seed Darboux step.

    The seed is a lattice-constant ratio element sigma0; the gate is the
    commutation defect of the Riccati combination at y = 0,
    || [F(0), sigma0] ||, which must clear ``tol`` (SeedInconsistent
    otherwise). The triple, sigma, the gauge factor g (from g(0) =
    exp(G0)), and the accumulated generator G are co-integrated with the
    same RK4 grid as the input trajectory; sigma moves by the two-term
    flow it satisfies along psi_y = (q + p T) psi and g by
    g_y = g (sigma u - u sigma) / 2. At every grid point the dressed
    spectral coefficients

        u[1] = g u g^{-1}
        v[1] = g (v - sigma u + u sigma) g^{-1}
        w[1] = g sigma w sigma^{-1} g^{-1}

    are mapped back to a triple, which is the dressed Nahm solution.
    """
    d = traj.phis.shape[-1]
    sigma = np.asarray(sigma0, dtype=np.complex128).copy()
    if sigma.shape != (d, d):
        raise ValueError(f"sigma0 must be ({d}, {d}), got {sigma.shape}")
    if G0 is None:
        G0 = np.zeros((d, d), dtype=np.complex128)
    G = np.asarray(G0, dtype=np.complex128).copy()
    g = _expm(G)
    alpha, beta = traj.alpha, traj.beta

    def coeffs(phis):
        t = NahmTriple(phis[0], phis[1], phis[2], alpha=alpha, beta=beta)
        return fields_to_coeffs(t)

    def flow(phis, sg, gg):
        u, v, w, q, p = coeffs(phis)
        dphis = _stacked_rhs(phis)
        dsg = q @ sg + p @ sg @ sg - sg @ q - sg @ p @ sg
        h_gen = (sg @ u - u @ sg) / 2.0
        dgg = gg @ h_gen
        return dphis, dsg, dgg, h_gen

    def comm_defect(phis, sg):
        u, v, w, _, _ = coeffs(phis)
        F = u @ sg + v + w @ np.linalg.inv(sg)
        gap = F @ sg - sg @ F
        scale = max(1.0, float(np.linalg.norm(F)), float(np.linalg.norm(sg)))
        return float(np.linalg.norm(gap)) / scale

    seed_residual = comm_defect(traj.phis[0], sigma)
    if seed_residual > tol:
        raise SeedInconsistent(
            f"[F(0), sigma0] defect {seed_residual:.3e} exceeds {tol:g}; "
            "sigma0 is not a ratio element of this spectral problem"
        )

    n = traj.phis.shape[0] - 1
    h = traj.step
    phis = traj.phis[0].copy()
    dressed = np.empty_like(traj.phis)
    drift = seed_residual

    def dressed_triple(phis_now, sg, gg):
        u, v, w, _, _ = coeffs(phis_now)
        gi = np.linalg.inv(gg)
        u1 = gg @ u @ gi
        v1 = gg @ (v - sg @ u + u @ sg) @ gi
        w1 = gg @ sg @ w @ np.linalg.inv(sg) @ gi
        return np.stack(coeffs_to_fields(u1, v1, w1, alpha))

    dressed[0] = dressed_triple(phis, sigma, g)
    for k in range(n):
        s1, sg1, gg1, h1 = flow(phis, sigma, g)
        s2, sg2, gg2, h2 = flow(
            phis + 0.5 * h * s1, sigma + 0.5 * h * sg1, g + 0.5 * h * gg1
        )
        s3, sg3, gg3, h3 = flow(
            phis + 0.5 * h * s2, sigma + 0.5 * h * sg2, g + 0.5 * h * gg2
        )
        s4, sg4, gg4, h4 = flow(phis + h * s3, sigma + h * sg3, g + h * gg3)
        phis = phis + (h / 6.0) * (s1 + 2 * s2 + 2 * s3 + s4)
        sigma = sigma + (h / 6.0) * (sg1 + 2 * sg2 + 2 * sg3 + sg4)
        g = g + (h / 6.0) * (gg1 + 2 * gg2 + 2 * gg3 + gg4)
        G = G + (h / 6.0) * (h1 + 2 * h2 + 2 * h3 + h4)
        dressed[k + 1] = dressed_triple(phis, sigma, g)
        drift = max(drift, comm_defect(phis, sigma))
    gauge = GaugeState(G=G, g=g, sigma=sigma, y=float(traj.ys[-1]))
    return DressedTrajectory(
        ys=traj.ys.copy(),
        phis=dressed,
        alpha=alpha,
        beta=beta,
        gauge=gauge,
        seed_residual=seed_residual,
        commutator_drift=drift,
    )
