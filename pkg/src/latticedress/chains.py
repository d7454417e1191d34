"""Dressing chains for Zakharov-Shabat difference operators.

The ZS operator here is L = J + U T with a shift-invariant leading
coefficient J. A spectral wavefunction phi with constant right eigenblock
mu, L phi = phi mu, carries two ratio elements

    s     = phi mu (T phi)^{-1}
    sigma = phi (T phi)^{-1}

from which the potential is recovered exactly as U = s - J sigma. One
elementary dressing sends U to U + [J, sigma] and leaves J alone, so a
sequence of dressings becomes a chain of states (sigma_n, s_n) coupled by

    s_{n+1} = s_n + J sigma_{n+1} - sigma_n J

together with the stationary constraint, satisfied at every link,

    J sigma + U - sigma J - sigma T(U) (T sigma)^{-1} = 0.

The constraint is what makes the chain falsifiable: a candidate sigma_{n+1}
that did not come from a genuine dressing of the running operator fails it
by orders of magnitude, and zs_chain_step raises ChainInconsistency.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .darboux import DressingSeed
from .errors import ChainInconsistency, ParameterError
from .ring import (
    RingElement,
    constant_like,
    mul,
    pointwise_inverse,
    rel_residual,
    shift,
)


@dataclass
class ZsChainState:
    """One link of the dressing chain.

    n is the link index, sigma and s the ratio elements of the link's seed,
    J the common leading coefficient, mu the eigenblock if known.
    """

    n: int
    sigma: RingElement
    s: RingElement
    J: RingElement
    mu: Optional[np.ndarray] = None

    @property
    def potential(self) -> RingElement:
        """The T-band coefficient, U = s - J sigma."""
        return self.s - mul(self.J, self.sigma)

    @classmethod
    def from_seed(cls, seed: DressingSeed, J: RingElement, n: int = 0):
        """Start a chain from a plus-direction spectral seed."""
        if seed.mu is None:
            raise ParameterError("chain start needs a seed with an eigenblock mu")
        _check_shift_invariant(J)
        s = mul(mul(seed.phi, constant_like(seed.phi, seed.mu)),
                pointwise_inverse(shift(seed.phi, 1)))
        return cls(n=n, sigma=seed.sigma, s=s, J=J, mu=seed.mu)


def _check_shift_invariant(J: RingElement):
    drift = rel_residual(shift(J, 1) - J, J)
    if drift > 1e-10:
        raise ParameterError(
            f"J must be shift-invariant; relative drift {drift:.3e}"
        )


def zs_potential(seed: DressingSeed, J: RingElement) -> RingElement:
    """Potential U of L = J + U T having seed.phi as eigenfunction.

    U = phi mu (T phi)^{-1} - J sigma. Exact: (J + U T) phi = phi mu by
    construction, for any invertible phi and constant mu.
    """
    _check_shift_invariant(J)
    if seed.mu is None:
        raise ParameterError("zs_potential needs a seed with an eigenblock mu")
    s = mul(mul(seed.phi, constant_like(seed.phi, seed.mu)),
            pointwise_inverse(shift(seed.phi, 1)))
    return s - mul(J, seed.sigma)


def zs_constraint_residual(state: ZsChainState, U: Optional[RingElement] = None) -> float:
    """Relative residual of the stationary chain constraint.

    || J sigma + U - sigma J - sigma T(U) (T sigma)^{-1} || over
    max(1, |U|, |sigma|, |J|). ``U`` defaults to the state's own potential.
    """
    if U is None:
        U = state.potential
    sigma, J = state.sigma, state.J
    gap = (
        mul(J, sigma)
        + U
        - mul(sigma, J)
        - mul(mul(sigma, shift(U, 1)), pointwise_inverse(shift(sigma, 1)))
    )
    return rel_residual(gap, U, sigma, J)


def zs_chain_step(
    state: ZsChainState, sigma_next: RingElement, tol: float = 1e-9
) -> ZsChainState:
    """Advance the chain one link with the supplied next ratio element.

    s_{n+1} = s_n + J sigma_{n+1} - sigma_n J, then the stepped state must
    satisfy the stationary constraint; a residual beyond ``tol`` means
    sigma_next is not the ratio element of any dressing of this link, and
    ChainInconsistency is raised.
    """
    s_next = state.s + mul(state.J, sigma_next) - mul(state.sigma, state.J)
    stepped = ZsChainState(
        n=state.n + 1, sigma=sigma_next, s=s_next, J=state.J, mu=state.mu
    )
    res = zs_constraint_residual(stepped)
    if res > tol:
        raise ChainInconsistency(
            f"constraint residual {res:.3e} after step {state.n} -> {state.n + 1} "
            f"exceeds {tol:g}"
        )
    return stepped


def zs_trivial_chain_step(state: ZsChainState, tol: float = 1e-9) -> ZsChainState:
    """Closed-form link for left-eigenvalue states, U = (mu - J) sigma.

    A left-eigenvalue state has s = mu sigma, and its dressing (which
    carries the commutator flow sigma_t = [mu, sigma], unlike the
    stationary step) lands on the conjugated ratio element

        sigma_{n+1} = (mu - J)^{-1} sigma_n (mu - J)

    with s_{n+1} = mu sigma_{n+1}, no spectral data needed. A state that
    does not satisfy s = mu sigma is not on such a chain and raises
    ChainInconsistency.
    """
    if state.mu is None:
        raise ParameterError("trivial step needs the eigenblock mu")
    mu_el = constant_like(state.sigma, state.mu)
    gap = state.s - mul(mu_el, state.sigma)
    res = rel_residual(gap, state.s, state.sigma)
    if res > tol:
        raise ChainInconsistency(
            f"state is not left-eigenvalue type: |s - mu sigma| = {res:.3e}"
        )
    a = mu_el - state.J
    sigma_next = mul(mul(pointwise_inverse(a), state.sigma), a)
    s_next = mul(mu_el, sigma_next)
    return ZsChainState(
        n=state.n + 1, sigma=sigma_next, s=s_next, J=state.J, mu=state.mu
    )
