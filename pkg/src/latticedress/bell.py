"""Lattice analogues of Bell polynomials for the translation automorphism.

Write sigma for the ratio element of an invertible wavefunction phi, in one
of two orientations:

    plus:   sigma = phi (T phi)^{-1}      so  T phi = sigma^{-1} phi
    minus:  sigma = phi (T^{-1} phi)^{-1} so  phi = sigma T^{-1} phi

Iterating the translation then expresses T^m phi through ordered products of
shifted copies of sigma. Those ordered products are the lattice Bell
elements computed here:

    bell_plus(sigma, m)  = T^{m-1}(sigma)^{-1} ... T(sigma)^{-1} sigma^{-1}
    bell_minus(sigma, m) = T^m(sigma) ... T(sigma) sigma        (m + 1 factors)

satisfying T^m phi = bell_plus(sigma_plus, m) phi and
T^m phi = bell_minus(sigma_minus, m) T^{-1} phi. Both families extend to
negative order through the same recursions; the public functions accept
m >= 0 only (the extensions are private, used by the dressing flows).

The classical single-variable Bell recurrence and the rearrangement between
difference-quotient and shift bases are included because the dressed
operator coefficients are combinations of exactly these objects.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .errors import LengthMismatch, ParameterError
from .ring import RingElement, mul, pointwise_inverse, shift


class BellContext:
    """Carries the lattice spacing delta used by basis rearrangements."""

    def __init__(self, delta: float):
        if not delta > 0:
            raise ParameterError(f"lattice spacing must be positive, got {delta}")
        self.delta = float(delta)

    def rearrange(self, u):
        return rearrange_difference_to_shift(u, self.delta)


def bell_plus(sigma: RingElement, m: int) -> RingElement:
    """Ordered product T^{m-1}(sigma)^{-1} ... T(sigma)^{-1} sigma^{-1}.

    bell_plus(sigma, 0) is the identity. Negative m is rejected; the
    coherent negative-order extension lives in _bell_plus_extended.
    """
    if m < 0:
        raise ParameterError(f"order must be nonnegative, got {m}")
    return _bell_plus_extended(sigma, m)


def _bell_plus_extended(sigma: RingElement, m: int) -> RingElement:
    # P_m = sigma T(sigma) ... T^{m-1}(sigma), extended to negative m by
    # P_k = P_{k+1} (T^k sigma)^{-1}; the Bell element is P_m^{-1}.
    out = _identity_like(sigma)
    if m >= 0:
        for k in range(m):
            out = mul(out, shift(sigma, k))
        return pointwise_inverse(out)
    for k in range(-1, m - 1, -1):
        out = mul(out, pointwise_inverse(shift(sigma, k)))
    return pointwise_inverse(out)


def bell_minus(sigma: RingElement, m: int) -> RingElement:
    """Ordered product T^m(sigma) ... T(sigma) sigma, with m + 1 factors.

    bell_minus(sigma, 0) is sigma itself. Negative m is rejected; the
    extension (identity at m = -1, inverse products below) is private.
    """
    if m < 0:
        raise ParameterError(f"order must be nonnegative, got {m}")
    return _bell_minus_extended(sigma, m)


def _bell_minus_extended(sigma: RingElement, m: int) -> RingElement:
    if m >= 0:
        out = sigma
        for k in range(1, m + 1):
            out = mul(shift(sigma, k), out)
        return out
    out = _identity_like(sigma)
    if m == -1:
        return out
    for j in range(m + 1, 0):
        out = mul(out, pointwise_inverse(shift(sigma, j)))
    return out


def _identity_like(el: RingElement) -> RingElement:
    vals = np.zeros_like(el.values)
    vals[:] = np.eye(el.dim)
    return RingElement(vals)


def classic_bell_next(B, y):
    """One step of the classical Bell recurrence in the ring.

    Given B = [B_0, ..., B_m] and y = [y_1, ..., y_{m+1}] returns

        B_{m+1} = sum_{r=0}^{m} C(m, r) B_{m-r} y_{r+1}

    with the stated left-to-right factor order (the ring does not commute).
    The two sequences must have equal length.
    """
    if len(B) != len(y):
        raise LengthMismatch(
            f"need len(y) == len(B), got {len(y)} and {len(B)}"
        )
    m = len(B) - 1
    out = None
    for r in range(m + 1):
        term = comb(m, r) * mul(B[m - r], y[r])
        out = term if out is None else out + term
    return out


def rearrange_difference_to_shift(u, delta: float):
    """Convert difference-quotient coefficients to shift coefficients.

    The operator sum_m u_m D^m with D = (T - 1)/delta equals
    sum_r U_r T^r where

        U_r = sum_{m >= r} u_m delta^{-m} C(m, r) (-1)^{m-r}.

    ``u`` is the list [u_0, ..., u_M]; the returned list has the same
    length. Works for RingElement coefficients (and anything supporting
    scalar multiplication and addition).
    """
    if not delta > 0:
        raise ParameterError(f"lattice spacing must be positive, got {delta}")
    M = len(u) - 1
    out = []
    for r in range(M + 1):
        acc = None
        for m in range(r, M + 1):
            c = (delta ** (-m)) * comb(m, r) * ((-1.0) ** (m - r))
            term = c * u[m]
            acc = term if acc is None else acc + term
        out.append(acc)
    return out
