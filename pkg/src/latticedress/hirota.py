"""Noncommutative Hirota system on a three-axis lattice.

Fields live on a grid with axes (n, j, r): n is the lattice direction the
translation T acts on, j and r are the two discrete evolution directions.
The linear problem for a wavefunction f is the pair

    (L1)  f(n, j-1, r) = (T f)(n, j, r) + v(n, j, r) f(n, j, r)
    (L2)  f(n, j, r-1) = f(n, j, r) + u(n, j, r) (T^{-1} f)(n, j, r)

whose compatibility is the coupled first-order system

    (C1)  u(n, j-1, r) - u(n+1, j, r) - v(n, j, r-1) + v(n, j, r) = 0
    (C2)  v(n, j, r-1) u(n, j, r) - u(n, j-1, r) v(n-1, j, r) = 0.

Writing the potentials through an invertible tau function,

    u = tau_{n+1}(j, r-1) tau_n^{-1}(j, r-1) tau_{n-1}(j, r) tau_n^{-1}(j, r)
    v = tau_{n+1}(j-1, r) tau_n^{-1}(j-1, r) tau_n(j, r) tau_{n+1}^{-1}(j, r)

solves (C2) identically for any invertible tau; (C1) then becomes the
noncommutative bilinear equation measured by bilinear_residual_nonabelian.

Darboux dressing acts along the r axis: with sigma the ratio element of a
wavefunction, u dresses additively, u_minus = u - sigma(r-1) + sigma(r),
and the dressed potential is tied to the old one by the link relation

    u_minus T^{-1}(sigma(r)) = sigma(r-1) T^{-1}(u),

measured by dt_minus_potential. Iterated dressing collapses, for scalar
fields, to a multiplicative chain in the variable s with

    u_N = s_N T^{-1}(sigma_N(r)),
    s_{N+1} = s_N sigma_N(r-1) / T^{-1}(sigma_{N+1}(r)),

implemented by chain_step (one-argument form: the period-one closure
sigma_{N+1} = sigma_N is built in) and closed by periodic_closure, which
reconstructs the closing wavefunction as an exact product integral.

Wrap flags: the n axis is always cyclic. Residuals that step the j or r
axis include the wrap-around link only when wrap_j / wrap_r is set;
exactly periodic data (ratio elements, dressed potentials) can keep them
on, wavefunction-level data that is only projectively periodic cannot.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .errors import (
    ChainInconsistency,
    ConfigError,
    DenominatorUnderflow,
    DimensionError,
    LogBranchWarning,
    ParameterError,
    SingularElement,
)
from .ring import norm

DENOM_FLOOR = 1e-10
RCOND_FLOOR = 1e-12


class HirotaGrid:
    """Grid geometry and shift conventions for the three-axis system."""

    def __init__(
        self,
        Ln: int,
        Lj: int,
        Lr: int,
        dim: int = 1,
        wrap_j: bool = False,
        wrap_r: bool = False,
        shift_direction: int = +1,
    ):
        for name, val in (("Ln", Ln), ("Lj", Lj), ("Lr", Lr)):
            if int(val) < 2:
                raise ConfigError(f"{name} must be at least 2, got {val}")
        if int(dim) < 1:
            raise ConfigError(f"dim must be at least 1, got {dim}")
        if shift_direction not in (+1, -1):
            raise ParameterError(
                f"shift_direction must be +1 or -1, got {shift_direction}"
            )
        self.Ln = int(Ln)
        self.Lj = int(Lj)
        self.Lr = int(Lr)
        self.dim = int(dim)
        self.wrap_j = bool(wrap_j)
        self.wrap_r = bool(wrap_r)
        self.shift_direction = int(shift_direction)

    @property
    def shape(self):
        return (self.Ln, self.Lj, self.Lr, self.dim, self.dim)

    # -- constructors ----------------------------------------------------

    def field(self, values) -> "LatticeField":
        f = LatticeField(values)
        if f.values.shape != self.shape:
            raise ValueError(f"expected shape {self.shape}, got {f.values.shape}")
        return f

    def zeros(self) -> "LatticeField":
        return LatticeField(np.zeros(self.shape, dtype=np.complex128))

    def constant(self, matrix) -> "LatticeField":
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim == 0:
            m = m * np.eye(self.dim)
        vals = np.empty(self.shape, dtype=np.complex128)
        vals[:] = m
        return LatticeField(vals)

    def random(self, rng: np.random.Generator, scale: float = 1.0) -> "LatticeField":
        vals = rng.normal(size=self.shape) + 1j * rng.normal(size=self.shape)
        return LatticeField(scale * vals)

    # -- shifts ------------------------------------------------------------

    def shift_n(self, f, k: int = 1):
        """Translate along n: returns g with g(n) = f(n + k), direction-aware."""
        vals = f.values if isinstance(f, LatticeField) else f
        return LatticeField(np.roll(vals, -int(k) * self.shift_direction, axis=0))

    def shift_j(self, f, k: int = 1):
        vals = f.values if isinstance(f, LatticeField) else f
        return LatticeField(np.roll(vals, -int(k), axis=1))

    def shift_r(self, f, k: int = 1):
        vals = f.values if isinstance(f, LatticeField) else f
        return LatticeField(np.roll(vals, -int(k), axis=2))

    def masked_norm(self, defect_values, j_lo=0, j_hi=0, r_lo=0, r_hi=0) -> float:
        """Norm of a defect over the links that are actually constrained.

        j_lo / j_hi drop that many sites at the low / high end of the j
        axis when wrap_j is off (same for r); with the wrap on the whole
        axis counts.
        """
        if self.wrap_j:
            j_lo = j_hi = 0
        if self.wrap_r:
            r_lo = r_hi = 0
        window = defect_values[:, j_lo:self.Lj - j_hi, r_lo:self.Lr - r_hi]
        return float(np.linalg.norm(window))

    def __repr__(self):
        return (
            f"HirotaGrid(Ln={self.Ln}, Lj={self.Lj}, Lr={self.Lr}, dim={self.dim}, "
            f"wrap_j={self.wrap_j}, wrap_r={self.wrap_r}, "
            f"shift_direction={self.shift_direction:+d})"
        )


class LatticeField:
    """Matrix-valued field on the (n, j, r) grid: an (Ln, Lj, Lr, d, d) array."""

    __slots__ = ("values",)

    def __init__(self, values):
        vals = np.asarray(values, dtype=np.complex128)
        if vals.ndim != 5 or vals.shape[3] != vals.shape[4]:
            raise ValueError(
                f"expected an (Ln, Lj, Lr, d, d) array, got shape {vals.shape}"
            )
        self.values = vals

    @property
    def dim(self) -> int:
        return self.values.shape[3]

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def copy(self) -> "LatticeField":
        return LatticeField(self.values.copy())

    def __add__(self, other):
        return LatticeField(self.values + other.values)

    def __sub__(self, other):
        return LatticeField(self.values - other.values)

    def __neg__(self):
        return LatticeField(-self.values)

    def __mul__(self, other):
        if isinstance(other, LatticeField):
            return LatticeField(self.values @ other.values)
        if np.isscalar(other):
            return LatticeField(self.values * other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return LatticeField(other * self.values)
        return NotImplemented

    def inv(self) -> "LatticeField":
        return field_inverse(self)

    def __repr__(self):
        return f"LatticeField(shape={self.values.shape})"


class TauField(LatticeField):
    """A LatticeField that is checked to be pointwise invertible on construction."""

    def __init__(self, values, rcond: float = RCOND_FLOOR):
        super().__init__(values)
        sv = np.linalg.svd(self.values, compute_uv=False)
        smax = np.maximum(sv[..., 0], 1e-300)
        bad = np.argwhere(sv[..., -1] / smax < rcond)
        if bad.size:
            site = tuple(int(i) for i in bad[0])
            raise SingularElement(site, f"tau is singular at grid site {site}")


def field_inverse(f: LatticeField, rcond: float = RCOND_FLOOR) -> LatticeField:
    """Pointwise matrix inverse with the same condition gate as TauField."""
    sv = np.linalg.svd(f.values, compute_uv=False)
    smax = np.maximum(sv[..., 0], 1e-300)
    bad = np.argwhere(sv[..., -1] / smax < rcond)
    if bad.size:
        site = tuple(int(i) for i in bad[0])
        raise SingularElement(site)
    return LatticeField(np.linalg.inv(f.values))


# -- linear problem and compatibility ------------------------------------------


def lax_residuals(grid: HirotaGrid, f: LatticeField, u: LatticeField, v: LatticeField):
    """Relative residuals of the two linear equations, (j-step, r-step).

    The j-step residual skips the j = 0 wrap link unless wrap_j is set,
    and likewise the r-step with wrap_r.
    """
    f_jm1 = grid.shift_j(f, -1)
    d1 = f_jm1.values - grid.shift_n(f, 1).values - (v.values @ f.values)
    res1 = grid.masked_norm(d1, j_lo=1) / max(1.0, f.norm(), v.norm())

    f_rm1 = grid.shift_r(f, -1)
    d2 = f_rm1.values - f.values - (u.values @ grid.shift_n(f, -1).values)
    res2 = grid.masked_norm(d2, r_lo=1) / max(1.0, f.norm(), u.norm())
    return res1, res2


def compatibility_residuals(grid: HirotaGrid, u: LatticeField, v: LatticeField):
    """Relative residuals of the coupled potential system, (first, second).

    first:  u(n, j-1, r) - u(n+1, j, r) - v(n, j, r-1) + v(n, j, r)
    second: v(n, j, r-1) u(n, j, r) - u(n, j-1, r) v(n-1, j, r)

    Both step j and r once, so the j = 0 and r = 0 links are skipped
    unless the corresponding wrap flag is set.
    """
    u_jm1 = grid.shift_j(u, -1).values
    v_rm1 = grid.shift_r(v, -1).values
    d1 = u_jm1 - grid.shift_n(u, 1).values - v_rm1 + v.values
    d2 = v_rm1 @ u.values - u_jm1 @ grid.shift_n(v, -1).values
    scale1 = max(1.0, u.norm(), v.norm())
    scale2 = max(1.0, u.norm() * max(1.0, v.norm()))
    res1 = grid.masked_norm(d1, j_lo=1, r_lo=1) / scale1
    res2 = grid.masked_norm(d2, j_lo=1, r_lo=1) / scale2
    return res1, res2


def tau_to_potentials(grid: HirotaGrid, tau: TauField):
    """Potentials (u, v) generated by an invertible tau function.

    u = tau_{n+1}(j, r-1) tau_n^{-1}(j, r-1) tau_{n-1}(j, r) tau_n^{-1}(j, r)
    v = tau_{n+1}(j-1, r) tau_n^{-1}(j-1, r) tau_n(j, r) tau_{n+1}^{-1}(j, r)

    This substitution solves the second compatibility equation identically
    for any invertible tau (wraps included: the formula is cyclic in all
    three axes).
    """
    tinv = field_inverse(tau)
    A = grid.shift_n(tau, 1).values @ tinv.values       # tau_{n+1} tau_n^{-1}
    D = grid.shift_n(tau, -1).values @ tinv.values      # tau_{n-1} tau_n^{-1}
    C = tau.values @ np.linalg.inv(grid.shift_n(tau, 1).values)
    u = np.roll(A, 1, axis=2) @ D
    v = np.roll(A, 1, axis=1) @ C
    return LatticeField(u), LatticeField(v)


def bilinear_residual_nonabelian(grid: HirotaGrid, tau: TauField) -> float:
    """Residual of the noncommutative bilinear equation for tau.

    With A = tau_{n+1} tau_n^{-1} and C = tau_n tau_{n+1}^{-1} the equation
    is the four-term identity

        u(n, j-1, r) - u(n+1, j, r) - A(n, j-1, r-1) C(n, j, r-1)
                     + A(n, j-1, r) C(n, j, r) = 0

    with u as in tau_to_potentials; the last two terms are v(n, j, r-1)
    and v(n, j, r), so this is exactly the first compatibility equation
    evaluated on the tau-generated potentials.
    """
    u, v = tau_to_potentials(grid, tau)
    res1, _ = compatibility_residuals(grid, u, v)
    return res1


def bilinear_residual_scalar(grid: HirotaGrid, tau: TauField) -> float:
    """Plain norm of the three-term scalar bilinear defect.

        tau(j+1, r) tau(j, r+1) - tau(j, r) tau(j+1, r+1)
            + tau_{n+1}(j+1, r) tau_{n-1}(j, r+1)

    Defined for dim = 1 only (the products would be order-ambiguous
    otherwise); raises DimensionError on matrix fields. Returned
    unnormalized, as the grid L2 norm over the constrained links.
    """
    if grid.dim != 1:
        raise DimensionError(
            f"scalar bilinear form needs dim = 1, grid has dim = {grid.dim}"
        )
    t = tau.values[..., 0, 0]
    t_jp = np.roll(t, -1, axis=1)
    t_rp = np.roll(t, -1, axis=2)
    t_jprp = np.roll(t_jp, -1, axis=2)
    tn_p = np.roll(t, -grid.shift_direction, axis=0)
    tn_m = np.roll(t, grid.shift_direction, axis=0)
    d = (
        t_jp * t_rp
        - t * t_jprp
        + np.roll(tn_p, -1, axis=1) * np.roll(tn_m, -1, axis=2)
    )
    return grid.masked_norm(d[..., None, None], j_hi=1, r_hi=1)


# -- Darboux dressing along the r axis ----------------------------------------


def dt_minus_potential(
    grid: HirotaGrid,
    u: LatticeField,
    sigma_r: LatticeField,
    sigma_rm1: LatticeField,
):
    """Dress u along the r axis and report the link residual.

    The dressed potential is the additive shift

        u_minus = u - sigma(r-1) + sigma(r)

    and the pair is linked multiplicatively by

        u_minus T^{-1}(sigma(r)) = sigma(r-1) T^{-1}(u),

    equivalently by the returned relative residual of

        u T^{-1}(sigma(r)) - sigma(r-1) T^{-1}(u)
          - (sigma(r-1) - sigma(r)) T^{-1}(sigma(r)).

    ``sigma_r`` and ``sigma_rm1`` are the ratio element evaluated at the
    two neighbouring r arguments, supplied as full grid fields.  When
    ``sigma_rm1`` comes from an r roll of data that is only projectively
    periodic, build the grid with ``wrap_r=False`` so the wrapped slice is
    excluded from the reported residual.
    """
    u_minus = u - sigma_rm1 + sigma_r
    link = (
        u.values @ grid.shift_n(sigma_r, -1).values
        - sigma_rm1.values @ grid.shift_n(u, -1).values
        - (sigma_rm1.values - sigma_r.values) @ grid.shift_n(sigma_r, -1).values
    )
    scale = max(1.0, u.norm(), sigma_r.norm(), sigma_rm1.norm())
    residual = grid.masked_norm(link, r_lo=1) / scale
    return u_minus, residual


# -- scalar dressing chain ------------------------------------------------------


def _as_scalar_axis(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim == 3 and arr.shape[1:] == (1, 1):
        arr = arr[:, 0, 0]
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be a 1-d scalar lattice function")
    return arr


def potential_from_sigma_scalar(sigma_rm1, sigma_r, floor: float = DENOM_FLOOR):
    """Scalar potential of a dressing step from its ratio elements.

        u = (sigma(r-1) - sigma(r)) T^{-1}(sigma(r))
            / (T^{-1}(sigma(r)) - sigma(r-1))

    Arguments are scalar functions of the n variable (convention
    T f(n) = f(n + 1)). A denominator below ``floor`` in absolute value
    raises DenominatorUnderflow naming the site.
    """
    a = _as_scalar_axis(sigma_rm1, "sigma_rm1")
    b = _as_scalar_axis(sigma_r, "sigma_r")
    b_tm1 = np.roll(b, 1)
    den = b_tm1 - a
    bad = np.nonzero(np.abs(den) < floor)[0]
    if bad.size:
        raise DenominatorUnderflow(int(bad[0]))
    return (a - b) * b_tm1 / den


@dataclass
class HirotaChainState:
    """Scalar chain state: link index N, ratio elements, chain variable s.

    ``sigma`` maps the two active r arguments (consecutive integers r-1
    and r) to scalar lattice functions of n. ``s`` may be None, in which
    case the next step derives it from the ratio elements; that derivation
    divides by T^{-1}(sigma(r)) - sigma(r-1) and fails loudly at the
    period-one fixed point where the difference vanishes.
    """

    N: int
    sigma: Dict[int, np.ndarray]
    s: Optional[np.ndarray] = None


def _chain_pair(state: HirotaChainState):
    keys = sorted(state.sigma.keys())
    if len(keys) != 2 or keys[1] - keys[0] != 1:
        raise ParameterError(
            f"sigma map needs exactly two consecutive r arguments, got {keys}"
        )
    a = _as_scalar_axis(state.sigma[keys[0]], f"sigma[{keys[0]}]")
    b = _as_scalar_axis(state.sigma[keys[1]], f"sigma[{keys[1]}]")
    return a, b


def chain_step(
    state: HirotaChainState, tol: float = 1e-9, floor: float = DENOM_FLOOR
) -> HirotaChainState:
    """Advance the scalar dressing chain one link under period-one closure.

    The closure sets sigma_{N+1} = sigma_N, so the new state keeps the
    same ratio elements and only the chain variable moves:

        s_{N+1} = s_N sigma(r-1) / T^{-1}(sigma(r)).

    When the state carries s it is used as given, after the division-free
    consistency check

        s (T^{-1}(sigma(r)) - sigma(r-1)) - (sigma(r-1) - sigma(r))

    whose relative failure raises ChainInconsistency (at the fixed point
    sigma(r-1) = sigma(r) both sides vanish and any s is consistent).
    When s is None it is recomputed from the ratio elements, which
    requires the denominator to clear ``floor``.
    """
    a, b = _chain_pair(state)  # a = sigma(r-1), b = sigma(r)
    b_tm1 = np.roll(b, 1)
    if state.s is None:
        den = b_tm1 - a
        bad = np.nonzero(np.abs(den) < floor)[0]
        if bad.size:
            raise DenominatorUnderflow(int(bad[0]))
        s = (a - b) / den
    else:
        s = _as_scalar_axis(state.s, "s")
        gap = s * (b_tm1 - a) - (a - b)
        scale = max(1.0, float(np.linalg.norm(s)), float(np.linalg.norm(a)),
                    float(np.linalg.norm(b)))
        res = float(np.linalg.norm(gap)) / scale
        if res > tol:
            raise ChainInconsistency(
                f"chain variable inconsistent with ratio elements: "
                f"residual {res:.3e} exceeds {tol:g}"
            )
    bad = np.nonzero(np.abs(b_tm1) < floor)[0]
    if bad.size:
        raise DenominatorUnderflow(int(bad[0]))
    s_next = s * a / b_tm1
    return HirotaChainState(N=state.N + 1, sigma=dict(state.sigma), s=s_next)


@dataclass
class PeriodicClosure:
    """Result of closing a scalar chain of period p."""

    phi: np.ndarray
    A: np.ndarray
    residual: float
    monodromy: float


def periodic_closure(sigma0, p: int, delta: float) -> PeriodicClosure:
    """Close a scalar chain whose sigma advances by lattice translation.

    With sigma_{N+p} = T^p(sigma_N), the closing wavefunction solves
    phi(n + 1) = T^p(sigma0)(n + 1) phi(n) with phi(0) = 1; it is built as
    the exact product integral of the link factors. The returned exponent
    field A satisfies phi(n) = exp(A(n) n delta) exactly, with
    A(n) = (sum of principal logs of the first n link factors) / (n delta)
    and A(0) the log of the first factor over delta; for shift-invariant
    sigma0 this collapses to the constant ln(sigma0)/delta.

    ``residual`` is the norm over the L - 1 in-window links of the closure
    relation T(phi) = T^{p+1}(sigma0) phi (zero by construction, reported
    for symmetry with the other closure checks); ``monodromy`` is the
    defect of the wrap link, the obstruction to exact periodicity of phi.

    Scalar only: matrix input raises DimensionError. A link factor on the
    negative real axis triggers LogBranchWarning (the principal branch is
    used; phi itself is branch-independent).
    """
    s0 = _as_scalar_axis(sigma0, "sigma0")
    if int(p) < 0:
        raise ParameterError(f"period must be nonnegative, got {p}")
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    L = s0.shape[0]
    factors = np.roll(s0, -(int(p) + 1))  # factor at site n is sigma0(n + p + 1)
    if np.any(np.abs(factors) < DENOM_FLOOR):
        bad = int(np.nonzero(np.abs(factors) < DENOM_FLOOR)[0][0])
        raise DenominatorUnderflow(bad, "closure factor too close to zero")
    on_cut = (factors.real < 0) & (
        np.abs(factors.imag) <= 1e-14 * np.abs(factors.real)
    )
    if np.any(on_cut):
        warnings.warn(
            "closure factor on the negative real axis; using the principal branch",
            LogBranchWarning,
        )
    logs = np.log(factors)
    phi = np.empty(L, dtype=np.complex128)
    phi[0] = 1.0
    for n in range(L - 1):
        phi[n + 1] = factors[n] * phi[n]
    A = np.empty(L, dtype=np.complex128)
    A[0] = logs[0] / delta
    csum = np.cumsum(logs)
    for n in range(1, L):
        A[n] = csum[n - 1] / (n * delta)
    links = phi[1:] - factors[:-1] * phi[:-1]
    residual = float(np.linalg.norm(links)) / max(1.0, float(np.linalg.norm(phi)))
    monodromy = float(abs(phi[0] - factors[L - 1] * phi[L - 1])) / max(
        1.0, float(abs(phi[L - 1]))
    )
    return PeriodicClosure(phi=phi, A=A, residual=residual, monodromy=monodromy)
