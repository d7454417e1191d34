"""Matrix-valued functions on a periodic one-dimensional lattice.

The base ring is the set of C^{d x d}-valued functions on Z/LZ with pointwise
addition and pointwise matrix multiplication. The lattice translation T acts
by (T f)(n) = f(n + 1) and is an automorphism of the ring. Difference
operators are finite Laurent sums sum_m U_m T^m with coefficients in the
ring; they act on wavefunctions by (L f)(n) = sum_m U_m(n) f(n + m).

Dense linear algebra happens in a site-major flattening: a difference
operator becomes an (L d) x (L d) matrix whose (n, (n + m) mod L) block is
U_m(n), and eigenvectors of that matrix reshape back into lattice
wavefunctions. Eigenvalues are ordered by modulus, then argument, and
grouped into clusters at a fixed separation threshold so that callers can
ask for well-separated spectral data and get a loud error otherwise.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .errors import (
    ConfigError,
    DegenerateSeed,
    DegenerateSpectrum,
    LengthMismatch,
    SingularElement,
)

# Reciprocal-condition floor for pointwise inverses.
RCOND_FLOOR = 1e-12

# Two eigenvalues closer than this are treated as one cluster.
EIGEN_SEPARATION = 1e-8


class RingContext:
    """Shared lattice geometry: site count, matrix dimension, tolerance.

    Parameters
    ----------
    sites : int
        Number of lattice sites L. At least 2, otherwise the translation
        degenerates to the identity and every band collapses.
    dim : int
        Matrix dimension d of the coefficient ring.
    tol : float
        Default relative tolerance used by residual gates downstream.
    """

    def __init__(self, sites: int, dim: int, tol: float = 1e-9):
        if int(sites) < 2:
            raise ConfigError(f"need at least 2 lattice sites, got {sites}")
        if int(dim) < 1:
            raise ConfigError(f"matrix dimension must be at least 1, got {dim}")
        if not np.isfinite(tol) or tol < 0:
            raise ConfigError(f"tolerance must be a nonnegative number, got {tol}")
        self.sites = int(sites)
        self.dim = int(dim)
        self.tol = float(tol)

    # -- element constructors -------------------------------------------------

    def element(self, values) -> "RingElement":
        el = RingElement(values)
        if el.sites != self.sites or el.dim != self.dim:
            raise ValueError(
                f"expected shape ({self.sites}, {self.dim}, {self.dim}), "
                f"got {el.values.shape}"
            )
        return el

    def zeros(self) -> "RingElement":
        return RingElement(
            np.zeros((self.sites, self.dim, self.dim), dtype=np.complex128)
        )

    def identity(self) -> "RingElement":
        vals = np.zeros((self.sites, self.dim, self.dim), dtype=np.complex128)
        vals[:] = np.eye(self.dim)
        return RingElement(vals)

    def constant(self, matrix) -> "RingElement":
        """Broadcast a single d x d matrix to every site."""
        m = np.asarray(matrix, dtype=np.complex128)
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"expected a ({self.dim}, {self.dim}) matrix, got {m.shape}")
        vals = np.empty((self.sites, self.dim, self.dim), dtype=np.complex128)
        vals[:] = m
        return RingElement(vals)

    def random(self, rng: np.random.Generator, scale: float = 1.0) -> "RingElement":
        shape = (self.sites, self.dim, self.dim)
        vals = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        return RingElement(scale * vals)

    def __repr__(self):
        return f"RingContext(sites={self.sites}, dim={self.dim}, tol={self.tol})"


class RingElement:
    """One ring element: an (L, d, d) complex array, site index first."""

    __slots__ = ("values",)

    def __init__(self, values):
        vals = np.asarray(values, dtype=np.complex128)
        if vals.ndim != 3 or vals.shape[1] != vals.shape[2]:
            raise ValueError(f"expected an (L, d, d) array, got shape {vals.shape}")
        self.values = vals

    @property
    def sites(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def copy(self) -> "RingElement":
        return RingElement(self.values.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def shift(self, k: int = 1) -> "RingElement":
        return shift(self, k)

    def inv(self, rcond: float = RCOND_FLOOR) -> "RingElement":
        return pointwise_inverse(self, rcond)

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RingElement):
            if other.values.shape != self.values.shape:
                raise ValueError("shape mismatch between ring elements")
            return other.values
        return None

    def __add__(self, other):
        vals = self._coerce(other)
        if vals is None:
            return NotImplemented
        return RingElement(self.values + vals)

    def __sub__(self, other):
        vals = self._coerce(other)
        if vals is None:
            return NotImplemented
        return RingElement(self.values - vals)

    def __neg__(self):
        return RingElement(-self.values)

    def __mul__(self, other):
        """Ring product with another element, or scaling by a number."""
        if isinstance(other, RingElement):
            return mul(self, other)
        if np.isscalar(other):
            return RingElement(self.values * other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return RingElement(other * self.values)
        return NotImplemented

    def __repr__(self):
        return f"RingElement(sites={self.sites}, dim={self.dim})"


def shift(f: RingElement, k: int = 1) -> RingElement:
    """Apply the lattice translation T^k, (T^k f)(n) = f(n + k)."""
    return RingElement(np.roll(f.values, -int(k), axis=0))


def mul(a: RingElement, b: RingElement) -> RingElement:
    """Pointwise matrix product (a b)(n) = a(n) b(n)."""
    return RingElement(np.einsum("nij,njk->nik", a.values, b.values))


def pointwise_inverse(f: RingElement, rcond: float = RCOND_FLOOR) -> RingElement:
    """Pointwise matrix inverse with a reciprocal-condition gate.

    Raises SingularElement naming the first offending site when any site's
    reciprocal condition number falls below ``rcond``.
    """
    vals = f.values
    sv = np.linalg.svd(vals, compute_uv=False)
    smax = sv[:, 0]
    smin = sv[:, -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        recip = np.where(smax > 0, smin / np.where(smax > 0, smax, 1.0), 0.0)
    bad = np.nonzero(recip < rcond)[0]
    if bad.size:
        raise SingularElement(int(bad[0]))
    return RingElement(np.linalg.inv(vals))


class DifferenceOperator:
    """Finite Laurent difference operator sum_{m=low}^{high} U_m T^m.

    ``coeffs`` maps the shift order m to a RingElement; orders inside
    [low, high] that are absent count as zero. At least one coefficient must
    be present so the lattice shape is known.
    """

    def __init__(self, low: int, high: int, coeffs: Mapping[int, RingElement]):
        low = int(low)
        high = int(high)
        if low > high:
            raise ValueError(f"empty band: low={low} > high={high}")
        stored = {}
        shape = None
        for m, el in coeffs.items():
            m = int(m)
            if m < low or m > high:
                raise ValueError(f"coefficient order {m} outside [{low}, {high}]")
            if not isinstance(el, RingElement):
                el = RingElement(el)
            if shape is None:
                shape = el.values.shape
            elif el.values.shape != shape:
                raise ValueError("coefficient shapes disagree")
            stored[m] = el
        if shape is None:
            raise ValueError("need at least one coefficient to fix the lattice shape")
        self.low = low
        self.high = high
        self.coeffs = stored
        self.sites = shape[0]
        self.dim = shape[1]

    def coeff(self, m: int) -> RingElement:
        """Coefficient of T^m, a zero element when not stored."""
        el = self.coeffs.get(int(m))
        if el is None:
            return RingElement(
                np.zeros((self.sites, self.dim, self.dim), dtype=np.complex128)
            )
        return el

    def orders(self) -> Iterable[int]:
        return range(self.low, self.high + 1)

    def __repr__(self):
        return (
            f"DifferenceOperator(low={self.low}, high={self.high}, "
            f"sites={self.sites}, dim={self.dim})"
        )


def apply_operator(op: DifferenceOperator, f: RingElement) -> RingElement:
    """Act on a wavefunction: (L f)(n) = sum_m U_m(n) f(n + m)."""
    if f.sites != op.sites or f.dim != op.dim:
        raise ValueError("operator and wavefunction shapes disagree")
    out = np.zeros_like(f.values)
    for m, el in op.coeffs.items():
        out += np.einsum("nij,njk->nik", el.values, np.roll(f.values, -m, axis=0))
    return RingElement(out)


def operator_matrix(op: DifferenceOperator) -> np.ndarray:
    """Site-major dense matrix of the operator, shape (L d, L d)."""
    L, d = op.sites, op.dim
    M = np.zeros((L * d, L * d), dtype=np.complex128)
    for m, el in op.coeffs.items():
        for n in range(L):
            col = (n + m) % L
            M[n * d:(n + 1) * d, col * d:(col + 1) * d] += el.values[n]
    return M


def _sorted_spectrum(op: DifferenceOperator):
    M = operator_matrix(op)
    lam, V = np.linalg.eig(M)
    order = np.lexsort((np.angle(lam), np.abs(lam)))
    return lam[order], V[:, order]


def _cluster_spectrum(lam: np.ndarray, separation: float = EIGEN_SEPARATION):
    """Group the sorted eigenvalues into clusters by adjacent-gap chaining."""
    clusters = []
    for k in range(lam.size):
        if clusters and abs(lam[k] - lam[clusters[-1][-1]]) <= separation:
            clusters[-1].append(k)
        else:
            clusters.append([k])
    return clusters


def eigen_solutions(op: DifferenceOperator, count: int):
    """First ``count`` well-separated eigenpairs of the dense operator.

    Returns a list of (eigenvalue, wavefunction) tuples where the
    wavefunction is an (L, d) array, one d-vector per site. Eigenvalues are
    ordered by (modulus, argument) and one representative is taken per
    cluster; asking for more pairs than there are clusters raises
    DegenerateSpectrum.
    """
    lam, V = _sorted_spectrum(op)
    clusters = _cluster_spectrum(lam)
    if count > len(clusters):
        raise DegenerateSpectrum(
            f"requested {count} separated eigenvalues, spectrum has "
            f"{len(clusters)} clusters at separation {EIGEN_SEPARATION:g}"
        )
    out = []
    for cl in clusters[:count]:
        k = cl[0]
        out.append((lam[k], V[:, k].reshape(op.sites, op.dim)))
    return out


def block_seed(op: DifferenceOperator, eigen_indices):
    """Stack d eigenvectors into an invertible matrix wavefunction.

    ``eigen_indices`` picks d entries of the sorted spectrum. The returned
    pair (mu, phi) satisfies L phi = phi mu with mu the constant diagonal
    matrix of the chosen eigenvalues and phi(n) the matrix whose j-th column
    is the j-th eigenvector at site n.

    Raises DegenerateSpectrum when two chosen eigenvalues coincide within
    the separation threshold, and DegenerateSeed when the stacked columns
    fail to be invertible at some site.
    """
    idx = [int(i) for i in eigen_indices]
    if len(idx) != op.dim:
        raise LengthMismatch(
            f"need exactly {op.dim} eigenvector columns, got {len(idx)}"
        )
    lam, V = _sorted_spectrum(op)
    chosen = lam[idx]
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if abs(chosen[a] - chosen[b]) <= EIGEN_SEPARATION:
                raise DegenerateSpectrum(
                    f"eigenvalues at indices {idx[a]} and {idx[b]} coincide "
                    f"within separation {EIGEN_SEPARATION:g}"
                )
    L, d = op.sites, op.dim
    phi_vals = np.empty((L, d, d), dtype=np.complex128)
    for j, i in enumerate(idx):
        phi_vals[:, :, j] = V[:, i].reshape(L, d)
    sv = np.linalg.svd(phi_vals, compute_uv=False)
    smax = np.maximum(sv[:, 0], 1e-300)
    if np.any(sv[:, -1] < 1e-8) or np.any(sv[:, -1] / smax < RCOND_FLOOR):
        site = int(np.argmin(sv[:, -1]))
        raise DegenerateSeed(f"seed frame is numerically singular at site {site}")
    mu = np.diag(chosen)
    return mu, RingElement(phi_vals)


def constant_like(f: RingElement, matrix) -> RingElement:
    """Broadcast a single d x d matrix (or scalar) over f's lattice."""
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim == 0:
        m = m * np.eye(f.dim)
    if m.shape != (f.dim, f.dim):
        raise ValueError(f"expected a ({f.dim}, {f.dim}) matrix, got shape {m.shape}")
    vals = np.empty_like(f.values)
    vals[:] = m
    return RingElement(vals)


# -- norms and residuals used across the package ------------------------------


def norm(x) -> float:
    """Frobenius norm over all axes; accepts RingElement or ndarray."""
    if isinstance(x, RingElement):
        return float(np.linalg.norm(x.values))
    return float(np.linalg.norm(np.asarray(x)))


def rel_residual(diff, *refs) -> float:
    """Norm of ``diff`` relative to max(1, norms of the reference operands)."""
    scale = 1.0
    for r in refs:
        scale = max(scale, norm(r))
    return norm(diff) / scale
