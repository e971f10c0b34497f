"""Lossless two-port beam splitters and their Fock-space transition amplitudes.

A splitter maps output creation operators onto input ones,
``a_out_i^dag = sum_j S[i, j] a_in_j^dag``.  Transition amplitudes are
obtained by writing the input operators through the inverse matrix and
collecting monomials, so ``A(n, m -> p, q) = <p, q| U |n, m>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import CapacityError, DomainError

COMPLEX_SYMMETRIC = "complex-symmetric"
ASYMMETRIC = "asymmetric"
REAL_ROTATION = "real-rotation"
CUSTOM = "custom"
CONVENTIONS = (COMPLEX_SYMMETRIC, ASYMMETRIC, REAL_ROTATION)
DEFAULT_CONVENTION = COMPLEX_SYMMETRIC

DEFAULT_MAX_COUNT = 256
UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class ScatteringMatrix:
    s11: complex
    s12: complex
    s21: complex
    s22: complex
    convention: str = CUSTOM
    theta: float | None = None

    @classmethod
    def from_array(cls, arr, convention: str = CUSTOM) -> "ScatteringMatrix":
        a = np.asarray(arr, dtype=complex)
        if a.shape != (2, 2):
            raise DomainError(f"scattering matrix must be 2x2, got shape {a.shape}")
        return cls(complex(a[0, 0]), complex(a[0, 1]), complex(a[1, 0]), complex(a[1, 1]), convention)

    def as_array(self) -> np.ndarray:
        return np.array([[self.s11, self.s12], [self.s21, self.s22]], dtype=complex)

    @property
    def t(self) -> float:
        """Transmission amplitude magnitude |S11|."""
        return abs(self.s11)

    @property
    def r(self) -> float:
        """Reflection amplitude magnitude |S12|."""
        return abs(self.s12)

    @property
    def T(self) -> float:
        return self.t**2

    @property
    def R(self) -> float:
        return self.r**2

    @property
    def phases(self) -> tuple[float, float, float, float]:
        """Arguments (theta11, theta12, theta21, theta22) of the four entries."""
        return tuple(math.atan2(z.imag, z.real) for z in (self.s11, self.s12, self.s21, self.s22))


@dataclass(frozen=True)
class ValidationReport:
    row1: float
    row2: float
    orthogonality: float
    tol: float = UNITARITY_TOL

    @property
    def passed(self) -> bool:
        return max(self.row1, self.row2, self.orthogonality) < self.tol

    def residuals(self) -> dict[str, float]:
        return {"row1": self.row1, "row2": self.row2, "orthogonality": self.orthogonality}


def tr_amplitudes(theta: float) -> tuple[float, float]:
    if not 0.0 <= theta <= math.pi:
        raise DomainError(f"theta must lie in [0, pi], got {theta!r}")
    if theta == math.pi / 2:
        # cos(pi/4) and sin(pi/4) differ in the last bit; keep t == r so
        # balanced-splitter zeros come out exact
        h = math.sqrt(0.5)
        return h, h
    return math.cos(theta / 2), math.sin(theta / 2)


def from_convention(convention: str = DEFAULT_CONVENTION, theta: float = math.pi / 2) -> ScatteringMatrix:
    """Build one of the three standard splitter matrices at angle ``theta``.

    ``t = cos(theta/2)`` and ``r = sin(theta/2)``; ``theta = pi/2`` is 50:50.
    """
    t, r = tr_amplitudes(theta)
    if convention == COMPLEX_SYMMETRIC:
        entries = (t, 1j * r, 1j * r, t)
    elif convention == ASYMMETRIC:
        entries = (t, r, r, -t)
    elif convention == REAL_ROTATION:
        entries = (t, -r, r, t)
    else:
        raise DomainError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    return ScatteringMatrix(*(complex(e) for e in entries), convention=convention, theta=theta)


def balanced(convention: str = DEFAULT_CONVENTION) -> ScatteringMatrix:
    return from_convention(convention, math.pi / 2)


def validate(matrix: ScatteringMatrix, tol: float = UNITARITY_TOL) -> ValidationReport:
    s11, s12, s21, s22 = matrix.s11, matrix.s12, matrix.s21, matrix.s22
    return ValidationReport(
        row1=abs(abs(s11) ** 2 + abs(s12) ** 2 - 1.0),
        row2=abs(abs(s21) ** 2 + abs(s22) ** 2 - 1.0),
        orthogonality=abs(s11 * s12.conjugate() + s21 * s22.conjugate()),
        tol=tol,
    )


def _require_unitary(matrix: ScatteringMatrix) -> None:
    report = validate(matrix)
    if not report.passed:
        raise DomainError(f"scattering matrix is not unitary: residuals {report.residuals()}")


def inverse(matrix: ScatteringMatrix) -> ScatteringMatrix:
    """Unitary inverse (conjugate transpose)."""
    _require_unitary(matrix)
    return ScatteringMatrix(
        matrix.s11.conjugate(),
        matrix.s21.conjugate(),
        matrix.s12.conjugate(),
        matrix.s22.conjugate(),
        convention=CUSTOM,
        theta=matrix.theta,
    )


@lru_cache(maxsize=8)
def log_factorials(max_count: int) -> np.ndarray:
    """Read-only table of ``log(k!)`` for ``k = 0..max_count``."""
    table = np.array([math.lgamma(k + 1) for k in range(max_count + 1)])
    table.setflags(write=False)
    return table


def _check_counts(max_count: int, *counts: int) -> None:
    for c in counts:
        if c < 0:
            raise DomainError(f"photon counts must be nonnegative, got {c}")
        if c > max_count:
            raise CapacityError(f"photon count {c} exceeds the configured maximum {max_count}")


def _inverse_entries(matrix: ScatteringMatrix) -> tuple[complex, complex, complex, complex]:
    _require_unitary(matrix)
    return (
        matrix.s11.conjugate(),
        matrix.s21.conjugate(),
        matrix.s12.conjugate(),
        matrix.s22.conjugate(),
    )


# above this sum of |terms| the alternating expansion loses more than
# ~1e-14 absolute accuracy and the rotation route takes over
EXPANSION_COND_LIMIT = 50.0


def _expansion_terms(u: tuple[complex, complex, complex, complex], n: int, m: int, max_count: int) -> np.ndarray:
    """Terms ``[p, j]`` of the double binomial expansion, weights in log space."""
    u11, u12, u21, u22 = u
    N = n + m
    lf = log_factorials(max_count)
    p = np.arange(N + 1)[:, None]
    # iterate over the shorter of the two binomial expansions
    if n <= m:
        k = np.arange(n + 1)[None, :]
        l = p - k
    else:
        l = np.arange(m + 1)[None, :]
        k = p - l
    valid = (k >= 0) & (k <= n) & (l >= 0) & (l <= m)
    kc = np.clip(k, 0, n)
    lc = np.clip(l, 0, m)
    logw = 0.5 * (lf[p] + lf[N - p] + lf[n] + lf[m]) - lf[kc] - lf[n - kc] - lf[lc] - lf[m - lc]
    phase = _powers(u11, n)[kc] * _powers(u12, n)[n - kc] * _powers(u21, m)[lc] * _powers(u22, m)[m - lc]
    return np.where(valid, np.exp(np.where(valid, logw, 0.0)) * phase, 0.0)


def _powers(z: complex, size: int) -> np.ndarray:
    out = np.empty(size + 1, dtype=complex)
    out[0] = 1.0
    for j in range(1, size + 1):
        out[j] = out[j - 1] * z
    return out


@lru_cache(maxsize=600)
def _rotation_eigensystem(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors of the symmetric tridiagonal form of ``a1^dag a2 + a2^dag a1`` in sector N.

    Its eigenvalues are exactly ``-N, -N+2, ..., N``.
    """
    k = np.arange(N)
    off = np.sqrt((k + 1.0) * (N - k))
    _, vecs = scipy.linalg.eigh_tridiagonal(np.zeros(N + 1), off)
    vecs.setflags(write=False)
    return np.arange(-N, N + 1, 2, dtype=float), vecs


def _rotation_column(phi: float, n: int, N: int) -> np.ndarray:
    """Column ``n`` of ``exp(phi (a1^dag a2 - a2^dag a1))`` in sector N (real)."""
    w, V = _rotation_eigensystem(N)
    col = V @ (np.exp(-1j * phi * w) * V[n, :])
    p = np.arange(N + 1)
    return np.real(col * np.array(_I_POW)[(p - n) % 4])


_I_POW = (1, 1j, -1, -1j)


def _rotation_route(u: tuple[complex, complex, complex, complex], n: int, m: int) -> np.ndarray:
    """Factor ``u = diag(l1, l2) R(phi) diag(1, rho2)`` and rotate in the sector."""
    u11, u12, u21, u22 = u
    c, s = abs(u11), abs(u12)
    phi = math.atan2(s, c)
    l1 = u11 / c
    l2 = u21 / s
    rho2 = -u12 / (l1 * s)
    N = n + m
    col = _rotation_column(phi, n, N)
    p = np.arange(N + 1)
    return (l1**n) * (l2**m) * _powers(rho2, N)[N - p] * col


def sector_amplitudes(
    matrix: ScatteringMatrix, n: int, m: int, max_count: int = DEFAULT_MAX_COUNT, method: str = "auto"
) -> np.ndarray:
    """Amplitudes ``A(n, m -> p, n+m-p)`` for every ``p = 0..n+m``.

    The default route expands ``(u11 a1 + u12 a2)^n (u21 a1 + u22 a2)^m``
    (``u = S^-1``) binomially and reads off each monomial, with factorial
    weights in log space.  That alternating sum cancels badly for large
    balanced inputs, so once the summed term magnitude exceeds
    ``EXPANSION_COND_LIMIT`` the column is recomputed by exponentiating the
    rotation generator in the fixed-number sector instead.
    ``method`` forces ``"expansion"`` or ``"rotation"``.
    """
    _check_counts(max_count, n, m, n + m)
    u = _inverse_entries(matrix)
    if method not in ("auto", "expansion", "rotation"):
        raise DomainError(f"unknown method {method!r}")
    well_mixed = abs(u[0]) > 1e-12 and abs(u[1]) > 1e-12
    if method == "rotation" and not well_mixed:
        method = "expansion"
    if method != "rotation":
        terms = _expansion_terms(u, n, m, max_count)
        if method == "expansion" or not well_mixed:
            return terms.sum(axis=1)
        if float(np.abs(terms).sum(axis=1).max()) <= EXPANSION_COND_LIMIT:
            return terms.sum(axis=1)
    return _rotation_route(u, n, m)


def transition_amplitude(
    matrix: ScatteringMatrix, n: int, m: int, p: int, q: int, max_count: int = DEFAULT_MAX_COUNT
) -> complex:
    """Return ``<p, q| U |n, m>`` for the splitter ``matrix``.

    Photon-number non-conservation is a caller error, not a zero amplitude.
    """
    _check_counts(max_count, n, m, p, q)
    if p + q != n + m:
        raise DomainError(f"photon number not conserved: {n}+{m} in, {p}+{q} out")
    return complex(sector_amplitudes(matrix, n, m, max_count)[p])


def sector_unitary(matrix: ScatteringMatrix, total: int, max_count: int = DEFAULT_MAX_COUNT) -> np.ndarray:
    """Matrix ``U[p, n] = A(n, total-n -> p, total-p)`` of the fixed-number sector."""
    cols = [sector_amplitudes(matrix, n, total - n, max_count) for n in range(total + 1)]
    return np.stack(cols, axis=1)
