"""Input states in a truncated Fock basis.

Every state carries the probability mass it dropped at truncation
(``tail_mass``) so downstream distributions can account for it.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy.stats import poisson

from .errors import CapacityError, DomainError
from .splitter import DEFAULT_MAX_COUNT

DEFAULT_EPSILON = 1e-12
NORM_TOL = 1e-12
PARITY_TOL = 1e-14
MAX_COHERENT_NBAR = 1e4


@dataclass(frozen=True, eq=False)
class FockVector:
    coefficients: np.ndarray
    tail_mass: float = 0.0
    label: str = ""

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def cutoff(self) -> int:
        return len(self.coefficients) - 1

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def norm_residual(self) -> float:
        return abs(float(self.probabilities.sum()) + self.tail_mass - 1.0)

    def to_density(self) -> "SingleModeDensity":
        c = self.coefficients
        return SingleModeDensity(np.outer(c, c.conj()), self.tail_mass, self.label)


@dataclass(frozen=True, eq=False)
class SingleModeDensity:
    matrix: np.ndarray
    tail_mass: float = 0.0
    label: str = ""

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DomainError(f"density matrix must be square, got shape {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @property
    def cutoff(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def probabilities(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    def norm_residual(self) -> float:
        return abs(float(np.real(np.trace(self.matrix))) + self.tail_mass - 1.0)

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def is_diagonal(self) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return not np.any(off)


SingleMode = Union[FockVector, SingleModeDensity]


@dataclass(frozen=True, eq=False)
class PureBipartite:
    """Pure two-mode state ``sum c[n, m] |n, m>``."""

    coefficients: np.ndarray
    tail_mass: float = 0.0
    label: str = ""

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        if c.ndim != 2:
            raise DomainError(f"bipartite coefficients must be a 2-D grid, got {c.ndim}-D")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def cutoffs(self) -> tuple[int, int]:
        return self.coefficients.shape[0] - 1, self.coefficients.shape[1] - 1

    def norm_residual(self) -> float:
        return abs(float(np.sum(np.abs(self.coefficients) ** 2)) + self.tail_mass - 1.0)


@dataclass(frozen=True, eq=False)
class ProductInput:
    mode1: SingleMode
    mode2: SingleMode

    @property
    def tail_mass(self) -> float:
        t1, t2 = self.mode1.tail_mass, self.mode2.tail_mass
        return t1 + t2 - t1 * t2

    @property
    def label(self) -> str:
        return f"{self.mode1.label or '?'} (x) {self.mode2.label or '?'}"

    def norm_residual(self) -> float:
        return max(self.mode1.norm_residual(), self.mode2.norm_residual())

    def as_pure(self) -> PureBipartite | None:
        """Coefficient grid when both factors are pure, else ``None``."""
        if isinstance(self.mode1, FockVector) and isinstance(self.mode2, FockVector):
            grid = np.outer(self.mode1.coefficients, self.mode2.coefficients)
            return PureBipartite(grid, self.tail_mass, self.label)
        return None


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Convex mixture of pure bipartite states."""

    components: tuple[tuple[float, PureBipartite], ...] = field(default_factory=tuple)

    def __post_init__(self):
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise DomainError("ensemble needs at least one component")
        if any(w < 0 for w, _ in comps):
            raise DomainError("ensemble weights must be nonnegative")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > NORM_TOL:
            raise DomainError(f"ensemble weights sum to {total!r}, not 1")
        object.__setattr__(self, "components", comps)

    @property
    def tail_mass(self) -> float:
        return sum(w * s.tail_mass for w, s in self.components)

    @property
    def label(self) -> str:
        return "ensemble[" + ", ".join(f"{w:g}:{s.label or '?'}" for w, s in self.components) + "]"

    def norm_residual(self) -> float:
        return max(s.norm_residual() for _, s in self.components)


BipartiteInput = Union[ProductInput, PureBipartite, Ensemble]


def _check_epsilon(epsilon: float) -> None:
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")


def make_fock(n: int, max_count: int = DEFAULT_MAX_COUNT) -> FockVector:
    if n < 0:
        raise DomainError(f"photon number must be nonnegative, got {n}")
    if n > max_count:
        raise CapacityError(f"Fock state |{n}> exceeds the maximum count {max_count}")
    c = np.zeros(n + 1, dtype=complex)
    c[n] = 1.0
    return FockVector(c, 0.0, f"fock:{n}")


def poisson_tail(cutoff: int, nbar: float) -> float:
    """Poisson mass above ``cutoff``."""
    if nbar == 0:
        return 0.0
    return float(poisson.sf(cutoff, nbar))


def thermal_tail(cutoff: int, nbar: float) -> float:
    """Bose-Einstein mass above ``cutoff``: ``(nbar/(1+nbar))^(cutoff+1)``."""
    if nbar == 0:
        return 0.0
    return (nbar / (1.0 + nbar)) ** (cutoff + 1)


def auto_cutoff(kind: str, param: float | int, epsilon: float = DEFAULT_EPSILON, max_count: int = DEFAULT_MAX_COUNT) -> int:
    """Smallest cutoff whose tail mass is below ``epsilon``.

    ``kind`` is ``"fock"`` (param = n), ``"coherent"`` (param = |beta|^2) or
    ``"thermal"`` (param = nbar).
    """
    _check_epsilon(epsilon)
    if kind == "fock":
        n = int(param)
        if n > max_count:
            raise CapacityError(f"Fock state |{n}> exceeds the maximum count {max_count}")
        return n
    nbar = float(param)
    if nbar < 0:
        raise DomainError(f"mean photon number must be nonnegative, got {nbar}")
    if kind == "coherent":
        tail = poisson_tail
        guess = 0
    elif kind == "thermal":
        tail = thermal_tail
        if nbar == 0:
            return 0
        x = nbar / (1.0 + nbar)
        guess = max(0, math.ceil(math.log(epsilon) / math.log(x)) - 2)
    else:
        raise DomainError(f"unknown state kind {kind!r}")
    if nbar == 0:
        return 0
    M = min(guess, max_count)
    while tail(M, nbar) >= epsilon:
        M += 1
        if M > max_count:
            raise CapacityError(
                f"{kind} state with nbar={nbar} needs a cutoff above {max_count} for tail < {epsilon:g}"
            )
    # step back if the closed-form guess overshot
    while M > 0 and tail(M - 1, nbar) < epsilon:
        M -= 1
    return M


def make_coherent(beta: complex, epsilon: float = DEFAULT_EPSILON, max_count: int = DEFAULT_MAX_COUNT) -> FockVector:
    """Truncated coherent state ``exp(-|beta|^2/2) beta^m / sqrt(m!)``."""
    _check_epsilon(epsilon)
    beta = complex(beta)
    nbar = abs(beta) ** 2
    if nbar > MAX_COHERENT_NBAR:
        raise DomainError(f"|beta|^2 = {nbar} exceeds {MAX_COHERENT_NBAR:g}")
    M = auto_cutoff("coherent", nbar, epsilon, max_count)
    if nbar == 0:
        c = np.ones(1, dtype=complex)
    else:
        m = np.arange(M + 1)
        log_mag = -nbar / 2 + m * math.log(abs(beta)) - 0.5 * np.array([math.lgamma(k + 1) for k in m])
        c = np.exp(log_mag) * np.exp(1j * m * math.atan2(beta.imag, beta.real))
    return FockVector(c, poisson_tail(M, nbar), f"coherent:{_fmt_complex(beta)}")


def make_thermal(nbar: float, epsilon: float = DEFAULT_EPSILON, max_count: int = DEFAULT_MAX_COUNT) -> SingleModeDensity:
    """Diagonal thermal state with weights ``nbar^n / (1+nbar)^(n+1)``."""
    _check_epsilon(epsilon)
    nbar = float(nbar)
    if nbar < 0:
        raise DomainError(f"mean photon number must be nonnegative, got {nbar}")
    M = auto_cutoff("thermal", nbar, epsilon, max_count)
    n = np.arange(M + 1)
    if nbar == 0:
        w = np.zeros(M + 1)
        w[0] = 1.0
    else:
        w = np.exp(n * math.log(nbar) - (n + 1) * math.log1p(nbar))
    return SingleModeDensity(np.diag(w).astype(complex), thermal_tail(M, nbar), f"thermal:{nbar:g}")


def product(mode1: SingleMode, mode2: SingleMode) -> ProductInput:
    return ProductInput(mode1, mode2)


def pure_bipartite(coefficients, tail_mass: float = 0.0, label: str = "pure-grid") -> PureBipartite:
    state = PureBipartite(coefficients, tail_mass, label)
    if state.norm_residual() > NORM_TOL:
        raise DomainError(f"bipartite grid is not normalized (residual {state.norm_residual():.3e})")
    return state


def ensemble(components) -> Ensemble:
    return Ensemble(tuple(components))


def parity(state: SingleMode, tol: float = PARITY_TOL) -> str:
    """Classify a single-mode state as ``"odd"``, ``"even"`` or ``"neither"``."""
    if isinstance(state, FockVector):
        weights = np.abs(state.coefficients)
    else:
        weights = np.abs(np.real(np.diag(state.matrix)))
    if np.all(weights[0::2] < tol):
        return "odd"
    if np.all(weights[1::2] < tol):
        return "even"
    return "neither"


def _fmt_complex(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:g}"
    return f"{z.real:g}{z.imag:+g}i"


_SPEC_RE = re.compile(r"^\s*([a-z-]+)\s*:\s*(.+?)\s*$")


def parse_complex(text: str) -> complex:
    s = text.strip().replace(" ", "").replace("I", "i")
    if s.endswith("i"):
        s = s[:-1] + "j"
        # bare "i" or "+i" means unit imaginary
        if s in ("j", "+j", "-j") or s[-2:] in ("+j", "-j"):
            s = s[:-1] + "1j"
    try:
        return complex(s)
    except ValueError as exc:
        raise DomainError(f"cannot parse complex amplitude {text!r}") from exc


def load_pure_grid(path: str | Path) -> PureBipartite:
    """Read ``{"coeffs": [[[re, im], ...], ...]}`` nested by ``n`` then ``m``."""
    try:
        data = json.loads(Path(path).read_text())
        rows = data["coeffs"]
        width = max(len(row) for row in rows)
        grid = np.zeros((len(rows), width), dtype=complex)
        for n, row in enumerate(rows):
            for m, entry in enumerate(row):
                re_, im_ = (entry, 0.0) if isinstance(entry, (int, float)) else entry
                grid[n, m] = complex(re_, im_)
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"cannot read pure grid from {path}: {exc}") from exc
    return pure_bipartite(grid, label=f"pure-grid:@{path}")


def parse_state(spec: str, epsilon: float = DEFAULT_EPSILON, max_count: int = DEFAULT_MAX_COUNT):
    """Parse ``fock:3``, ``coherent:1.5+0.5i``, ``thermal:9`` or ``pure-grid:@file.json``.

    Single-mode specs return a single-mode state; ``pure-grid`` returns a
    whole bipartite input.
    """
    match = _SPEC_RE.match(spec)
    if not match:
        raise DomainError(f"cannot parse state spec {spec!r}")
    kind, arg = match.groups()
    try:
        if kind == "fock":
            return make_fock(int(arg), max_count)
        if kind == "coherent":
            return make_coherent(parse_complex(arg), epsilon, max_count)
        if kind == "thermal":
            return make_thermal(float(arg), epsilon, max_count)
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad argument in state spec {spec!r}") from exc
    if kind == "pure-grid":
        if not arg.startswith("@"):
            raise DomainError("pure-grid specs take a file reference, e.g. pure-grid:@grid.json")
        return load_pure_grid(arg[1:])
    raise DomainError(f"unknown state kind {kind!r} in {spec!r}")
