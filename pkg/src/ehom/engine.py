"""Joint output photon-number distributions of a two-port splitter."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import splitter
from .errors import DomainError, NumericValidationError
from .splitter import DEFAULT_MAX_COUNT, ScatteringMatrix
from .states import (
    NORM_TOL,
    BipartiteInput,
    Ensemble,
    FockVector,
    ProductInput,
    PureBipartite,
    SingleModeDensity,
)

CLAMP_TOL = 1e-14
CNL_THRESHOLD = 1e-10
GRID_NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class JointDistribution:
    grid: np.ndarray
    truncation_mass: float
    convention: str
    input_label: str = ""
    clamped_cells: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.array(self.grid, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DomainError(f"grid must be square, got shape {g.shape}")
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)

    @property
    def cutoff(self) -> int:
        return self.grid.shape[0] - 1

    def total(self) -> float:
        return float(self.grid.sum()) + self.truncation_mass

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        return self.grid.sum(axis=1), self.grid.sum(axis=0)

    def to_dict(self) -> dict:
        return {
            "convention": self.convention,
            "cutoff": self.cutoff,
            "truncation_mass": self.truncation_mass,
            "input": self.input_label,
            "clamped_cells": self.clamped_cells,
            "grid": self.grid.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "JointDistribution":
        grid = np.array(data["grid"], dtype=float)
        if grid.shape[0] != int(data["cutoff"]) + 1:
            raise DomainError("grid size does not match the recorded cutoff")
        return cls(
            grid,
            float(data["truncation_mass"]),
            data["convention"],
            data.get("input", ""),
            int(data.get("clamped_cells", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> "JointDistribution":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """Rows ``ma,mb,probability`` over the number-conserving region ``ma + mb <= cutoff``."""
        buf = io.StringIO()
        buf.write("ma,mb,probability\n")
        M = self.cutoff
        for ma in range(M + 1):
            for mb in range(M + 1 - ma):
                buf.write(f"{ma},{mb},{self.grid[ma, mb]:.17g}\n")
        return buf.getvalue()


def _support(probs: np.ndarray) -> np.ndarray:
    return np.flatnonzero(probs > 0)


def _pure_grid(matrix: ScatteringMatrix, coeffs: np.ndarray, max_count: int) -> np.ndarray:
    M1, M2 = coeffs.shape[0] - 1, coeffs.shape[1] - 1
    out_cut = M1 + M2
    grid = np.zeros((out_cut + 1, out_cut + 1))
    nz = np.abs(coeffs) > 0
    for N in range(out_cut + 1):
        amp = np.zeros(N + 1, dtype=complex)
        for n in range(max(0, N - M2), min(N, M1) + 1):
            if nz[n, N - n]:
                amp += coeffs[n, N - n] * splitter.sector_amplitudes(matrix, n, N - n, max_count)
        p = np.arange(N + 1)
        grid[p, N - p] = np.abs(amp) ** 2
    return grid


def _density_grid(matrix: ScatteringMatrix, rho1: np.ndarray, rho2: np.ndarray, max_count: int) -> np.ndarray:
    M1, M2 = rho1.shape[0] - 1, rho2.shape[0] - 1
    out_cut = M1 + M2
    grid = np.zeros((out_cut + 1, out_cut + 1))
    # rows/cols of a PSD matrix with zero diagonal vanish identically
    live1 = np.real(np.diag(rho1)) > 0
    live2 = np.real(np.diag(rho2)) > 0
    for N in range(out_cut + 1):
        ns = [n for n in range(max(0, N - M2), min(N, M1) + 1) if live1[n] and live2[N - n]]
        if not ns:
            continue
        ns = np.array(ns)
        ms = N - ns
        U = np.stack([splitter.sector_amplitudes(matrix, int(n), int(N - n), max_count) for n in ns], axis=1)
        block = rho1[np.ix_(ns, ns)] * rho2[np.ix_(ms, ms)]
        probs = np.real(np.einsum("pi,ij,pj->p", U, block, U.conj()))
        p = np.arange(N + 1)
        grid[p, N - p] = probs
    return grid


def _clamp(grid: np.ndarray) -> tuple[np.ndarray, int]:
    worst = grid.min(initial=0.0)
    if worst < -CLAMP_TOL:
        raise NumericValidationError(f"negative probability {worst:.3e} beyond float dust")
    neg = grid < 0
    count = int(neg.sum())
    grid = np.where(neg, 0.0, grid)
    return grid, count


def _as_density(state) -> np.ndarray:
    if isinstance(state, FockVector):
        return state.to_density().matrix
    return state.matrix


def _check_norm(inp) -> None:
    res = inp.norm_residual()
    if res > NORM_TOL:
        raise DomainError(f"input state is not normalized (residual {res:.3e})")


def output_distribution(
    matrix: ScatteringMatrix, inp: BipartiteInput, max_count: int = DEFAULT_MAX_COUNT
) -> JointDistribution:
    """Joint photon-number distribution ``P(ma, mb)`` at the splitter outputs.

    Pure inputs are propagated as amplitudes.  Product inputs with a mixed
    factor use the coherence sum restricted to equal total photon number;
    ensembles average their components.  The output cutoff is the sum of
    the input cutoffs, so the only lost mass is the input tail.
    """
    _check_norm(inp)
    if isinstance(inp, ProductInput) and inp.as_pure() is not None:
        inp = inp.as_pure()

    if isinstance(inp, PureBipartite):
        grid = _pure_grid(matrix, inp.coefficients, max_count)
    elif isinstance(inp, ProductInput):
        grid = _density_grid(matrix, _as_density(inp.mode1), _as_density(inp.mode2), max_count)
    elif isinstance(inp, Ensemble):
        parts = [(w, _pure_grid(matrix, s.coefficients, max_count)) for w, s in inp.components]
        size = max(g.shape[0] for _, g in parts)
        grid = np.zeros((size, size))
        for w, g in parts:
            grid[: g.shape[0], : g.shape[1]] += w * g
    else:
        raise DomainError(f"unsupported input type {type(inp).__name__}")

    grid, clamped = _clamp(grid)
    dist = JointDistribution(grid, float(inp.tail_mass), matrix.convention, inp.label, clamped)
    if abs(dist.total() - 1.0) > GRID_NORM_TOL:
        raise NumericValidationError(f"output distribution lost normalization: total {dist.total()!r}")
    return dist


def coincidence_profile(dist: JointDistribution) -> np.ndarray:
    """Diagonal ``P(m, m)`` for ``m = 0..cutoff``."""
    return np.diag(dist.grid).copy()


@dataclass(frozen=True)
class CNLMetric:
    max_diagonal: float
    max_cell: float
    ratio: float

    @property
    def is_nodal(self) -> bool:
        return self.ratio < CNL_THRESHOLD


def cnl_metric(dist: JointDistribution) -> CNLMetric:
    """Ratio of the largest diagonal cell to the largest cell overall."""
    max_cell = float(dist.grid.max(initial=0.0))
    if max_cell <= 0:
        raise DomainError("distribution grid is identically zero")
    max_diag = float(np.diag(dist.grid).max())
    return CNLMetric(max_diag, max_cell, max_diag / max_cell)


def closed_form_one_photon_coherent(N1: int, N2: int, nbar: float) -> float:
    """``P(N1, N2)`` for ``|1> (x) |beta>`` at a 50:50 splitter, ``nbar = |beta|^2``.

    ``exp(-nbar) nbar^(N1+N2-1) (N1-N2)^2 / (N1! N2! 2^(N1+N2))``.
    """
    if N1 < 0 or N2 < 0:
        raise DomainError("photon counts must be nonnegative")
    if nbar <= 0:
        raise DomainError(f"nbar must be positive, got {nbar}")
    if N1 == N2:
        return 0.0
    log_p = (
        -nbar
        + (N1 + N2 - 1) * math.log(nbar)
        + 2 * math.log(abs(N1 - N2))
        - math.lgamma(N1 + 1)
        - math.lgamma(N2 + 1)
        - (N1 + N2) * math.log(2)
    )
    return math.exp(log_p)
