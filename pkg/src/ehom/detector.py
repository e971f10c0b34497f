"""Finite detection efficiency as independent Bernoulli loss per photon."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .engine import JointDistribution


@dataclass(frozen=True)
class EfficiencyModel:
    eta1: float = 1.0
    eta2: float = 1.0

    def __post_init__(self):
        _check_eta(self.eta1)
        _check_eta(self.eta2)


def _check_eta(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"detector efficiency must lie in [0, 1], got {eta!r}")


def bernoulli_matrix(size: int, eta: float) -> np.ndarray:
    """``B[n, N] = C(N, n) eta^n (1-eta)^(N-n)`` for ``0 <= n <= N < size``."""
    _check_eta(eta)
    B = np.zeros((size, size))
    loss = 1.0 - eta
    for N in range(size):
        for n in range(N + 1):
            B[n, N] = math.comb(N, n) * eta**n * loss ** (N - n)
    return B


def apply_single(p, eta: float) -> np.ndarray:
    """Detected-count distribution for arriving-photon distribution ``p``."""
    p = np.asarray(p, dtype=float)
    return bernoulli_matrix(len(p), eta) @ p


def apply_joint(dist: JointDistribution, model: EfficiencyModel) -> JointDistribution:
    size = dist.grid.shape[0]
    B1 = bernoulli_matrix(size, model.eta1)
    B2 = bernoulli_matrix(size, model.eta2)
    grid = B1 @ dist.grid @ B2.T
    return JointDistribution(
        grid,
        dist.truncation_mass,
        dist.convention,
        dist.input_label,
        dist.clamped_cells,
        {"eta1": model.eta1, "eta2": model.eta2},
    )


@dataclass(frozen=True)
class EfficiencyRow:
    eta: float
    n: int
    prob: float


def coincidence_vs_eta(dist: JointDistribution, etas, counts=(1, 2)) -> list[EfficiencyRow]:
    """``P_eta(n, n)`` for each efficiency in ``etas`` (equal at both ports)."""
    etas = list(etas)
    if not etas:
        raise DomainError("efficiency grid is empty")
    rows = []
    for eta in etas:
        detected = apply_joint(dist, EfficiencyModel(eta, eta)).grid
        for n in counts:
            prob = float(detected[n, n]) if n < detected.shape[0] else 0.0
            rows.append(EfficiencyRow(float(eta), int(n), prob))
    return rows


def rows_to_csv(rows: list[EfficiencyRow]) -> str:
    buf = io.StringIO()
    buf.write("eta,n,prob\n")
    for row in rows:
        buf.write(f"{row.eta:.17g},{row.n},{row.prob:.17g}\n")
    return buf.getvalue()


def rows_to_json(rows: list[EfficiencyRow]) -> str:
    return json.dumps([{"eta": r.eta, "n": r.n, "prob": r.prob} for r in rows])
