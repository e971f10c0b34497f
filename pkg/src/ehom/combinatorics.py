"""Exact coincidence sums and scattering-diagram bookkeeping.

For a dual Fock input ``|n, m>`` (``n <= m``, equal parity) the coincidence
output ``|h, h>`` with ``h = (n+m)/2`` collects one partial amplitude per
``k``, the number of mode-1 photons transmitted into output mode 1.  At a
balanced splitter these reduce to the alternating integer sum

    S(n, m) = sum_k C(n, k) C(m, h - k) (-1)^k

which vanishes for odd ``n`` because the terms cancel in mirror pairs
``(k, n - k)``.  Everything here uses Python integers so those zeros are
exact; only ``DiagramTerm.value`` is floating point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import DomainError

NORMALIZATION_TOL = 1e-12
PAIR_RTOL = 1e-14

COMPLETE_DESTRUCTIVE = "complete-destructive"
CONSTRUCTIVE_NONZERO = "constructive-nonzero"

_I_POWERS = (1, 1j, -1, -1j)


def _ipow(e: int) -> complex:
    return _I_POWERS[e % 4]


def _ordered(n: int, m: int) -> tuple[int, int, bool]:
    if n < 0 or m < 0:
        raise DomainError(f"photon counts must be nonnegative, got ({n}, {m})")
    if (n - m) % 2:
        raise DomainError(f"no coincidence sector exists for mixed-parity input ({n}, {m})")
    if n <= m:
        return n, m, False
    return m, n, True


def _check_tr(t: float, r: float) -> None:
    if abs(t * t + r * r - 1.0) > NORMALIZATION_TOL:
        raise DomainError(f"(t, r) = ({t}, {r}) is not normalized: t^2 + r^2 = {t * t + r * r}")


def weight(n: int, m: int, k: int) -> int:
    """Combinatorial weight ``C_k = C(n, k) C(m, (n+m)/2 - k)``."""
    return math.comb(n, k) * math.comb(m, (n + m) // 2 - k)


def coincidence_sum(n: int, m: int) -> int:
    """Exact alternating sum S(n, m).

    Arguments are put in ``n <= m`` order first.  Note that the raw sum with
    the larger count first differs from this by ``(-1)^((m-n)/2)``.
    """
    n, m, _ = _ordered(n, m)
    return sum((-1) ** k * weight(n, m, k) for k in range(n + 1))


def coincidence_prefactor(n: int, m: int) -> complex:
    """Factor turning S(n, m) into the 50:50 complex-symmetric amplitude on ``|h, h>``."""
    n, m, _ = _ordered(n, m)
    h = (n + m) // 2
    log_mag = math.lgamma(h + 1) - 0.5 * ((n + m) * math.log(2) + math.lgamma(n + 1) + math.lgamma(m + 1))
    return _ipow(-(n + h)) * math.exp(log_mag)


def coincidence_amplitude_exact(n: int, m: int) -> complex:
    return coincidence_prefactor(n, m) * coincidence_sum(n, m)


@dataclass(frozen=True)
class DiagramTerm:
    k: int
    n1t: int
    n1r: int
    n2t: int
    n2r: int
    weight: int
    sign: int
    value: complex

    @property
    def transmitted(self) -> int:
        return self.n1t + self.n2t

    @property
    def reflected(self) -> int:
        return self.n1r + self.n2r


def enumerate_diagrams(n: int, m: int, t: float, r: float) -> list[DiagramTerm]:
    """Partial amplitudes ``A_k = C_k t^(transmitted) (i r)^(reflected)``, ascending ``k``."""
    n, m, _ = _ordered(n, m)
    _check_tr(t, r)
    h = (n + m) // 2
    terms = []
    for k in range(n + 1):
        n1t, n1r = k, n - k
        n2t, n2r = (m - n) // 2 + k, h - k
        c = weight(n, m, k)
        refl = n1r + n2r
        # t^a r^b is a single product so mirror terms (a, b swapped) round alike at t == r
        value = c * (t ** (n1t + n2t) * r**refl) * _ipow(refl)
        terms.append(DiagramTerm(k, n1t, n1r, n2t, n2r, c, (-1) ** k, complex(value)))
    return terms


def diagram_amplitude(n: int, m: int, t: float, r: float) -> complex:
    """Coincidence amplitude ``<h, h|U|n, m>`` assembled from the diagram sum.

    Diagrams use the forward entries ``(t, i r)``; the physical amplitude
    needs the Fock normalization ``h!/sqrt(n! m!)`` and the global sign
    ``(-1)^(n+h)`` from the inverse entries ``-i r``.
    """
    n, m, _ = _ordered(n, m)
    h = (n + m) // 2
    total = sum(term.value for term in enumerate_diagrams(n, m, t, r))
    norm = math.exp(math.lgamma(h + 1) - 0.5 * (math.lgamma(n + 1) + math.lgamma(m + 1)))
    return (-1) ** (n + h) * norm * total


@dataclass(frozen=True)
class MirrorPair:
    k: int
    mirror: int
    term: DiagramTerm
    partner: DiagramTerm

    @property
    def residual(self) -> float:
        return abs(self.term.value + self.partner.value)


@dataclass(frozen=True)
class CancellationCertificate:
    n: int
    m: int
    t: float
    r: float
    swapped: bool
    pairs: list[MirrorPair]
    central_term: DiagramTerm | None
    total: complex
    max_term: float
    verdict: str
    terms: list[DiagramTerm] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        def cplx(z: complex) -> list[float]:
            return [z.real, z.imag]

        return {
            "n": self.n,
            "m": self.m,
            "swapped": self.swapped,
            "t": self.t,
            "r": self.r,
            "pairs": [
                {
                    "k": p.k,
                    "mirror": p.mirror,
                    "weight": p.term.weight,
                    "value_k": cplx(p.term.value),
                    "value_mirror": cplx(p.partner.value),
                    "residual": p.residual,
                }
                for p in self.pairs
            ],
            "central_term": None
            if self.central_term is None
            else {"k": self.central_term.k, "weight": self.central_term.weight, "value": cplx(self.central_term.value)},
            "total": cplx(self.total),
            "max_term": self.max_term,
            "coincidence_sum": coincidence_sum(self.n, self.m),
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"input |{self.n},{self.m}>  t={self.t:.17g}  r={self.r:.17g}" + ("  (swapped)" if self.swapped else "")]
        lines.append(f"{'k':>4} {'n-k':>4} {'C_k':>24} {'A_k':>44} {'A_(n-k)':>44} {'residual':>12}")
        for p in self.pairs:
            lines.append(
                f"{p.k:>4} {p.mirror:>4} {p.term.weight:>24} {_fmt(p.term.value):>44} "
                f"{_fmt(p.partner.value):>44} {p.residual:>12.3e}"
            )
        if self.central_term is not None:
            c = self.central_term
            lines.append(f"{c.k:>4} {'-':>4} {c.weight:>24} {_fmt(c.value):>44} {'(central)':>44}")
        lines.append(f"total = {_fmt(self.total)}   S = {coincidence_sum(self.n, self.m)}   verdict: {self.verdict}")
        return "\n".join(lines)


def _fmt(z: complex) -> str:
    return f"{z.real:+.10e}{z.imag:+.10e}i"


def cancellation_certificate(n: int, m: int, t: float, r: float) -> CancellationCertificate:
    """Group the diagrams into mirror pairs ``(k, n-k)`` and report their residuals."""
    n0, m0, swapped = _ordered(n, m)
    terms = enumerate_diagrams(n0, m0, t, r)
    pairs = [MirrorPair(k, n0 - k, terms[k], terms[n0 - k]) for k in range((n0 + 1) // 2)]
    central = terms[n0 // 2] if n0 % 2 == 0 else None
    # summing pair by pair keeps exact mirror cancellations exact
    total = complex(sum(p.term.value + p.partner.value for p in pairs))
    if central is not None:
        total += central.value
    max_term = max(abs(term.value) for term in terms)
    threshold = PAIR_RTOL * max_term
    cancels = all(p.residual < threshold for p in pairs) and central is None
    verdict = COMPLETE_DESTRUCTIVE if cancels and abs(total) < threshold else CONSTRUCTIVE_NONZERO
    return CancellationCertificate(n0, m0, t, r, swapped, pairs, central, total, max_term, verdict, terms)


def split_sum(n: int, m: int) -> tuple[int, ...]:
    """Split S(n, m) into mirror halves.

    Odd ``n``: ``(S1, S2)`` with ``S2 == -S1``.  Even ``n``:
    ``(S1, T_center, S1)`` with ``S == 2*S1 + T_center``.
    """
    n, m, _ = _ordered(n, m)

    def term(k: int) -> int:
        return (-1) ** k * weight(n, m, k)

    if n % 2:
        half = (n - 1) // 2
        s1 = sum(term(k) for k in range(half + 1))
        s2 = sum(term(k) for k in range(half + 1, n + 1))
        return s1, s2
    s1 = sum(term(k) for k in range(n // 2))
    center = (-1) ** (n // 2) * math.comb(n, n // 2) * math.comb(m, m // 2)
    s2 = sum(term(k) for k in range(n // 2 + 1, n + 1))
    return s1, center, s2


def coincidence_phase(n: int, m: int) -> complex:
    """Unit phase ``(-i)^(n + (n+m)/2)`` relating S' to S."""
    n, m, _ = _ordered(n, m)
    return _ipow(-(n + (n + m) // 2))


__all__ = [
    "COMPLETE_DESTRUCTIVE",
    "CONSTRUCTIVE_NONZERO",
    "CancellationCertificate",
    "DiagramTerm",
    "MirrorPair",
    "cancellation_certificate",
    "coincidence_amplitude_exact",
    "coincidence_phase",
    "coincidence_prefactor",
    "coincidence_sum",
    "diagram_amplitude",
    "enumerate_diagrams",
    "split_sum",
    "weight",
]
