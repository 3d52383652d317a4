"""Closed-form bounds and advantage conditions.

``log`` in the pumping formulas is base 2: a ``d``-level message carries
``log2(d)`` bits, each used for one repetition of a one-bit protocol.
"""

from __future__ import annotations

import math


class DomainError(ValueError):
    pass


def _exponent(p_c2: float, rounds: float) -> float:
    return -(rounds / (2.0 * p_c2)) * (p_c2 - 0.5) ** 2


def pumping_lower_bound(p_c2: float, d: int) -> float:
    """Chernoff lower bound on the ``d``-level classical value from a one-bit protocol."""
    if not 0.5 < p_c2 <= 1.0:
        raise DomainError(f"p_C2 must lie in (1/2, 1], got {p_c2}")
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    return 1.0 - math.exp(_exponent(p_c2, math.log2(d)))


def pumping_exact(p: float, repetitions: int, *, allow_even: bool = False) -> float:
    """Probability that a strict majority of ``repetitions`` independent runs succeed.

    Even ``repetitions`` require ``allow_even=True``; a tie then counts as failure.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if repetitions < 1:
        raise DomainError("repetitions must be >= 1")
    if repetitions % 2 == 0 and not allow_even:
        raise DomainError("even repetitions need allow_even=True (ties count as failure)")
    r = repetitions
    return math.fsum(
        math.comb(r, i) * p**i * (1 - p) ** (r - i) for i in range(r // 2 + 1, r + 1)
    )


def chernoff_rounds(p: float, repetitions: int) -> float:
    """``1 - exp(-r (p - 1/2)^2 / (2 p))``, the bound dominated by :func:`pumping_exact`."""
    return 1.0 - math.exp(_exponent(p, repetitions))


def two_level_upper_bound(p_s: float, bits: float) -> float:
    """``min(1, 1/2 + sqrt(2 p_S / C))`` for a protocol reaching ``p_S`` with ``C`` bits."""
    if not 0.0 < p_s <= 1.0:
        raise DomainError(f"p_S must lie in (0, 1], got {p_s}")
    if bits < 1:
        raise DomainError(f"C must be >= 1, got {bits}")
    return min(1.0, 0.5 + math.sqrt(2.0 * p_s / bits))


def oc_value_formula(p: float, d: float, chi: float) -> float:
    """``(2 p + d - 1 - chi) / d``."""
    return (2.0 * p + d - 1.0 - chi) / d


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")


def condition_c12(p_cd: float, d: int, chi: float, p_c2: float) -> bool:
    _check_prob("p_Cd", p_cd)
    _check_prob("p_C2", p_c2)
    return oc_value_formula(p_cd, d, chi) >= p_c2


def condition_c1(p_cd: float, d_prime: int, chi: float, p_c2: float) -> bool:
    """Same test as :func:`condition_c12` with the converted dimension ``d'``."""
    return condition_c12(p_cd, d_prime, chi, p_c2)


def combined_lhs(p_c2: float, p_g: float, d: int) -> float:
    return d * (p_c2 + p_g - 1.0) + 2.0 * math.exp(_exponent(p_c2, math.log2(d)))


def combined_condition(p_c2: float, p_g: float, d: int) -> bool:
    """``d (p_C2 + p_G - 1) + 2 exp(-log2(d) (p_C2 - 1/2)^2 / (2 p_C2)) <= 1``, evaluated literally."""
    _check_prob("p_C2", p_c2)
    _check_prob("p_G", p_g)
    if p_c2 == 0:
        raise DomainError("p_C2 must be positive")
    return combined_lhs(p_c2, p_g, d) <= 1.0


def beta_lower_bound(p_qd: float, d: float, p_g: float, bits: float, p_s: float) -> float:
    """Lower bound on the ratio of quantum to noncontextual advantage over 1/2."""
    _check_prob("p_Qd", p_qd)
    _check_prob("p_G", p_g)
    if bits < 1:
        raise DomainError("C must be >= 1")
    if not 0.0 < p_s <= 1.0:
        raise DomainError("p_S must lie in (0, 1]")
    if d <= 0:
        raise DomainError("d must be positive")
    numerator = math.sqrt(bits) * (2.0 * p_qd + d / 2.0 - d * p_g - 1.0)
    return numerator / (d * math.sqrt(2.0 * p_s))
