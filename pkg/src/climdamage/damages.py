"""Quadratic aggregate damage function and the variability decomposition.

Losses are a fraction of GDP.  With calibration "a percent of GDP lost at
c degrees of warming", the quadratic coefficient is alpha = a / c^2 and the
loss at warming moments M is

    loss = alpha * (M.mean_sq - R.mean_sq)

where R holds the same moments over the reference (preindustrial) window.
Feeding mean_sq instead of mean^2 is what lets the same formula price
temperature variance: mean_sq = mean^2 + variance.
"""
from __future__ import annotations

from dataclasses import dataclass

from .climatology import WarmingMoments
from .errors import ComputationError, ValidationError


@dataclass(frozen=True)
class DamageParams:
    """Aggregate calibration: a = GDP fraction lost at c degrees.

    Defaults follow the common "2.01% of GDP at 2.5 degC" aggregate of
    enumerative sector studies.
    """

    a: float = 0.0201
    c: float = 2.5

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValidationError("DamageParams: calibration warming c must be > 0")

    @property
    def alpha(self) -> float:
        """Loss fraction per squared degree."""
        return self.a / (self.c * self.c)


@dataclass(frozen=True)
class DamageResult:
    variant: str
    loss: float                   # GDP fraction
    reference_adjustment: float   # alpha * reference mean square
    window: tuple[int, int]


def damage(
    m: WarmingMoments,
    params: DamageParams = DamageParams(),
    reference: WarmingMoments | None = None,
) -> DamageResult:
    """Evaluate the quadratic loss at the given warming moments.

    The reference moments (same variant) are subtracted so that the
    preindustrial state prices at zero; omitting them means a zero
    reference.
    """
    ref_sq = 0.0
    if reference is not None:
        if reference.variant != m.variant:
            raise ValidationError(
                f"damage: reference variant {reference.variant!r} does not "
                f"match {m.variant!r}"
            )
        ref_sq = reference.mean_sq
    alpha = params.alpha
    return DamageResult(
        variant=m.variant,
        loss=alpha * (m.mean_sq - ref_sq),
        reference_adjustment=alpha * ref_sq,
        window=m.window,
    )


def decompose(
    none: float,
    tvar: float,
    svar: float,
    stvar: float,
) -> tuple[float, float, float]:
    """Split the full variability effect into spatial, temporal, and
    interaction shares.

    Each share is the gap of the single-dimension variant over the
    no-variability loss, divided by the full gap; the interaction is the
    remainder.  The three fractions sum to one exactly.
    """
    total = stvar - none
    if total == 0.0:
        raise ComputationError("decompose: zero denominator (stvar equals none)")
    sc = (svar - none) / total
    tc = (tvar - none) / total
    return sc, tc, 1.0 - sc - tc
