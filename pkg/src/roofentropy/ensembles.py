"""Weighted ensembles of density operators and their mutual entropy."""

from __future__ import annotations

import dataclasses
from typing import Sequence

import numpy as np

from .channels import ReductionChannel, block_entropy, reduce_state
from .states import (
    DEFAULT_TOL,
    DensityOperator,
    PureState,
    Tolerances,
    ValidationError,
    relative_entropy,
)

__all__ = ["Ensemble", "pure_ensemble", "convex_sum", "shorten", "mutual_entropy"]

WEIGHT_CUTOFF = 1e-13  # members at or below this weight are dropped by shorten
MERGE_TOL = 1e-9       # max-entry distance at which members merge


@dataclasses.dataclass(frozen=True)
class Ensemble:
    """Weights summing to one paired with density operators of equal dimension."""

    weights: np.ndarray
    states: tuple
    tol: dataclasses.InitVar[Tolerances] = DEFAULT_TOL

    def __post_init__(self, tol: Tolerances):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValidationError("ensemble needs at least one member")
        if w.size != len(self.states):
            raise ValidationError(f"{w.size} weights vs {len(self.states)} states")
        if float(w.min()) < -tol.trace:
            raise ValidationError(f"negative weight {float(w.min()):.3e}")
        total = float(w.sum())
        if abs(total - 1.0) > tol.trace:
            raise ValidationError(f"weights sum to {total!r}, expected 1")
        states = tuple(
            s if isinstance(s, DensityOperator) else DensityOperator(s) for s in self.states
        )
        dims = {s.dim for s in states}
        if len(dims) != 1:
            raise ValidationError(f"mixed member dimensions {sorted(dims)}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self) -> int:
        return len(self.states)

    def members(self):
        return zip(self.weights.tolist(), self.states)


def pure_ensemble(weights, vectors: Sequence[np.ndarray]) -> Ensemble:
    """Ensemble of rank-one projections built from unit vectors."""
    states = tuple(PureState(np.asarray(v, dtype=complex)).density() for v in vectors)
    return Ensemble(np.asarray(weights, dtype=float), states)


def convex_sum(ensemble: Ensemble) -> DensityOperator:
    """The mixture sum_j p_j rho_j as a validated density operator."""
    if len(ensemble) == 0:
        raise ValidationError("cannot mix an empty ensemble")
    total = np.zeros((ensemble.dim, ensemble.dim), dtype=complex)
    for p, rho in ensemble.members():
        total += p * rho.matrix
    return DensityOperator(total)


def shorten(
    ensemble: Ensemble,
    weight_cutoff: float = WEIGHT_CUTOFF,
    merge_tol: float = MERGE_TOL,
) -> Ensemble:
    """Drop negligible members and merge duplicates by adding weights.

    Keeps the convex sum unchanged to well below validation tolerances; the
    first occurrence of a duplicate state is kept as the representative.
    """
    kept_w: list[float] = []
    kept_s: list[DensityOperator] = []
    for p, rho in ensemble.members():
        if p <= weight_cutoff:
            continue
        for i, other in enumerate(kept_s):
            if float(np.max(np.abs(rho.matrix - other.matrix))) <= merge_tol:
                kept_w[i] += p
                break
        else:
            kept_w.append(p)
            kept_s.append(rho)
    if not kept_s:
        raise ValidationError("all members fell below the weight cutoff")
    return Ensemble(np.array(kept_w), tuple(kept_s))


def mutual_entropy(ensemble: Ensemble, channel: ReductionChannel, form: str = "holevo") -> float:
    """Mutual entropy of an ensemble with respect to a reduction channel.

    Parameters
    ----------
    form : str
        ``"holevo"`` computes ``S(reduce(mix)) - sum_j p_j S(reduce(rho_j))``;
        ``"relative"`` computes ``sum_j p_j S(reduce(rho_j), reduce(mix))``
        as a cross-check.  The two agree whenever supports behave, and the
        Holevo form is the numerically stable default.
    """
    if form not in ("holevo", "relative"):
        raise ValidationError(f"unknown mutual entropy form {form!r}")
    mix = convex_sum(ensemble)
    reduced_mix = reduce_state(channel, mix)
    if form == "holevo":
        total = block_entropy(reduced_mix)
        for p, rho in ensemble.members():
            if p <= 0.0:
                continue
            total -= p * block_entropy(reduce_state(channel, rho))
        return total
    sigma = DensityOperator(reduced_mix.to_dense())
    total = 0.0
    for p, rho in ensemble.members():
        if p <= 0.0:
            continue
        member = DensityOperator(reduce_state(channel, rho).to_dense())
        total += p * relative_entropy(member, sigma)
    return total
