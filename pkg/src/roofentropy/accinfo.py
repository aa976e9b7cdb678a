"""Accessible information of a state relative to a commutative subalgebra.

The channel entropy of the subalgebra equals the mutual entropy of a
canonical ensemble attached to the state, and upper-bounds the classical
mutual information any measurement can extract from that ensemble.  This
module builds the canonical ensemble, evaluates measurements, and brackets
the accessible information between the best sampled measurement and the
solver value.
"""

from __future__ import annotations

import dataclasses
from typing import Sequence

import numpy as np

from .channels import (
    ReductionChannel,
    commutative_channel,
    _validate_projections,
)
from .ensembles import Ensemble, mutual_entropy
from .roof import RoofResult, SolverConfig, solve_R
from .states import (
    DEFAULT_TOL,
    DensityOperator,
    Tolerances,
    ValidationError,
    canonical_eigh,
    von_neumann_entropy,
)

__all__ = [
    "Measurement",
    "ensemble_from_subalgebra",
    "channel_from_measurement",
    "measurement_mutual_info",
    "BenattiBracket",
    "benatti_bracket",
    "HolevoCheck",
    "holevo_check",
]

COMPLETENESS_TOL = 1e-10
EIG_CUTOFF = 1e-14


@dataclasses.dataclass(frozen=True)
class Measurement:
    """A POVM: positive outcome operators summing to the identity."""

    outcomes: tuple
    tol: dataclasses.InitVar[Tolerances] = DEFAULT_TOL

    def __post_init__(self, tol: Tolerances):
        mats = []
        for i, e in enumerate(self.outcomes):
            m = np.asarray(e, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValidationError(f"outcome {i} has shape {m.shape}, expected square")
            herm = float(np.max(np.abs(m - m.conj().T)))
            if herm > tol.herm:
                raise ValidationError(f"outcome {i} not Hermitian: defect {herm:.3e}")
            m = 0.5 * (m + m.conj().T)
            lo = float(np.linalg.eigvalsh(m)[0])
            if lo < -tol.psd:
                raise ValidationError(f"outcome {i} has negative eigenvalue {lo:.3e}")
            m.setflags(write=False)
            mats.append(m)
        if not mats:
            raise ValidationError("measurement needs at least one outcome")
        n = mats[0].shape[0]
        if any(m.shape != (n, n) for m in mats):
            raise ValidationError("measurement outcomes have mixed dimensions")
        defect = float(np.max(np.abs(sum(mats) - np.eye(n))))
        if defect > COMPLETENESS_TOL:
            raise ValidationError(f"outcomes sum to identity defect {defect:.3e}")
        object.__setattr__(self, "outcomes", tuple(mats))

    @property
    def dim(self) -> int:
        return self.outcomes[0].shape[0]

    @classmethod
    def from_basis(cls, basis: np.ndarray) -> "Measurement":
        """Rank-one projective measurement onto the columns of a unitary."""
        cols = np.asarray(basis, dtype=complex)
        return cls(tuple(np.outer(cols[:, k], cols[:, k].conj()) for k in range(cols.shape[1])))


def ensemble_from_subalgebra(
    rho: DensityOperator,
    projections: Sequence[np.ndarray],
    tol: Tolerances = DEFAULT_TOL,
) -> Ensemble:
    """Canonical ensemble of ``rho`` relative to orthogonal projections.

    Weight ``p_j = Tr(Q_j rho)`` with member
    ``sqrt(rho) Q_j sqrt(rho) / p_j``; zero-weight outcomes are dropped.
    The mixture of the ensemble is ``rho`` itself.
    """
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    mats, n = _validate_projections(projections)
    if n != rho.dim:
        raise ValidationError(f"projection dimension {n} != state dimension {rho.dim}")
    w, v = canonical_eigh(rho.matrix, tol)
    root = (v * np.sqrt(np.maximum(w, 0.0))) @ v.conj().T
    weights = []
    states = []
    for q in mats:
        p = float(np.trace(q @ rho.matrix).real)
        if p <= tol.support:
            continue
        member = root @ q @ root / p
        weights.append(p)
        states.append(DensityOperator(member))
    if not states:
        raise ValidationError("every outcome carries zero weight")
    return Ensemble(np.array(weights), tuple(states))


def channel_from_measurement(measurement: Measurement) -> ReductionChannel:
    """Communication channel of a POVM: one scalar block per outcome.

    Block ``i`` of the reduction is ``Tr(E_i rho)``, realized by the rows of
    the square root of each outcome operator.
    """
    terms = []
    for i, e in enumerate(measurement.outcomes):
        w, v = canonical_eigh(e)
        for k in range(w.size):
            if w[k] > EIG_CUTOFF:
                terms.append((i, np.sqrt(w[k]) * v[:, k].conj()[None, :]))
    return ReductionChannel(
        measurement.dim, (1,) * len(measurement.outcomes), tuple(terms)
    )


def measurement_mutual_info(ensemble: Ensemble, measurement: Measurement) -> float:
    """Classical mutual information the measurement extracts from the ensemble.

    Equals the mutual entropy of the ensemble through the measurement's
    communication channel, i.e. the mutual information of the joint
    distribution ``p_j Tr(E_i rho_j)``.
    """
    if measurement.dim != ensemble.dim:
        raise ValidationError(
            f"measurement dimension {measurement.dim} != ensemble dimension {ensemble.dim}"
        )
    return mutual_entropy(ensemble, channel_from_measurement(measurement))


def _haar_basis(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))[None, :]


def _structured_bases(rho: DensityOperator, ensemble: Ensemble):
    """Eigenbases of the state, of each member, and of pairwise midpoints."""
    bases = [canonical_eigh(rho.matrix)[1]]
    members = [s.matrix for _, s in ensemble.members()]
    for m in members:
        bases.append(canonical_eigh(m)[1])
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            bases.append(canonical_eigh(0.5 * (members[i] + members[j]))[1])
    return bases


@dataclasses.dataclass(frozen=True)
class BenattiBracket:
    """Sampled lower bound and solver upper value for accessible information.

    ``lower`` is the best classical mutual information over the sampled
    measurements, ``upper`` the channel entropy of the subalgebra from the
    roof solver.  ``passed`` requires ``lower <= upper + 1e-6``; ``closed``
    additionally flags brackets tighter than ``1e-5``.
    """

    lower: float
    upper: float
    gap: float
    holevo_slack: float
    samples: int
    best_sample: int
    passed: bool
    closed: bool
    roof: RoofResult


def benatti_bracket(
    rho: DensityOperator,
    projections: Sequence[np.ndarray],
    config: SolverConfig | None = None,
    measurement_samples: int = 256,
    tol: Tolerances = DEFAULT_TOL,
) -> BenattiBracket:
    """Bracket the accessible information of the canonical ensemble.

    Structured measurement candidates (eigenbases of the state, the members,
    and pairwise midpoints) are evaluated first, then
    ``measurement_samples`` Haar-random orthonormal bases seeded from the
    solver config.
    """
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    cfg = config if config is not None else SolverConfig()
    ensemble = ensemble_from_subalgebra(rho, projections, tol)
    channel = commutative_channel(projections)
    roof = solve_R(rho, channel, cfg, tol)
    upper = roof.value_H
    rng = np.random.default_rng([cfg.seed, 104729])
    bases = _structured_bases(rho, ensemble)
    for _ in range(measurement_samples):
        bases.append(_haar_basis(rho.dim, rng))
    lower = -np.inf
    best = -1
    for i, basis in enumerate(bases):
        info = measurement_mutual_info(ensemble, Measurement.from_basis(basis))
        if info > lower:
            lower = info
            best = i
    slack = von_neumann_entropy(rho, tol) - upper
    return BenattiBracket(
        lower=float(lower),
        upper=upper,
        gap=upper - float(lower),
        holevo_slack=slack,
        samples=len(bases),
        best_sample=best,
        passed=float(lower) <= upper + 1e-6,
        closed=abs(upper - float(lower)) <= 1e-5,
        roof=roof,
    )


@dataclasses.dataclass(frozen=True)
class HolevoCheck:
    """Channel entropy against the entropy of the state itself."""

    channel_entropy: float
    state_entropy: float
    slack: float
    passed: bool
    roof: RoofResult


def holevo_check(
    rho: DensityOperator,
    projections: Sequence[np.ndarray],
    config: SolverConfig | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> HolevoCheck:
    """Check ``H`` of the commutative subalgebra against ``S(rho)``."""
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    cfg = config if config is not None else SolverConfig()
    channel = commutative_channel(projections)
    roof = solve_R(rho, channel, cfg, tol)
    s = von_neumann_entropy(rho, tol)
    return HolevoCheck(
        channel_entropy=roof.value_H,
        state_entropy=s,
        slack=s - roof.value_H,
        passed=roof.value_H <= s + 1e-6,
        roof=roof,
    )
