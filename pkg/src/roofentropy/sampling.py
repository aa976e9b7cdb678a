"""Seeded random states, channels, and measurements for tests and `verify`."""

from __future__ import annotations

import numpy as np

from .channels import ReductionChannel, commutative_channel, pinching
from .ensembles import Ensemble
from .states import DensityOperator, PureState

__all__ = [
    "ginibre_density",
    "random_pure_state",
    "haar_unitary",
    "random_partition",
    "random_projections",
    "random_pinching",
    "random_commutative",
    "random_ensemble",
    "random_basis_measurement_basis",
]


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def ginibre_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    """Full-rank (or fixed-rank) random density operator G G^dag / Tr."""
    g = _complex_gaussian(rng, (dim, rank if rank is not None else dim))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real)


def random_pure_state(dim: int, rng: np.random.Generator) -> PureState:
    v = _complex_gaussian(rng, dim)
    return PureState(v / np.linalg.norm(v))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(_complex_gaussian(rng, (dim, dim)))
    d = np.diagonal(r)
    return q * (d / np.abs(d))[None, :]


def random_partition(total: int, rng: np.random.Generator, parts: int | None = None) -> list:
    """Split ``total`` into at least two positive part sizes."""
    if parts is None:
        parts = int(rng.integers(2, total + 1))
    cuts = np.sort(rng.choice(np.arange(1, total), size=parts - 1, replace=False))
    bounds = np.concatenate([[0], cuts, [total]])
    return np.diff(bounds).astype(int).tolist()


def random_projections(dim: int, rng: np.random.Generator, parts: int | None = None) -> list:
    """Complete family of orthogonal projections in a Haar-random basis."""
    u = haar_unitary(dim, rng)
    sizes = random_partition(dim, rng, parts)
    out = []
    at = 0
    for s in sizes:
        cols = u[:, at : at + s]
        out.append(cols @ cols.conj().T)
        at += s
    return out


def random_pinching(dim: int, rng: np.random.Generator, parts: int | None = None) -> ReductionChannel:
    return pinching(random_projections(dim, rng, parts))


def random_commutative(dim: int, rng: np.random.Generator, parts: int | None = None) -> ReductionChannel:
    return commutative_channel(random_projections(dim, rng, parts))


def random_ensemble(dim: int, size: int, rng: np.random.Generator) -> Ensemble:
    weights = rng.dirichlet(np.ones(size))
    states = tuple(ginibre_density(dim, rng) for _ in range(size))
    return Ensemble(weights, states)


def random_basis_measurement_basis(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Unitary whose columns define a rank-one projective measurement."""
    return haar_unitary(dim, rng)
