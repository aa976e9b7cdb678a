"""Block-structured reduction channels and their action on density operators.

A channel maps an input density operator to a tuple of unnormalized positive
blocks, one per summand of a block-diagonal output algebra.  It is stored in
Kraus form: each Kraus term is a ``d_block x input_dim`` matrix tagged with
the output block it feeds, and block ``b`` of the output is
``sum_i K_i rho K_i^dag`` over the terms tagged ``b``.  Completeness
``sum_i K_i^dag K_i = 1`` makes the total output trace one.
"""

from __future__ import annotations

import dataclasses
from typing import NamedTuple, Sequence

import numpy as np

from .states import (
    DEFAULT_TOL,
    DensityOperator,
    PureState,
    Tolerances,
    ValidationError,
    canonical_eigh,
    entropy_of_spectrum,
)

__all__ = [
    "KrausTerm",
    "ReductionChannel",
    "BlockDensity",
    "reduce_state",
    "block_entropy",
    "identity_channel",
    "diagonal_pinching",
    "pinching",
    "block_compression",
    "commutative_channel",
]

COMPLETENESS_TOL = 1e-10
ORTHOGONALITY_TOL = 1e-10


class KrausTerm(NamedTuple):
    block: int
    matrix: np.ndarray


@dataclasses.dataclass(frozen=True)
class ReductionChannel:
    """A completely positive trace-preserving map onto block-diagonal output.

    Attributes
    ----------
    input_dim : int
        Dimension of the input matrix algebra.
    block_dims : tuple of int
        Dimensions of the output blocks.
    kraus : tuple of KrausTerm
        Kraus operators; term ``(b, K)`` has ``K`` of shape
        ``(block_dims[b], input_dim)``.  Completeness is enforced to
        ``1e-10`` on construction.
    """

    input_dim: int
    block_dims: tuple
    kraus: tuple

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValidationError(f"input_dim must be positive, got {self.input_dim}")
        dims = tuple(int(d) for d in self.block_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValidationError(f"block_dims must be positive, got {dims}")
        terms = []
        for entry in self.kraus:
            b, k = entry
            b = int(b)
            if not 0 <= b < len(dims):
                raise ValidationError(f"Kraus term references block {b}, have {len(dims)} blocks")
            k = np.asarray(k, dtype=complex)
            if k.shape != (dims[b], self.input_dim):
                raise ValidationError(
                    f"Kraus term for block {b} has shape {k.shape}, expected {(dims[b], self.input_dim)}"
                )
            k = k.copy()
            k.setflags(write=False)
            terms.append(KrausTerm(b, k))
        if not terms:
            raise ValidationError("channel needs at least one Kraus term")
        comp = sum(t.matrix.conj().T @ t.matrix for t in terms)
        defect = float(np.max(np.abs(comp - np.eye(self.input_dim))))
        if defect > COMPLETENESS_TOL:
            raise ValidationError(
                f"Kraus completeness defect {defect:.3e} exceeds {COMPLETENESS_TOL:.3e}"
            )
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "kraus", tuple(terms))

    @property
    def block_count(self) -> int:
        return len(self.block_dims)

    @property
    def output_dim(self) -> int:
        return sum(self.block_dims)


@dataclasses.dataclass(frozen=True)
class BlockDensity:
    """Unnormalized positive blocks whose traces sum to one."""

    blocks: tuple
    tol: dataclasses.InitVar[Tolerances] = DEFAULT_TOL

    def __post_init__(self, tol: Tolerances):
        mats = []
        total = 0.0
        for blk in self.blocks:
            m = np.asarray(blk, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValidationError(f"block has shape {m.shape}, expected square")
            defect = float(np.max(np.abs(m - m.conj().T)))
            if defect > tol.herm:
                raise ValidationError(f"block not Hermitian: asymmetry {defect:.3e}")
            m = 0.5 * (m + m.conj().T)
            lo = float(np.linalg.eigvalsh(m)[0])
            if lo < -tol.psd:
                raise ValidationError(f"block has negative eigenvalue {lo:.3e}")
            total += float(np.trace(m).real)
            m.setflags(write=False)
            mats.append(m)
        if not mats:
            raise ValidationError("block density needs at least one block")
        if abs(total - 1.0) > tol.trace:
            raise ValidationError(f"block traces sum to {total!r}, expected 1")
        object.__setattr__(self, "blocks", tuple(mats))

    @property
    def block_dims(self) -> tuple:
        return tuple(b.shape[0] for b in self.blocks)

    def to_dense(self) -> np.ndarray:
        """Embed as a block-diagonal matrix on the direct sum space."""
        n = sum(self.block_dims)
        out = np.zeros((n, n), dtype=complex)
        at = 0
        for b in self.blocks:
            d = b.shape[0]
            out[at : at + d, at : at + d] = b
            at += d
        return out

    def probabilities(self) -> np.ndarray:
        """Block traces as a probability vector (any block dimensions)."""
        return np.array([float(np.trace(b).real) for b in self.blocks])


def _coerce_density(rho) -> DensityOperator:
    return rho if isinstance(rho, DensityOperator) else DensityOperator(rho)


def reduce_state(channel: ReductionChannel, rho, tol: Tolerances = DEFAULT_TOL) -> BlockDensity:
    """Apply the channel: block ``b`` is ``sum_{i tagged b} K_i rho K_i^dag``."""
    rho = _coerce_density(rho)
    if rho.dim != channel.input_dim:
        raise ValidationError(f"state dimension {rho.dim} != channel input {channel.input_dim}")
    blocks = [np.zeros((d, d), dtype=complex) for d in channel.block_dims]
    for b, k in channel.kraus:
        blocks[b] += k @ rho.matrix @ k.conj().T
    return BlockDensity(tuple(blocks), tol)


def block_entropy(bd: BlockDensity, tol: Tolerances = DEFAULT_TOL) -> float:
    """Entropy of the block density: sum over blocks of Tr s(block)."""
    total = 0.0
    for blk in bd.blocks:
        total += entropy_of_spectrum(np.linalg.eigvalsh(blk), tol)
    return total


# --- constructors -----------------------------------------------------------


def identity_channel(dim: int) -> ReductionChannel:
    """Single full block; the reduction is the state itself."""
    if dim < 1:
        raise ValidationError(f"dimension must be positive, got {dim}")
    return ReductionChannel(dim, (dim,), ((0, np.eye(dim)),))


def diagonal_pinching(dim: int) -> ReductionChannel:
    """One 1-dimensional block per basis vector; reduces to the diagonal."""
    if dim < 2:
        raise ValidationError(f"diagonal pinching needs dimension >= 2, got {dim}")
    eye = np.eye(dim)
    terms = tuple((k, eye[k : k + 1, :]) for k in range(dim))
    return ReductionChannel(dim, (1,) * dim, terms)


def _validate_projections(projections: Sequence[np.ndarray], dim_hint=None):
    mats = [np.asarray(p, dtype=complex) for p in projections]
    if not mats:
        raise ValidationError("need at least one projection")
    n = mats[0].shape[0]
    for j, p in enumerate(mats):
        if p.shape != (n, n):
            raise ValidationError(f"projection {j} has shape {p.shape}, expected {(n, n)}")
        defect = float(np.max(np.abs(p @ p - p)))
        if defect > ORTHOGONALITY_TOL:
            raise ValidationError(f"projection {j} is not idempotent: defect {defect:.3e}")
        herm = float(np.max(np.abs(p - p.conj().T)))
        if herm > ORTHOGONALITY_TOL:
            raise ValidationError(f"projection {j} is not Hermitian: defect {herm:.3e}")
    for j in range(len(mats)):
        for k in range(j + 1, len(mats)):
            defect = float(np.max(np.abs(mats[j] @ mats[k])))
            if defect > ORTHOGONALITY_TOL:
                raise ValidationError(
                    f"projections {j} and {k} are not orthogonal: defect {defect:.3e}"
                )
    comp = sum(mats) - np.eye(n)
    defect = float(np.max(np.abs(comp)))
    if defect > ORTHOGONALITY_TOL:
        raise ValidationError(f"projections do not sum to identity: defect {defect:.3e}")
    return mats, n


def _range_basis(projection: np.ndarray) -> np.ndarray:
    """Rows form a deterministic orthonormal basis of the projection's range."""
    w, v = canonical_eigh(projection)
    keep = w > 0.5
    return v[:, keep].conj().T


def pinching(projections: Sequence[np.ndarray]) -> ReductionChannel:
    """Channel compressing onto the block-diagonal algebra of a complete
    family of orthogonal projections; block ``j`` of the output is the
    compression onto the range of projection ``j``."""
    mats, n = _validate_projections(projections)
    dims = []
    terms = []
    for j, p in enumerate(mats):
        w = _range_basis(p)
        if w.shape[0] == 0:
            raise ValidationError(f"projection {j} has empty range")
        dims.append(w.shape[0])
        terms.append((j, w))
    return ReductionChannel(n, tuple(dims), tuple(terms))


def block_compression(psi: PureState) -> ReductionChannel:
    """Two-block channel splitting off the line spanned by ``psi``.

    Block 0 is the compression onto the orthogonal complement of ``psi``
    (dimension ``n`` for input dimension ``n + 1``), block 1 is the scalar
    overlap with ``psi``.  The complement basis follows the deterministic
    eigenbasis convention of :func:`roofentropy.states.canonical_eigh`.
    """
    if not isinstance(psi, PureState):
        psi = PureState(np.asarray(psi, dtype=complex))
    n1 = psi.dim
    if n1 < 2:
        raise ValidationError("block compression needs input dimension >= 2")
    q = np.eye(n1) - psi.projector()
    w = _range_basis(q)
    if w.shape[0] != n1 - 1:
        raise ValidationError(f"complement rank {w.shape[0]}, expected {n1 - 1}")
    terms = ((0, w), (1, psi.vector.conj()[None, :]))
    return ReductionChannel(n1, (n1 - 1, 1), terms)


def commutative_channel(projections: Sequence[np.ndarray]) -> ReductionChannel:
    """Channel of a commutative subalgebra spanned by orthogonal projections.

    Output has one 1-dimensional block per projection and block ``j`` of the
    reduction is ``Tr(Q_j rho)``; each orthonormal basis vector of the range
    of ``Q_j`` contributes one Kraus row tagged ``j``.
    """
    mats, n = _validate_projections(projections)
    terms = []
    for j, p in enumerate(mats):
        w = _range_basis(p)
        if w.shape[0] == 0:
            raise ValidationError(f"projection {j} has empty range")
        for row in w:
            terms.append((j, row[None, :]))
    return ReductionChannel(n, (1,) * len(mats), tuple(terms))
