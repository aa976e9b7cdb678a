"""Density operators, pure states, and the entropy functionals built on them.

All operators are dense complex numpy arrays and all entropies use natural
logarithms (nats).  Conversion to bits is a display concern and lives in the
command line layer only.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "ValidationError",
    "DensityOperator",
    "PureState",
    "hermiticity_defect",
    "eigh",
    "canonical_eigh",
    "entropy_of_spectrum",
    "shannon_entropy",
    "von_neumann_entropy",
    "relative_entropy",
    "binary_entropy",
]

LN2 = math.log(2.0)


class ValidationError(ValueError):
    """An input failed one of its structural invariants."""


@dataclasses.dataclass(frozen=True)
class Tolerances:
    """Validation and support-detection cutoffs shared across the package.

    Attributes
    ----------
    herm : float
        Largest allowed entry of ``|M - M^dag|`` before a matrix is rejected
        as non-Hermitian.
    trace : float
        Allowed deviation of a density operator's trace from one.
    norm : float
        Allowed deviation of a pure state vector's norm from one.
    psd : float
        Eigenvalues in ``[-psd, 0]`` are clipped to zero; anything below
        ``-psd`` is an error.
    support : float
        Spectral cutoff defining the support of the second argument in
        ``relative_entropy``.
    """

    herm: float = 1e-9
    trace: float = 1e-9
    norm: float = 1e-9
    psd: float = 1e-9
    support: float = 1e-10


DEFAULT_TOL = Tolerances()


def _as_square_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermiticity_defect(m) -> float:
    """Max-entry distance between ``m`` and its conjugate transpose."""
    a = _as_square_matrix(m)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def eigh(m, tol: Tolerances = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Parameters
    ----------
    m : array_like
        Square matrix; rejected if its hermiticity defect exceeds
        ``tol.herm``.

    Returns
    -------
    (w, v) : ndarray pair
        Real eigenvalues in ascending order and the matrix whose columns are
        the corresponding orthonormal eigenvectors.
    """
    a = _as_square_matrix(m)
    defect = hermiticity_defect(a)
    if defect > tol.herm:
        raise ValidationError(
            f"matrix is not Hermitian: max asymmetry {defect:.3e} exceeds {tol.herm:.3e}"
        )
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    return w, v


def _fix_eigenvector_phases(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive.

    Magnitude ties resolve to the lowest row index (np.argmax convention).
    """
    v = v.copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        pivot = col[int(np.argmax(np.abs(col)))]
        mag = abs(pivot)
        if mag > 0.0:
            col *= pivot.conjugate() / mag
    return v


def _order_degenerate_columns(w: np.ndarray, v: np.ndarray):
    """Sort columns within (near-)degenerate eigenvalue groups lexicographically."""
    order = np.arange(len(w))
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and abs(w[stop] - w[start]) <= 1e-12 * max(1.0, abs(w[start])):
            stop += 1
        if stop - start > 1:
            # negated so that standard-basis-like columns sort in index order
            keys = [
                tuple(np.round(-np.concatenate([v[:, i].real, v[:, i].imag]), 10))
                for i in order[start:stop]
            ]
            order[start:stop] = order[start:stop][np.array(sorted(range(len(keys)), key=keys.__getitem__))]
        start = stop
    return w[order], v[:, order]


def canonical_eigh(m, tol: Tolerances = DEFAULT_TOL):
    """`eigh` plus a deterministic phase and ordering convention.

    Each eigenvector is rotated so its largest-magnitude component is real
    positive; within degenerate eigenvalue groups, columns are ordered
    lexicographically.  Used wherever a reproducible eigenbasis matters
    (channel constructors, the solver, serialized reports).
    """
    w, v = eigh(m, tol)
    v = _fix_eigenvector_phases(v)
    return _order_degenerate_columns(w, v)


@dataclasses.dataclass(frozen=True)
class DensityOperator:
    """A positive semidefinite matrix with unit trace.

    The stored matrix is hermitized, copied, and marked read-only on
    construction; validation failures raise :class:`ValidationError`.
    """

    matrix: np.ndarray
    tol: dataclasses.InitVar[Tolerances] = DEFAULT_TOL

    def __post_init__(self, tol: Tolerances):
        m = _as_square_matrix(self.matrix)
        defect = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if defect > tol.herm:
            raise ValidationError(
                f"density matrix not Hermitian: max asymmetry {defect:.3e} exceeds {tol.herm:.3e}"
            )
        m = 0.5 * (m + m.conj().T)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > tol.trace:
            raise ValidationError(f"density matrix trace {tr!r} deviates from 1 beyond {tol.trace:.3e}")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -tol.psd:
            raise ValidationError(f"density matrix has negative eigenvalue {lo:.3e} below -{tol.psd:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        """Eigenvalues in ascending order, small negatives clipped to zero."""
        w = np.linalg.eigvalsh(self.matrix)
        return np.where(w < 0.0, 0.0, w)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclasses.dataclass(frozen=True)
class PureState:
    """A unit vector; ``density()`` gives the rank-one projection onto it."""

    vector: np.ndarray
    tol: dataclasses.InitVar[Tolerances] = DEFAULT_TOL

    def __post_init__(self, tol: Tolerances):
        v = np.asarray(self.vector, dtype=complex)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError(f"expected a nonempty vector, got shape {v.shape}")
        nrm = float(np.linalg.norm(v))
        if abs(nrm - 1.0) > tol.norm:
            raise ValidationError(f"state vector norm {nrm!r} deviates from 1 beyond {tol.norm:.3e}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    def projector(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())

    def density(self) -> DensityOperator:
        return DensityOperator(self.projector())


def _xlnx(x: np.ndarray) -> np.ndarray:
    """Elementwise -x ln x with the convention 0 ln 0 = 0; negatives clip to 0."""
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    safe = np.where(x > 0.0, x, 1.0)
    return -x * np.log(safe)


def entropy_of_spectrum(values, tol: Tolerances = DEFAULT_TOL) -> float:
    """Sum of -x ln x over a spectrum; values below ``-tol.psd`` are rejected."""
    w = np.asarray(values, dtype=float)
    if w.size and float(w.min()) < -tol.psd:
        raise ValidationError(
            f"spectrum has negative value {float(w.min()):.3e} below -{tol.psd:.3e}"
        )
    return float(np.sum(_xlnx(w)))


def shannon_entropy(probabilities) -> float:
    """Shannon entropy (nats) of a nonnegative weight vector."""
    return float(np.sum(_xlnx(np.asarray(probabilities, dtype=float))))


def _coerce_density(rho) -> DensityOperator:
    return rho if isinstance(rho, DensityOperator) else DensityOperator(rho)


def von_neumann_entropy(rho, tol: Tolerances = DEFAULT_TOL) -> float:
    """Von Neumann entropy S(rho) = -Tr rho ln rho in nats.

    Lies in ``[0, ln dim]`` up to roundoff for any valid density operator.
    """
    rho = _coerce_density(rho)
    return entropy_of_spectrum(np.linalg.eigvalsh(rho.matrix), tol)


def relative_entropy(rho, sigma, tol: Tolerances = DEFAULT_TOL) -> float:
    """Relative entropy S(rho, sigma) = Tr rho (ln rho - ln sigma).

    Returns ``math.inf`` when the support of ``rho`` is not contained in the
    support of ``sigma``: eigenvectors of ``sigma`` with eigenvalue at most
    ``tol.support`` that carry more than ``tol.support`` of ``rho``-weight
    trigger the infinite branch.
    """
    rho = _coerce_density(rho)
    sigma = _coerce_density(sigma)
    if rho.dim != sigma.dim:
        raise ValidationError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    w, v = canonical_eigh(sigma.matrix, tol)
    weights = np.einsum("ij,jk,ki->i", v.conj().T, rho.matrix, v).real
    outside = w <= tol.support
    if float(np.sum(np.maximum(weights[outside], 0.0))) > tol.support:
        return math.inf
    inside = ~outside
    cross = float(np.dot(weights[inside], np.log(w[inside])))
    return -von_neumann_entropy(rho, tol) - cross


def binary_entropy(q: float, tol: float = 1e-9) -> float:
    """s(q) + s(1-q) with s(x) = -x ln x, for q in [0, 1] within ``tol``."""
    q = float(q)
    if q < -tol or q > 1.0 + tol:
        raise ValidationError(f"binary entropy argument {q!r} outside [0, 1] beyond {tol:.3e}")
    q = min(max(q, 0.0), 1.0)
    return float(_xlnx(np.array([q, 1.0 - q])).sum())
