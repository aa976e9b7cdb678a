"""Closed-form references the solver is validated against.

Two oracles live here: the exact roof value of a qubit under the diagonal
pinching (closed form and its series expansion), and an explicit pure-state
decomposition for the channel that splits a matrix algebra into the
compression onto a hyperplane plus the scalar overlap with a chosen vector.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .channels import _range_basis
from .ensembles import Ensemble, convex_sum, pure_ensemble
from .states import (
    DEFAULT_TOL,
    DensityOperator,
    PureState,
    Tolerances,
    ValidationError,
    binary_entropy,
    canonical_eigh,
)

__all__ = [
    "qubit_R",
    "qubit_R_series",
    "BlockExampleData",
    "block_example_analyze",
    "BlockDecomposition",
    "block_example_decomposition",
]

DOMAIN_TOL = 1e-12
ZERO_OVERLAP = 1e-12   # below this an overlap counts as exactly zero


def qubit_R(z, domain_tol: float = DOMAIN_TOL) -> float:
    """Exact roof value of a qubit under the diagonal pinching.

    Depends only on the off-diagonal magnitude ``|z|``: with
    ``q = 1/2 + sqrt(1 - 4 |z|^2) / 2`` the value is ``s(q) + s(1 - q)``.
    Any valid qubit density operator has ``|z| <= 1/2``; larger magnitudes
    are a domain error.
    """
    mag = abs(complex(z))
    if mag > 0.5 + domain_tol:
        raise ValidationError(f"off-diagonal magnitude {mag!r} outside the domain [0, 1/2]")
    mag = min(mag, 0.5)
    q = 0.5 + 0.5 * math.sqrt(max(0.0, 1.0 - 4.0 * mag * mag))
    return binary_entropy(q)


def qubit_R_series(z, terms: int, domain_tol: float = DOMAIN_TOL) -> float:
    """Series form of :func:`qubit_R`: ``ln 2 - sum_k u^k / (2k(2k-1))``.

    Here ``u = 1 - 4 |z|^2``.  Partial sums decrease monotonically in
    ``terms`` and converge to the closed form from above; convergence is
    geometric in ``u`` and therefore slow near ``|z| = 0``.
    """
    if terms < 1:
        raise ValidationError(f"terms must be >= 1, got {terms}")
    mag = abs(complex(z))
    if mag > 0.5 + domain_tol:
        raise ValidationError(f"off-diagonal magnitude {mag!r} outside the domain [0, 1/2]")
    u = max(0.0, 1.0 - 4.0 * min(mag, 0.5) ** 2)
    k = np.arange(1, terms + 1, dtype=float)
    return float(math.log(2.0) - np.sum(u**k / (2.0 * k * (2.0 * k - 1.0))))


@dataclasses.dataclass(frozen=True)
class BlockExampleData:
    """Spectral data of a state relative to a distinguished unit vector.

    ``eigvecs`` holds orthonormal eigenvectors of the compression of the
    state onto the orthogonal complement of ``psi`` (as columns, lifted back
    to the input space, eigenvalues ``eigvals`` ascending), phase-rotated so
    every overlap ``z_k = <psi_k, rho psi>`` is real nonnegative.  ``lam``
    is ``<psi, rho psi>`` and ``z = sum_k z_k``.  When ``z <= 1/2`` the
    mixing weights ``mu_plus >= mu_minus`` with sum one and product ``z^2``
    are defined; otherwise they are NaN.
    """

    psi: PureState
    eigvecs: np.ndarray
    eigvals: np.ndarray
    overlaps: np.ndarray
    lam: float
    z: float
    mu_plus: float
    mu_minus: float


def block_example_analyze(
    rho: DensityOperator,
    psi: PureState,
    tol: Tolerances = DEFAULT_TOL,
) -> BlockExampleData:
    """Extract the spectral data driving the explicit block decomposition.

    Checks the Cauchy-Schwarz relation ``z_k^2 <= lambda_k * lam`` for every
    eigendirection and the defining identities of ``mu_plus``/``mu_minus``
    when they exist.
    """
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    if not isinstance(psi, PureState):
        psi = PureState(np.asarray(psi, dtype=complex))
    if rho.dim != psi.dim:
        raise ValidationError(f"dimension mismatch: state {rho.dim} vs vector {psi.dim}")
    n1 = rho.dim
    if n1 < 2:
        raise ValidationError("block example needs input dimension >= 2")
    q = np.eye(n1) - psi.projector()
    w = _range_basis(q)  # (n, n1) rows span the complement of psi
    compressed = w @ rho.matrix @ w.conj().T
    eigvals, u = canonical_eigh(compressed, tol)
    eigvals = np.where(eigvals < 0.0, 0.0, eigvals)
    vecs = w.conj().T @ u  # columns back in the input space
    target = rho.matrix @ psi.vector
    overlaps = vecs.conj().T @ target
    vecs = vecs.copy()
    mags = np.abs(overlaps)
    for k in range(vecs.shape[1]):
        if mags[k] > ZERO_OVERLAP:
            vecs[:, k] *= overlaps[k] / mags[k]
    overlaps = np.where(mags > ZERO_OVERLAP, mags, 0.0)
    lam = float(np.vdot(psi.vector, target).real)
    z = float(overlaps.sum())
    for k in range(overlaps.size):
        slack = overlaps[k] ** 2 - eigvals[k] * lam
        if slack > 1e-9:
            raise ValidationError(
                f"overlap bound violated at direction {k}: z_k^2 - lambda_k*lam = {slack:.3e}"
            )
    if z <= 0.5 + DOMAIN_TOL:
        root = math.sqrt(max(0.0, 1.0 - 4.0 * min(z, 0.5) ** 2))
        mu_plus = 0.5 + 0.5 * root
        mu_minus = 0.5 - 0.5 * root
        if abs(mu_plus + mu_minus - 1.0) > 1e-10 or abs(mu_plus * mu_minus - min(z, 0.5) ** 2) > 1e-10:
            raise ValidationError("mixing weights failed their defining identities")
    else:
        mu_plus = math.nan
        mu_minus = math.nan
    eigvals.setflags(write=False)
    overlaps.setflags(write=False)
    vecs.setflags(write=False)
    return BlockExampleData(
        psi=psi,
        eigvecs=vecs,
        eigvals=eigvals,
        overlaps=overlaps,
        lam=lam,
        z=z,
        mu_plus=mu_plus,
        mu_minus=mu_minus,
    )


@dataclasses.dataclass(frozen=True)
class BlockDecomposition:
    """Explicit decomposition plus its predicted roof value.

    ``candidate`` is ``s(mu_plus) + s(mu_minus)``, an upper bound for the
    roof; ``degenerate`` flags the boundary ``z = 1/2`` where the paired
    weights are no longer determined and are split symmetrically.
    """

    ensemble: Ensemble
    candidate: float
    degenerate: bool


def block_example_decomposition(
    data: BlockExampleData,
    rho: DensityOperator,
    tol: Tolerances = DEFAULT_TOL,
) -> BlockDecomposition:
    """Build the two-per-direction pure decomposition from analyzed data.

    Directions with positive overlap contribute a pair of pure states on the
    span of the eigendirection and ``psi`` whose 2x2 blocks are
    ``[[mu_pm, z], [z, mu_mp]]``; zero-overlap directions contribute their
    eigendirection outright.  Raises on ``z > 1/2`` (domain) and whenever
    the linear system for the weights leaves the simplex or the rebuilt
    mixture misses the state (construction failure).
    """
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    if math.isnan(data.mu_plus):
        raise ValidationError(f"z = {data.z!r} exceeds 1/2: no real mixing weights exist")
    psi = data.psi.vector
    weights: list[float] = []
    vectors: list[np.ndarray] = []
    degenerate = False
    if data.z <= ZERO_OVERLAP:
        for k in range(data.eigvals.size):
            if data.eigvals[k] > 1e-13:
                weights.append(float(data.eigvals[k]))
                vectors.append(data.eigvecs[:, k])
        if data.lam > 1e-13:
            weights.append(data.lam)
            vectors.append(psi)
        candidate = 0.0
    else:
        mu_p, mu_m = data.mu_plus, data.mu_minus
        gap = mu_p - mu_m
        # sqrt amplification: z within eps of 1/2 leaves a gap of ~2*sqrt(eps)
        degenerate = gap < 1e-6
        sp, sm = math.sqrt(mu_p), math.sqrt(mu_m)
        cross_minus = 0.0
        for k in range(data.eigvals.size):
            zk = float(data.overlaps[k])
            lk = float(data.eigvals[k])
            if zk <= ZERO_OVERLAP:
                if lk > 1e-13:
                    weights.append(lk)
                    vectors.append(data.eigvecs[:, k])
                continue
            pair_total = zk / data.z
            if degenerate:
                p_plus = p_minus = lk
            else:
                p_plus = (lk - mu_m * pair_total) / gap
                p_minus = (mu_p * pair_total - lk) / gap
            if p_plus < -1e-9 or p_minus < -1e-9:
                raise ValidationError(
                    "construction failure: direction "
                    f"{k} solved to weights ({p_plus:.3e}, {p_minus:.3e}) with "
                    f"lambda_k={lk:.6e}, z_k={zk:.6e}, z={data.z:.6e}"
                )
            p_plus, p_minus = max(p_plus, 0.0), max(p_minus, 0.0)
            cross_minus += p_plus * mu_m + p_minus * mu_p
            vec_k = data.eigvecs[:, k]
            if p_plus > 1e-13:
                weights.append(p_plus)
                vectors.append(sp * vec_k + sm * psi)
            if p_minus > 1e-13:
                weights.append(p_minus)
                vectors.append(sm * vec_k + sp * psi)
        if not degenerate and abs(cross_minus - data.lam) > 1e-8:
            raise ValidationError(
                f"construction failure: psi-coefficient {cross_minus:.6e} "
                f"differs from lam {data.lam:.6e}; the state has zero-overlap "
                "directions carrying weight"
            )
        candidate = binary_entropy(mu_p)
    if not weights:
        raise ValidationError("construction failure: no members survived")
    ensemble = pure_ensemble(weights, vectors)
    rebuilt = convex_sum(ensemble)
    defect = float(np.max(np.abs(rebuilt.matrix - rho.matrix)))
    if defect > 1e-9:
        raise ValidationError(
            f"construction failure: rebuilt mixture misses the state by {defect:.3e}"
        )
    return BlockDecomposition(ensemble=ensemble, candidate=candidate, degenerate=degenerate)
