"""Convex-roof minimization of reduced entropy over pure-state decompositions.

Every length-``m`` decomposition of a rank-``r`` density operator into
unnormalized pure pieces arises from an ``m x r`` column isometry ``V``
applied to the square-root-scaled eigenvectors of the state.  The solver
searches that isometry manifold with multi-start projected finite-difference
gradient descent; QR re-orthonormalization keeps iterates on the manifold.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from .channels import ReductionChannel, block_entropy, reduce_state
from .ensembles import Ensemble, pure_ensemble, shorten
from .states import (
    DEFAULT_TOL,
    DensityOperator,
    Tolerances,
    ValidationError,
    canonical_eigh,
    _xlnx,
)

__all__ = [
    "SolverConfig",
    "RoofResult",
    "decomposition_from_isometry",
    "roof_objective",
    "solve_R",
    "affinity_certificate",
    "AffinityCertificate",
    "zero_entropy_structure",
    "ZeroEntropyReport",
]

ISOMETRY_TOL = 1e-10
FD_STEP = 1e-7          # forward-difference step on the ambient parameters
INITIAL_STEP = 0.25
LADDER = 8              # step-halving candidates evaluated per line search
STEP_CAP = 1.0


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    """Search-budget knobs for :func:`solve_R`.

    ``max_length`` defaults to the square of the input dimension, which is
    enough members for any optimal decomposition by a Caratheodory count on
    the state space.  Restarts are deterministic given ``seed``: restart 0
    mixes nothing (the eigen-ensemble), restart 1 applies a discrete Fourier
    mixing, and later restarts draw Haar-like random isometries.
    """

    max_length: int | None = None
    restarts: int = 64
    seed: int = 0
    max_iters: int = 400
    step_tol: float = 1e-10
    value_tol: float = 1e-9

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_length is not None and self.max_length < 1:
            raise ValidationError(f"max_length must be >= 1, got {self.max_length}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclasses.dataclass(frozen=True)
class RoofResult:
    """Outcome of a roof minimization.

    ``value_H = reduced_entropy - value_R`` by construction, so it is the
    mutual entropy of the optimal ensemble up to solver tolerance.
    """

    value_R: float
    value_H: float
    reduced_entropy: float
    optimal_ensemble: Ensemble
    restart_values: tuple
    best_restart: int
    converged: bool
    iterations: int


def _clean_rank(rho: DensityOperator, tol: Tolerances):
    """Eigenpairs of the state above the positivity cutoff, ascending."""
    w, v = canonical_eigh(rho.matrix, tol)
    keep = w > tol.psd
    return w[keep], v[:, keep]


def decomposition_from_isometry(
    rho: DensityOperator,
    isometry: np.ndarray,
    tol: Tolerances = DEFAULT_TOL,
    weight_cutoff: float = 1e-13,
) -> Ensemble:
    """Pure-state decomposition of ``rho`` indexed by a column isometry.

    Row ``j`` of the isometry mixes the scaled eigenvectors of ``rho`` into
    the unnormalized vector whose norm squared is the member weight.  The
    isometry must have exactly ``rank(rho)`` orthonormal columns; members
    with weight at or below ``weight_cutoff`` are dropped.
    """
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    v = np.asarray(isometry, dtype=complex)
    if v.ndim != 2:
        raise ValidationError(f"isometry must be a matrix, got shape {v.shape}")
    m, r = v.shape
    gram = v.conj().T @ v
    defect = float(np.max(np.abs(gram - np.eye(r))))
    if defect > ISOMETRY_TOL:
        raise ValidationError(f"columns are not orthonormal: defect {defect:.3e}")
    lam, vecs = _clean_rank(rho, tol)
    if r != lam.size:
        raise ValidationError(f"isometry has {r} columns but the state has rank {lam.size}")
    if m < r:
        raise ValidationError(f"need at least rank many rows, got {m} < {r}")
    phis = v @ (vecs * np.sqrt(lam)).T  # row j is the j-th unnormalized vector
    weights = np.einsum("jk,jk->j", phis, phis.conj()).real
    kept = [(p, phis[j] / math.sqrt(p)) for j, p in enumerate(weights) if p > weight_cutoff]
    if not kept:
        raise ValidationError("every member fell below the weight cutoff")
    return pure_ensemble([p for p, _ in kept], [u for _, u in kept])


def roof_objective(ensemble: Ensemble, channel: ReductionChannel) -> float:
    """Average reduced entropy sum_j p_j S(reduce(rho_j)) of a decomposition."""
    total = 0.0
    for p, rho in ensemble.members():
        if p <= 0.0:
            continue
        total += p * block_entropy(reduce_state(channel, rho))
    return total


class _Evaluator:
    """Vectorized objective over batches of mixing isometries.

    Precomputes the scaled eigenvector matrix of the state and a
    concatenated Kraus matrix.  For a pure member, each output block is a
    small Gram form; blocks fed by a single Kraus term (and all
    1-dimensional blocks) contribute a plain squared norm, so only blocks
    with several multi-row Kraus terms need a batched eigensolve.
    """

    def __init__(self, rho: DensityOperator, channel: ReductionChannel, tol: Tolerances):
        lam, vecs = _clean_rank(rho, tol)
        self.rank = lam.size
        self.root = (vecs * np.sqrt(lam)).T  # (r, n): phi rows = V @ root
        per_block: dict[int, list[np.ndarray]] = {b: [] for b in range(channel.block_count)}
        for b, k in channel.kraus:
            per_block[b].append(k)
        norm_rows: list[np.ndarray] = []
        norm_starts: list[int] = []
        at = 0
        gram_specs = []  # (list of (start, d) after the norm section, op count)
        gram_rows: list[np.ndarray] = []
        gram_at = 0
        for b in range(channel.block_count):
            ops = per_block[b]
            if not ops:
                continue
            d = channel.block_dims[b]
            if d == 1 or len(ops) == 1:
                norm_starts.append(at)
                for k in ops:
                    norm_rows.append(k)
                    at += k.shape[0]
            else:
                spans = []
                for k in ops:
                    gram_rows.append(k)
                    spans.append(gram_at)
                    gram_at += d
                gram_specs.append((spans, d))
        self.norm_count = at
        self.norm_starts = np.array(norm_starts, dtype=np.intp)
        self.gram_specs = gram_specs
        stacked = norm_rows + gram_rows
        self.kraus_t = np.vstack(stacked).T.copy() if stacked else None
        self.reduced_entropy = block_entropy(reduce_state(channel, rho))

    def objective_many(self, isometries: np.ndarray) -> np.ndarray:
        """Objective for a stack of isometries, shape (batch, m, r) -> (batch,)."""
        phi = isometries @ self.root
        a = phi @ self.kraus_t
        nu = a.real**2 + a.imag**2
        norm_part = np.add.reduceat(nu[..., : self.norm_count], self.norm_starts, axis=-1)
        total = _xlnx(norm_part).sum(axis=(-1, -2))
        for spans, d in self.gram_specs:
            cols = [a[..., self.norm_count + s : self.norm_count + s + d] for s in spans]
            stackv = np.stack(cols, axis=-2)  # (batch, m, ops, d)
            gram = np.einsum("...ip,...tp->...it", stackv.conj(), stackv)
            eigs = np.linalg.eigvalsh(gram)
            total = total + _xlnx(eigs).sum(axis=(-1, -2))
        p = (phi.real**2 + phi.imag**2).sum(axis=-1)
        return total - _xlnx(p).sum(axis=-1)

    def objective(self, isometry: np.ndarray) -> float:
        return float(self.objective_many(isometry[None])[0])


def _retract(a: np.ndarray) -> np.ndarray:
    """QR re-orthonormalization with positive-real R-diagonal.

    Acts along the last two axes; fixed phases make the map the identity on
    matrices that are already isometric.
    """
    q, r = np.linalg.qr(a)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    mag = np.abs(d)
    phase = np.where(mag > 0.0, d / np.where(mag > 0.0, mag, 1.0), 1.0)
    return q * phase[..., None, :]


def _fd_gradient(ev: _Evaluator, v: np.ndarray, f0: float) -> np.ndarray:
    """Forward-difference gradient of the retracted objective, as a complex matrix."""
    m, r = v.shape
    count = m * r
    batch = np.broadcast_to(v, (2 * count, m, r)).reshape(2 * count, count).copy()
    idx = np.arange(count)
    batch[idx, idx] += FD_STEP
    batch[count + idx, idx] += 1j * FD_STEP
    values = ev.objective_many(_retract(batch.reshape(2 * count, m, r)))
    g = (values - f0) / FD_STEP
    return (g[:count] + 1j * g[count:]).reshape(m, r)


def _optimize(ev: _Evaluator, start: np.ndarray, cfg: SolverConfig):
    """Descend from one start; returns (value, isometry, converged, iterations)."""
    v = _retract(start[None])[0]
    f = ev.objective(v)
    step = INITIAL_STEP
    ladder = 0.5 ** np.arange(LADDER)
    stalls = 0
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        grad = _fd_gradient(ev, v, f)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < 1e-13:
            return f, v, True, iterations
        scales = step * ladder
        candidates = v[None] - scales[:, None, None] * grad[None]
        values = ev.objective_many(_retract(candidates))
        better = np.flatnonzero(values < f)
        if better.size == 0:
            step *= ladder[-1] * 0.5
            if step < cfg.step_tol:
                return f, v, True, iterations
            continue
        pick = int(better[0])
        gain = f - float(values[pick])
        v = candidates[pick]
        v = _retract(v[None])[0]
        f = float(values[pick])
        step = min(scales[pick] * 2.0, STEP_CAP)
        if gain < cfg.value_tol:
            stalls += 1
            if stalls >= 2:
                return f, v, True, iterations
        else:
            stalls = 0
        if step < cfg.step_tol:
            return f, v, True, iterations
    return f, v, False, iterations


def _start_isometries(m: int, r: int, cfg: SolverConfig):
    """Deterministic eigen and Fourier mixings, then seeded random isometries."""
    starts = [np.eye(m, r, dtype=complex)]
    if cfg.restarts > 1:
        j, k = np.meshgrid(np.arange(m), np.arange(r), indexing="ij")
        starts.append(np.exp(-2j * np.pi * j * k / m) / math.sqrt(m))
    for idx in range(2, cfg.restarts):
        rng = np.random.default_rng([cfg.seed, idx])
        g = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
        starts.append(g)
    return starts[: cfg.restarts]


def solve_R(
    rho: DensityOperator,
    channel: ReductionChannel,
    config: SolverConfig | None = None,
    tol: Tolerances = DEFAULT_TOL,
    trace=None,
) -> RoofResult:
    """Minimize the average reduced entropy over pure-state decompositions.

    Parameters
    ----------
    trace : str or file-like, optional
        When given, one JSON line per restart is written with the restart
        index, final value, iteration count, and convergence flag.  A string
        is treated as a path and opened for writing.

    Returns
    -------
    RoofResult
        Restarts merge by minimum value with lowest-index tie-break, so the
        outcome does not depend on evaluation order.  ``converged`` reports
        the flag of the winning restart.
    """
    if isinstance(trace, str):
        with open(trace, "w", encoding="utf-8") as fh:
            return solve_R(rho, channel, config, tol, trace=fh)
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    cfg = config if config is not None else SolverConfig()
    if rho.dim != channel.input_dim:
        raise ValidationError(f"state dimension {rho.dim} != channel input {channel.input_dim}")
    ev = _Evaluator(rho, channel, tol)
    n = rho.dim
    length = cfg.max_length if cfg.max_length is not None else n * n
    if length < ev.rank:
        raise ValidationError(
            f"max_length {length} is below the state rank {ev.rank}"
        )
    best = None
    values = []
    for idx, start in enumerate(_start_isometries(length, ev.rank, cfg)):
        value, vopt, converged, iters = _optimize(ev, start, cfg)
        values.append(value)
        if trace is not None:
            trace.write(
                json.dumps(
                    {"restart": idx, "value": value, "iterations": iters, "converged": converged},
                    sort_keys=True,
                )
                + "\n"
            )
        if best is None or value < best[0]:
            best = (value, idx, vopt, converged, iters)
    value_r, best_idx, vopt, converged, iters = best
    ensemble = shorten(decomposition_from_isometry(rho, vopt, tol))
    return RoofResult(
        value_R=value_r,
        value_H=ev.reduced_entropy - value_r,
        reduced_entropy=ev.reduced_entropy,
        optimal_ensemble=ensemble,
        restart_values=tuple(values),
        best_restart=best_idx,
        converged=converged,
        iterations=iters,
    )


@dataclasses.dataclass(frozen=True)
class AffinityCertificate:
    """Re-solve check that the roof is affine across the optimal ensemble.

    For random reweightings of the optimal pure states, the roof value of
    the recombined mixture should match the affine prediction
    ``sum_j q_j S(reduce(rho_j))``; ``passed`` requires agreement within
    ``tolerance`` on every sample.
    """

    discrepancies: tuple
    predictions: tuple
    resolved: tuple
    max_discrepancy: float
    tolerance: float
    passed: bool


def affinity_certificate(
    result: RoofResult,
    channel: ReductionChannel,
    samples: int = 20,
    config: SolverConfig | None = None,
    tolerance: float = 1e-4,
) -> AffinityCertificate:
    """Probe affinity of the roof on the face spanned by the optimal ensemble."""
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    cfg = config if config is not None else SolverConfig()
    members = list(result.optimal_ensemble.members())
    reduced = [block_entropy(reduce_state(channel, rho)) for _, rho in members]
    rng = np.random.default_rng([cfg.seed, 7919])
    discrepancies = []
    predictions = []
    resolved_values = []
    for _ in range(samples):
        q = rng.dirichlet(np.ones(len(members)))
        mixture = DensityOperator(
            sum(qj * rho.matrix for qj, (_, rho) in zip(q, members))
        )
        prediction = float(np.dot(q, reduced))
        res = solve_R(mixture, channel, cfg)
        predictions.append(prediction)
        resolved_values.append(res.value_R)
        discrepancies.append(res.value_R - prediction)
    max_disc = max(abs(d) for d in discrepancies)
    return AffinityCertificate(
        discrepancies=tuple(discrepancies),
        predictions=tuple(predictions),
        resolved=tuple(resolved_values),
        max_discrepancy=max_disc,
        tolerance=tolerance,
        passed=max_disc <= tolerance,
    )


@dataclasses.dataclass(frozen=True)
class ZeroEntropyReport:
    """Eigenvector structure associated with a vanishing roof gap.

    ``residuals[k]`` is the worst eigenvector-relation defect of support
    vector ``k`` against the pulled-back block identities (the center of
    the output algebra).  For block-projection channels a zero residual
    says the vector lies inside a single block range.  The report may fail
    honestly: a vanishing gap does not force block alignment for every
    state, so callers get per-vector flags rather than an exception.
    """

    residuals: tuple
    vector_passed: tuple
    generator_count: int
    tolerance: float
    passed: bool


def zero_entropy_structure(
    rho: DensityOperator,
    channel: ReductionChannel,
    result: RoofResult,
    tolerance: float = 1e-6,
    tol: Tolerances = DEFAULT_TOL,
) -> ZeroEntropyReport:
    """Check the support of ``rho`` against the output algebra when H is zero."""
    if result.value_H > 1e-6:
        raise ValidationError(
            f"zero-entropy structure needs value_H <= 1e-6, got {result.value_H:.3e}"
        )
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    lam, vecs = _clean_rank(rho, tol)
    per_block: dict[int, list[np.ndarray]] = {}
    for b, k in channel.kraus:
        per_block.setdefault(b, []).append(k)
    # Center generators: pulled-back block identities Σ_i K_i†K_i.  Matrix
    # units within a block shift vectors around the block range, so only the
    # center admits common eigenvectors at all.
    generators = []
    for b, ops in sorted(per_block.items()):
        generators.append(sum(k.conj().T @ k for k in ops))
    residuals = []
    for j in range(lam.size):
        vec = vecs[:, j]
        worst = 0.0
        for g in generators:
            image = g @ vec
            overlap = complex(np.vdot(vec, image))
            worst = max(worst, float(np.linalg.norm(image - overlap * vec)))
        residuals.append(worst)
    flags = tuple(res <= tolerance for res in residuals)
    return ZeroEntropyReport(
        residuals=tuple(residuals),
        vector_passed=flags,
        generator_count=len(generators),
        tolerance=tolerance,
        passed=all(flags),
    )
