"""JSON conventions shared by the library and the command line.

Complex numbers serialize as two-element arrays ``[re, im]``; matrices and
vectors as row-major nested arrays of those pairs.  Decoders are strict:
unknown object keys are rejected so that typos in job files fail loudly.
"""

from __future__ import annotations

import numpy as np

from .channels import ReductionChannel, block_compression, commutative_channel, diagonal_pinching
from .ensembles import Ensemble
from .roof import RoofResult, SolverConfig
from .states import DEFAULT_TOL, DensityOperator, PureState, Tolerances, ValidationError

__all__ = [
    "encode_matrix",
    "decode_matrix",
    "encode_vector",
    "decode_vector",
    "ensemble_to_json",
    "ensemble_from_json",
    "channel_to_json",
    "channel_from_json",
    "density_from_json",
    "pure_from_json",
    "block_density_to_json",
    "roof_result_to_json",
    "solver_config_from_json",
    "round_floats",
]


def _require_keys(obj: dict, required, optional=(), what="object"):
    if not isinstance(obj, dict):
        raise ValidationError(f"expected a JSON object for {what}, got {type(obj).__name__}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ValidationError(f"{what} is missing keys {missing}")
    unknown = [k for k in obj if k not in required and k not in optional]
    if unknown:
        raise ValidationError(f"{what} has unknown keys {unknown}")


def _decode_scalar(value, what="number"):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value):
        return complex(value[0], value[1])
    raise ValidationError(f"cannot decode {what}: expected a number or [re, im] pair, got {value!r}")


def encode_complex(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def encode_vector(v) -> list:
    return [encode_complex(z) for z in np.asarray(v, dtype=complex)]


def decode_vector(data, what="vector") -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ValidationError(f"{what} must be a nonempty array")
    return np.array([_decode_scalar(x, what) for x in data], dtype=complex)


def encode_matrix(m) -> list:
    return [encode_vector(row) for row in np.asarray(m, dtype=complex)]


def decode_matrix(data, what="matrix") -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ValidationError(f"{what} must be a nonempty array of rows")
    rows = [decode_vector(row, what) for row in data]
    width = {r.size for r in rows}
    if len(width) != 1:
        raise ValidationError(f"{what} has ragged rows")
    return np.vstack(rows)


def density_from_json(data, tol: Tolerances = DEFAULT_TOL) -> DensityOperator:
    return DensityOperator(decode_matrix(data, "density matrix"), tol)


def pure_from_json(data, tol: Tolerances = DEFAULT_TOL) -> PureState:
    return PureState(decode_vector(data, "state vector"), tol)


def ensemble_to_json(e: Ensemble) -> dict:
    return {
        "weights": [float(w) for w in e.weights],
        "states": [encode_matrix(s.matrix) for s in e.states],
    }


def ensemble_from_json(data, tol: Tolerances = DEFAULT_TOL) -> Ensemble:
    _require_keys(data, ("weights", "states"), what="ensemble")
    weights = data["weights"]
    states = data["states"]
    if not isinstance(weights, list) or not isinstance(states, list):
        raise ValidationError("ensemble weights and states must be arrays")
    return Ensemble(
        np.asarray(weights, dtype=float),
        tuple(DensityOperator(decode_matrix(s, "ensemble state"), tol) for s in states),
        tol,
    )


def channel_to_json(c: ReductionChannel) -> dict:
    return {
        "input_dim": c.input_dim,
        "block_dims": list(c.block_dims),
        "kraus": [{"block": b, "matrix": encode_matrix(k)} for b, k in c.kraus],
    }


def channel_from_json(data) -> ReductionChannel:
    """Decode a channel, accepting the explicit Kraus form or a shorthand.

    Shorthands: ``{"type": "diagonal", "dim": n}``,
    ``{"type": "block_compression", "psi": vector}``, and
    ``{"type": "commutative", "projections": [matrix, ...]}``.
    """
    if isinstance(data, dict) and "type" in data:
        kind = data["type"]
        if kind == "diagonal":
            _require_keys(data, ("type", "dim"), what="diagonal channel")
            return diagonal_pinching(int(data["dim"]))
        if kind == "block_compression":
            _require_keys(data, ("type", "psi"), what="block compression channel")
            return block_compression(PureState(decode_vector(data["psi"], "psi")))
        if kind == "commutative":
            _require_keys(data, ("type", "projections"), what="commutative channel")
            projs = data["projections"]
            if not isinstance(projs, list):
                raise ValidationError("projections must be an array of matrices")
            return commutative_channel([decode_matrix(p, "projection") for p in projs])
        raise ValidationError(f"unknown channel type {kind!r}")
    _require_keys(data, ("input_dim", "block_dims", "kraus"), what="channel")
    terms = []
    for t in data["kraus"]:
        _require_keys(t, ("block", "matrix"), what="Kraus term")
        terms.append((int(t["block"]), decode_matrix(t["matrix"], "Kraus matrix")))
    return ReductionChannel(
        int(data["input_dim"]),
        tuple(int(d) for d in data["block_dims"]),
        tuple(terms),
    )


def block_density_to_json(bd) -> dict:
    return {
        "block_dims": list(bd.block_dims),
        "blocks": [encode_matrix(b) for b in bd.blocks],
    }


def solver_config_from_json(data) -> SolverConfig:
    _require_keys(
        data,
        (),
        ("max_length", "restarts", "seed", "max_iters", "step_tol", "value_tol"),
        what="solver config",
    )
    return SolverConfig(**data)


def roof_result_to_json(result: RoofResult) -> dict:
    return {
        "value_R": result.value_R,
        "value_H": result.value_H,
        "reduced_entropy": result.reduced_entropy,
        "optimal_ensemble": ensemble_to_json(result.optimal_ensemble),
        "restart_values": list(result.restart_values),
        "best_restart": result.best_restart,
        "converged": result.converged,
        "iterations": result.iterations,
    }


def round_floats(obj, digits: int = 12):
    """Round every float in a JSON-ready structure to significant digits.

    Keeps reports byte-stable across runs; applied by the CLI before
    serialization.
    """
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj
