"""Command-line surface.

Every subcommand reads JSON (inline or from files), computes, and prints a
canonical JSON report: keys sorted, floats carrying 12 significant digits,
so identical jobs produce byte-identical output.  ``--format table``
flattens the same report for quick reading and is lossy on matrices.

Exit codes: 0 success, 1 validation or input error, 2 failed checks from
``verify``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from typing import Mapping

import numpy as np

from .accinfo import benatti_bracket, holevo_check
from .channels import block_entropy, reduce_state
from .ensembles import mutual_entropy
from .jsonio import (
    block_density_to_json,
    channel_from_json,
    decode_matrix,
    density_from_json,
    ensemble_from_json,
    ensemble_to_json,
    pure_from_json,
    roof_result_to_json,
    round_floats,
)
from .oracles import (
    block_example_analyze,
    block_example_decomposition,
    qubit_R,
    qubit_R_series,
)
from .roof import SolverConfig, affinity_certificate, solve_R, zero_entropy_structure
from .states import (
    DEFAULT_TOL,
    Tolerances,
    ValidationError,
    von_neumann_entropy,
)
from .verify import run_verify

__all__ = ["JobSpec", "run", "main"]


@dataclasses.dataclass(frozen=True)
class JobSpec:
    """One CLI invocation: a command plus raw inputs and overrides."""

    command: str
    inputs: Mapping[str, str] = dataclasses.field(default_factory=dict)
    format: str = "json"
    seed: int = 0
    samples: int | None = None
    tol: float | None = None
    restarts: int | None = None
    max_iters: int | None = None
    max_length: int | None = None
    terms: int | None = None
    solve: bool = False
    trace: str | None = None

    def __post_init__(self):
        if self.format not in ("json", "table"):
            raise ValidationError(f"unknown output format {self.format!r}")

    def tolerances(self) -> Tolerances:
        if self.tol is None:
            return DEFAULT_TOL
        if self.tol <= 0:
            raise ValidationError(f"--tol must be positive, got {self.tol!r}")
        return Tolerances(
            herm=self.tol, trace=self.tol, norm=self.tol, psd=self.tol,
            support=0.1 * self.tol,
        )

    def solver_config(self) -> SolverConfig:
        kwargs: dict = {"seed": self.seed}
        if self.restarts is not None:
            kwargs["restarts"] = self.restarts
        if self.max_iters is not None:
            kwargs["max_iters"] = self.max_iters
        if self.max_length is not None:
            kwargs["max_length"] = self.max_length
        return SolverConfig(**kwargs)


def _load_json(raw: str, what: str):
    """Parse inline JSON or the contents of a file path."""
    text, origin = raw, "inline value"
    if not raw.lstrip().startswith(("{", "[")):
        try:
            with open(raw, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ValidationError(f"{what}: cannot read file {raw!r}: {exc}")
        origin = f"file {raw!r}"
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{what}: malformed JSON in {origin} at line {exc.lineno}, "
            f"column {exc.colno}: {exc.msg}"
        )


def _require_input(job: JobSpec, key: str) -> str:
    raw = job.inputs.get(key)
    if raw is None:
        raise ValidationError(f"command {job.command!r} requires --{key}")
    return raw


def _parse_z(raw: str) -> complex:
    try:
        return complex(float(raw))
    except ValueError:
        pass
    try:
        return complex(raw)
    except ValueError:
        pass
    value = _load_json(raw, "--z")
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValidationError(f"--z: expected a number, a complex literal, or [re, im], got {raw!r}")


def _cmd_entropy(job: JobSpec) -> dict:
    tol = job.tolerances()
    rho = density_from_json(_load_json(_require_input(job, "state"), "--state"), tol)
    return {
        "command": "entropy",
        "dim": rho.dim,
        "entropy": von_neumann_entropy(rho, tol),
        "spectrum": [float(x) for x in rho.spectrum()],
        "purity": rho.purity(),
    }


def _cmd_reduce(job: JobSpec) -> dict:
    tol = job.tolerances()
    rho = density_from_json(_load_json(_require_input(job, "state"), "--state"), tol)
    channel = channel_from_json(_load_json(_require_input(job, "channel"), "--channel"))
    bd = reduce_state(channel, rho, tol)
    report = block_density_to_json(bd)
    report["command"] = "reduce"
    report["probabilities"] = [float(p) for p in bd.probabilities()]
    report["entropy"] = block_entropy(bd, tol)
    return report


def _cmd_mutual(job: JobSpec) -> dict:
    tol = job.tolerances()
    ensemble = ensemble_from_json(_load_json(_require_input(job, "ensemble"), "--ensemble"), tol)
    channel = channel_from_json(_load_json(_require_input(job, "channel"), "--channel"))
    holevo = mutual_entropy(ensemble, channel, "holevo")
    relative = mutual_entropy(ensemble, channel, "relative")
    return {
        "command": "mutual",
        "length": len(ensemble),
        "mutual_entropy": holevo,
        "relative_form": relative,
        "form_difference": holevo - relative,
    }


def _cmd_roof(job: JobSpec) -> dict:
    tol = job.tolerances()
    rho = density_from_json(_load_json(_require_input(job, "state"), "--state"), tol)
    channel = channel_from_json(_load_json(_require_input(job, "channel"), "--channel"))
    cfg = job.solver_config()
    result = solve_R(rho, channel, cfg, tol, trace=job.trace)
    report = {"command": "roof", "result": roof_result_to_json(result)}
    samples = 10 if job.samples is None else job.samples
    cert = affinity_certificate(result, channel, samples=samples, config=cfg)
    report["affinity"] = {
        "max_discrepancy": cert.max_discrepancy,
        "samples": len(cert.discrepancies),
        "tolerance": cert.tolerance,
        "passed": cert.passed,
    }
    if result.value_H <= 1e-6:
        zero = zero_entropy_structure(rho, channel, result, tol=tol)
        report["zero_entropy"] = {
            "residuals": list(zero.residuals),
            "vector_passed": list(zero.vector_passed),
            "passed": zero.passed,
        }
    else:
        report["zero_entropy"] = None
    return report


def _cmd_qubit_oracle(job: JobSpec) -> dict:
    z = _parse_z(_require_input(job, "z"))
    report = {
        "command": "qubit-oracle",
        "z": [z.real, z.imag],
        "magnitude": abs(z),
        "value": qubit_R(z),
    }
    if job.terms is not None:
        partial = qubit_R_series(z, job.terms)
        report["series"] = {
            "terms": job.terms,
            "value": partial,
            "difference": partial - report["value"],
        }
    return report


def _cmd_block_oracle(job: JobSpec) -> dict:
    tol = job.tolerances()
    rho = density_from_json(_load_json(_require_input(job, "state"), "--state"), tol)
    psi = pure_from_json(_load_json(_require_input(job, "psi"), "--psi"), tol)
    data = block_example_analyze(rho, psi, tol)
    analysis = {
        "distinguished_weight": data.lam,
        "coupling": data.z,
        "eigenvalues": [float(x) for x in data.eigvals],
        "overlaps": [float(x) for x in data.overlaps],
        "mu_plus": None if math.isnan(data.mu_plus) else data.mu_plus,
        "mu_minus": None if math.isnan(data.mu_minus) else data.mu_minus,
    }
    report = {"command": "block-oracle", "analysis": analysis}
    decomposition = block_example_decomposition(data, rho, tol)
    report["decomposition"] = {
        "candidate": decomposition.candidate,
        "degenerate": decomposition.degenerate,
        "length": len(decomposition.ensemble),
        "ensemble": ensemble_to_json(decomposition.ensemble),
    }
    if job.solve:
        from .channels import block_compression

        result = solve_R(rho, block_compression(psi), job.solver_config(), tol)
        report["solver"] = {
            "value_R": result.value_R,
            "value_H": result.value_H,
            "candidate_minus_solver": decomposition.candidate - result.value_R,
        }
    return report


def _cmd_accinfo(job: JobSpec) -> dict:
    tol = job.tolerances()
    rho = density_from_json(_load_json(_require_input(job, "state"), "--state"), tol)
    raw = _load_json(_require_input(job, "projections"), "--projections")
    if not isinstance(raw, list) or not raw:
        raise ValidationError("--projections: expected a non-empty JSON list of matrices")
    projections = [decode_matrix(p, f"projections[{i}]") for i, p in enumerate(raw)]
    cfg = job.solver_config()
    samples = 256 if job.samples is None else job.samples
    bracket = benatti_bracket(rho, projections, cfg, measurement_samples=samples, tol=tol)
    hc = holevo_check(rho, projections, cfg, tol)
    return {
        "command": "accinfo",
        "bracket": {
            "lower": bracket.lower,
            "upper": bracket.upper,
            "gap": bracket.gap,
            "holevo_slack": bracket.holevo_slack,
            "samples": bracket.samples,
            "best_sample": bracket.best_sample,
            "closed": bracket.closed,
            "passed": bracket.passed,
        },
        "holevo": {
            "channel_entropy": hc.channel_entropy,
            "state_entropy": hc.state_entropy,
            "slack": hc.slack,
            "passed": hc.passed,
        },
    }


def _cmd_verify(job: JobSpec) -> dict:
    samples = 1 if job.samples is None else job.samples
    solver = None
    if job.restarts is not None or job.max_iters is not None or job.max_length is not None:
        solver = job.solver_config()
    report = run_verify(seed=job.seed, samples=samples, solver=solver)
    report["command"] = "verify"
    return report


_COMMANDS = {
    "entropy": _cmd_entropy,
    "reduce": _cmd_reduce,
    "mutual": _cmd_mutual,
    "roof": _cmd_roof,
    "qubit-oracle": _cmd_qubit_oracle,
    "block-oracle": _cmd_block_oracle,
    "accinfo": _cmd_accinfo,
    "verify": _cmd_verify,
}


def _flatten(prefix: str, value, rows: list):
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], rows)
    elif isinstance(value, list):
        if all(isinstance(x, (int, float, bool)) or x is None for x in value) and len(value) <= 12:
            rows.append((prefix, "[" + ", ".join(_scalar(x) for x in value) + "]"))
        else:
            rows.append((prefix, f"[{len(value)} items]"))
    else:
        rows.append((prefix, _scalar(value)))


def _scalar(value) -> str:
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(round_floats(report), sort_keys=True, indent=2)
    rows: list = []
    _flatten("", report, rows)
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def run(job: JobSpec) -> tuple[int, str]:
    """Execute a job; returns (exit status, rendered report)."""
    handler = _COMMANDS.get(job.command)
    if handler is None:
        raise ValidationError(f"unknown command {job.command!r}")
    report = handler(job)
    status = 0
    if job.command == "verify" and report["counts"]["failed"] > 0:
        status = 2
    return status, _render(report, job.format)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract reserves 2 for failed
    # verification, so route usage problems through the validation path.
    def error(self, message):
        raise ValidationError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="roofentropy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, *specs):
        p = sub.add_parser(name, help=help_text)
        for flag, kwargs in specs:
            p.add_argument(flag, **kwargs)
        p.add_argument("--format", default="json", choices=("json", "table"))
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--restarts", type=int, default=None)
        p.add_argument("--max-iters", type=int, default=None)
        p.add_argument("--max-length", type=int, default=None)
        p.add_argument("--samples", type=int, default=None)
        return p

    state = ("--state", {"help": "density matrix: JSON file or inline"})
    channel = ("--channel", {"help": "reduction channel: JSON file or inline"})
    add("entropy", "von Neumann entropy of a state", state)
    add("reduce", "push a state through a reduction channel", state, channel)
    add("mutual", "mutual entropy of an ensemble and a channel",
        ("--ensemble", {"help": "ensemble: JSON file or inline"}), channel)
    roof = add("roof", "solve the decomposition optimization for R and H", state, channel)
    roof.add_argument("--trace", default=None, help="write per-restart JSON lines here")
    add("qubit-oracle", "closed-form qubit value from the off-diagonal entry",
        ("--z", {"help": "off-diagonal entry: real, complex literal, or [re, im]"}),
        ("--terms", {"type": int, "default": None,
                     "help": "also evaluate the series with this many terms"}))
    block = add("block-oracle", "distinguished-direction analysis and explicit decomposition",
                state, ("--psi", {"help": "distinguished unit vector: JSON file or inline"}))
    block.add_argument("--solve", action="store_true",
                       help="also run the solver and report the gap")
    add("accinfo", "accessible-information bracket and entropy comparison",
        state, ("--projections", {"help": "JSON list of projection matrices"}))
    add("verify", "run the seeded invariant suite")
    return parser


def main(argv=None) -> int:
    try:
        ns = _build_parser().parse_args(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    fields = {f.name for f in dataclasses.fields(JobSpec)}
    inputs = {}
    overrides = {}
    for key, value in vars(ns).items():
        if key in ("command", "format"):
            continue
        name = key.replace("-", "_")
        if name in fields and name != "inputs":
            overrides[name] = value
        elif value is not None:
            inputs[key] = value
    try:
        job = JobSpec(command=ns.command, inputs=inputs, format=ns.format, **overrides)
        status, rendered = run(job)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(rendered)
    return status


if __name__ == "__main__":
    sys.exit(main())
