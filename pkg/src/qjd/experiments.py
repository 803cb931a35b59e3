"""Experiment harness: scenario configs, method labels, trace output.

Method labels follow the suffix convention used throughout the outputs:
no suffix means the full-Hamiltonian (shifted-inverse) preconditioner, ``_D``
the diagonal preconditioner, ``_residue`` the bare residual expansion, and an
``SB`` prefix applies the sample-based reference refinement before the first
iteration.  ``SBQD`` is the one documented exception: it combines the
refinement with the residue-driven baseline, the only baseline variant with a
precise definition (the full-inverse baseline stagnates identically under an
exact inverse and is kept only for completeness).
"""

from __future__ import annotations

import concurrent.futures
import json
import os
import re
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .errors import QjdError, ValidationError
from .hamiltonians import (
    DdMatrixSpec,
    IsingSpec,
    build_dd_matrix,
    build_ising,
    diagonal_of,
    load_pauli_hamiltonian,
    n_qubits_of,
    save_pauli_hamiltonian,
    write_dense_matrix,
)
from .solvers import (
    ConvergenceTrace,
    PreconditionerKind,
    SolverConfig,
    SpectralCache,
    SqdiagFirstIteration,
    convergence_rate,
    run_solver,
)
from .states import (
    DEFAULT_SIGMA,
    GaussianRefSpec,
    basis_state,
    gaussian_reference,
    hf_spread_reference,
)

TRACE_COLUMNS = (
    "iter",
    "ritz_value",
    "energy_error",
    "residual_norm",
    "subspace_dim",
    "cumulative_pauli_terms",
    "rejected",
)

COMBINED_COLUMNS = ("method",) + TRACE_COLUMNS + ("convergence_rate",)

SUMMARY_COLUMNS = (
    "method",
    "status",
    "iterations_to_convergence",
    "final_energy",
    "final_energy_error",
    "cumulative_pauli_terms",
)

WATER_FILE_MESSAGE = (
    "the water scenario needs a user-supplied 10-qubit Pauli-sum data file; "
    "pass --pauli-file (or set pauli_file.path). See README 'Water Hamiltonian' "
    "for the external generation recipe."
)


@dataclass(frozen=True)
class PauliFileSpec:
    path: str | None = None


@dataclass(frozen=True)
class ReferenceSpec:
    """Config-level reference description, resolved against the Hamiltonian.

    ``centers`` may contain the literal "min-diag", replaced by the index of
    the smallest diagonal entry; the resolved value is echoed in the manifest.
    """

    kind: str = "gaussian"
    centers: tuple = ("min-diag",)
    sigma: float = DEFAULT_SIGMA
    bitstring: str | None = None
    spread_fraction: float = 0.1
    index: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    hamiltonian: DdMatrixSpec | IsingSpec | PauliFileSpec
    reference: ReferenceSpec
    method_labels: tuple[str, ...]
    oracle: bool = True
    max_iterations: int = 300
    residual_tol: float | None = None
    energy_tol: float | None = 1e-10
    delta: float = 1e-8
    reject_tol: float = 1e-8
    use_quantum_kernels: bool = False
    count_pauli_terms: bool = True
    sqdiag_n: int = 3
    sqdiag_mode: str = "exact"
    sqdiag_shots: int | None = None
    sqdiag_seed: int | None = None

    def __post_init__(self):
        if len(set(self.method_labels)) != len(self.method_labels):
            raise ValidationError("method labels must be unique")
        for label in self.method_labels:
            parse_method_label(label)


_LABEL_RE = re.compile(r"^(SB)?(JD|QJD|QD)(_D|_residue)?$")


def parse_method_label(label: str) -> tuple[str, PreconditionerKind, bool]:
    """(method, preconditioner, sample_based) for a display label."""
    m = _LABEL_RE.match(label)
    if not m:
        raise ValidationError(f"unknown method label {label!r}")
    sb, base, suffix = m.group(1) is not None, m.group(2), m.group(3)
    method = base.lower()
    if suffix == "_residue":
        if base != "QD":
            raise ValidationError(f"{label!r}: residue expansion only exists for QD")
        kind = PreconditionerKind.RESIDUE_IDENTITY
    elif suffix == "_D":
        kind = PreconditionerKind.DIAGONAL_SHIFTED_INVERSE
    else:
        kind = PreconditionerKind.FULL_SHIFTED_INVERSE
        if label in ("SBQD",):
            # documented exception: the sample-based baseline pairs the
            # refinement with the residue-driven variant (see module docstring)
            kind = PreconditionerKind.RESIDUE_IDENTITY
    return method, kind, sb


def solver_config_for_label(label: str, cfg: ExperimentConfig) -> SolverConfig:
    method, kind, sample_based = parse_method_label(label)
    sq = None
    if sample_based:
        sq = SqdiagFirstIteration(
            n=cfg.sqdiag_n,
            mode=cfg.sqdiag_mode,
            shots=cfg.sqdiag_shots,
            seed=cfg.sqdiag_seed,
        )
    return SolverConfig(
        method=method,
        preconditioner=kind,
        use_quantum_kernels=cfg.use_quantum_kernels and method != "jd",
        sqdiag_first_iteration=sq,
        max_iterations=cfg.max_iterations,
        residual_tol=cfg.residual_tol,
        energy_tol=cfg.energy_tol,
        delta=cfg.delta,
        reject_tol=cfg.reject_tol,
        count_pauli_terms=cfg.count_pauli_terms,
    )


def build_hamiltonian(cfg: ExperimentConfig):
    spec = cfg.hamiltonian
    if isinstance(spec, DdMatrixSpec):
        return build_dd_matrix(spec)
    if isinstance(spec, IsingSpec):
        return build_ising(spec)
    if isinstance(spec, PauliFileSpec):
        if not spec.path:
            raise ValidationError(WATER_FILE_MESSAGE)
        if not os.path.exists(spec.path):
            raise ValidationError(f"data file required: {spec.path} not found. " + WATER_FILE_MESSAGE)
        return load_pauli_hamiltonian(spec.path)
    raise ValidationError(f"unknown hamiltonian spec {type(spec).__name__}")


def resolve_reference(spec: ReferenceSpec, h) -> tuple[np.ndarray, dict]:
    """Statevector plus the fully resolved echo recorded in the manifest."""
    n = n_qubits_of(h)
    if spec.kind == "gaussian":
        centers = []
        for c in spec.centers:
            if c == "min-diag":
                centers.append(int(np.argmin(diagonal_of(h))))
            else:
                centers.append(int(c))
        gspec = GaussianRefSpec(n_qubits=n, centers=tuple(centers), sigma=spec.sigma)
        return gaussian_reference(gspec), {
            "kind": "gaussian",
            "centers": centers,
            "sigma": spec.sigma,
        }
    if spec.kind == "hf_spread":
        if spec.bitstring is None:
            raise ValidationError("hf_spread reference needs a bitstring")
        return hf_spread_reference(spec.bitstring, spec.spread_fraction), {
            "kind": "hf_spread",
            "bitstring": spec.bitstring,
            "spread_fraction": spec.spread_fraction,
        }
    if spec.kind == "basis":
        return basis_state(spec.index, n), {"kind": "basis", "index": spec.index}
    raise ValidationError(f"unknown reference kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# output writers


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr even for numpy scalars
    return str(value)


def write_trace_csv(path, trace: ConvergenceTrace) -> None:
    lines = [",".join(TRACE_COLUMNS)]
    for rec in trace.records:
        lines.append(",".join(_fmt(v) for v in (
            rec.iteration,
            rec.ritz_value,
            rec.energy_error,
            rec.residual_norm,
            rec.subspace_dim,
            rec.cumulative_pauli_terms,
            rec.rejected,
        )))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _spec_dict(spec) -> dict:
    d = asdict(spec)
    d["type"] = type(spec).__name__
    return d


def _json_dump(path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class MethodResult:
    label: str
    status: str
    trace: ConvergenceTrace | None
    final_energy: float | None
    final_energy_error: float | None
    error_message: str | None = None

    @property
    def iterations_to_convergence(self) -> int | None:
        return self.trace.iterations_to_convergence if self.trace else None


def _run_one(label, h, reference, cfg, oracle, spectral) -> MethodResult:
    solver_cfg = solver_config_for_label(label, cfg)
    try:
        pair, trace = run_solver(h, reference, solver_cfg, oracle, spectral)
    except QjdError as exc:
        return MethodResult(label, "error", None, None, None, str(exc))
    err = abs(pair.value - oracle[0]) if oracle is not None else None
    return MethodResult(label, trace.status, trace, pair.value, err)


def run_experiment(cfg: ExperimentConfig, out_dir,
                   methods: tuple[str, ...] | None = None) -> list[MethodResult]:
    """Run every configured method on one Hamiltonian instance and write the
    per-method traces plus the combined report files."""
    labels = tuple(methods) if methods else cfg.method_labels
    for label in labels:
        if label not in cfg.method_labels:
            raise ValidationError(f"method {label!r} is not part of scenario {cfg.name!r}")
    h = build_hamiltonian(cfg)
    reference, reference_echo = resolve_reference(cfg.reference, h)

    needs_spectral = cfg.oracle or any(
        parse_method_label(l)[1] is PreconditionerKind.FULL_SHIFTED_INVERSE
        for l in labels
    )
    spectral = SpectralCache(h) if needs_spectral else None
    oracle = spectral.ground_pair() if cfg.oracle else None

    os.makedirs(out_dir, exist_ok=True)
    workers = max(1, int(os.environ.get("QJD_NUM_THREADS", "1")))
    if workers > 1 and len(labels) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                label: pool.submit(_run_one, label, h, reference, cfg, oracle, spectral)
                for label in labels
            }
            results = [futures[label].result() for label in labels]
    else:
        results = [_run_one(label, h, reference, cfg, oracle, spectral) for label in labels]

    for res in results:
        method_dir = os.path.join(out_dir, res.label)
        os.makedirs(method_dir, exist_ok=True)
        if res.trace is not None:
            write_trace_csv(os.path.join(method_dir, "trace.csv"), res.trace)
        _json_dump(os.path.join(method_dir, "summary.json"), _summary_payload(res, cfg, oracle))

    _write_combined_csv(os.path.join(out_dir, "combined.csv"), results, oracle)
    _write_summary_csv(os.path.join(out_dir, "summary.csv"), results)
    _json_dump(os.path.join(out_dir, "manifest.json"),
               _manifest_payload(cfg, labels, reference_echo, oracle))
    return results


def _summary_payload(res: MethodResult, cfg: ExperimentConfig, oracle) -> dict:
    solver_cfg = solver_config_for_label(res.label, cfg)
    payload = {
        "method": res.label,
        "status": res.status,
        "iterations_to_convergence": res.iterations_to_convergence,
        "final_energy": res.final_energy,
        "final_energy_error": res.final_energy_error,
        "error_message": res.error_message,
        "config": {
            "method": solver_cfg.method,
            "preconditioner": solver_cfg.preconditioner.value,
            "use_quantum_kernels": solver_cfg.use_quantum_kernels,
            "max_iterations": solver_cfg.max_iterations,
            "residual_tol": solver_cfg.residual_tol,
            "energy_tol": solver_cfg.energy_tol,
            "delta": solver_cfg.delta,
            "reject_tol": solver_cfg.reject_tol,
            "count_pauli_terms": solver_cfg.count_pauli_terms,
            "sqdiag_first_iteration": (
                asdict(solver_cfg.sqdiag_first_iteration)
                if solver_cfg.sqdiag_first_iteration
                else None
            ),
        },
    }
    if res.trace is not None:
        payload["sqdiag_event"] = res.trace.sqdiag_event
        payload["accounting_rule"] = res.trace.accounting_rule
        payload["epsilon_fallback_iterations"] = [
            rec.iteration for rec in res.trace.records if rec.epsilon_fallback
        ]
    if oracle is not None:
        payload["oracle_energy"] = oracle[0]
    return payload


def _write_combined_csv(path, results: list[MethodResult], oracle) -> None:
    lines = [",".join(COMBINED_COLUMNS)]
    for res in results:
        if res.trace is None:
            continue
        rates: dict[int, float] = {}
        if oracle is not None and len(res.trace.records) >= 2:
            rate_values = convergence_rate(res.trace, oracle[0])
            rates = {
                rec.iteration: rate
                for rec, rate in zip(res.trace.records[1:], rate_values)
            }
        for rec in res.trace.records:
            lines.append(",".join(_fmt(v) for v in (
                res.label,
                rec.iteration,
                rec.ritz_value,
                rec.energy_error,
                rec.residual_norm,
                rec.subspace_dim,
                rec.cumulative_pauli_terms,
                rec.rejected,
                rates.get(rec.iteration),
            )))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_summary_csv(path, results: list[MethodResult]) -> None:
    lines = [",".join(SUMMARY_COLUMNS)]
    for res in results:
        cum = res.trace.records[-1].cumulative_pauli_terms if res.trace and res.trace.records else None
        lines.append(",".join(_fmt(v) for v in (
            res.label,
            res.status,
            res.iterations_to_convergence,
            res.final_energy,
            res.final_energy_error,
            cum,
        )))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _manifest_payload(cfg: ExperimentConfig, labels, reference_echo, oracle) -> dict:
    from .solvers import ACCOUNTING_RULE

    return {
        "package_version": __version__,
        "scenario": cfg.name,
        "hamiltonian": _spec_dict(cfg.hamiltonian),
        "reference": reference_echo,
        "methods": list(labels),
        "solver": {
            "max_iterations": cfg.max_iterations,
            "residual_tol": cfg.residual_tol,
            "energy_tol": cfg.energy_tol,
            "delta": cfg.delta,
            "reject_tol": cfg.reject_tol,
            "use_quantum_kernels": cfg.use_quantum_kernels,
            "count_pauli_terms": cfg.count_pauli_terms,
        },
        "sqdiag": {
            "n": cfg.sqdiag_n,
            "mode": cfg.sqdiag_mode,
            "shots": cfg.sqdiag_shots,
            "seed": cfg.sqdiag_seed,
        },
        "accounting_rule": ACCOUNTING_RULE if cfg.count_pauli_terms else "disabled",
        "oracle": cfg.oracle,
        "oracle_energy": oracle[0] if oracle is not None else None,
    }


def generate_files(cfg: ExperimentConfig, out_dir) -> list[str]:
    """Materialize the Hamiltonian (dense binary or Pauli text) plus manifest."""
    os.makedirs(out_dir, exist_ok=True)
    h = build_hamiltonian(cfg)
    written = []
    if isinstance(cfg.hamiltonian, DdMatrixSpec):
        path = os.path.join(out_dir, "hamiltonian.qjdm")
        write_dense_matrix(h, path)
        written.append(path)
    elif isinstance(cfg.hamiltonian, IsingSpec):
        path = os.path.join(out_dir, "hamiltonian.pauli")
        save_pauli_hamiltonian(h, path)
        written.append(path)
    else:
        raise ValidationError("generate supports dd and ising hamiltonians")
    manifest = os.path.join(out_dir, "manifest.json")
    _json_dump(manifest, {
        "package_version": __version__,
        "scenario": cfg.name,
        "hamiltonian": _spec_dict(cfg.hamiltonian),
        "files": [os.path.basename(p) for p in written],
    })
    written.append(manifest)
    return written


# ---------------------------------------------------------------------------
# scenario registry (the pinned desk-scale reproduction suite)

DD_METHODS = ("QJD", "QJD_D", "SBQJD", "SBQJD_D", "QD", "QD_residue")
ISING_METHODS = DD_METHODS + ("SBQD",)


def _dd_scenario(name, ns, positions, centers) -> ExperimentConfig:
    return ExperimentConfig(
        name=name,
        hamiltonian=DdMatrixSpec(n_qubits=8, ns=ns, minima_positions=positions),
        reference=ReferenceSpec(kind="gaussian", centers=centers),
        method_labels=DD_METHODS,
    )


def _ising_scenario(name, g) -> ExperimentConfig:
    return ExperimentConfig(
        name=name,
        hamiltonian=IsingSpec(n_sites=12, J=1.1, h=0.9, g=g),
        reference=ReferenceSpec(kind="gaussian", centers=("min-diag",)),
        method_labels=ISING_METHODS,
    )


def _water_scenario(path: str | None) -> ExperimentConfig:
    return ExperimentConfig(
        name="water",
        hamiltonian=PauliFileSpec(path),
        reference=ReferenceSpec(
            kind="hf_spread", bitstring="0011110011", spread_fraction=0.1
        ),
        method_labels=ISING_METHODS,
    )


def scenario_config(name: str, pauli_file: str | None = None) -> ExperimentConfig:
    scenarios = {
        "dd-fig2a": lambda: _dd_scenario("dd-fig2a", 1, (1,), (0,)),
        "dd-fig2b": lambda: _dd_scenario("dd-fig2b", 2, (1, 256), (0,)),
        "dd-fig2c": lambda: _dd_scenario("dd-fig2c", 3, (1, 128, 256), (0,)),
        "dd-fig2d": lambda: _dd_scenario("dd-fig2d", 2, (1, 256), (0, 255)),
        "dd-fig2e": lambda: _dd_scenario("dd-fig2e", 3, (1, 128, 256), (0, 127, 255)),
        "dd-fig2f": lambda: _dd_scenario("dd-fig2f", 4, (1, 85, 170, 256), (0, 84, 169, 255)),
        "ising-dd": lambda: _ising_scenario("ising-dd", 0.01),
        "ising-nondd": lambda: _ising_scenario("ising-nondd", 1.0),
        "water": lambda: _water_scenario(pauli_file),
    }
    if name not in scenarios:
        raise ValidationError(
            f"unknown scenario {name!r}; choose from {sorted(scenarios)}"
        )
    return scenarios[name]()


SCENARIO_NAMES = (
    "dd-fig2a", "dd-fig2b", "dd-fig2c", "dd-fig2d", "dd-fig2e", "dd-fig2f",
    "ising-dd", "ising-nondd", "water",
)


# ---------------------------------------------------------------------------
# flat config files with dotted keys


def parse_config_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _get(values, key, default=None, convert=str):
    if key not in values:
        return default
    raw = values[key]
    if raw.lower() in ("none", ""):
        return None
    if convert is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValidationError(f"config key {key}: expected a boolean, got {raw!r}")
    return convert(raw)


def _get_list(values, key, default=()):
    if key not in values:
        return tuple(default)
    return tuple(item.strip() for item in values[key].split(",") if item.strip())


def config_from_file(path, name: str | None = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    kind = _get(values, "hamiltonian.kind")
    if kind == "dd":
        positions = tuple(int(p) for p in _get_list(values, "dd.minima_positions", ("1",)))
        hamiltonian = DdMatrixSpec(
            n_qubits=_get(values, "dd.n_qubits", 8, int),
            ns=_get(values, "dd.ns", len(positions), int),
            minima_positions=positions,
            off_diag_scale=_get(values, "dd.off_diag_scale", 1.0 / 256.0, float),
            seed=_get(values, "dd.seed", 20240101, int),
        )
    elif kind == "ising":
        hamiltonian = IsingSpec(
            n_sites=_get(values, "ising.n_sites", 12, int),
            J=_get(values, "ising.J", 1.1, float),
            h=_get(values, "ising.h", 0.9, float),
            g=_get(values, "ising.g", 0.01, float),
        )
    elif kind == "pauli-file":
        hamiltonian = PauliFileSpec(path=_get(values, "pauli_file.path"))
    else:
        raise ValidationError(f"hamiltonian.kind must be dd|ising|pauli-file, got {kind!r}")

    centers = tuple(
        c if c == "min-diag" else int(c)
        for c in _get_list(values, "reference.centers", ("min-diag",))
    )
    reference = ReferenceSpec(
        kind=_get(values, "reference.kind", "gaussian"),
        centers=centers,
        sigma=_get(values, "reference.sigma", DEFAULT_SIGMA, float),
        bitstring=_get(values, "reference.bitstring"),
        spread_fraction=_get(values, "reference.spread_fraction", 0.1, float),
        index=_get(values, "reference.index", 0, int),
    )
    return ExperimentConfig(
        name=name or _get(values, "scenario", os.path.basename(str(path))),
        hamiltonian=hamiltonian,
        reference=reference,
        method_labels=_get_list(values, "methods", DD_METHODS),
        oracle=_get(values, "oracle", True, bool),
        max_iterations=_get(values, "solver.max_iterations", 300, int),
        residual_tol=_get(values, "solver.residual_tol", None, float),
        energy_tol=_get(values, "solver.energy_tol", 1e-10, float),
        delta=_get(values, "solver.delta", 1e-8, float),
        reject_tol=_get(values, "solver.reject_tol", 1e-8, float),
        use_quantum_kernels=_get(values, "solver.use_quantum_kernels", False, bool),
        count_pauli_terms=_get(values, "solver.count_pauli_terms", True, bool),
        sqdiag_n=_get(values, "sqdiag.n", 3, int),
        sqdiag_mode=_get(values, "sqdiag.mode", "exact"),
        sqdiag_shots=_get(values, "sqdiag.shots", None, int),
        sqdiag_seed=_get(values, "sqdiag.seed", None, int),
    )


def apply_overrides(cfg: ExperimentConfig, seed=None, sigma=None, delta=None,
                    max_iter=None, shots=None) -> ExperimentConfig:
    """CLI flag overrides; --shots switches the refinement to sampling mode."""
    if seed is not None:
        if isinstance(cfg.hamiltonian, DdMatrixSpec):
            cfg = replace(cfg, hamiltonian=replace(cfg.hamiltonian, seed=seed))
        cfg = replace(cfg, sqdiag_seed=seed)
    if sigma is not None:
        cfg = replace(cfg, reference=replace(cfg.reference, sigma=sigma))
    if delta is not None:
        cfg = replace(cfg, delta=delta)
    if max_iter is not None:
        cfg = replace(cfg, max_iterations=max_iter)
    if shots is not None:
        cfg = replace(cfg, sqdiag_mode="shots", sqdiag_shots=shots)
    return cfg
