"""External formats: matrix/model/aggregate JSON and trajectory CSV.

A complex entry is encoded as a two-element array [re, im]; a matrix is a
row-major array of rows.  Numeric output is limited to 15 significant digits
so re-runs diff cleanly across platforms.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import InputFormatError
from .lindblad import LindbladModel, Trajectory
from .linalg import TensorStructure, pauli_string
from .scalability import AggregateReport, AggregateSpec
from .stability import StabilityReport
from .synthesis import SynthesisResult


def format_float(x: float) -> str:
    return f"{float(x):.15g}"


def _round_floats(obj):
    """Clamp every float in a JSON-ready structure to 15 significant digits."""
    if isinstance(obj, float):
        return float(format_float(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def dumps_report(obj: dict) -> str:
    return json.dumps(_round_floats(obj), indent=2, sort_keys=True) + "\n"


def write_text_atomic(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dissipctl-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- matrices -----------------------------------------------------------------


def matrix_to_json(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _entry_from_json(entry, field: str) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, list) and len(entry) == 2 and all(
            isinstance(x, (int, float)) for x in entry):
        return complex(entry[0], entry[1])
    raise InputFormatError(field, f"complex entry must be [re, im], got {entry!r}")


def matrix_from_json(obj, field: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise InputFormatError(field, "matrix must be a non-empty array of rows")
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != len(obj):
            raise InputFormatError(field, f"row {i} does not make the matrix square")
        rows.append([_entry_from_json(e, f"{field}[{i}]") for e in row])
    return np.array(rows, dtype=complex)


# -- models -------------------------------------------------------------------


def model_to_json(model: LindbladModel) -> dict:
    return {
        "dims": list(model.structure.dims),
        "H": matrix_to_json(model.hamiltonian),
        "L": [matrix_to_json(l) for l in model.couplings],
    }


def _dims_from_json(obj, field: str) -> TensorStructure:
    dims = obj.get("dims")
    if not isinstance(dims, list) or not dims or not all(
            isinstance(d, int) and d > 0 for d in dims):
        raise InputFormatError(f"{field}.dims", "dims must be a list of positive integers")
    return TensorStructure(tuple(dims))


def model_from_json(obj: dict, field: str = "model") -> LindbladModel:
    if not isinstance(obj, dict):
        raise InputFormatError(field, "model must be a JSON object")
    structure = _dims_from_json(obj, field)
    if "H" not in obj:
        raise InputFormatError(f"{field}.H", "missing Hamiltonian")
    h = matrix_from_json(obj["H"], f"{field}.H")
    couplings_obj = obj.get("L", [])
    if not isinstance(couplings_obj, list):
        raise InputFormatError(f"{field}.L", "couplings must be an array of matrices")
    couplings = [matrix_from_json(l, f"{field}.L[{i}]") for i, l in enumerate(couplings_obj)]
    return LindbladModel(structure, h, couplings)


# -- aggregates ---------------------------------------------------------------


def _term_from_json(obj, structure: TensorStructure, field: str) -> np.ndarray:
    if isinstance(obj, dict):
        if "pauli" not in obj:
            raise InputFormatError(field, "operator object needs a 'pauli' key")
        op = pauli_string(str(obj["pauli"]), structure)
        coeff = _entry_from_json(obj.get("coeff", 1.0), f"{field}.coeff")
        offset = _entry_from_json(obj.get("offset", 0.0), f"{field}.offset")
        eye = np.eye(structure.total_dim, dtype=complex)
        return coeff * op + offset * eye
    return matrix_from_json(obj, field)


def aggregate_to_json(spec: AggregateSpec) -> dict:
    out = {
        "dims": list(spec.structure.dims),
        "terms": [matrix_to_json(t) for t in spec.terms],
        "couplings": [matrix_to_json(l) for l in spec.couplings],
    }
    if spec.assignment is not None:
        out["assignment"] = spec.assignment
    if spec.hamiltonian is not None:
        out["H"] = matrix_to_json(spec.hamiltonian)
    if spec.term_names is not None:
        out["names"] = list(spec.term_names)
    return out


def aggregate_from_json(obj: dict, field: str = "spec") -> AggregateSpec:
    if not isinstance(obj, dict):
        raise InputFormatError(field, "aggregate spec must be a JSON object")
    structure = _dims_from_json(obj, field)
    terms_obj = obj.get("terms")
    if not isinstance(terms_obj, list) or not terms_obj:
        raise InputFormatError(f"{field}.terms", "need a non-empty array of terms")
    terms = [_term_from_json(t, structure, f"{field}.terms[{i}]")
             for i, t in enumerate(terms_obj)]
    couplings_obj = obj.get("couplings", [])
    couplings = [_term_from_json(l, structure, f"{field}.couplings[{i}]")
                 for i, l in enumerate(couplings_obj)]
    assignment = obj.get("assignment")
    hamiltonian = None
    if "H" in obj:
        hamiltonian = matrix_from_json(obj["H"], f"{field}.H")
    names = obj.get("names")
    return AggregateSpec(structure=structure, terms=terms, couplings=couplings,
                         assignment=assignment, hamiltonian=hamiltonian,
                         term_names=names)


def unitaries_from_json(obj: dict, field: str = "spec") -> list[np.ndarray] | None:
    if "unitaries" not in obj:
        return None
    return [matrix_from_json(u, f"{field}.unitaries[{i}]")
            for i, u in enumerate(obj["unitaries"])]


# -- reports ------------------------------------------------------------------


def stability_report_to_dict(report: StabilityReport) -> dict:
    return {
        "is_lyapunov": report.is_lyapunov,
        "c_es": report.c_es,
        "c_ds": report.c_ds,
        "d": report.d,
        "margins": dict(report.margins),
        "diagnostics": dict(report.diagnostics),
        "convergence": report.convergence,
        "simulation": report.simulation,
    }


def synthesis_result_to_dict(result: SynthesisResult) -> dict:
    return {
        "U": matrix_to_json(result.unitary),
        "L": matrix_to_json(result.coupling),
        "c": result.c,
        "residuals": dict(result.residuals),
    }


def aggregate_report_to_dict(report: AggregateReport) -> dict:
    return {
        "mode": report.mode,
        "overall": report.overall,
        "d": report.d_total,
        "per_term": report.per_term,
        "notes": list(report.notes),
        "d_ladder": report.d_ladder,
        "cross_norm": report.cross_norm,
    }


def trajectory_to_csv(traj: Trajectory) -> str:
    names = list(traj.observables)
    header = ",".join(["t"] + names + ["trace", "purity"])
    traces = traj.traces()
    purities = traj.purities()
    lines = [header]
    for i, t in enumerate(traj.times):
        row = [format_float(t)]
        row += [format_float(traj.observables[name][i]) for name in names]
        row.append(format_float(traces[i]))
        row.append(format_float(purities[i]))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
