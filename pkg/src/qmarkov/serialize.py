"""JSON encoding and decoding for operators, graphs, families, and reports.

Decoders take plain parsed JSON and raise BadParameter naming the offending
field, so the CLI can turn any of these into an input-error exit without
guessing.  Encoders emit only JSON-native values; floats go through Python's
shortest-repr formatting, which round-trips bit for bit.
"""

from __future__ import annotations

import json
import math
from typing import Any, Mapping

from .core import DensityOperator, Operator, SystemLayout
from .errors import BadParameter
from .graph import ChordalStructure, Graph
from .info import InfoReport
from .markov import MarginalFamily, MarkovCompatibility, TraceCriterionReport
from .maxent import MaxentResult
from .modular import IntersectionReport, PetzEqualityReport
from .pauli import BasicQubitClosedForms


def dumps(data: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed layout, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_file(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise BadParameter(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadParameter(f"{path}: malformed JSON ({exc})") from exc


def _get(data: Any, field: str, path: str) -> Any:
    if not isinstance(data, Mapping):
        raise BadParameter(f"{path}: expected an object")
    if field not in data:
        raise BadParameter(f"{path}.{field}: missing")
    return data[field]


def _as_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise BadParameter(f"{path}: expected a list")
    return value


def _as_number(value: Any, path: str) -> float:
    # bool is an int subclass; a bare true/false here is a schema error.
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise BadParameter(f"{path}: expected a number")
    return float(value)


def _as_label(value: Any, path: str) -> str:
    if not isinstance(value, str) or not value:
        raise BadParameter(f"{path}: expected a nonempty string")
    return value


# ---------------------------------------------------------------------------
# layouts and operators

def layout_to_json(layout: SystemLayout) -> dict:
    return {"sites": [{"label": lab, "dim": dim} for lab, dim in layout.sites]}


def layout_from_json(data: Any, path: str = "layout") -> SystemLayout:
    sites = []
    for i, entry in enumerate(_as_list(_get(data, "sites", path), f"{path}.sites")):
        here = f"{path}.sites[{i}]"
        label = _as_label(_get(entry, "label", here), f"{here}.label")
        dim = _get(entry, "dim", here)
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 2:
            raise BadParameter(f"{here}.dim: expected an integer >= 2")
        sites.append((label, dim))
    labels = [lab for lab, _ in sites]
    if len(set(labels)) != len(labels):
        raise BadParameter(f"{path}.sites: duplicate labels")
    if labels != sorted(labels):
        raise BadParameter(f"{path}.sites: labels must be listed in ascending order")
    return SystemLayout(tuple(sites))


def matrix_to_json(matrix) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


def _matrix_from_json(data: Any, dim: int, path: str):
    rows = _as_list(data, path)
    if len(rows) != dim:
        raise BadParameter(f"{path}: expected {dim} rows, got {len(rows)}")
    out = []
    for i, row in enumerate(rows):
        cells = _as_list(row, f"{path}[{i}]")
        if len(cells) != dim:
            raise BadParameter(f"{path}[{i}]: expected {dim} entries, got {len(cells)}")
        out_row = []
        for j, cell in enumerate(cells):
            pair = _as_list(cell, f"{path}[{i}][{j}]")
            if len(pair) != 2:
                raise BadParameter(f"{path}[{i}][{j}]: expected [re, im]")
            out_row.append(complex(_as_number(pair[0], f"{path}[{i}][{j}][0]"),
                                   _as_number(pair[1], f"{path}[{i}][{j}][1]")))
        out.append(out_row)
    return out


def operator_to_json(op: Operator) -> dict:
    return {"support": list(op.support), "matrix": matrix_to_json(op.matrix)}


def operator_from_json(data: Any, layout: SystemLayout,
                       path: str = "operator") -> Operator:
    raw = _as_list(_get(data, "support", path), f"{path}.support")
    labels = [_as_label(lab, f"{path}.support[{i}]") for i, lab in enumerate(raw)]
    if len(set(labels)) != len(labels):
        raise BadParameter(f"{path}.support: duplicate labels")
    known = set(layout.labels)
    for i, lab in enumerate(labels):
        if lab not in known:
            raise BadParameter(f"{path}.support[{i}]: label {lab!r} not in layout")
    # The matrix is indexed with the first listed site most significant;
    # the Operator constructor permutes to canonical order.
    sites = tuple((lab, layout.dim_of(lab)) for lab in labels)
    dim = math.prod(d for _, d in sites) if sites else 1
    matrix = _matrix_from_json(_get(data, "matrix", path), dim, f"{path}.matrix")
    return Operator(sites, matrix)


def state_to_json(rho: DensityOperator) -> dict:
    return {"layout": layout_to_json(SystemLayout(rho.sites)),
            "operator": operator_to_json(rho.op)}


def state_from_json(data: Any, path: str = "state") -> DensityOperator:
    layout = layout_from_json(_get(data, "layout", path), f"{path}.layout")
    op = operator_from_json(_get(data, "operator", path), layout, f"{path}.operator")
    if op.support != layout.labels:
        raise BadParameter(
            f"{path}.operator.support: a state must cover the whole layout"
        )
    return DensityOperator.certify(op)


# ---------------------------------------------------------------------------
# graphs

def graph_to_json(g: Graph) -> dict:
    return {"vertices": list(g.vertices), "edges": [list(e) for e in g.edges]}


def graph_from_json(data: Any, path: str = "graph") -> Graph:
    raw = _as_list(_get(data, "vertices", path), f"{path}.vertices")
    vertices = [_as_label(v, f"{path}.vertices[{i}]") for i, v in enumerate(raw)]
    if len(set(vertices)) != len(vertices):
        raise BadParameter(f"{path}.vertices: duplicate labels")
    known = set(vertices)
    edges = []
    for i, pair in enumerate(_as_list(_get(data, "edges", path), f"{path}.edges")):
        here = f"{path}.edges[{i}]"
        ends = _as_list(pair, here)
        if len(ends) != 2:
            raise BadParameter(f"{here}: expected a two-vertex pair")
        u = _as_label(ends[0], f"{here}[0]")
        v = _as_label(ends[1], f"{here}[1]")
        if u not in known or v not in known:
            raise BadParameter(f"{here}: endpoint not in vertices")
        if u == v:
            raise BadParameter(f"{here}: self-loop {u!r}")
        edges.append((u, v))
    return Graph(tuple(vertices), tuple(edges))


def structure_to_json(structure: ChordalStructure) -> dict:
    return {
        "cliques": [list(c) for c in structure.cliques],
        "jt_edges": [list(e) for e in structure.forest_edges],
        "separators": [
            {"subset": list(sep), "multiplicity": mult}
            for sep, mult in sorted(structure.separators.items())
        ],
        "peo": list(structure.peo),
    }


# ---------------------------------------------------------------------------
# marginal families

def family_to_json(family: MarginalFamily) -> dict:
    return {
        "layout": layout_to_json(family.layout),
        "entries": [
            {"subset": list(key), "operator": operator_to_json(family.entries[key].op)}
            for key in family.subsets
        ],
    }


def family_from_json(data: Any, path: str = "family") -> MarginalFamily:
    layout = layout_from_json(_get(data, "layout", path), f"{path}.layout")
    entries: dict[tuple[str, ...], DensityOperator] = {}
    raw = _as_list(_get(data, "entries", path), f"{path}.entries")
    if not raw:
        raise BadParameter(f"{path}.entries: at least one entry required")
    for i, entry in enumerate(raw):
        here = f"{path}.entries[{i}]"
        subset_raw = _as_list(_get(entry, "subset", here), f"{here}.subset")
        subset = tuple(sorted(
            _as_label(lab, f"{here}.subset[{j}]") for j, lab in enumerate(subset_raw)
        ))
        if subset in entries:
            raise BadParameter(f"{here}.subset: duplicate subset {list(subset)}")
        op = operator_from_json(_get(entry, "operator", here), layout,
                                f"{here}.operator")
        if op.support != subset:
            raise BadParameter(
                f"{here}.operator.support: does not match subset {list(subset)}"
            )
        entries[subset] = DensityOperator.certify(op)
    return MarginalFamily.build(layout, entries)


def consistency_to_json(family: MarginalFamily, tol: float) -> dict:
    """Overlap residual map, the output of the `check` verb."""
    return {
        "consistent": family.consistent(tol),
        "max_residual": family.max_residual,
        "tolerance": tol,
        "pairs": [
            {"first": list(ka), "second": list(kb),
             "residual": family.consistency[(ka, kb)]}
            for ka, kb in sorted(family.consistency)
        ],
    }


# ---------------------------------------------------------------------------
# reports

def info_report_to_json(report: InfoReport) -> dict:
    return {
        "value": report.value,
        "components": dict(sorted(report.components.items())),
        "tolerance": report.tolerance,
        "holds": report.holds(),
    }


def trace_report_to_json(report: TraceCriterionReport) -> dict:
    out: dict[str, Any] = {
        "verdict": report.verdict,
        "candidate_trace": report.candidate_trace,
        "defect": report.defect,
        "candidate": operator_to_json(report.candidate),
    }
    if report.marginal_residuals is None:
        out["marginal_residuals"] = None
    else:
        out["marginal_residuals"] = [
            {"subset": list(key), "residual": val}
            for key, val in sorted(report.marginal_residuals.items())
        ]
    out["entropy_residual"] = report.entropy_residual
    return out


def compatibility_to_json(comp: MarkovCompatibility) -> dict:
    return {
        "compatible": comp.compatible,
        "normality_defect": comp.normality_defect,
        "state": None if comp.state is None else operator_to_json(comp.state.op),
    }


def maxent_result_to_json(result: MaxentResult) -> dict:
    return {
        "converged": result.converged,
        "iterations": result.iterations,
        "marginal_residual": result.marginal_residual,
        "state": operator_to_json(result.rho_hat.op),
        "dual": {
            "lam": result.dual.lam,
            "terms": [
                {"subset": list(key), "operator": operator_to_json(term)}
                for key, term in sorted(result.dual.terms.items())
            ],
        },
    }


def petz_report_to_json(report: PetzEqualityReport) -> dict:
    return {
        "divergence_full": report.divergence_full,
        "divergence_reduced": report.divergence_reduced,
        "gap": report.gap,
        "recovery_residual": report.recovery_residual,
        "equal_divergences": report.equal_divergences,
        "recovery_holds": report.recovery_holds,
        "agree": report.agree,
    }


def intersection_report_to_json(report: IntersectionReport) -> dict:
    return {
        "premise_ab_given_cd": info_report_to_json(report.premise_ab_given_cd),
        "premise_ad_given_bc": info_report_to_json(report.premise_ad_given_bc),
        "conclusion_a_bd_given_c": info_report_to_json(report.conclusion_a_bd_given_c),
        "premises_hold": report.premises_hold,
        "conclusion_holds": report.conclusion_holds,
    }


def closed_forms_to_json(forms: BasicQubitClosedForms) -> dict:
    entropy = forms.completion_entropy
    return {
        "eps": forms.eps,
        "delta": forms.delta,
        "candidate_trace": forms.candidate_trace,
        "trace_defect": forms.trace_defect,
        "log_radius": forms.log_radius,
        "feasible": forms.feasible,
        "markov_feasible": forms.markov_feasible,
        "completion_entropy": None if math.isnan(entropy) else entropy,
    }
