"""Command line surface over the JSON formats.

Every verb reads its inputs from JSON files, computes one report, and emits
deterministic JSON on stdout (or to --out).  Exit codes: 0 when the report
was computed, 1 on malformed input with a diagnostic naming the offending
flag or field, 2 when the computation itself fails (a state that is not
positive, a solve that does not converge); the failure is still emitted as
a JSON error object with the module error embedded.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

import numpy as np

from . import serialize
from .errors import BadParameter, NotConverged, QmarkovError
from .graph import chordal_structure
from .info import gi_divergence_residual, global_information
from .markov import TOL_CONSIST, completion_candidate_pair, trace_criterion
from .maxent import MAX_ITER, MAXENT_TOL, solve_maxent
from .modular import intersection_check, petz_equality_check
from .pauli import basic_qubit_family

_CSV_NOTE = ("CSV floats are printed with 17 significant digits (%.17g), "
             "enough for float(text) to reproduce the exact double.")


class _ArgumentParser(argparse.ArgumentParser):
    # Bad flags are input errors like bad JSON fields: exit 1, not
    # argparse's default 2, which this tool reserves for numerical failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(1)


def _g17(x) -> str:
    return "%.17g" % float(x)


def _split_labels(value: str, flag: str) -> tuple[str, ...]:
    labels = tuple(s for s in value.split(",") if s)
    if not labels:
        raise BadParameter(f"{flag}: expected a comma-separated list of labels")
    if len(set(labels)) != len(labels):
        raise BadParameter(f"{flag}: duplicate label")
    return labels


def _cmd_check(args) -> dict:
    family = serialize.family_from_json(serialize.load_file(args.family), "family")
    return serialize.consistency_to_json(family, args.tol)


def _cmd_trace_criterion(args) -> dict:
    family = serialize.family_from_json(serialize.load_file(args.family), "family")
    structure = None
    if args.graph is not None:
        g = serialize.graph_from_json(serialize.load_file(args.graph), "graph")
        structure = chordal_structure(g)
    elif len(family.subsets) != 2:
        raise BadParameter(
            "--graph: required unless the family has exactly two entries"
        )
    report = trace_criterion(family, structure)
    return serialize.trace_report_to_json(report)


def _cmd_gi(args) -> dict:
    rho = serialize.state_from_json(serialize.load_file(args.state), "state")
    g = serialize.graph_from_json(serialize.load_file(args.graph), "graph")
    structure = chordal_structure(g)
    report = global_information(rho, structure)
    residual = gi_divergence_residual(rho, structure)
    return {"global_information": serialize.info_report_to_json(report),
            "identity_residual": residual}


def _cmd_maxent(args) -> dict:
    family = serialize.family_from_json(serialize.load_file(args.family), "family")
    result = solve_maxent(family, tol=args.tol, max_iter=args.max_iter)
    return serialize.maxent_result_to_json(result)


def _cmd_petz(args) -> dict:
    rho = serialize.state_from_json(serialize.load_file(args.rho), "rho")
    tau = serialize.state_from_json(serialize.load_file(args.tau), "tau")
    retained = _split_labels(args.retained, "--retained")
    for lab in retained:
        if lab not in rho.support:
            raise BadParameter(f"--retained: label {lab!r} not in state support")
    report = petz_equality_check(rho, tau, retained)
    return serialize.petz_report_to_json(report)


def _cmd_intersection(args) -> dict:
    rho = serialize.state_from_json(serialize.load_file(args.state), "state")
    parts = args.parts.split(";")
    if len(parts) != 4:
        raise BadParameter("--parts: expected four groups separated by ';'")
    groups = []
    seen: set[str] = set()
    for i, part in enumerate(parts):
        labels = tuple(s for s in part.split(",") if s)
        if not labels:
            raise BadParameter(f"--parts: group {i + 1} is empty")
        for lab in labels:
            if lab not in rho.support:
                raise BadParameter(f"--parts: label {lab!r} not in state support")
            if lab in seen:
                raise BadParameter(f"--parts: label {lab!r} appears twice")
            seen.add(lab)
        groups.append(labels)
    report = intersection_check(rho, *groups)
    return serialize.intersection_report_to_json(report)


def _cmd_example(args) -> dict:
    family, forms = basic_qubit_family(args.eps, args.delta)
    family_json = serialize.family_to_json(family)
    if args.family_out is not None:
        _emit(serialize.dumps(family_json), args.family_out)
    return {"family": family_json,
            "closed_forms": serialize.closed_forms_to_json(forms)}


def _cmd_sweep(args) -> dict:
    if args.grid < 2:
        raise BadParameter("--grid: expected an integer >= 2")
    values = np.linspace(-0.9, 0.9, args.grid)
    n = args.grid
    trace_grid = np.empty((n, n))
    entropy_grid = np.empty((n, n))
    lines = ["eps,delta,candidate_trace,closed_form,markov_feasible,maxent_entropy"]
    for j, eps in enumerate(values):
        for i, delta in enumerate(values):
            family, forms = basic_qubit_family(float(eps), float(delta))
            candidate = completion_candidate_pair(family)
            tr = float(candidate.trace().real)
            trace_grid[i, j] = tr
            entropy_grid[i, j] = forms.completion_entropy
            lines.append(",".join([
                _g17(eps), _g17(delta), _g17(tr), _g17(forms.candidate_trace),
                "true" if forms.markov_feasible else "false",
                _g17(forms.completion_entropy),
            ]))
    _write_text(args.out, "\n".join(lines) + "\n")
    figures: list[str] = []
    if not args.no_plot:
        from .plots import render_sweep_figures

        stem = os.path.splitext(args.out)[0]
        figures = render_sweep_figures(values, values, trace_grid, entropy_grid,
                                       stem)
    return {"csv": args.out, "rows": n * n, "figures": figures}


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="qmarkov",
        description="Markov completion checks for marginal families.",
        epilog=_CSV_NOTE,
    )
    sub = parser.add_subparsers(dest="verb", required=True, metavar="verb")

    p = sub.add_parser("check", help="overlap consistency of a marginal family")
    p.add_argument("--family", required=True, metavar="F.json")
    p.add_argument("--tol", type=float, default=TOL_CONSIST,
                   help="consistency tolerance (default %(default)g)")
    p.add_argument("--out", metavar="PATH", help="write the report here")
    p.set_defaults(handler=_cmd_check)

    p = sub.add_parser("trace-criterion",
                       help="trace test for a Markov completion")
    p.add_argument("--family", required=True, metavar="F.json")
    p.add_argument("--graph", metavar="G.json",
                   help="clique structure source; defaults to the two-entry path")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(handler=_cmd_trace_criterion)

    p = sub.add_parser("gi", help="global information of a state over a graph")
    p.add_argument("--state", required=True, metavar="S.json")
    p.add_argument("--graph", required=True, metavar="G.json")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(handler=_cmd_gi)

    p = sub.add_parser("maxent",
                       help="maximum-entropy state matching a marginal family")
    p.add_argument("--family", required=True, metavar="F.json")
    p.add_argument("--max-iter", type=int, default=MAX_ITER,
                   help="iteration cap (default %(default)d)")
    p.add_argument("--tol", type=float, default=MAXENT_TOL,
                   help="marginal residual target (default %(default)g)")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(handler=_cmd_maxent)

    p = sub.add_parser("petz",
                       help="divergence equality against the recovery route")
    p.add_argument("--rho", required=True, metavar="R.json")
    p.add_argument("--tau", required=True, metavar="T.json")
    p.add_argument("--retained", required=True, metavar="A,B",
                   help="comma-separated labels kept by the reduction")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(handler=_cmd_petz)

    p = sub.add_parser("intersection",
                       help="intersection property of conditional independence")
    p.add_argument("--state", required=True, metavar="S.json")
    p.add_argument("--parts", required=True, metavar="A;B;C;D",
                   help="four ';'-separated groups of comma-separated labels")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(handler=_cmd_intersection)

    p = sub.add_parser("example", help="emit a named family with its closed forms")
    p.add_argument("name", choices=["basic-qubit"], metavar="basic-qubit")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--family-out", metavar="F.json",
                   help="also write the bare family JSON here, ready for "
                        "the other verbs")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(handler=_cmd_example)

    p = sub.add_parser(
        "sweep",
        help="parameter sweep to CSV plus figures",
        description="Sweep the named family over a square parameter grid, "
                    "writing one CSV row per point and rendering heatmaps "
                    "next to the CSV.  " + _CSV_NOTE,
    )
    p.add_argument("name", choices=["basic-qubit"], metavar="basic-qubit")
    p.add_argument("--grid", type=int, default=21,
                   help="points per axis over [-0.9, 0.9] (default %(default)d)")
    p.add_argument("--out", required=True, metavar="data.csv")
    p.add_argument("--no-plot", action="store_true",
                   help="skip the figures, write only the CSV")
    p.set_defaults(handler=_cmd_sweep)

    return parser


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise BadParameter(f"{path}: {exc.strerror or exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _write_text(out, text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except BadParameter as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    # sweep's --out is the CSV path; its summary always goes to stdout.
    json_out = None if args.verb == "sweep" else args.out
    try:
        payload = args.handler(args)
    except NotConverged as exc:
        body: dict = {"type": "NotConverged", "message": str(exc)}
        if exc.result is not None:
            body["result"] = serialize.maxent_result_to_json(exc.result)
        _emit(serialize.dumps({"error": body}), json_out)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BadParameter:
        raise
    except QmarkovError as exc:
        _emit(serialize.dumps({"error": {"type": type(exc).__name__,
                                         "message": str(exc)}}), json_out)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(serialize.dumps(payload), json_out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
