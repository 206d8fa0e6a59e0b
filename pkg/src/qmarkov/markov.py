"""Marginal families, the log-linear completion candidate, and Markov checks.

A marginal family assigns a density operator to each subset in a collection
of overlapping subsets of a layout.  The central construction is the
candidate completion

    exp( sum of clique log-marginals - weighted sum of separator log-marginals )

whose trace never exceeds one and reaches one exactly when the family has a
completion that is Markov for the underlying chordal graph.  In that case
the candidate is that completion, and for two cliques it can be reached
through the sandwich operator route as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .core import (
    TOL_HERM,
    DensityOperator,
    Operator,
    _embed_to,
    fro_dist,
    matrix_func,
    partial_trace,
    star,
)
from .errors import Inconsistent, NotChordal, SupportMismatch
from .graph import ChordalStructure, Graph, chordal_structure, mcs
from .info import CI_TOL, _entropy_of, cmi

TOL_CONSIST = 1e-8
TRACE_TOL = 1e-9
BOUNDARY_TOL = 1e-6

Subset = tuple[str, ...]


def check_consistency(entries: Mapping[Subset, DensityOperator]) -> dict[tuple[Subset, Subset], float]:
    """Frobenius residuals between marginals on every pairwise overlap."""
    keys = sorted(entries)
    residuals: dict[tuple[Subset, Subset], float] = {}
    for i, ka in enumerate(keys):
        for kb in keys[i + 1:]:
            overlap = set(ka) & set(kb)
            if not overlap:
                continue
            ma = partial_trace(entries[ka].op, set(ka) - overlap)
            mb = partial_trace(entries[kb].op, set(kb) - overlap)
            residuals[(ka, kb)] = fro_dist(ma, mb)
    return residuals


@dataclass(frozen=True)
class MarginalFamily:
    """Density operators on overlapping subsets of one layout.

    Overlap residuals are computed once at build time and carried along;
    operations that need a consistent family check them against their own
    tolerance rather than recomputing marginals.
    """

    layout: SystemLayout
    entries: Mapping[Subset, DensityOperator]
    consistency: Mapping[tuple[Subset, Subset], float]

    @classmethod
    def build(cls, layout: SystemLayout,
              entries: Mapping[Iterable[str], DensityOperator]) -> "MarginalFamily":
        if not entries:
            raise SupportMismatch("a marginal family needs at least one entry")
        normalized: dict[Subset, DensityOperator] = {}
        for key, rho in entries.items():
            subset = tuple(sorted(str(k) for k in key))
            if subset in normalized:
                raise SupportMismatch(f"duplicate family subset {subset}")
            expected = layout.subset(subset)
            if rho.sites != expected:
                raise SupportMismatch(
                    f"entry for {subset} acts on {rho.sites}, layout says {expected}"
                )
            normalized[subset] = rho
        residuals = check_consistency(normalized)
        return cls(layout=layout, entries=normalized, consistency=residuals)

    @property
    def subsets(self) -> tuple[Subset, ...]:
        return tuple(sorted(self.entries))

    @property
    def max_residual(self) -> float:
        return max(self.consistency.values(), default=0.0)

    def consistent(self, tol: float = TOL_CONSIST) -> bool:
        return self.max_residual <= tol


def _require_consistent(family: MarginalFamily, tol: float) -> None:
    if not family.consistent(tol):
        bad = max(family.consistency, key=family.consistency.get)
        raise Inconsistent(
            f"family overlap {bad} disagrees by {family.consistency[bad]:.3e} "
            f"(tolerance {tol:.1e})"
        )


def _log_embedded(rho: DensityOperator, target) -> Operator:
    return _embed_to(matrix_func(rho.op, "log"), target)


def completion_candidate_pair(family: MarginalFamily, *,
                              tol_consist: float = TOL_CONSIST) -> Operator:
    """Log-linear candidate for a family with exactly two subsets.

    exp(log of first entry + log of second entry - log of the overlap
    marginal), everything embedded on the union support.  The overlap
    marginal is taken from the lexicographically first entry.
    """
    keys = sorted(family.entries)
    if len(keys) != 2:
        raise SupportMismatch(f"expected exactly two subsets, got {len(keys)}")
    _require_consistent(family, tol_consist)
    ka, kb = keys
    overlap = tuple(sorted(set(ka) & set(kb)))
    union = family.layout.subset(set(ka) | set(kb))
    exponent = _log_embedded(family.entries[ka], union) + \
        _log_embedded(family.entries[kb], union)
    if overlap:
        marg = partial_trace(family.entries[ka].op, set(ka) - set(overlap))
        exponent = exponent - _embed_to(matrix_func(marg, "log"), union)
    return matrix_func(exponent, "exp", tol_herm=1e-8)


def completion_candidate(family: MarginalFamily, structure: ChordalStructure,
                         *, tol_consist: float = TOL_CONSIST) -> Operator:
    """Log-linear candidate along a chordal clique structure.

    Family subsets must be exactly the cliques.  Each separator marginal is
    recomputed from the lexicographically first clique containing it.
    """
    cliques = tuple(sorted(tuple(sorted(c)) for c in structure.cliques))
    if tuple(sorted(family.entries)) != cliques:
        raise SupportMismatch(
            f"family subsets {tuple(sorted(family.entries))} differ from "
            f"cliques {cliques}"
        )
    _require_consistent(family, tol_consist)
    covered = sorted(set().union(*[set(c) for c in cliques]))
    union = family.layout.subset(covered)
    exponent = None
    for clique in cliques:
        term = _log_embedded(family.entries[clique], union)
        exponent = term if exponent is None else exponent + term
    for sep, nu in sorted(structure.separators.items()):
        host = next(c for c in cliques if set(sep) <= set(c))
        marg = partial_trace(family.entries[host].op, set(host) - set(sep))
        exponent = exponent - float(nu) * _embed_to(matrix_func(marg, "log"), union)
    return matrix_func(exponent, "exp", tol_herm=1e-8)


@dataclass(frozen=True)
class TraceCriterionReport:
    """Outcome of the trace test on a marginal family.

    verdict is "markov_feasible" when the trace defect 1 - Tr(candidate)
    sits within the strict tolerance, "boundary" in the band just above it,
    and "not_markov_feasible" beyond.  Marginal and entropy residuals are
    filled in only for feasible families, where the candidate is a state
    whose clique marginals should reproduce the family.
    """

    verdict: str
    candidate_trace: float
    defect: float
    candidate: Operator
    marginal_residuals: Mapping[Subset, float] | None
    entropy_residual: float | None


def trace_criterion(family: MarginalFamily,
                    structure: ChordalStructure | None = None, *,
                    trace_tol: float = TRACE_TOL,
                    boundary_tol: float = BOUNDARY_TOL,
                    tol_consist: float = TOL_CONSIST) -> TraceCriterionReport:
    """Decide Markov feasibility of a family through the candidate's trace."""
    if structure is None:
        cand = completion_candidate_pair(family, tol_consist=tol_consist)
    else:
        cand = completion_candidate(family, structure, tol_consist=tol_consist)
    trace = float(np.real(np.trace(cand.matrix)))
    defect = 1.0 - trace
    if defect <= trace_tol:
        verdict = "markov_feasible"
    elif defect <= boundary_tol:
        verdict = "boundary"
    else:
        verdict = "not_markov_feasible"
    residuals = None
    entropy_residual = None
    if verdict == "markov_feasible":
        residuals = {}
        for key, rho in sorted(family.entries.items()):
            marg = partial_trace(cand, set(cand.support) - set(key))
            residuals[key] = fro_dist(marg, rho.op)
        clique_sum = sum(_entropy_of(rho.op) for rho in family.entries.values())
        sep_sum = 0.0
        if structure is None:
            keys = sorted(family.entries)
            overlap = tuple(sorted(set(keys[0]) & set(keys[1])))
            seps: Mapping[Subset, int] = {overlap: 1} if overlap else {}
        else:
            seps = structure.separators
        for sep, nu in seps.items():
            host = next(k for k in sorted(family.entries) if set(sep) <= set(k))
            marg = partial_trace(family.entries[host].op, set(host) - set(sep))
            sep_sum += nu * _entropy_of(marg)
        entropy_residual = abs(_entropy_of(cand) - (clique_sum - sep_sum))
    return TraceCriterionReport(
        verdict=verdict,
        candidate_trace=trace,
        defect=defect,
        candidate=cand,
        marginal_residuals=residuals,
        entropy_residual=entropy_residual,
    )


def sandwich_operator(family: MarginalFamily, *,
                      tol_consist: float = TOL_CONSIST) -> Operator:
    """Root-product operator for a two-subset family.

    sqrt of the first entry, times inverse sqrt of the overlap marginal,
    times sqrt of the second entry, embedded on the union.  Its Gram square
    has unit trace always; it is normal exactly when the family is Markov
    feasible, and then its Gram square is the completion.
    """
    keys = sorted(family.entries)
    if len(keys) != 2:
        raise SupportMismatch(f"expected exactly two subsets, got {len(keys)}")
    _require_consistent(family, tol_consist)
    ka, kb = keys
    overlap = set(ka) & set(kb)
    union = family.layout.subset(set(ka) | set(kb))
    left = _embed_to(matrix_func(family.entries[ka].op, "sqrt"), union)
    right = _embed_to(matrix_func(family.entries[kb].op, "sqrt"), union)
    if overlap:
        marg = partial_trace(family.entries[ka].op, set(ka) - overlap)
        middle = _embed_to(matrix_func(marg, "inv_sqrt"), union)
        return left @ middle @ right
    return left @ right


@dataclass(frozen=True)
class MarkovCompatibility:
    """Sandwich-route verdict: normality defect and the completion if normal."""

    compatible: bool
    normality_defect: float
    state: DensityOperator | None


def markov_compatible(family: MarginalFamily, *, tol: float = TOL_HERM,
                      tol_consist: float = TOL_CONSIST) -> MarkovCompatibility:
    """Two-subset Markov feasibility via normality of the sandwich operator.

    When the sandwich operator is normal its Gram square is the unique
    Markov completion, agreeing with the log-linear candidate.
    """
    from .core import is_normal

    k = sandwich_operator(family, tol_consist=tol_consist)
    normal, defect = is_normal(k, tol=tol)
    if not normal:
        return MarkovCompatibility(compatible=False, normality_defect=defect,
                                   state=None)
    gram = k @ k.dagger()
    state = DensityOperator.certify(Operator(gram.sites, 0.5 * (
        gram.matrix + gram.matrix.conj().T)))
    return MarkovCompatibility(compatible=True, normality_defect=defect,
                               state=state)


def conditional_density(rho: DensityOperator, a: Iterable[str],
                        b: Iterable[str]) -> Operator:
    """Conditional operator of A given B: B-root-inverse sandwich of the
    A+B marginal.  Its partial trace over A is the identity on B."""
    a, b = set(a), set(b)
    if a & b:
        raise SupportMismatch("conditional blocks must be disjoint")
    if not a:
        raise SupportMismatch("conditional needs a nonempty target block")
    support = set(rho.support)
    if not (a | b) <= support:
        raise SupportMismatch(
            f"blocks {sorted((a | b) - support)} outside state support"
        )
    joint = partial_trace(rho.op, support - (a | b))
    if not b:
        return joint
    marg = partial_trace(joint, a)
    inv_root = _embed_to(matrix_func(marg, "inv_sqrt"), joint.sites)
    return inv_root @ joint @ inv_root


def one_sided_reconstruction(rho_bc: DensityOperator,
                             sigma_ac: DensityOperator) -> DensityOperator:
    """Extend sigma along the conditional of rho across the shared sites.

    With shared sites C, the result is the conditional of rho (B given C)
    sandwiched by sigma's square root; its marginal on sigma's support is
    sigma exactly.
    """
    shared = set(rho_bc.support) & set(sigma_ac.support)
    b = set(rho_bc.support) - shared
    if not b:
        raise SupportMismatch(
            "rho's support adds no new sites to the reconstruction"
        )
    cond = conditional_density(rho_bc, b, shared)
    omega = star(cond, sigma_ac.op)
    sym = Operator(omega.sites, 0.5 * (omega.matrix + omega.matrix.conj().T))
    return DensityOperator.certify(sym)


@dataclass(frozen=True)
class MarkovCheck:
    """Verdict of the global Markov property test."""

    holds: bool
    worst_value: float
    worst_triple: tuple[Subset, Subset, Subset]
    checked: int


def _forest_leaf_triples(g: Graph) -> set[tuple[Subset, Subset, Subset]]:
    """Separation triples from peeling leaf cliques off the junction forest."""
    structure = chordal_structure(g)
    cliques = structure.cliques
    if len(cliques) <= 1:
        return set()
    degree = {i: 0 for i in range(len(cliques))}
    neighbor_sep: dict[int, tuple[str, ...]] = {}
    for i, j in structure.forest_edges:
        degree[i] += 1
        degree[j] += 1
        sep = tuple(sorted(set(cliques[i]) & set(cliques[j])))
        neighbor_sep[i] = sep
        neighbor_sep[j] = sep
    leaf = min(i for i in degree if degree[i] <= 1)
    d = neighbor_sep.get(leaf, ()) if degree[leaf] == 1 else ()
    a = tuple(sorted(set(cliques[leaf]) - set(d)))
    b = tuple(sorted(set(g.vertices) - set(cliques[leaf])))
    first, second = (a, b) if a[0] < b[0] else (b, a)
    triples = {(first, second, d)}
    triples |= _forest_leaf_triples(g.induced(set(a) | set(d)))
    triples |= _forest_leaf_triples(g.induced(set(b) | set(d)))
    return triples


def _all_separating_triples(g: Graph) -> set[tuple[Subset, Subset, Subset]]:
    from .graph import separates

    verts = g.vertices
    n = len(verts)
    triples = set()
    for code in range(4 ** n):
        groups: tuple[list[str], ...] = ([], [], [], [])
        c = code
        for v in verts:
            groups[c % 4].append(v)
            c //= 4
        a, b, d, _ = groups
        if not a or not b:
            continue
        if a[0] > b[0]:
            continue
        if separates(g, a, b, d):
            triples.add((tuple(a), tuple(b), tuple(d)))
    return triples


def is_quantum_markov(rho: DensityOperator, g: Graph, *,
                      tol: float = CI_TOL) -> MarkovCheck:
    """Test the global Markov property of a state for a graph.

    Every graph separation (A, B, D) that gets checked must have vanishing
    conditional mutual information I(A : B | D).  The checked set is the
    recursive clique-peeling set; for graphs on at most five vertices all
    separating triples are enumerated as well.  Returns the largest
    violation found and the triple achieving it.
    """
    if set(g.vertices) != set(rho.support):
        raise SupportMismatch(
            f"graph vertices {g.vertices} differ from state support {rho.support}"
        )
    triples: set[tuple[Subset, Subset, Subset]] = set()
    _, chordal = mcs(g)
    if chordal:
        triples |= _forest_leaf_triples(g)
    if len(g.vertices) <= 5:
        triples |= _all_separating_triples(g)
    elif not chordal:
        raise NotChordal(
            "markov test beyond five vertices needs a chordal graph"
        )
    worst_value = -np.inf
    worst_triple: tuple[Subset, Subset, Subset] = ((), (), ())
    for a, b, d in sorted(triples):
        value = cmi(rho, a, b, d, tol=tol).value
        if value > worst_value:
            worst_value = value
            worst_triple = (a, b, d)
    if not triples:
        worst_value = 0.0
    return MarkovCheck(
        holds=bool(worst_value <= tol),
        worst_value=float(worst_value),
        worst_triple=worst_triple,
        checked=len(triples),
    )
