"""Entropy, relative entropy and derived information quantities.

All logarithms are natural, so every quantity is reported in nats.  The
relative entropy is the non-normalized form

    D(X || Y) = Tr(X log X) - Tr(X log Y) - Tr X + Tr Y,

which agrees with the usual definition on unit-trace inputs and stays
nonnegative for arbitrary positive definite ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .core import (
    PD_FLOOR,
    TOL_HERM,
    DensityOperator,
    Operator,
    hermitian_eig,
    partial_trace,
)
from .errors import NotPositive, SupportMismatch
from .graph import ChordalStructure

CI_TOL = 1e-9


@dataclass(frozen=True)
class InfoReport:
    """Scalar result with the entropies it was assembled from."""

    value: float
    components: Mapping[str, float]
    tolerance: float

    def holds(self) -> bool:
        """Whether the value vanishes within the report's tolerance."""
        return abs(self.value) <= self.tolerance


def _positive_eigs(op: Operator, what: str, pd_floor: float) -> np.ndarray:
    spec = hermitian_eig(op)
    lo = float(spec.eigenvalues[0])
    hi = float(spec.eigenvalues[-1])
    if hi <= 0.0 or lo <= pd_floor * hi:
        raise NotPositive(
            f"{what} is not strictly positive: eigenvalue range [{lo:.3e}, {hi:.3e}]"
        )
    return spec.eigenvalues


def _entropy_of(op: Operator, what: str = "operator",
                pd_floor: float = PD_FLOOR) -> float:
    eigs = _positive_eigs(op, what, pd_floor)
    return float(-np.sum(eigs * np.log(eigs)))


def entropy(rho: DensityOperator) -> float:
    """Von Neumann entropy -Tr(rho log rho) in nats."""
    return _entropy_of(rho.op, "state")


def divergence(x: Operator, y: Operator, *, pd_floor: float = PD_FLOOR) -> float:
    """Relative entropy D(X || Y) for positive definite X, Y.

    Both operands must share their support.  The Tr X and Tr Y terms make
    the value well defined and nonnegative without normalizing first.
    """
    if x.sites != y.sites:
        raise SupportMismatch(
            f"divergence needs a common support, got {x.support} and {y.support}"
        )
    ex = _positive_eigs(x, "first argument", pd_floor)
    sy = hermitian_eig(y)
    lo, hi = float(sy.eigenvalues[0]), float(sy.eigenvalues[-1])
    if hi <= 0.0 or lo <= pd_floor * hi:
        raise NotPositive(
            f"second argument is not strictly positive: range [{lo:.3e}, {hi:.3e}]"
        )
    x_log_x = float(np.sum(ex * np.log(ex)))
    log_y = (sy.vectors * np.log(sy.eigenvalues)) @ sy.vectors.conj().T
    x_log_y = float(np.real(np.trace(x.matrix @ log_y)))
    tr_x = float(np.real(np.trace(x.matrix)))
    tr_y = float(np.real(np.trace(y.matrix)))
    return x_log_x - x_log_y - tr_x + tr_y


def cmi(rho: DensityOperator, a: Iterable[str], b: Iterable[str],
        c: Iterable[str], *, tol: float = CI_TOL) -> InfoReport:
    """Conditional mutual information I(A : B | C) of a state.

    The state is first reduced to A+B+C; C may be empty, in which case the
    value is the plain mutual information.  The report's ``holds`` method
    answers "is A conditionally independent of B given C".
    """
    a, b, c = set(a), set(b), set(c)
    if a & b or a & c or b & c:
        raise SupportMismatch("cmi blocks must be pairwise disjoint")
    if not a or not b:
        raise SupportMismatch("cmi needs nonempty A and B blocks")
    support = set(rho.support)
    if not (a | b | c) <= support:
        raise SupportMismatch(
            f"blocks {sorted((a | b | c) - support)} outside state support"
        )
    rest = support - (a | b | c)
    reduced = partial_trace(rho.op, rest) if rest else rho.op
    s_abc = _entropy_of(reduced, "reduced state")
    s_ac = _entropy_of(partial_trace(reduced, b), "AC marginal")
    s_bc = _entropy_of(partial_trace(reduced, a), "BC marginal")
    if c:
        s_c = _entropy_of(partial_trace(reduced, a | b), "C marginal")
    else:
        s_c = 0.0
    value = s_ac + s_bc - s_c - s_abc
    return InfoReport(
        value=value,
        components={"S_AC": s_ac, "S_BC": s_bc, "S_C": s_c, "S_ABC": s_abc},
        tolerance=tol,
    )


def global_information(rho: DensityOperator, structure: ChordalStructure,
                       *, tol: float = CI_TOL) -> InfoReport:
    """Clique-minus-separator entropy excess over the global entropy.

    Sum of clique entropies minus multiplicity-weighted separator entropies
    minus the entropy of the state itself.  Zero exactly on states that are
    Markov for the underlying graph; nonnegative whenever the cliques cover
    the state's support.
    """
    support = set(rho.support)
    covered = set().union(*[set(c) for c in structure.cliques]) if structure.cliques else set()
    if covered != support:
        raise SupportMismatch(
            f"cliques cover {sorted(covered)} but the state lives on {sorted(support)}"
        )
    components: dict[str, float] = {}
    total = 0.0
    for clique in structure.cliques:
        s = _entropy_of(partial_trace(rho.op, support - set(clique)), "clique marginal")
        components["S(" + ",".join(clique) + ")"] = s
        total += s
    for sep, nu in sorted(structure.separators.items()):
        s = _entropy_of(partial_trace(rho.op, support - set(sep)), "separator marginal")
        components["S(" + ",".join(sep) + ")*" + str(nu)] = s
        total -= nu * s
    s_full = _entropy_of(rho.op, "state")
    components["S(full)"] = s_full
    total -= s_full
    return InfoReport(value=total, components=components, tolerance=tol)


def gi_divergence_residual(rho: DensityOperator, structure: ChordalStructure) -> float:
    """Defect of the identity linking the entropy excess to the candidate.

    The excess equals D(rho || candidate) + 1 - Tr(candidate), where the
    candidate is the log-linear completion built from the clique marginals
    of rho.  Returns the absolute difference of the two sides.
    """
    from .markov import MarginalFamily, completion_candidate

    support = set(rho.support)
    entries = {}
    for clique in structure.cliques:
        marg = partial_trace(rho.op, support - set(clique))
        entries[tuple(sorted(clique))] = DensityOperator.certify(marg)
    from .core import SystemLayout

    layout = SystemLayout(rho.sites)
    family = MarginalFamily.build(layout, entries)
    cand = completion_candidate(family, structure)
    lhs = global_information(rho, structure).value
    rhs = divergence(rho.op, cand) + 1.0 - float(np.real(np.trace(cand.matrix)))
    return abs(lhs - rhs)
