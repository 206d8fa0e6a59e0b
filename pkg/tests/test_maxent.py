"""Dual maxent solver, log-linear verification, entropy gap identity."""

import math

import numpy as np
import pytest

from qmarkov.core import DensityOperator, Operator, SystemLayout, fro_dist, partial_trace
from qmarkov.errors import MarginalMismatch, NotConverged, SupportMismatch
from qmarkov.info import divergence, entropy
from qmarkov.markov import MarginalFamily, trace_criterion
from qmarkov.maxent import entropy_gap, solve_maxent, verify_loglinear
from qmarkov.pauli import basic_qubit_completion, basic_qubit_family, word_matrix
from qmarkov.sampling import random_density


def _ipf_pmf(p12, p23, shape, sweeps=200):
    """Classical iterative proportional fitting on a 3-variable table."""
    q = np.full(shape, 1.0 / math.prod(shape))
    for _ in range(sweeps):
        q12 = q.sum(axis=2)
        q *= (p12 / q12)[:, :, None]
        q23 = q.sum(axis=0)
        q *= (p23 / q23)[None, :, :]
    return q


def _diag_family(rng, dims=(2, 2, 2)):
    p = rng.random(math.prod(dims)).reshape(dims) + 0.1
    p /= p.sum()
    sites = tuple((str(i + 1), d) for i, d in enumerate(dims))
    layout = SystemLayout(sites)
    p12 = p.sum(axis=2)
    p23 = p.sum(axis=0)
    family = MarginalFamily.build(layout, {
        ("1", "2"): DensityOperator.certify(
            Operator(sites[:2], np.diag(p12.reshape(-1)))),
        ("2", "3"): DensityOperator.certify(
            Operator(sites[1:], np.diag(p23.reshape(-1)))),
    })
    return family, p12, p23, dims


def test_singleton_marginals_of_product(rng):
    a = random_density((("1", 2),), rng)
    b = random_density((("2", 2),), rng)
    layout = SystemLayout((("1", 2), ("2", 2)))
    family = MarginalFamily.build(layout, {("1",): a, ("2",): b})
    result = solve_maxent(family)
    assert result.converged
    assert result.marginal_residual < 1e-8
    expected = np.kron(a.matrix, b.matrix)
    assert np.max(np.abs(result.rho_hat.matrix - expected)) < 1e-7


def test_basic_qubit_maxent_recovers_completion():
    family, _ = basic_qubit_family(0.5, 0.5)
    result = solve_maxent(family)
    assert result.converged
    sigma = basic_qubit_completion(0.5, 0.5)
    assert fro_dist(result.rho_hat.op, sigma.op) < 1e-6
    assert result.iterations <= 5000


def test_classical_family_matches_iterative_scaling(rng):
    family, p12, p23, dims = _diag_family(rng)
    result = solve_maxent(family)
    oracle = _ipf_pmf(p12, p23, dims)
    got = np.real(np.diag(result.rho_hat.matrix)).reshape(dims)
    assert np.max(np.abs(got - oracle)) < 1e-6
    off_diag = result.rho_hat.matrix - np.diag(np.diag(result.rho_hat.matrix))
    assert np.max(np.abs(off_diag)) < 1e-8


def test_not_converged_carries_best_iterate():
    family, _ = basic_qubit_family(0.5, 0.5)
    with pytest.raises(NotConverged) as excinfo:
        solve_maxent(family, max_iter=3)
    result = excinfo.value.result
    assert result is not None
    assert not result.converged
    assert result.iterations == 3
    assert result.marginal_residual > 0


def test_infeasible_family_does_not_converge():
    # no completion exists past the coefficient circle
    family, forms = basic_qubit_family(0.8, 0.8)
    assert not forms.feasible
    with pytest.raises(NotConverged):
        solve_maxent(family, max_iter=300)


def test_solver_requires_cover(rng):
    layout = SystemLayout((("1", 2), ("2", 2)))
    family = MarginalFamily.build(
        layout, {("1",): random_density((("1", 2),), rng)})
    with pytest.raises(SupportMismatch):
        solve_maxent(family)


def test_loglinear_residual_small_at_feasibility():
    family, _ = basic_qubit_family(0.0, 0.6)
    report = trace_criterion(family)
    state = DensityOperator.certify(report.candidate)
    assert verify_loglinear(state, family.subsets) < 1e-8


def test_loglinear_residual_large_for_generic_state(rng):
    rho = random_density((("1", 2), ("2", 2), ("3", 2)), rng)
    assert verify_loglinear(rho, (("1", "2"), ("2", "3"))) > 1e-3


def test_entropy_gap_zero_against_itself():
    family, _ = basic_qubit_family(0.5, 0.5)
    result = solve_maxent(family)
    assert entropy_gap(result.rho_hat, result.rho_hat,
                       family.subsets) < 1e-9


def test_entropy_gap_pythagorean_identity():
    family, _ = basic_qubit_family(0.5, 0.5)
    result = solve_maxent(family)
    sigma = basic_qubit_completion(0.5, 0.5)
    # another completion with the same pair marginals: bump by a word that
    # traces to zero on both subsets
    bump = np.kron(np.kron(word_matrix("X").matrix, np.eye(2)),
                   word_matrix("X").matrix)
    omega = DensityOperator.certify(Operator(
        sigma.sites, sigma.matrix + 0.05 * bump / 8.0))
    for subset, traced in ((("1", "2"), ("3",)), (("2", "3"), ("1",))):
        got = partial_trace(omega.op, traced)
        want = family.entries[subset]
        assert fro_dist(got, want.op) < 1e-12
    assert entropy_gap(omega, result.rho_hat, family.subsets) < 1e-8
    # the identity really is S(rho_hat) - S(omega) = D(omega || rho_hat)
    lhs = entropy(result.rho_hat) - entropy(omega)
    rhs = divergence(omega.op, result.rho_hat.op)
    assert lhs == pytest.approx(rhs, abs=1e-8)


def test_entropy_gap_classical(rng):
    _, _, _, dims = _diag_family(rng)
    # classical competitor with the same marginals: the true joint
    p = rng.random(math.prod(dims)).reshape(dims) + 0.1
    p /= p.sum()
    # rebuild the family from this joint so marginals agree exactly
    sites = tuple((str(i + 1), d) for i, d in enumerate(dims))
    layout = SystemLayout(sites)
    family2 = MarginalFamily.build(layout, {
        ("1", "2"): DensityOperator.certify(
            Operator(sites[:2], np.diag(p.sum(axis=2).reshape(-1)))),
        ("2", "3"): DensityOperator.certify(
            Operator(sites[1:], np.diag(p.sum(axis=0).reshape(-1)))),
    })
    # this particular family stalls just above the default residual target;
    # 1e-7 is plenty for a 1e-6 gap bound
    result2 = solve_maxent(family2, tol=1e-7)
    omega = DensityOperator.certify(Operator(sites, np.diag(p.reshape(-1))))
    gap = entropy_gap(omega, result2.rho_hat, family2.subsets)
    assert gap < 1e-6
    # scalar oracle for the same quantity
    q = np.real(np.diag(result2.rho_hat.matrix)).reshape(dims)
    s_q = -sum(v * math.log(v) for v in q.reshape(-1))
    s_p = -sum(v * math.log(v) for v in p.reshape(-1))
    kl = sum(v * math.log(v / w) for v, w in
             zip(p.reshape(-1), q.reshape(-1)))
    assert abs((s_q - s_p) - kl) < 1e-6


def test_entropy_gap_rejects_mismatched_marginals(rng):
    family, _ = basic_qubit_family(0.5, 0.5)
    result = solve_maxent(family)
    other = random_density((("1", 2), ("2", 2), ("3", 2)), rng)
    with pytest.raises(MarginalMismatch):
        entropy_gap(other, result.rho_hat, family.subsets)
