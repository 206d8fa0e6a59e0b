"""Modular map, resolvents, entropy integral, recovery, intersection."""

import math

import numpy as np
import pytest

from qmarkov.core import (
    DensityOperator,
    Operator,
    SystemLayout,
    embed,
    partial_trace,
)
from qmarkov.errors import BadParameter, SupportMismatch
from qmarkov.info import cmi, divergence
from qmarkov.modular import (
    ModularPair,
    divergence_via_integral,
    equality_criterion,
    intersection_check,
    modular_apply,
    petz_equality_check,
    petz_recovery,
    resolvent_solve,
    weighted_inner,
)
from qmarkov.sampling import random_density, random_hermitian

QUBIT2 = (("1", 2), ("2", 2))


def _random_operator(sites, rng):
    # generic, deliberately non-Hermitian
    h1 = random_hermitian(sites, rng)
    h2 = random_hermitian(sites, rng)
    return Operator(sites, h1.matrix + 1j * h2.matrix)


def _diag_pair(rng, dim=4):
    sites = (("1", dim),)
    r = rng.random(dim) + 0.1
    r /= r.sum()
    s = rng.random(dim) + 0.1
    s /= s.sum()
    rho = DensityOperator.certify(Operator(sites, np.diag(r).astype(complex)))
    tau = DensityOperator.certify(Operator(sites, np.diag(s).astype(complex)))
    return ModularPair.build(rho, tau), r, s


def test_weighted_inner_identity(rng):
    rho = random_density(QUBIT2, rng)
    ident = Operator(QUBIT2, np.eye(4, dtype=complex))
    assert abs(weighted_inner(ident, ident, rho) - 1.0) < 1e-12


def test_weighted_inner_is_an_inner_product(rng):
    rho = random_density(QUBIT2, rng)
    x = _random_operator(QUBIT2, rng)
    y = _random_operator(QUBIT2, rng)
    z = _random_operator(QUBIT2, rng)
    # conjugate symmetry
    assert abs(weighted_inner(x, y, rho)
               - np.conj(weighted_inner(y, x, rho))) < 1e-10
    # linear in the second slot
    a, b = 0.3 - 1.1j, -2.0 + 0.4j
    combo = Operator(QUBIT2, a * y.matrix + b * z.matrix)
    assert abs(weighted_inner(x, combo, rho)
               - a * weighted_inner(x, y, rho)
               - b * weighted_inner(x, z, rho)) < 1e-10
    # positivity on a full-rank weight
    norm2 = weighted_inner(x, x, rho)
    assert abs(norm2.imag) < 1e-10
    assert norm2.real > 0.0


def test_weighted_inner_support_mismatch(rng):
    rho = random_density(QUBIT2, rng)
    x = Operator((("1", 2),), np.eye(2, dtype=complex))
    with pytest.raises(SupportMismatch):
        weighted_inner(x, x, rho)


def test_modular_map_fixes_identity_when_states_match(rng):
    rho = random_density(QUBIT2, rng)
    pair = ModularPair.build(rho, rho)
    ident = Operator(QUBIT2, np.eye(4, dtype=complex))
    out = modular_apply(pair, ident)
    assert np.max(np.abs(out.matrix - np.eye(4))) < 1e-10


def test_modular_map_diagonal_oracle(rng):
    """For diagonal states the map scales entry (i, j) by tau_i / rho_j."""
    pair, r, s = _diag_pair(rng)
    x = _random_operator((("1", 4),), rng)
    out = modular_apply(pair, x)
    expected = s[:, None] * x.matrix / r[None, :]
    assert np.max(np.abs(out.matrix - expected)) < 1e-12


def test_modular_map_weighted_self_adjoint(rng):
    rho = random_density(QUBIT2, rng)
    tau = random_density(QUBIT2, rng)
    pair = ModularPair.build(rho, tau)
    x = _random_operator(QUBIT2, rng)
    y = _random_operator(QUBIT2, rng)
    lhs = weighted_inner(x, modular_apply(pair, y), rho)
    rhs = weighted_inner(modular_apply(pair, x), y, rho)
    assert abs(lhs - rhs) < 1e-10
    # positivity of the quadratic form
    q = weighted_inner(x, modular_apply(pair, x), rho)
    assert abs(q.imag) < 1e-10
    assert q.real > -1e-12


def test_resolvent_defining_equation(rng):
    rho = random_density(QUBIT2, rng)
    tau = random_density(QUBIT2, rng)
    pair = ModularPair.build(rho, tau)
    for t in (0.03, 1.0, 17.0):
        x = resolvent_solve(pair, t)
        residual = t * x.matrix @ rho.matrix + tau.matrix @ x.matrix \
            - rho.matrix
        assert np.max(np.abs(residual)) < 1e-10


def test_resolvent_matching_states_is_scalar(rng):
    rho = random_density(QUBIT2, rng)
    pair = ModularPair.build(rho, rho)
    x = resolvent_solve(pair, 3.0)
    assert np.max(np.abs(x.matrix - np.eye(4) / 4.0)) < 1e-10


def test_resolvent_diagonal_oracle(rng):
    pair, r, s = _diag_pair(rng)
    t = 0.8
    x = resolvent_solve(pair, t)
    expected = np.diag(r / (t * r + s))
    assert np.max(np.abs(x.matrix - expected)) < 1e-12


def test_resolvent_rejects_nonpositive_shift(rng):
    rho = random_density(QUBIT2, rng)
    pair = ModularPair.build(rho, rho)
    for t in (0.0, -1.0):
        with pytest.raises(BadParameter):
            resolvent_solve(pair, t)


def test_resolvent_minimizes_quadratic_functional(rng):
    """The solve is the minimizer of <X,(t+map)X> - 2 Re<X,identity>."""
    rho = random_density(QUBIT2, rng)
    tau = random_density(QUBIT2, rng)
    pair = ModularPair.build(rho, tau)
    ident = Operator(QUBIT2, np.eye(4, dtype=complex))
    t = 0.7

    def functional(op):
        quad = t * weighted_inner(op, op, rho) \
            + weighted_inner(op, modular_apply(pair, op), rho)
        return quad.real - 2.0 * weighted_inner(op, ident, rho).real

    x = resolvent_solve(pair, t)
    base = functional(x)
    for _ in range(5):
        h = _random_operator(QUBIT2, rng)
        bumped = Operator(QUBIT2, x.matrix + 1e-3 * h.matrix)
        assert functional(bumped) >= base - 1e-12


def test_divergence_integral_vanishes_on_equal_states(rng):
    rho = random_density(QUBIT2, rng)
    pair = ModularPair.build(rho, rho)
    assert abs(divergence_via_integral(pair)) < 1e-8


def test_divergence_integral_commuting_oracle():
    sites = (("1", 2),)
    rho = DensityOperator.certify(
        Operator(sites, np.diag([0.7, 0.3]).astype(complex)))
    tau = DensityOperator.certify(
        Operator(sites, np.diag([0.4, 0.6]).astype(complex)))
    pair = ModularPair.build(rho, tau)
    expected = 0.7 * math.log(0.7 / 0.4) + 0.3 * math.log(0.3 / 0.6)
    assert abs(divergence_via_integral(pair) - expected) < 1e-9


def test_divergence_integral_matches_spectral(rng):
    for _ in range(5):
        rho = random_density(QUBIT2, rng)
        tau = random_density(QUBIT2, rng)
        pair = ModularPair.build(rho, tau)
        direct = divergence(rho.op, tau.op)
        assert abs(divergence_via_integral(pair) - direct) < 1e-6


def test_equality_criterion_full_retention(rng):
    rho = random_density(QUBIT2, rng)
    tau = random_density(QUBIT2, rng)
    pair = ModularPair.build(rho, tau)
    holds, worst = equality_criterion(pair, ("1", "2"))
    assert holds
    assert worst == 0.0


def test_equality_criterion_product_positive(rng):
    """Tensoring a common factor never costs divergence under its trace."""
    rho_a = random_density((("1", 2),), rng)
    tau_a = random_density((("1", 2),), rng)
    shared = random_density((("2", 2),), rng)
    rho = DensityOperator.certify(
        Operator(QUBIT2, np.kron(rho_a.matrix, shared.matrix)))
    tau = DensityOperator.certify(
        Operator(QUBIT2, np.kron(tau_a.matrix, shared.matrix)))
    pair = ModularPair.build(rho, tau)
    holds, worst = equality_criterion(pair, ("1",))
    assert holds
    assert worst < 1e-8
    # the recovery route must agree
    report = petz_equality_check(rho, tau, ("1",))
    assert report.equal_divergences
    assert report.recovery_holds
    assert report.agree
    assert abs(report.divergence_full - divergence(rho_a.op, tau_a.op)) < 1e-10


def test_equality_criterion_generic_negative(rng):
    rho = random_density(QUBIT2, rng)
    tau = random_density(QUBIT2, rng)
    pair = ModularPair.build(rho, tau)
    holds, worst = equality_criterion(pair, ("1",))
    assert not holds
    assert worst > 1e-3


def test_equality_criterion_rejects_unknown_site(rng):
    rho = random_density(QUBIT2, rng)
    pair = ModularPair.build(rho, rho)
    with pytest.raises(SupportMismatch):
        equality_criterion(pair, ("1", "9"))


def test_petz_recovery_restores_tau(rng):
    tau = random_density(QUBIT2, rng)
    w = partial_trace(tau.op, ("2",))
    recovered = petz_recovery(tau, ("1",), w)
    assert np.max(np.abs(recovered.matrix - tau.matrix)) < 1e-10


def test_petz_recovery_on_product_appends_the_factor(rng):
    tau_a = random_density((("1", 2),), rng)
    tau_b = random_density((("2", 2),), rng)
    tau = DensityOperator.certify(
        Operator(QUBIT2, np.kron(tau_a.matrix, tau_b.matrix)))
    w = random_density((("1", 2),), rng)
    recovered = petz_recovery(tau, ("1",), w.op)
    expected = np.kron(w.matrix, tau_b.matrix)
    assert np.max(np.abs(recovered.matrix - expected)) < 1e-12


def test_petz_recovery_preserves_trace(rng):
    tau = random_density(QUBIT2, rng)
    w = random_hermitian((("1", 2),), rng)
    recovered = petz_recovery(tau, ("1",), w)
    assert abs(np.trace(recovered.matrix) - np.trace(w.matrix)) < 1e-12


def test_petz_recovery_support_errors(rng):
    tau = random_density(QUBIT2, rng)
    w = partial_trace(tau.op, ("2",))
    with pytest.raises(SupportMismatch):
        petz_recovery(tau, ("9",), w)
    with pytest.raises(SupportMismatch):
        petz_recovery(tau, ("2",), w)  # operand acts on site 1
    # retaining everything is the identity map
    assert petz_recovery(tau, ("1", "2"), tau.op) is tau.op


def test_petz_equality_product_positive(rng):
    tau_a = random_density((("1", 2),), rng)
    tau_b = random_density((("2", 2),), rng)
    tau = DensityOperator.certify(
        Operator(QUBIT2, np.kron(tau_a.matrix, tau_b.matrix)))
    w = random_density((("1", 2),), rng)
    rho = DensityOperator.certify(
        Operator(QUBIT2, np.kron(w.matrix, tau_b.matrix)))
    report = petz_equality_check(rho, tau, ("1",))
    assert report.equal_divergences
    assert report.recovery_holds
    assert report.agree
    assert abs(report.gap) < 1e-10
    assert report.recovery_residual < 1e-10
    assert abs(report.divergence_reduced
               - divergence(w.op, tau_a.op)) < 1e-10


def test_petz_equality_conditionally_independent_state(rng):
    """A state that is Markov across the retained cut is fully recoverable.

    Build sigma with commuting classical conditioning on site 3, compare
    against the product of its site-1 marginal with the rest.  The gap is
    then exactly the conditional mutual information, which vanishes here.
    """
    sites3 = (("1", 2), ("2", 2), ("3", 2))
    weights = (0.6, 0.4)
    mat = np.zeros((8, 8), dtype=complex)
    for c, w in enumerate(weights):
        block_a = random_density((("1", 2),), rng)
        block_b = random_density((("2", 2),), rng)
        e = np.zeros((2, 2))
        e[c, c] = 1.0
        mat += w * np.kron(np.kron(block_a.matrix, block_b.matrix), e)
    sigma = DensityOperator.certify(Operator(sites3, mat))
    sig_a = partial_trace(sigma.op, ("2", "3"))
    sig_bc = partial_trace(sigma.op, ("1",))
    tau = DensityOperator.certify(
        Operator(sites3, np.kron(sig_a.matrix, sig_bc.matrix)))

    report = petz_equality_check(sigma, tau, ("1", "3"))
    assert report.equal_divergences
    assert report.recovery_holds
    assert report.agree
    # the gap is I(1:2|3), zero by construction
    ci = cmi(sigma, ("1",), ("2",), ("3",))
    assert abs(report.gap - ci.value) < 1e-9
    assert abs(report.gap) < 1e-9
    # subspace route on the same pair
    holds, worst = equality_criterion(ModularPair.build(sigma, tau),
                                      ("1", "3"))
    assert holds, worst


def test_petz_equality_generic_negative(rng):
    rho = random_density(QUBIT2, rng)
    tau = random_density(QUBIT2, rng)
    report = petz_equality_check(rho, tau, ("1",))
    assert not report.equal_divergences
    assert not report.recovery_holds
    assert report.agree
    assert report.gap > 1e-3
    assert report.recovery_residual > 1e-3


def test_petz_equality_gap_is_cmi_for_marginal_product(rng):
    # tau built from the state's own marginals turns the gap into I(1:2)
    rho = random_density(QUBIT2, rng)
    rho_a = partial_trace(rho.op, ("2",))
    rho_b = partial_trace(rho.op, ("1",))
    tau = DensityOperator.certify(
        Operator(QUBIT2, np.kron(rho_a.matrix, rho_b.matrix)))
    report = petz_equality_check(rho, tau, ("1",))
    mutual = cmi(rho, ("1",), ("2",), ()).value
    assert abs(report.gap - mutual) < 1e-9


QUBIT4 = (("1", 2), ("2", 2), ("3", 2), ("4", 2))


def test_intersection_on_full_product(rng):
    parts = [random_density(((lab, 2),), rng) for lab in "1234"]
    mat = parts[0].matrix
    for p in parts[1:]:
        mat = np.kron(mat, p.matrix)
    rho = DensityOperator.certify(Operator(QUBIT4, mat))
    report = intersection_check(rho, ("1",), ("2",), ("3",), ("4",))
    assert report.premises_hold
    assert report.conclusion_holds
    for rep in (report.premise_ab_given_cd, report.premise_ad_given_bc,
                report.conclusion_a_bd_given_c):
        assert abs(rep.value) < 1e-9


def test_intersection_classical_factorized(rng):
    """pmf proportional to f(a,c) g(b,c,d) satisfies premises exactly."""
    f = rng.random((2, 2)) + 0.2
    g = rng.random((2, 2, 2)) + 0.2
    p = np.einsum("ac,bcd->abcd", f, g)
    p /= p.sum()
    rho = DensityOperator.certify(
        Operator(QUBIT4, np.diag(p.reshape(-1)).astype(complex)))
    report = intersection_check(rho, ("1",), ("2",), ("3",), ("4",))
    assert report.premises_hold
    assert report.conclusion_holds
    assert abs(report.conclusion_a_bd_given_c.value) < 1e-10


def test_intersection_with_entangled_retained_pair(rng):
    # correlation inside the A+C block must not disturb the verdicts
    layout = SystemLayout(QUBIT4)
    ac = random_density((("1", 2), ("3", 2)), rng)
    b = random_density((("2", 2),), rng)
    d = random_density((("4", 2),), rng)
    full = embed(ac.op, layout, layout.labels) \
        @ embed(b.op, layout, layout.labels) \
        @ embed(d.op, layout, layout.labels)
    rho = DensityOperator.certify(full)
    report = intersection_check(rho, ("1",), ("2",), ("3",), ("4",))
    assert report.premises_hold
    assert report.conclusion_holds
    assert abs(report.conclusion_a_bd_given_c.value) < 1e-8


def test_intersection_reports_failed_premises(rng):
    corr = np.diag([0.4, 0.1, 0.1, 0.4]).astype(complex)
    c = random_density((("3", 2),), rng)
    d = random_density((("4", 2),), rng)
    layout = SystemLayout(QUBIT4)
    ab = Operator((("1", 2), ("2", 2)), corr)
    full = embed(ab, layout, layout.labels) \
        @ embed(c.op, layout, layout.labels) \
        @ embed(d.op, layout, layout.labels)
    rho = DensityOperator.certify(full)
    report = intersection_check(rho, ("1",), ("2",), ("3",), ("4",))
    assert not report.premises_hold
    assert not report.conclusion_holds
    # both offending quantities equal the 1:2 mutual information
    assert report.premise_ab_given_cd.value > 0.1
    assert abs(report.premise_ab_given_cd.value
               - report.conclusion_a_bd_given_c.value) < 1e-9
