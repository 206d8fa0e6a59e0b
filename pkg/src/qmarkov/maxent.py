"""Maximum entropy completion of a marginal family.

The completion with maximal entropy among all states reproducing the family
has a log-linear form: its logarithm is a constant plus a sum of operators
supported on the individual subsets.  The solver works on the smooth convex
dual

    F(M) = log Tr exp( sum of embedded M_A ) - sum of <M_A, rho_A>

whose gradient in the A-component is exactly the marginal mismatch of the
current Gibbs state, so plain gradient descent with Armijo backtracking
drives the marginals onto the family.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (
    DensityOperator,
    Operator,
    Site,
    _permute_modes,
    matrix_func,
)
from .errors import MarginalMismatch, NotConverged, SupportMismatch
from .info import divergence, entropy
from .markov import MarginalFamily, Subset

MAXENT_TOL = 1e-8
MAX_ITER = 10000
ARMIJO_C = 1e-4
ARMIJO_SHRINK = 0.5


@dataclass(frozen=True)
class DualParameters:
    """Log-linear exponent of the solution: lam * identity + embedded terms."""

    lam: float
    terms: Mapping[Subset, Operator]


@dataclass(frozen=True)
class MaxentResult:
    rho_hat: DensityOperator
    dual: DualParameters
    marginal_residual: float
    iterations: int
    converged: bool


def _make_embed(sub: Sequence[Site], union: Sequence[Site]):
    added = [s for s in union if s not in sub]
    order_after = list(sub) + added
    dims_after = [d for _, d in order_after]
    perm = [order_after.index(s) for s in union]
    extra = int(np.prod([d for _, d in added])) if added else 1
    eye = np.eye(extra, dtype=np.complex128)

    def emb(mat: np.ndarray) -> np.ndarray:
        return _permute_modes(np.kron(mat, eye), dims_after, perm)

    return emb


def _make_marginal(union: Sequence[Site], keep: set[str]):
    dims = [d for _, d in union]
    traced = [i for i, (label, _) in enumerate(union) if label not in keep]
    kept_dim = int(np.prod([d for i, (_, d) in enumerate(union)
                            if i not in traced]))

    def marg(mat: np.ndarray) -> np.ndarray:
        tens = mat.reshape(*dims, *dims)
        remaining = len(dims)
        for pos in sorted(traced, reverse=True):
            tens = np.trace(tens, axis1=pos, axis2=pos + remaining)
            remaining -= 1
        return tens.reshape(kept_dim, kept_dim)

    return marg


def _gibbs(h: np.ndarray) -> tuple[float, np.ndarray]:
    """Log partition function and normalized Gibbs state of exp(h)."""
    vals, vecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    top = float(vals[-1])
    lse = top + float(np.log(np.sum(np.exp(vals - top))))
    sigma = (vecs * np.exp(vals - lse)) @ vecs.conj().T
    return lse, sigma


def solve_maxent(family: MarginalFamily, *, tol: float = MAXENT_TOL,
                 max_iter: int = MAX_ITER, armijo_c: float = ARMIJO_C,
                 shrink: float = ARMIJO_SHRINK) -> MaxentResult:
    """Gradient descent on the dual, started from the local logarithms.

    Converged means every marginal of the Gibbs state matches its target
    within ``tol`` in Frobenius norm.  Hitting the iteration cap or a stalled
    line search raises NotConverged with the best iterate attached.
    """
    subsets = family.subsets
    covered = set().union(*[set(s) for s in subsets])
    if covered != set(family.layout.labels):
        raise SupportMismatch(
            f"family covers {sorted(covered)} but the layout has "
            f"{family.layout.labels}"
        )
    union = family.layout.sites
    embeds = {s: _make_embed(family.layout.subset(s), union) for s in subsets}
    marginals = {s: _make_marginal(union, set(s)) for s in subsets}
    targets = {s: family.entries[s].matrix for s in subsets}

    params = {s: matrix_func(family.entries[s].op, "log").matrix.copy()
              for s in subsets}

    def assemble(ps: Mapping[Subset, np.ndarray]) -> np.ndarray:
        h = np.zeros((family.layout.total_dim,) * 2, dtype=np.complex128)
        for s in subsets:
            h = h + embeds[s](ps[s])
        return h

    def objective(lse: float, ps: Mapping[Subset, np.ndarray]) -> float:
        pairing = sum(float(np.real(np.trace(ps[s] @ targets[s])))
                      for s in subsets)
        return lse - pairing

    def package(ps, lse, sigma, residual, iterations, converged) -> MaxentResult:
        terms = {s: Operator(family.layout.subset(s), ps[s]) for s in subsets}
        sym = Operator(union, 0.5 * (sigma + sigma.conj().T))
        if converged:
            rho_hat = DensityOperator.certify(sym)
        else:
            # Diagnostics of a failed solve: record measured defects as-is,
            # the iterate may have drifted to the boundary.
            eigs = np.linalg.eigvalsh(sym.matrix)
            rho_hat = DensityOperator(
                op=sym,
                herm_defect=float(np.linalg.norm(sigma - sigma.conj().T)),
                min_eig=float(eigs[0]),
                trace_defect=abs(float(np.real(np.trace(sym.matrix))) - 1.0),
            )
        return MaxentResult(
            rho_hat=rho_hat,
            dual=DualParameters(lam=-lse, terms=terms),
            marginal_residual=residual,
            iterations=iterations,
            converged=converged,
        )

    h = assemble(params)
    lse, sigma = _gibbs(h)
    f_val = objective(lse, params)
    step = 1.0
    best: tuple[float, dict, float, np.ndarray, int] | None = None

    for iteration in range(max_iter + 1):
        grads = {s: marginals[s](sigma) - targets[s] for s in subsets}
        residual = max(float(np.linalg.norm(grads[s])) for s in subsets)
        if best is None or residual < best[0]:
            best = (residual, {s: params[s].copy() for s in subsets},
                    lse, sigma, iteration)
        if residual <= tol:
            return package(params, lse, sigma, residual, iteration, True)
        if iteration == max_iter:
            break
        grad_sq = sum(float(np.linalg.norm(grads[s])) ** 2 for s in subsets)
        g_embedded = assemble(grads)
        accepted = False
        s_try = step
        # Below this, the demanded decrease drowns in float rounding of F;
        # allowing it through keeps tiny steps moving near stationarity.
        slack = 1e-15 * (1.0 + abs(f_val))
        while s_try > 1e-14:
            h_try = h - s_try * g_embedded
            lse_try, sigma_try = _gibbs(h_try)
            trial = {s: params[s] - s_try * grads[s] for s in subsets}
            f_try = objective(lse_try, trial)
            if f_try <= f_val - armijo_c * s_try * grad_sq + slack:
                params = trial
                h, lse, sigma, f_val = h_try, lse_try, sigma_try, f_try
                step = s_try * 2.0
                accepted = True
                break
            s_try *= shrink
        if not accepted:
            break
    res_r, res_p, res_lse, res_sigma, res_it = best
    result = package(res_p, res_lse, res_sigma, res_r, res_it, False)
    raise NotConverged(
        f"maxent stopped with marginal residual {res_r:.3e} after "
        f"{res_it} accepted steps (tolerance {tol:.1e})",
        result=result,
    )


def _hermitian_basis(dim: int) -> list[np.ndarray]:
    basis = []
    for i in range(dim):
        e = np.zeros((dim, dim), dtype=np.complex128)
        e[i, i] = 1.0
        basis.append(e)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(dim):
        for j in range(i + 1, dim):
            e = np.zeros((dim, dim), dtype=np.complex128)
            e[i, j] = inv_sqrt2
            e[j, i] = inv_sqrt2
            basis.append(e)
            e = np.zeros((dim, dim), dtype=np.complex128)
            e[i, j] = -1j * inv_sqrt2
            e[j, i] = 1j * inv_sqrt2
            basis.append(e)
    return basis


def verify_loglinear(rho_hat: DensityOperator,
                     subsets: Iterable[Iterable[str]]) -> float:
    """Distance of log(rho_hat) from the span of subset-local operators.

    The span contains the identity and every Hermitian operator embedded
    from one of the subsets; the returned Frobenius residual vanishes for
    genuine maximum entropy completions of a family on those subsets.
    """
    union = rho_hat.sites
    log_mat = matrix_func(rho_hat.op, "log").matrix
    dim = log_mat.shape[0]
    columns = [np.eye(dim, dtype=np.complex128)]
    for subset in subsets:
        keep = {str(s) for s in subset}
        if not keep <= set(rho_hat.support):
            raise SupportMismatch(
                f"subset {sorted(keep)} outside the state support"
            )
        sub_sites = tuple(s for s in union if s[0] in keep)
        emb = _make_embed(sub_sites, union)
        sub_dim = int(np.prod([d for _, d in sub_sites]))
        for b in _hermitian_basis(sub_dim):
            columns.append(emb(b))

    def realvec(m: np.ndarray) -> np.ndarray:
        return np.concatenate([m.real.ravel(), m.imag.ravel()])

    a = np.stack([realvec(c) for c in columns], axis=1)
    y = realvec(log_mat)
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    return float(np.linalg.norm(y - a @ coef))


def entropy_gap(omega: DensityOperator, rho_hat: DensityOperator,
                subsets: Iterable[Iterable[str]], *,
                tol: float = 1e-7) -> float:
    """Residual of: entropy difference equals divergence.

    Both states must reproduce the same marginals on the given subsets
    (checked within ``tol``, loose enough to accept a solver output whose
    residual sits at the default convergence target); then the entropy
    deficit of omega below rho_hat equals D(omega || rho_hat), and the
    residual of that identity is returned.
    """
    if omega.sites != rho_hat.sites:
        raise SupportMismatch(
            f"states live on {omega.support} and {rho_hat.support}"
        )
    from .core import partial_trace

    for subset in subsets:
        keep = {str(s) for s in subset}
        rest = set(omega.support) - keep
        mo = partial_trace(omega.op, rest)
        mr = partial_trace(rho_hat.op, rest)
        gap = float(np.linalg.norm(mo.matrix - mr.matrix))
        if gap > tol:
            raise MarginalMismatch(
                f"marginals on {tuple(sorted(keep))} differ by {gap:.3e}"
            )
    lhs = entropy(rho_hat) - entropy(omega)
    rhs = divergence(omega.op, rho_hat.op)
    return abs(lhs - rhs)
