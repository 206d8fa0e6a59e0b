"""Pauli-word states with scalar closed forms.

States of the form (identity + weighted Pauli words) / 2^n have explicit
spectra when the words pairwise anticommute, which makes them exact test
material: positivity, logarithms and the trace of the completion candidate
all reduce to scalar arithmetic that never touches the matrix pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import PD_FLOOR, DensityOperator, Operator, SystemLayout, identity
from .errors import BadLetter, BadParameter, LengthMismatch, NotPositive
from .markov import MarginalFamily

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def _check_word(word: str) -> str:
    word = str(word)
    bad = set(word) - set("IXYZ")
    if bad:
        raise BadLetter(f"word {word!r} contains letters {sorted(bad)}")
    if not 1 <= len(word) <= 9:
        raise BadParameter(f"word length {len(word)} outside 1..9")
    return word


def _qubit_sites(n: int) -> tuple[tuple[str, int], ...]:
    return tuple((str(i + 1), 2) for i in range(n))


def word_matrix(word: str) -> Operator:
    """Tensor product of single-site Paulis, one letter per site."""
    word = _check_word(word)
    mat = np.array([[1.0 + 0j]])
    for letter in word:
        mat = np.kron(mat, _PAULI[letter])
    return Operator(_qubit_sites(len(word)), mat)


def anticommutes(w1: str, w2: str) -> bool:
    """Whether two Pauli words anticommute.

    They do exactly when the letters differ at an odd number of positions
    where both are non-identity.
    """
    w1, w2 = _check_word(w1), _check_word(w2)
    if len(w1) != len(w2):
        raise LengthMismatch(f"word lengths {len(w1)} and {len(w2)} differ")
    clashes = sum(1 for a, b in zip(w1, w2)
                  if a != "I" and b != "I" and a != b)
    return clashes % 2 == 1


def _check_coeffs(n: int, coeffs: Mapping[str, float]) -> dict[str, float]:
    if not coeffs:
        raise BadParameter("need at least one word coefficient")
    out: dict[str, float] = {}
    for word, c in coeffs.items():
        word = _check_word(word)
        if len(word) != n:
            raise LengthMismatch(f"word {word!r} has length {len(word)}, expected {n}")
        if word == "I" * n:
            raise BadParameter("the identity word is fixed by normalization")
        if word in out:
            raise BadParameter(f"duplicate word {word!r}")
        c = float(c)
        if abs(complex(coeffs[word]).imag) > 0:
            raise BadParameter(f"coefficient of {word!r} must be real")
        out[word] = c
    return out


def _pairwise_anticommuting(words: list[str]) -> bool:
    return all(anticommutes(a, b) for i, a in enumerate(words)
               for b in words[i + 1:])


def pauli_state(n: int, coeffs: Mapping[str, float]) -> tuple[DensityOperator, float]:
    """State (identity + sum of weighted words) / 2^n, and the weight radius.

    For pairwise anticommuting words the spectrum is (1 +/- r) / 2^n with
    r the Euclidean norm of the coefficients, so positivity is decided in
    scalar arithmetic before any matrix is built.
    """
    coeffs = _check_coeffs(n, coeffs)
    r = math.sqrt(sum(c * c for c in coeffs.values()))
    if _pairwise_anticommuting(list(coeffs)) and r >= 1.0 - PD_FLOOR:
        raise NotPositive(f"weight radius {r!r} is not below one")
    mat = np.eye(2 ** n, dtype=np.complex128)
    for word, c in coeffs.items():
        mat = mat + c * word_matrix(word).matrix
    op = Operator(_qubit_sites(n), mat / 2 ** n)
    return DensityOperator.certify(op), r


def pauli_log_closed_form(n: int, coeffs: Mapping[str, float]) -> Operator:
    """Logarithm of a pauli_state with pairwise anticommuting words.

    Equals (log(1 - r^2) / 2 - n log 2) identity + (atanh(r) / r) times the
    word combination.  Degenerate radii below 1e-14 return the plain
    maximally mixed logarithm.
    """
    coeffs = _check_coeffs(n, coeffs)
    if not _pairwise_anticommuting(list(coeffs)):
        raise BadParameter("closed-form logarithm needs pairwise anticommuting words")
    r = math.sqrt(sum(c * c for c in coeffs.values()))
    if r >= 1.0 - PD_FLOOR:
        raise NotPositive(f"weight radius {r!r} is not below one")
    sites = _qubit_sites(n)
    if r <= 1e-14:
        return (-n * math.log(2.0)) * identity(sites)
    combo = np.zeros((2 ** n, 2 ** n), dtype=np.complex128)
    for word, c in coeffs.items():
        combo = combo + c * word_matrix(word).matrix
    const = 0.5 * math.log1p(-r * r) - n * math.log(2.0)
    mat = const * np.eye(2 ** n) + (math.atanh(r) / r) * combo
    return Operator(sites, mat)


@dataclass(frozen=True)
class BasicQubitClosedForms:
    """Scalar reference values for the two-word three-qubit family.

    Everything here is computed in plain floating point from eps and delta,
    independent of the matrix pipeline, so the fields double as oracles:
    the candidate trace sqrt((1-eps^2)(1-delta^2)) cosh(r) with
    r = hypot(atanh(eps), atanh(delta)); feasibility of a completion
    (eps^2 + delta^2 <= 1); Markov feasibility (the product eps delta
    vanishes); and the entropy of the completion when it exists.
    """

    eps: float
    delta: float
    candidate_trace: float
    trace_defect: float
    log_radius: float
    feasible: bool
    markov_feasible: bool
    completion_entropy: float


def _closed_forms(eps: float, delta: float) -> BasicQubitClosedForms:
    b = math.atanh(eps)
    d = math.atanh(delta)
    r = math.hypot(b, d)
    trace = math.sqrt((1.0 - eps * eps) * (1.0 - delta * delta)) * math.cosh(r)
    radius = math.hypot(eps, delta)
    if radius <= 1.0:
        lo = (1.0 - radius) / 8.0
        hi = (1.0 + radius) / 8.0
        ent = -4.0 * (hi * math.log(hi) + (lo * math.log(lo) if lo > 0 else 0.0))
    else:
        ent = math.nan
    return BasicQubitClosedForms(
        eps=eps,
        delta=delta,
        candidate_trace=trace,
        trace_defect=1.0 - trace,
        log_radius=r,
        feasible=radius <= 1.0,
        markov_feasible=abs(eps * delta) < 1e-12,
        completion_entropy=ent,
    )


def basic_qubit_family(eps: float, delta: float) -> tuple[MarginalFamily, BasicQubitClosedForms]:
    """Two-clique qubit family: XX on sites 1,2 and ZZ on sites 2,3.

    Marginals (identity + eps XX)/4 and (identity + delta ZZ)/4 share the
    maximally mixed middle qubit, so the family is always consistent; the
    returned closed forms describe its completion candidate exactly.
    """
    eps, delta = float(eps), float(delta)
    if not (abs(eps) < 1.0 and abs(delta) < 1.0):
        raise BadParameter(f"need |eps| < 1 and |delta| < 1, got {eps}, {delta}")
    layout = SystemLayout(_qubit_sites(3))
    xx = word_matrix("XX")
    zz = word_matrix("ZZ")
    r12 = DensityOperator.certify(Operator(
        (("1", 2), ("2", 2)), (np.eye(4) + eps * xx.matrix) / 4.0))
    r23 = DensityOperator.certify(Operator(
        (("2", 2), ("3", 2)), (np.eye(4) + delta * zz.matrix) / 4.0))
    family = MarginalFamily.build(layout, {("1", "2"): r12, ("2", "3"): r23})
    return family, _closed_forms(eps, delta)


def basic_qubit_completion(eps: float, delta: float) -> DensityOperator:
    """Maximum entropy completion (identity + eps XXI + delta IZZ) / 8.

    Exists exactly when eps^2 + delta^2 < 1; it is the Markov completion
    only when eps delta = 0.
    """
    eps, delta = float(eps), float(delta)
    radius = math.hypot(eps, delta)
    if radius >= 1.0 - PD_FLOOR:
        raise NotPositive(f"completion radius {radius!r} is not below one")
    state, _ = pauli_state(3, {"XXI": eps, "IZZ": delta})
    return state
