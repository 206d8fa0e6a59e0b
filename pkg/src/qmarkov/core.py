"""Operators on labeled tensor-product spaces.

Everything in the package works with explicitly labeled sites.  A site is a
pair (label, dim); an operator carries the ordered tuple of sites it acts on
together with its dense matrix.  Site order inside an operator is always
ascending label order, and the matrix is indexed row-major with the first
site as the most significant digit.  Keeping one canonical order means
embeddings, partial traces and overlaps never have to guess how two
operators line up; any permutation needed to reach canonical order happens
eagerly at construction time.

Matrices are dense complex128 throughout.  Spectral operations go through
:func:`hermitian_eig`, which wraps the LAPACK Hermitian eigensolver behind a
Hermiticity check, so every consumer sees the same ascending eigenvalues for
the same input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import NotHermitian, NotNormalized, NotPositive, SupportMismatch

# Default tolerances.  Hermiticity and trace checks are absolute; the
# positivity floor is relative to the largest eigenvalue.
TOL_HERM = 1e-10
TOL_TRACE = 1e-10
PD_FLOOR = 1e-12

Site = tuple[str, int]


def _as_complex_matrix(matrix) -> np.ndarray:
    mat = np.ascontiguousarray(matrix, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise SupportMismatch(f"expected a square matrix, got shape {mat.shape}")
    return mat


def _check_sites(sites: Sequence[Site]) -> tuple[Site, ...]:
    sites = tuple((str(label), int(dim)) for label, dim in sites)
    labels = [label for label, _ in sites]
    if len(set(labels)) != len(labels):
        raise SupportMismatch(f"duplicate site labels in {labels}")
    for label, dim in sites:
        if dim < 1:
            raise SupportMismatch(f"site {label!r} has dimension {dim}")
    return sites


@dataclass(frozen=True)
class SystemLayout:
    """Ordered collection of labeled sites making up the full system.

    Labels must be listed in ascending order; this is the one canonical
    order used everywhere, so the layout is not allowed to disagree with it.
    """

    sites: tuple[Site, ...]

    def __post_init__(self):
        sites = _check_sites(self.sites)
        labels = [label for label, _ in sites]
        if labels != sorted(labels):
            raise SupportMismatch(f"layout labels must be ascending, got {labels}")
        object.__setattr__(self, "sites", sites)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.sites)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.sites)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims)) if self.sites else 1

    def dim_of(self, label: str) -> int:
        for name, dim in self.sites:
            if name == label:
                return dim
        raise SupportMismatch(f"label {label!r} not in layout {self.labels}")

    def subset(self, labels: Iterable[str]) -> tuple[Site, ...]:
        """Sites for the given labels, in canonical order."""
        wanted = set(labels)
        unknown = wanted - set(self.labels)
        if unknown:
            raise SupportMismatch(f"labels {sorted(unknown)} not in layout {self.labels}")
        return tuple(site for site in self.sites if site[0] in wanted)


@dataclass(frozen=True)
class Operator:
    """Dense operator on an ordered set of labeled sites.

    ``sites`` is canonicalized to ascending label order on construction and
    the matrix is permuted to match, so two operators with the same labels
    always index their matrices identically.  The stored array is marked
    read-only; treat Operator values as immutable.
    """

    sites: tuple[Site, ...]
    matrix: np.ndarray

    def __post_init__(self):
        sites = _check_sites(self.sites)
        mat = _as_complex_matrix(self.matrix)
        dims = tuple(dim for _, dim in sites)
        total = int(np.prod(dims)) if sites else 1
        if mat.shape[0] != total:
            raise SupportMismatch(
                f"matrix dimension {mat.shape[0]} does not match site dims {dims}"
            )
        order = sorted(range(len(sites)), key=lambda i: sites[i][0])
        if order != list(range(len(sites))):
            mat = _permute_modes(mat, dims, order)
            sites = tuple(sites[i] for i in order)
        mat.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "matrix", mat)

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.sites)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.sites)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.sites, self.matrix.conj().T)

    def herm_defect(self) -> float:
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T))

    def fro_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_hermitian(self, tol: float = TOL_HERM) -> bool:
        return self.herm_defect() <= tol

    def dim_of(self, label: str) -> int:
        for name, dim in self.sites:
            if name == label:
                return dim
        raise SupportMismatch(f"label {label!r} not in support {self.support}")

    def _require_same_sites(self, other: "Operator") -> None:
        if self.sites != other.sites:
            raise SupportMismatch(
                f"operands act on different sites: {self.sites} vs {other.sites}"
            )

    def __add__(self, other: "Operator") -> "Operator":
        self._require_same_sites(other)
        return Operator(self.sites, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._require_same_sites(other)
        return Operator(self.sites, self.matrix - other.matrix)

    def __neg__(self) -> "Operator":
        return Operator(self.sites, -self.matrix)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.sites, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._require_same_sites(other)
        return Operator(self.sites, self.matrix @ other.matrix)


def identity(sites: Sequence[Site]) -> Operator:
    sites = _check_sites(sites)
    total = int(np.prod([dim for _, dim in sites])) if sites else 1
    return Operator(sites, np.eye(total, dtype=np.complex128))


def fro_dist(a: Operator, b: Operator) -> float:
    if a.sites != b.sites:
        raise SupportMismatch(f"cannot compare {a.support} with {b.support}")
    return float(np.linalg.norm(a.matrix - b.matrix))


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian operator.

    Eigenvalues are ascending; columns of ``vectors`` are the matching
    orthonormal eigenvectors.
    """

    sites: tuple[Site, ...]
    eigenvalues: np.ndarray
    vectors: np.ndarray

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> Operator:
        """Rebuild the operator with ``f`` applied to the eigenvalues."""
        vals = f(self.eigenvalues)
        mat = (self.vectors * vals) @ self.vectors.conj().T
        return Operator(self.sites, mat)


def hermitian_eig(op: Operator, tol: float = TOL_HERM) -> Spectrum:
    """Eigendecomposition with an up-front Hermiticity check.

    The defect ||M - M^dag||_F must not exceed ``tol``.  The matrix is
    symmetrized before the solve so roundoff in the input cannot leak into
    complex eigenvalues.
    """
    defect = op.herm_defect()
    if defect > tol:
        raise NotHermitian(f"Hermiticity defect {defect:.3e} exceeds tol {tol:.1e}")
    sym = 0.5 * (op.matrix + op.matrix.conj().T)
    vals, vecs = np.linalg.eigh(sym)
    vals = vals.copy()
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return Spectrum(op.sites, vals, vecs)


_POSITIVE_FUNCS = {"log", "sqrt", "inv_sqrt", "inv"}

_FUNC_TABLE: Mapping[str, Callable[[np.ndarray], np.ndarray]] = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "inv_sqrt": lambda x: 1.0 / np.sqrt(x),
    "inv": lambda x: 1.0 / x,
}


def matrix_func(op: Operator, kind: str, *, tol_herm: float = TOL_HERM,
                pd_floor: float = PD_FLOOR) -> Operator:
    """Spectral calculus: apply exp, log, sqrt, inv_sqrt or inv.

    Functions needing positivity refuse inputs whose smallest eigenvalue
    sits at or below ``pd_floor`` times the largest; no silent clipping.
    """
    if kind not in _FUNC_TABLE:
        raise ValueError(f"unknown matrix function {kind!r}")
    spec = hermitian_eig(op, tol=tol_herm)
    if kind in _POSITIVE_FUNCS:
        lo = float(spec.eigenvalues[0])
        hi = float(spec.eigenvalues[-1])
        if hi <= 0.0 or lo <= pd_floor * hi:
            raise NotPositive(
                f"matrix_func({kind!r}) needs a positive definite input; "
                f"eigenvalue range [{lo:.3e}, {hi:.3e}]"
            )
    return spec.apply(_FUNC_TABLE[kind])


@dataclass(frozen=True)
class DensityOperator:
    """Certified density operator with its certification diagnostics."""

    op: Operator
    herm_defect: float
    min_eig: float
    trace_defect: float

    @classmethod
    def certify(cls, op: Operator, *, tol_herm: float = TOL_HERM,
                tol_trace: float = TOL_TRACE,
                pd_floor: float = PD_FLOOR) -> "DensityOperator":
        """Check Hermiticity, strict positivity and unit trace.

        Raises NotHermitian, NotPositive or NotNormalized; on success the
        measured defects are recorded on the returned value.
        """
        defect = op.herm_defect()
        if defect > tol_herm:
            raise NotHermitian(
                f"density candidate has Hermiticity defect {defect:.3e}"
            )
        spec = hermitian_eig(op, tol=tol_herm)
        lo = float(spec.eigenvalues[0])
        hi = float(spec.eigenvalues[-1])
        if hi <= 0.0 or lo <= pd_floor * hi:
            raise NotPositive(
                f"density candidate is not strictly positive: "
                f"min eigenvalue {lo:.3e}, max {hi:.3e}"
            )
        tr = float(np.real(np.trace(op.matrix)))
        if abs(tr - 1.0) > tol_trace:
            raise NotNormalized(f"trace {tr!r} differs from 1 beyond {tol_trace:.1e}")
        return cls(op=op, herm_defect=defect, min_eig=lo, trace_defect=abs(tr - 1.0))

    @property
    def sites(self) -> tuple[Site, ...]:
        return self.op.sites

    @property
    def support(self) -> tuple[str, ...]:
        return self.op.support

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix


def _permute_modes(matrix: np.ndarray, dims: Sequence[int],
                   order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square matrix.

    ``order[k]`` names the current position of the factor that ends up at
    position k.  Acts on rows and columns simultaneously.
    """
    n = len(dims)
    if n <= 1:
        return np.array(matrix)
    tens = matrix.reshape(*dims, *dims)
    perm = list(order) + [n + i for i in order]
    tens = np.transpose(tens, perm)
    new_dims = [dims[i] for i in order]
    total = int(np.prod(new_dims))
    return np.ascontiguousarray(tens.reshape(total, total))


def partial_trace(op: Operator, traced: Iterable[str]) -> Operator:
    """Trace out the named sites, keeping canonical order on the rest."""
    traced = set(traced)
    unknown = traced - set(op.support)
    if unknown:
        raise SupportMismatch(
            f"cannot trace out {sorted(unknown)}; support is {op.support}"
        )
    if not traced:
        return op
    dims = op.dims
    n = len(dims)
    tens = op.matrix.reshape(*dims, *dims) if n > 0 else op.matrix
    remaining = list(op.sites)
    for label in sorted(traced, reverse=True):
        pos = next(i for i, site in enumerate(remaining) if site[0] == label)
        k = len(remaining)
        tens = np.trace(tens, axis1=pos, axis2=pos + k)
        remaining.pop(pos)
    total = int(np.prod([dim for _, dim in remaining])) if remaining else 1
    return Operator(tuple(remaining), tens.reshape(total, total))


def _embed_to(op: Operator, target: Sequence[Site]) -> Operator:
    """Tensor with identities so the result acts on exactly ``target``."""
    target = _check_sites(target)
    have = dict(op.sites)
    for label, dim in target:
        if label in have and have[label] != dim:
            raise SupportMismatch(
                f"site {label!r} has dim {have[label]} in the operand "
                f"but {dim} in the target"
            )
    missing = set(op.support) - {label for label, _ in target}
    if missing:
        raise SupportMismatch(
            f"operand support {op.support} is not contained in the target "
            f"{tuple(label for label, _ in target)}"
        )
    added = tuple(site for site in target if site[0] not in have)
    if not added:
        return op
    extra = int(np.prod([dim for _, dim in added]))
    big = np.kron(op.matrix, np.eye(extra, dtype=np.complex128))
    # Site order after the kron is (op sites..., added sites...); the
    # Operator constructor permutes back to canonical order.
    return Operator(op.sites + added, big)


def embed(op: Operator, layout: SystemLayout, target: Iterable[str]) -> Operator:
    """Embed ``op`` into the sites ``target`` of ``layout``.

    The operand's support must be contained in the target and agree with
    the layout on every shared site dimension.
    """
    target_sites = layout.subset(target)
    for label, dim in op.sites:
        if label in {l for l, _ in target_sites} and layout.dim_of(label) != dim:
            raise SupportMismatch(
                f"site {label!r}: operand dim {dim} vs layout dim {layout.dim_of(label)}"
            )
    return _embed_to(op, target_sites)


def _union_sites(a: Operator, b: Operator) -> tuple[Site, ...]:
    merged = dict(a.sites)
    for label, dim in b.sites:
        if label in merged and merged[label] != dim:
            raise SupportMismatch(
                f"site {label!r} has dim {merged[label]} on one operand "
                f"and {dim} on the other"
            )
        merged[label] = dim
    return tuple(sorted(merged.items()))


def odot(m: Operator, n: Operator, *, tol_herm: float = TOL_HERM,
         pd_floor: float = PD_FLOOR) -> Operator:
    """Log-domain product exp(log M + log N) on the unified support.

    Commutative and associative by construction; reduces to the ordinary
    product when the operands commute.  Both operands must be positive
    definite.
    """
    union = _union_sites(m, n)
    lm = matrix_func(_embed_to(m, union), "log", tol_herm=tol_herm, pd_floor=pd_floor)
    ln = matrix_func(_embed_to(n, union), "log", tol_herm=tol_herm, pd_floor=pd_floor)
    return matrix_func(lm + ln, "exp", tol_herm=max(tol_herm, 1e-8))


def star(m: Operator, n: Operator, *, tol_herm: float = TOL_HERM,
         pd_floor: float = PD_FLOOR) -> Operator:
    """Sandwich product N^{1/2} M N^{1/2} on the unified support.

    Preserves Hermiticity and positivity of M; the trace equals Tr(M N).
    """
    union = _union_sites(m, n)
    me = _embed_to(m, union)
    root = matrix_func(_embed_to(n, union), "sqrt", tol_herm=tol_herm,
                       pd_floor=pd_floor)
    return root @ me @ root


def is_normal(op: Operator, tol: float = TOL_HERM) -> tuple[bool, float]:
    """Whether K commutes with its adjoint.

    Returns the verdict together with the defect ||K K^dag - K^dag K||_F;
    the comparison is against ``tol`` times ||K||_F^2 so the answer does
    not depend on the scale of K.
    """
    k = op.matrix
    comm = k @ k.conj().T - k.conj().T @ k
    defect = float(np.linalg.norm(comm))
    scale = float(np.linalg.norm(k)) ** 2
    return defect <= tol * max(scale, 1.0e-300), defect
