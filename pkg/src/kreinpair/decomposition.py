"""Splitting of a dissipative operator into symmetric and defect parts.

The symmetric part lives on the kernel of the dissipation form, the defect
part on its graph-orthogonal complement inside the domain.  The defect
domain can be recomputed independently through the resolvent-type formula
``(JT + iI)^{-1}(deficiency cap range)``; the two routes are kept separate
so they can cross-check each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ClassificationError, DomainError, PipelineError
from .krein import NEITHER, SYMMETRIC, OperatorWithDomain
from .krein import krein_adjoint
from .subspaces import (
    LinearRelation,
    Subspace,
    eigenspace,
    gap_distance,
    intersect,
    null_space,
    orthonormal_span,
)

__all__ = [
    "Splitting",
    "DeficiencyData",
    "symmetric_part",
    "dissipative_part",
    "split",
    "graph_orthocomplement_within",
    "deficiency_space",
    "defect_domain_via_resolvent",
    "defect_inner",
]


@dataclass(frozen=True)
class Splitting:
    """Componentwise orthogonal decomposition T = S (+) N in graph norm."""

    symmetric: OperatorWithDomain
    defect: OperatorWithDomain
    defect_gram: np.ndarray  # dissipation form on defect-domain coordinates

    @property
    def defect_dim(self) -> int:
        return self.defect.domain.dim


@dataclass(frozen=True)
class DeficiencyData:
    """Deficiency subspace of the symmetric part and the attached projector.

    ``projector`` is the orthogonal projector, in the Hilbert product
    ``[x, J y]`` (Euclidean in these coordinates), onto the intersection of
    the deficiency subspace with the range of ``JT + iI``.
    """

    deficiency: Subspace
    resolvent_range: Subspace
    intersection: Subspace
    projector: np.ndarray


def _form_kernel_domain(op: OperatorWithDomain) -> Subspace:
    gram = op.dissipation_gram
    if gram.shape[0] == 0:
        return Subspace.zero(op.space.dim, op.tol)
    w, v = np.linalg.eigh(gram)
    largest = float(np.max(np.abs(w)))
    if largest <= op.tol * op._form_scale:
        kernel = np.eye(gram.shape[0], dtype=np.complex128)
    else:
        kernel = v[:, np.abs(w) <= op.tol * largest]
    return orthonormal_span(op.domain.basis @ kernel, op.space.dim, op.tol,
                            scale=1.0)


def symmetric_part(op: OperatorWithDomain) -> OperatorWithDomain:
    """Restriction of T to the kernel of the dissipation form."""
    if op.classify() == NEITHER:
        raise ClassificationError("symmetric part needs a dissipative operator")
    result = op.restricted(_form_kernel_domain(op))
    if result.classify() != SYMMETRIC:
        raise PipelineError("restriction to the form kernel is not symmetric")
    return result


def graph_orthocomplement_within(op: OperatorWithDomain,
                                 sub: Subspace) -> Subspace:
    """Orthocomplement of ``sub`` inside the domain, in the graph product."""
    b = op.domain.basis
    coords = b.conj().T @ sub.basis
    rows = coords.conj().T @ op.graph_gram
    coeffs = null_space(rows, op.tol)
    return orthonormal_span(b @ coeffs, op.space.dim, op.tol)


def dissipative_part(op: OperatorWithDomain,
                     sym: OperatorWithDomain) -> OperatorWithDomain:
    """Restriction of T to the graph-orthogonal complement of the symmetric
    domain; together with the symmetric part it sums componentwise to T."""
    if gap_distance(sym.domain, _form_kernel_domain(op)) > 1e-8:
        raise PipelineError("inconsistent symmetric part")
    domain = graph_orthocomplement_within(op, sym.domain)
    if domain.dim + sym.domain.dim != op.domain.dim:
        raise PipelineError("graph-orthogonal split has the wrong dimensions")
    return op.restricted(domain)


def split(op: OperatorWithDomain) -> Splitting:
    sym = symmetric_part(op)
    defect = dissipative_part(op, sym)
    bn = defect.domain.basis
    gram = bn.conj().T @ op.dissipation_matrix @ bn
    gram = 0.5 * (gram + gram.conj().T)
    if gram.shape[0]:
        eigs = np.linalg.eigvalsh(gram)
        if eigs[0] <= op.tol * float(np.max(np.abs(eigs))):
            raise PipelineError("dissipation form is degenerate on the defect domain")
    return Splitting(symmetric=sym, defect=defect, defect_gram=gram)


def _j_composed(rel: LinearRelation, j: np.ndarray) -> LinearRelation:
    """The relation {(x, J y) : (x, y) in rel}."""
    g = rel.graph.basis
    top, bot = g[: rel.left_dim], g[rel.left_dim:]
    stacked = np.vstack([top, j @ bot])
    graph = orthonormal_span(stacked, rel.left_dim + rel.right_dim, rel.tol)
    return LinearRelation(rel.left_dim, rel.right_dim, graph)


def deficiency_space(sym: OperatorWithDomain,
                     op: OperatorWithDomain) -> DeficiencyData:
    """Deficiency subspace at +i of the symmetric part's adjoint.

    The subspace is the eigenspace at +i of J composed with the adjoint
    relation, intersected with the range of ``JT + iI`` over the domain of T.
    """
    if sym.classify() != SYMMETRIC:
        raise ClassificationError("deficiency space needs the symmetric part")
    j = op.space.J
    adj = krein_adjoint(sym)
    n_plus = eigenspace(_j_composed(adj, j), 1j)
    shifted = j @ op.matrix @ op.domain.basis + 1j * op.domain.basis
    rng = orthonormal_span(shifted, op.space.dim, op.tol)
    meet = intersect(n_plus, rng)
    return DeficiencyData(
        deficiency=n_plus,
        resolvent_range=rng,
        intersection=meet,
        projector=meet.projector(),
    )


def defect_domain_via_resolvent(op: OperatorWithDomain,
                                defi: DeficiencyData) -> Subspace:
    """Preimage of the deficiency intersection under ``JT + iI``.

    ``JT`` is dissipative in the Hilbert product, so ``JT + iI`` is bounded
    below by 1 on the domain; a small minimal singular value therefore
    signals a dissipativity violation upstream.
    """
    b = op.domain.basis
    if b.shape[1] == 0:
        return Subspace.zero(op.space.dim, op.tol)
    shifted = op.space.J @ op.matrix @ b + 1j * b
    smin = float(np.linalg.svd(shifted, compute_uv=False)[-1])
    if smin < 0.5:
        raise PipelineError(
            f"JT + iI is nearly singular on the domain (sigma_min = {smin:.3e})"
        )
    q = defi.intersection.basis
    residual_rows = shifted - q @ (q.conj().T @ shifted)
    coeffs = null_space(residual_rows, op.tol, scale=float(np.linalg.norm(shifted, 2)))
    return orthonormal_span(b @ coeffs, op.space.dim, op.tol, scale=1.0)


def defect_inner(splitting: Splitting, x, y) -> complex:
    """The positive inner product carried by the defect domain.

    Equals the dissipation form of the original operator; both arguments
    must lie in the defect domain.
    """
    domain = splitting.defect.domain
    xv = np.asarray(x, dtype=np.complex128).reshape(-1)
    yv = np.asarray(y, dtype=np.complex128).reshape(-1)
    for v in (xv, yv):
        if not domain.contains(v):
            raise DomainError("defect inner product needs defect-domain vectors")
    return complex(np.vdot(xv, splitting.defect.dissipation_matrix @ yv))
