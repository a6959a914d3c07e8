"""Polynomial eigenvalue transformation of block-encoded Hermitian operators.

The transformation is realised exact-spectrally: the (Hermitian part of the)
encoded corner is diagonalised, the polynomial applied to its eigenvalues, and
the result dilated back to a unitary.  Query counts are tracked symbolically as
the polynomial degree.  Two ancilla qubits are added per transformation, the
second one idle, so ancilla arithmetic matches the usual ``a + 2`` convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .polyapprox import CertifiedPolynomial
from .qcore import (BlockEncoding, DensityMatrix, DimensionError, UnitaryMatrix, dagger,
                    dilate_to_unitary, embed_ancilla_identity, matrix_function, num_qubits, operator_norm)

HAMILTONIAN_T_CAP = 50.0


class TransformError(ValueError):
    """Raised for uncertified polynomials, non-Hermitian targets or capped parameters."""


@dataclass(frozen=True, eq=False)
class EigenTransformResult:
    encoding: BlockEncoding
    query_count: int
    added_ancillas: int
    realized_error: float
    error_bound: float


def hermitian_corner(u: BlockEncoding) -> np.ndarray:
    """``(M + M^dag) / 2`` for ``M = <0|_a U |0>_a`` (the encoded ``A / alpha``)."""
    m = u.corner()
    return (m + dagger(m)) / 2


def eigen_transform(u: BlockEncoding, p: CertifiedPolynomial, delta: float = 0.0) -> EigenTransformResult:
    """Block-encode ``p(A / alpha)`` with two extra ancilla qubits.

    The realised corner is ``p`` applied to the Hermitian part of the *actual*
    corner of ``u``, so encoding errors of ``u`` propagate honestly.  The stated
    error is ``4 d sqrt(eps / alpha) + delta``.
    """
    if not p.certified:
        raise TransformError("polynomial is not certified")
    if p.global_bound() > 0.5 + 1e-12:
        raise TransformError(f"polynomial global bound {p.global_bound()} exceeds 1/2")
    target = u.target if u.target is not None else u.scale * u.corner()
    if np.max(np.abs(target - dagger(target))) > 1e-9:
        raise TransformError("target operator is not Hermitian")
    if delta < 0:
        raise TransformError("delta must be non-negative")
    h = hermitian_corner(u)
    realized = matrix_function(h, p)
    # |p| <= 1/2 on [-1, 1]; guard the dilation against rounding only
    dil = dilate_to_unitary(realized)
    full = embed_ancilla_identity(dil.data, u.ancilla_qubits + 1)
    if u.scale > 0 and np.max(np.abs(h - target / u.scale)) <= 1e-14:
        nominal = realized  # corner already exact; avoid a second high-degree evaluation
    elif u.scale > 0:
        nominal = matrix_function(target / u.scale, p)
    else:
        nominal = matrix_function(np.zeros_like(target), p)
    realized_error = operator_norm(realized - nominal)
    d = p.degree
    bound = 4 * d * math.sqrt(u.encoding_error / u.scale) + delta if u.scale > 0 else delta
    bound = max(bound, realized_error)
    enc = BlockEncoding(UnitaryMatrix(full), u.system_qubits, u.ancilla_qubits + 2, 1.0,
                        bound + 1e-12, nominal, u.query_count + d)
    return EigenTransformResult(enc, u.query_count + d, 2, realized_error, bound)


@dataclass(frozen=True)
class HadamardTestResult:
    """Outcome probabilities of the one-ancilla interference circuit."""

    p_one: float
    part: str

    @property
    def bias(self) -> float:
        return 2 * self.p_one - 1

    def sample(self, shots: int, rng: np.random.Generator) -> int:
        return int(rng.binomial(shots, self.p_one))


def hadamard_test(u: BlockEncoding, rho: DensityMatrix, part: str = "real") -> HadamardTestResult:
    """Simulate the Hadamard test on ``rho (x) |0><0|_a``.

    The control qubit starts in ``|+>``, controls ``U``, passes through ``S^dag``
    for the imaginary variant, and is measured after a Hadamard; the returned
    ``p_one`` is the probability of the outcome whose bias is
    ``Re tr(<0|U|0> rho)`` (respectively ``Im``).
    """
    if u.scale != 1:
        raise TransformError("the Hadamard test needs a scale-1 block-encoding")
    if u.system_dim != rho.dim:
        raise DimensionError("block-encoding and state dimensions differ")
    if part not in ("real", "imag"):
        raise TransformError("part must be 'real' or 'imag'")
    w, v = np.linalg.eigh(rho.data)
    anc = 2 ** u.ancilla_qubits
    total = 0.0
    phase = 1.0 if part == "real" else -1j
    for wi, vi in zip(w, v.T):
        if wi <= 1e-15:
            continue
        psi = np.zeros(u.unitary.dim, dtype=complex)
        psi[::anc] = vi
        # control |0>: identity branch; control |1>: U branch (with S^dag phase)
        b0 = psi / math.sqrt(2)
        b1 = phase * (u.unitary.data @ psi) / math.sqrt(2)
        # Hadamard on the control, keep the '+' output
        out = (b0 + b1) / math.sqrt(2)
        total += wi * float(np.vdot(out, out).real)
    return HadamardTestResult(float(np.clip(total, 0.0, 1.0)), part)


def hadamard_probability(corner: np.ndarray, rho: DensityMatrix, part: str = "real") -> float:
    """Closed form ``(1 + Re tr(A rho)) / 2`` (or ``Im``) used as an oracle."""
    z = np.trace(corner @ rho.data)
    return float((1 + (z.real if part == "real" else z.imag)) / 2)


def hamiltonian_simulation(u: BlockEncoding, t: float, eps: float) -> BlockEncoding:
    """``(1, a + 2, eps)``-block-encoding of ``exp(-i H t)``.

    The evolution is realised exactly from the encoded ``H = alpha * corner``;
    the reported query count follows the ``|t| + log(1/eps)`` law.
    """
    if abs(t) > HAMILTONIAN_T_CAP:
        raise TransformError(f"|t| = {abs(t)} exceeds the cap {HAMILTONIAN_T_CAP}")
    if not 0 < eps < 1:
        raise TransformError("eps must lie in (0, 1)")
    h = u.scale * hermitian_corner(u)
    evo = matrix_function(h, lambda x: np.exp(-1j * x * t))
    dil = dilate_to_unitary(evo)
    full = embed_ancilla_identity(dil.data, u.ancilla_qubits + 1)
    target_h = u.target if u.target is not None else h
    target = matrix_function((target_h + dagger(target_h)) / 2, lambda x: np.exp(-1j * x * t))
    err = operator_norm(evo - target)
    queries = math.ceil(abs(t) + math.log(1 / eps))
    return BlockEncoding(UnitaryMatrix(full), u.system_qubits, u.ancilla_qubits + 2, 1.0,
                         max(eps, err + 1e-12), target, u.query_count + queries)


def block_encode_hermitian(a: np.ndarray, scale: float = 1.0) -> BlockEncoding:
    """``(scale, 1, 0)``-block-encoding of ``a`` by one-qubit dilation of ``a / scale``."""
    a = np.asarray(a, dtype=complex)
    u = dilate_to_unitary(a / scale)
    return BlockEncoding(u, num_qubits(a.shape[0]), 1, scale, 0.0, a, 0)
