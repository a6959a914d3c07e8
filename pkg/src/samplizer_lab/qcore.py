"""Dense complex linear algebra for states, unitaries and channels.

Everything here is a pure function over immutable values.  Registers are
ordered system-first: an ancilla register is always the trailing (fastest
varying) tensor factor, so ``<0|_a U |0>_a`` is ``U[::2**a, ::2**a]``.
"""
from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Callable, Iterable, Sequence

import numpy as np

DEFAULT_MAX_DIM = 2 ** 12
SDP_MAX_IN_DIM = 16

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
RANK_TOL = 1e-9
UNITARY_TOL = 1e-9
CHANNEL_TOL = 1e-9


class DimensionError(ValueError):
    """Raised when shapes disagree or exceed the configured dimension cap."""


def max_dim() -> int:
    """Maximum total Hilbert-space dimension (``SAMPLIZER_LAB_MAX_DIM`` overrides)."""
    value = os.environ.get("SAMPLIZER_LAB_MAX_DIM")
    return int(value) if value else DEFAULT_MAX_DIM


def _check_dim(d: int) -> None:
    if d > max_dim():
        raise DimensionError(f"dimension {d} exceeds the cap {max_dim()}")


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(a))


def num_qubits(d: int) -> int:
    n = int(round(np.log2(d)))
    if 2 ** n != d:
        raise DimensionError(f"dimension {d} is not a power of two")
    return n


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Positive semidefinite, unit-trace matrix with an optional rank hint."""

    data: np.ndarray
    rank_hint: int | None = None

    def __post_init__(self):
        m = _frozen(self.data)
        object.__setattr__(self, "data", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        _check_dim(m.shape[0])
        if np.max(np.abs(m - dagger(m))) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > TRACE_TOL:
            raise ValueError(f"density matrix trace is {np.trace(m).real}, not 1")
        w = np.linalg.eigvalsh(m)
        if w[0] < -PSD_TOL:
            raise ValueError(f"density matrix has eigenvalue {w[0]:.3e} < 0")
        if self.rank_hint is not None:
            rank = int(np.sum(w > RANK_TOL))
            if rank != self.rank_hint:
                raise ValueError(f"rank_hint={self.rank_hint} but numerical rank is {rank}")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @cached_property
    def spectrum(self) -> np.ndarray:
        """Eigenvalues, ascending, with tiny negative drift clipped to zero."""
        w = np.linalg.eigvalsh(self.data)
        return np.where(w < 0, 0.0, w)

    @property
    def rank(self) -> int:
        return int(np.sum(self.spectrum > RANK_TOL))

    @classmethod
    def from_pure(cls, psi, rank_hint: int | None = 1) -> "DensityMatrix":
        v = np.asarray(psi, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), rank_hint)

    @classmethod
    def from_spectrum(cls, eigenvalues, eigenvectors=None, rank_hint=None) -> "DensityMatrix":
        w = np.asarray(eigenvalues, dtype=float)
        if eigenvectors is None:
            return cls(np.diag(w).astype(complex), rank_hint)
        v = np.asarray(eigenvectors, dtype=complex)
        return cls(v @ np.diag(w) @ dagger(v), rank_hint)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim, dim)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        v = _frozen(np.ravel(self.amplitudes))
        object.__setattr__(self, "amplitudes", v)
        if abs(np.linalg.norm(v) - 1) > 1e-10:
            raise ValueError("pure state is not normalised")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self.amplitudes)


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    data: np.ndarray

    def __post_init__(self):
        u = _frozen(self.data)
        object.__setattr__(self, "data", u)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise DimensionError(f"unitary must be square, got {u.shape}")
        _check_dim(u.shape[0])
        err = np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0]))
        if err > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (|U^dag U - I|_F = {err:.2e})")

    @property
    def dim(self) -> int:
        return self.data.shape[0]


def corner(u: np.ndarray, ancilla_qubits: int) -> np.ndarray:
    """``<0|_a U |0>_a`` for a trailing ancilla register of ``ancilla_qubits`` qubits."""
    u = np.asarray(u)
    step = 2 ** ancilla_qubits
    return u[::step, ::step]


@dataclass(frozen=True, eq=False)
class BlockEncoding:
    """Unitary ``U`` with ``|scale * <0|_a U |0>_a - target| <= encoding_error``."""

    unitary: UnitaryMatrix
    system_qubits: int
    ancilla_qubits: int
    scale: float = 1.0
    encoding_error: float = 0.0
    target: np.ndarray | None = None
    query_count: int = 0

    def __post_init__(self):
        if self.unitary.dim != 2 ** (self.system_qubits + self.ancilla_qubits):
            raise DimensionError("unitary size does not match system + ancilla qubits")
        if self.scale < 0 or self.encoding_error < 0:
            raise ValueError("scale and encoding error must be non-negative")
        if self.target is not None:
            t = _frozen(self.target)
            object.__setattr__(self, "target", t)
            dev = self.deviation()
            if dev > self.encoding_error + 1e-9:
                raise ValueError(
                    f"block-encoding deviation {dev:.3e} exceeds stated error {self.encoding_error:.3e}")

    @property
    def system_dim(self) -> int:
        return 2 ** self.system_qubits

    def corner(self) -> np.ndarray:
        return corner(self.unitary.data, self.ancilla_qubits)

    def deviation(self, target: np.ndarray | None = None) -> float:
        """Operator-norm distance between ``scale * corner`` and the target."""
        t = self.target if target is None else target
        return operator_norm(self.scale * self.corner() - t)


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map stored as a Kraus set; Choi and superoperator forms are derived."""

    in_dim: int
    out_dim: int
    kraus: tuple

    def __post_init__(self):
        ks = tuple(_frozen(k) for k in self.kraus)
        if not ks:
            raise ValueError("a channel needs at least one Kraus operator")
        for k in ks:
            if k.shape != (self.out_dim, self.in_dim):
                raise DimensionError(f"Kraus operator shape {k.shape} != {(self.out_dim, self.in_dim)}")
        object.__setattr__(self, "kraus", ks)
        _check_dim(max(self.in_dim, self.out_dim))
        tp = sum(dagger(k) @ k for k in ks)
        err = np.max(np.abs(tp - np.eye(self.in_dim)))
        if err > CHANNEL_TOL:
            raise ValueError(f"channel is not trace preserving (deviation {err:.2e})")

    @cached_property
    def _stack(self) -> tuple[np.ndarray, np.ndarray]:
        ks = np.stack(self.kraus)
        return ks, np.conj(np.swapaxes(ks, 1, 2))

    def __call__(self, rho) -> np.ndarray:
        r = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
        ks, kd = self._stack
        return (ks @ r @ kd).sum(axis=0)

    def adjoint(self, m: np.ndarray) -> np.ndarray:
        ks, kd = self._stack
        return (kd @ m @ ks).sum(axis=0)

    @cached_property
    def choi(self) -> np.ndarray:
        """``J = sum_kl E(|k><l|) (x) |k><l|`` on output (x) input."""
        j = np.zeros((self.out_dim * self.in_dim,) * 2, dtype=complex)
        for k in self.kraus:
            v = k.reshape(-1)  # vec with input index fastest: |out, in>
            j += np.outer(v, v.conj())
        return j

    @cached_property
    def superoperator(self) -> np.ndarray:
        """Matrix acting on row-major ``vec(rho)``."""
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    @property
    def is_unitary(self) -> bool:
        if len(self.kraus) != 1 or self.in_dim != self.out_dim:
            return False
        k = self.kraus[0]
        return np.linalg.norm(dagger(k) @ k - np.eye(self.in_dim)) < 1e-9

    def check_choi(self) -> float:
        """Smallest Choi eigenvalue (should be >= -1e-9)."""
        return float(np.linalg.eigvalsh(self.choi)[0])


# ---------------------------------------------------------------------------
# Basic constructors
# ---------------------------------------------------------------------------

def tensor(*ops) -> np.ndarray:
    """Kronecker product, second factor fastest."""
    mats = [np.asarray(o.data if hasattr(o, "data") else o) for o in ops]
    shape = [1, 1]
    for m in mats:
        s = m.shape if m.ndim == 2 else (m.shape[0], 1)
        shape = [shape[0] * s[0], shape[1] * s[1]]
    _check_dim(max(shape))
    return reduce(np.kron, mats)


def partial_trace(state, keep: Iterable[int], dims: Sequence[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``."""
    m = state.data if isinstance(state, DensityMatrix) else np.asarray(state)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != m.shape[0] or m.shape[0] != m.shape[1]:
        raise DimensionError(f"dims {dims} do not match matrix of shape {m.shape}")
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} factors")
    t = m.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out = [row[i] for i in keep] + [col[i] for i in keep]
    res = np.einsum("".join(row) + "".join(col) + "->" + "".join(out), t)
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return res.reshape(d, d)


def reduced_state(state: DensityMatrix, keep, dims) -> DensityMatrix:
    r = partial_trace(state, keep, dims)
    return DensityMatrix((r + dagger(r)) / 2)


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1
    return v


def projector(index: int, dim: int) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    p[index, index] = 1
    return p


def swap_operator(d: int) -> np.ndarray:
    """SWAP on ``C^d (x) C^d``."""
    s = np.zeros((d * d, d * d))
    idx = np.arange(d)
    s[(idx[:, None] * d + idx[None, :]).ravel(), (idx[None, :] * d + idx[:, None]).ravel()] = 1
    return s


def embed_ancilla_identity(u: np.ndarray, extra_qubits: int) -> np.ndarray:
    """Append ``extra_qubits`` idle ancilla qubits (identity) after the register of ``u``."""
    return np.kron(u, np.eye(2 ** extra_qubits))


# ---------------------------------------------------------------------------
# Norms and state distances
# ---------------------------------------------------------------------------

def trace_norm(a: np.ndarray) -> float:
    a = np.asarray(a)
    if a.shape[0] == a.shape[1] and np.allclose(a, dagger(a), atol=1e-13):
        return float(np.sum(np.abs(np.linalg.eigvalsh((a + dagger(a)) / 2))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def operator_norm(a: np.ndarray) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def trace_norm_distance_states(a: DensityMatrix, b: DensityMatrix) -> float:
    """``|a - b|_1`` (twice the usual trace distance)."""
    if a.dim != b.dim:
        raise DimensionError("states have different dimensions")
    return trace_norm(a.data - b.data)


def fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Root fidelity ``|sqrt(a) sqrt(b)|_1``."""
    sa = matrix_function(a.data, np.sqrt)
    sb = matrix_function(b.data, np.sqrt)
    return float(np.sum(np.linalg.svd(sa @ sb, compute_uv=False)))


# ---------------------------------------------------------------------------
# Matrix functions and entropies (exact oracles)
# ---------------------------------------------------------------------------

def matrix_function(h: np.ndarray, f: Callable[[np.ndarray], np.ndarray], psd: bool = False) -> np.ndarray:
    """Apply ``f`` to the eigenvalues of the Hermitian matrix ``h``.

    With ``psd=True`` eigenvalues in ``[-1e-10, 0)`` are clipped to zero first.
    """
    h = np.asarray(h.data if isinstance(h, DensityMatrix) else h)
    w, v = np.linalg.eigh((h + dagger(h)) / 2)
    if psd or isinstance(h, DensityMatrix):
        w = np.where((w < 0) & (w >= -PSD_TOL), 0.0, w)
    fw = np.asarray(f(w))
    return (v * fw) @ dagger(v)


def _xlogx(w: np.ndarray) -> np.ndarray:
    out = np.zeros_like(w, dtype=float)
    pos = w > 1e-14
    out[pos] = w[pos] * np.log(w[pos])
    return out


def von_neumann_entropy(rho: DensityMatrix) -> float:
    return float(-np.sum(_xlogx(rho.spectrum)))


def renyi_moment(rho: DensityMatrix, alpha: float) -> float:
    """``P_alpha = tr(rho^alpha)`` over the support of ``rho``."""
    w = rho.spectrum
    w = w[w > 1e-14]
    return float(np.sum(w ** alpha))


def renyi_entropy(rho: DensityMatrix, alpha: float) -> float:
    if alpha == 1:
        return von_neumann_entropy(rho)
    return float(np.log(renyi_moment(rho, alpha)) / (1 - alpha))


# ---------------------------------------------------------------------------
# Dilation
# ---------------------------------------------------------------------------

def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + dagger(m)) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ dagger(v)


def dilate_to_unitary(a: np.ndarray) -> UnitaryMatrix:
    """One-qubit unitary dilation whose ``<0|.|0>`` corner is exactly ``a``.

    ``U = a (x) |0><0| + sqrt(I - a a^dag) (x) |0><1| + sqrt(I - a^dag a) (x) |1><0| - a^dag (x) |1><1|``
    with the dilation qubit trailing.
    """
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError("dilation needs a square matrix")
    norm = operator_norm(a)
    if norm > 1 + 1e-12:
        raise ValueError(f"cannot dilate: operator norm {norm:.6g} exceeds 1")
    if norm > 1:
        a = a / norm
    # shared singular vectors keep the defect operators accurate near norm 1
    w, s, vh = np.linalg.svd(a)
    c = np.sqrt(np.clip(1 - s ** 2, 0, None))
    top = (w * c) @ dagger(w)
    bottom = (dagger(vh) * c) @ vh
    e00, e01, e10, e11 = (projector(0, 2), np.array([[0, 1], [0, 0]]),
                          np.array([[0, 0], [1, 0]]), projector(1, 2))
    u = np.kron(a, e00) + np.kron(top, e01) + np.kron(bottom, e10) - np.kron(dagger(a), e11)
    return UnitaryMatrix(u)


# ---------------------------------------------------------------------------
# Channels
# ---------------------------------------------------------------------------

def unitary_channel(u) -> QuantumChannel:
    m = u.data if isinstance(u, UnitaryMatrix) else np.asarray(u)
    return QuantumChannel(m.shape[1], m.shape[0], (m,))


def identity_channel(dim: int) -> QuantumChannel:
    return unitary_channel(np.eye(dim))


def depolarizing_channel(dim: int, p: float) -> QuantumChannel:
    """``rho -> (1-p) rho + p I/dim`` as a Kraus set (Weyl operators)."""
    if not 0 <= p <= 1 + 1 / (dim * dim - 1):
        raise ValueError("depolarizing probability out of range")
    omega = np.exp(2j * np.pi / dim)
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(omega ** np.arange(dim))
    ks = []
    for a in range(dim):
        for b in range(dim):
            w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            coef = 1 - p + p / dim ** 2 if (a, b) == (0, 0) else p / dim ** 2
            if coef > 0:
                ks.append(np.sqrt(coef) * w)
    return QuantumChannel(dim, dim, tuple(ks))


PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_channel(px: float = 0.0, py: float = 0.0, pz: float = 0.0) -> QuantumChannel:
    probs = {"I": 1 - px - py - pz, "X": px, "Y": py, "Z": pz}
    ks = tuple(np.sqrt(p) * PAULI[k] for k, p in probs.items() if p > 0)
    return QuantumChannel(2, 2, ks)


def compose(*channels: QuantumChannel) -> QuantumChannel:
    """``compose(A, B, C)`` applies ``C`` first, then ``B``, then ``A``."""
    ks = [np.eye(channels[-1].in_dim, dtype=complex)]
    for ch in reversed(channels):
        ks = [k2 @ k1 for k2 in ch.kraus for k1 in ks]
    out = channels[0].out_dim
    return channel_from_kraus(ks, channels[-1].in_dim, out)


def tensor_channels(a: QuantumChannel, b: QuantumChannel) -> QuantumChannel:
    ks = [np.kron(x, y) for x in a.kraus for y in b.kraus]
    return QuantumChannel(a.in_dim * b.in_dim, a.out_dim * b.out_dim, tuple(ks))


def channel_from_kraus(ks, in_dim: int, out_dim: int, compress_above: int = 64) -> QuantumChannel:
    """Build a channel, re-diagonalising through the Choi matrix if the Kraus set grows large."""
    ks = list(ks)
    if len(ks) > max(compress_above, in_dim * out_dim):
        j = sum(np.outer(k.reshape(-1), k.reshape(-1).conj()) for k in ks)
        return channel_from_choi(j, in_dim, out_dim)
    return QuantumChannel(in_dim, out_dim, tuple(ks))


def channel_from_choi(j: np.ndarray, in_dim: int, out_dim: int, cutoff: float = 1e-13) -> QuantumChannel:
    w, v = np.linalg.eigh((j + dagger(j)) / 2)
    ks = [np.sqrt(wi) * v[:, i].reshape(out_dim, in_dim) for i, wi in enumerate(w) if wi > cutoff]
    return QuantumChannel(in_dim, out_dim, tuple(ks))


def channel_from_superoperator(s: np.ndarray, in_dim: int, out_dim: int) -> QuantumChannel:
    """Inverse of :attr:`QuantumChannel.superoperator` (row-major vectorisation)."""
    s4 = np.asarray(s).reshape(out_dim, out_dim, in_dim, in_dim)
    j = np.einsum("ijkl->ikjl", s4).reshape(out_dim * in_dim, out_dim * in_dim)
    return channel_from_choi(j, in_dim, out_dim)


def apply_to_subsystem(ch: QuantumChannel, dims: Sequence[int], target: int) -> QuantumChannel:
    """Lift ``ch`` acting on factor ``target`` of ``dims`` to the whole register (identity elsewhere)."""
    left = int(np.prod(dims[:target]))
    right = int(np.prod(dims[target + 1:]))
    ks = tuple(np.kron(np.kron(np.eye(left), k), np.eye(right)) for k in ch.kraus)
    return QuantumChannel(left * ch.in_dim * right, left * ch.out_dim * right, ks)


def unitary_conjugation(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return u @ rho @ dagger(u)


# ---------------------------------------------------------------------------
# Channel distances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistanceEstimate:
    """Best value of a multi-restart maximisation (a certified lower estimate)."""

    value: float
    gap: float
    converged: bool
    restarts: int
    argmax: np.ndarray = field(repr=False, default=None)

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class DiamondBracket:
    lower: float
    upper: float
    method: str
    coarse: bool = False

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _check_pair(e: QuantumChannel, f: QuantumChannel):
    if (e.in_dim, e.out_dim) != (f.in_dim, f.out_dim):
        raise DimensionError("channels act on different spaces")


def _bloch_grid(n_theta: int = 7, n_phi: int = 8) -> list:
    pts = [np.array([1, 0], complex), np.array([0, 1], complex)]
    for th in np.linspace(0, np.pi, n_theta)[1:-1]:
        for ph in np.linspace(0, 2 * np.pi, n_phi, endpoint=False):
            pts.append(np.array([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)]))
    return pts


def _alternating_ascent(e: QuantumChannel, f: QuantumChannel, starts, max_iter: int = 200,
                        tol: float = 1e-13):
    """Locally maximise ``|(e - f)(psi psi^dag)|_1`` from each start vector."""

    def objective(psi):
        rho = np.outer(psi, psi.conj())
        diff = e(rho) - f(rho)
        return trace_norm(diff), diff

    values, vectors = [], []
    for psi in starts:
        val, diff = objective(psi)
        for _ in range(max_iter):
            w, v = np.linalg.eigh((diff + dagger(diff)) / 2)
            sign = (v * np.sign(w)) @ dagger(v)
            g = e.adjoint(sign) - f.adjoint(sign)
            gw, gv = np.linalg.eigh((g + dagger(g)) / 2)
            cand = gv[:, -1]
            new_val, new_diff = objective(cand)
            if new_val <= val + tol:
                break
            psi, val, diff = cand, new_val, new_diff
        values.append(val)
        vectors.append(psi)
    return values, vectors


def channel_trace_distance(e: QuantumChannel, f: QuantumChannel, restarts: int = 32,
                           seed: int = 0, max_iter: int = 200, tol: float = 1e-13) -> DistanceEstimate:
    """``sup_psi |(e - f)(psi)|_1`` over pure inputs, by alternating maximisation.

    For a fixed sign operator ``M = sign((e-f)(psi))`` the objective
    ``tr(M (e-f)(psi))`` is maximised by the top eigenvector of ``(e-f)^dag(M)``;
    alternating the two steps increases the objective monotonically.
    """
    _check_pair(e, f)
    d = e.in_dim
    rng = np.random.default_rng(seed)
    starts = [ket(i, d) for i in range(d)]
    if d == 2:
        starts += _bloch_grid()
    for _ in range(restarts):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        starts.append(v / np.linalg.norm(v))

    values, vectors = _alternating_ascent(e, f, starts, max_iter, tol)
    order = np.argsort(values)[::-1]
    best = values[order[0]]
    second = values[order[1]] if len(order) > 1 else best
    gap = float(best - second)
    return DistanceEstimate(float(best), gap, gap <= 1e-6, len(starts), vectors[order[0]])


def unitary_diamond_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Closed form ``|U.U^dag - V.V^dag|_diamond = 2 sin(min(theta, pi/2))``.

    ``2 theta`` is the angular width of the smallest arc holding the spectrum
    of ``U^dag V``; the origin's distance to the convex hull of that spectrum is
    ``cos(theta)``.
    """
    w = np.linalg.eigvals(dagger(np.asarray(u)) @ np.asarray(v))
    ang = np.sort(np.angle(w))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    span = 2 * np.pi - np.max(gaps)
    if span >= np.pi:
        return 2.0
    return float(2 * np.sin(span / 2))


def _diamond_sdp(e: QuantumChannel, f: QuantumChannel) -> DiamondBracket:
    import cvxpy as cp

    din, dout = e.in_dim, e.out_dim
    j = e.choi - f.choi
    j = (j + dagger(j)) / 2

    # primal: max <J, W>  s.t.  0 <= W <= I_out (x) rho, rho a state
    w_var = cp.Variable((din * dout, din * dout), hermitian=True)
    r_var = cp.Variable((din, din), hermitian=True)
    primal = cp.Problem(
        cp.Maximize(cp.real(cp.trace(j @ w_var))),
        [w_var >> 0, cp.kron(np.eye(dout), r_var) - w_var >> 0, r_var >> 0, cp.real(cp.trace(r_var)) == 1],
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        primal.solve(solver=cp.CLARABEL)
    rho = np.asarray(r_var.value)
    rho = (rho + dagger(rho)) / 2
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0, None)
    rho = (v * w) @ dagger(v) / np.sum(w)
    # lower bound: evaluate the purification of rho exactly
    x = matrix_function(rho, np.sqrt, psd=True).T
    lift = np.kron(np.eye(dout), x)
    lower = trace_norm(lift @ j @ dagger(lift))
    # polish: ascend on (e - f) (x) id from the purification of rho
    ext_e = tensor_channels(e, identity_channel(din))
    ext_f = tensor_channels(f, identity_channel(din))
    purification = matrix_function(rho, np.sqrt, psd=True).reshape(-1)
    vals, _ = _alternating_ascent(ext_e, ext_f, [purification / np.linalg.norm(purification)])
    lower = max(lower, vals[0])

    # dual: min |tr_out Z|_inf  s.t.  Z >= J, Z >= 0
    z_var = cp.Variable((din * dout, din * dout), hermitian=True)
    t_var = cp.Variable()
    dual = cp.Problem(
        cp.Minimize(t_var),
        [z_var >> 0, z_var - j >> 0,
         t_var * np.eye(din) - cp.partial_trace(z_var, [dout, din], axis=0) >> 0],
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        dual.solve(solver=cp.CLARABEL)
    z = np.asarray(z_var.value)
    z = (z + dagger(z)) / 2
    # repair to exact feasibility so that the bound is valid
    shift = max(0.0, -np.linalg.eigvalsh(z - j)[0], -np.linalg.eigvalsh(z)[0])
    z = z + shift * np.eye(z.shape[0])
    upper = 2 * float(np.linalg.eigvalsh(partial_trace(z, [1], [dout, din]))[-1])
    upper = min(upper, 2.0)
    return DiamondBracket(min(lower, upper), upper, "sdp")


def diamond_distance(e: QuantumChannel, f: QuantumChannel, max_in_dim: int = SDP_MAX_IN_DIM,
                     restarts: int = 32, seed: int = 0) -> DiamondBracket:
    """Bracket ``[lower, upper]`` on ``|e - f|_diamond``.

    Unitary pairs use the exact closed form; small channels use the
    semidefinite program; anything larger falls back to the coarse bracket
    ``[trace distance, in_dim * trace distance]``.
    """
    _check_pair(e, f)
    if e.is_unitary and f.is_unitary:
        d = unitary_diamond_distance(e.kraus[0], f.kraus[0])
        return DiamondBracket(d, d, "unitary-closed-form")
    if e.in_dim <= max_in_dim:
        return _diamond_sdp(e, f)
    td = channel_trace_distance(e, f, restarts=restarts, seed=seed)
    return DiamondBracket(td.value, min(2.0, e.in_dim * td.value), "trace-distance-bracket", coarse=True)
