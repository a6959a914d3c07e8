"""Sample-based access to block-encodings of a state.

* :func:`lmr_channel` - density matrix exponentiation by repeated partial swaps
  against fresh copies of ``rho``.
* :func:`sample_block_encoding` - a channel, built from copies of ``rho`` only,
  that is close in diamond norm to a fixed unitary block-encoding ``U_rho`` of
  ``rho / 2``.
* :func:`samplize` - replace every oracle slot of a query circuit by that
  channel at per-query budget ``delta / Q``.

Faithful mode route: controlled ``exp(+-i rho)`` by LMR, combined by a
linear-combination-of-unitaries step into a channel ``L`` whose dominant
unitary part ``W`` block-encodes ``sin(rho)``; an odd polynomial for
``arcsin(x)/2`` then turns ``sin(rho)`` into ``rho/2``.  ``L`` is factored
exactly as ``L = W o N`` with ``N = W^dag o L`` a near-identity channel, so the
coherent error (inside ``W``) and the decoherent error (inside ``N``) are both
kept and bounded separately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import polar

from .polyapprox import build_arcsin_half
from .qcore import (BlockEncoding, DensityMatrix, DiamondBracket, DimensionError, QuantumChannel,
                    UnitaryMatrix, channel_from_choi, channel_from_kraus, channel_from_superoperator, channel_trace_distance,
                    corner, dagger, depolarizing_channel, diamond_distance, dilate_to_unitary,
                    embed_ancilla_identity, identity_channel, matrix_function, num_qubits, operator_norm,
                    swap_operator, unitary_channel, unitary_diamond_distance)
from .qet import eigen_transform

MAX_LMR_DIM = 16
STEP_BUDGET = 10 ** 6
ORACLE_ANCILLAS = 4
ARCSIN_EPS_FLOOR = 2.5e-3


class SampleBudgetError(RuntimeError):
    """The requested precision needs more LMR steps than the configured budget."""


class CircuitError(ValueError):
    """Malformed query circuit."""


# ---------------------------------------------------------------------------
# Density matrix exponentiation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LmrConfig:
    t: float
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")

    @property
    def copies(self) -> int:
        return self.steps


def _check_lmr_dim(rho: DensityMatrix):
    if rho.dim > MAX_LMR_DIM:
        raise DimensionError(f"density matrix exponentiation is capped at dimension {MAX_LMR_DIM}")


def _partial_swap(d: int, angle: float) -> np.ndarray:
    """``exp(-i angle S) = cos(angle) I - i sin(angle) S`` since ``S^2 = I``."""
    return math.cos(angle) * np.eye(d * d) - 1j * math.sin(angle) * swap_operator(d)


def _step_kraus(rho: DensityMatrix, angle: float, controlled: bool) -> list[np.ndarray]:
    """Kraus set of one partial-swap step, tracing out the consumed copy.

    Uncontrolled: acts on the system.  Controlled: acts on (system, control)
    with the control qubit trailing; only the control-1 branch swaps.
    """
    d = rho.dim
    p = _partial_swap(d, angle).reshape(d, d, d, d)  # (s, b, s', b')
    if controlled:
        v = np.zeros((d, 2, d, d, 2, d), dtype=complex)  # (s, c, b, s', c', b')
        eye = np.eye(d * d).reshape(d, d, d, d)
        v[:, 0, :, :, 0, :] = eye
        v[:, 1, :, :, 1, :] = p
        v = v.reshape(2 * d, d, 2 * d, d)
    else:
        v = p
    w, vecs = np.linalg.eigh(rho.data)
    ks = []
    for wj, vj in zip(w, vecs.T):
        if wj <= 1e-15:
            continue
        # K_{jk} = sqrt(w_j) <k|_b V |v_j>_b
        block = np.einsum("abcd,d->abc", v, vj)  # (out, b, in)
        for k in range(d):
            ks.append(math.sqrt(wj) * block[:, k, :])
    return ks


def _superop(ks) -> np.ndarray:
    return sum(np.kron(k, k.conj()) for k in ks)


def _lmr_superop(rho: DensityMatrix, t: float, steps: int, controlled: bool) -> np.ndarray:
    step = _superop(_step_kraus(rho, t / steps, controlled))
    return np.linalg.matrix_power(step, steps)


def lmr_channel(rho: DensityMatrix, cfg: LmrConfig) -> QuantumChannel:
    """``n`` partial-swap steps of angle ``t / n``, each against a fresh copy of ``rho``."""
    _check_lmr_dim(rho)
    if cfg.t == 0:
        return identity_channel(rho.dim)
    return channel_from_superoperator(_lmr_superop(rho, cfg.t, cfg.steps, False), rho.dim, rho.dim)


def controlled_exponential(rho: DensityMatrix, t: float, steps: int) -> QuantumChannel:
    """Approximates conjugation by ``I (x) |0><0| + exp(-i rho t) (x) |1><1|`` (control trailing)."""
    _check_lmr_dim(rho)
    d2 = 2 * rho.dim
    if t == 0:
        return identity_channel(d2)
    return channel_from_superoperator(_lmr_superop(rho, t, steps, True), d2, d2)


def exponential_channel(rho: DensityMatrix, t: float) -> QuantumChannel:
    """The exact target ``sigma -> exp(-i rho t) sigma exp(i rho t)``."""
    return unitary_channel(matrix_function(rho.data, lambda x: np.exp(-1j * x * t)))


# ---------------------------------------------------------------------------
# Sample-based block-encoding
# ---------------------------------------------------------------------------

def nominal_unitary(rho: DensityMatrix) -> BlockEncoding:
    """The pinned ``(2, 4, 0)``-block-encoding of ``rho``: dilation of ``rho/2`` plus idle ancillas."""
    dil = dilate_to_unitary(rho.data / 2)
    u = embed_ancilla_identity(dil.data, ORACLE_ANCILLAS - 1)
    return BlockEncoding(UnitaryMatrix(u), num_qubits(rho.dim), ORACLE_ANCILLAS, 2.0, 0.0, rho.data, 0)


class ChannelSequence:
    """Channel given as an ordered list of full-register steps (first applied first).

    Each step is either a unitary matrix or a :class:`QuantumChannel`.  Only the
    action and its adjoint are needed by the distance routines, so large
    compositions never have to be expanded into a single Kraus set.
    """

    def __init__(self, dim: int, steps: Sequence):
        self.in_dim = self.out_dim = dim
        self.steps = tuple(steps)
        for s in self.steps:
            d = s.in_dim if isinstance(s, QuantumChannel) else s.shape[0]
            if d != dim:
                raise DimensionError("step dimension does not match the register")

    @property
    def is_unitary(self) -> bool:
        return all(not isinstance(s, QuantumChannel) or s.is_unitary for s in self.steps)

    def __call__(self, rho):
        r = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
        for s in self.steps:
            r = s(r) if isinstance(s, QuantumChannel) else s @ r @ dagger(s)
        return r

    def adjoint(self, m):
        for s in reversed(self.steps):
            m = s.adjoint(m) if isinstance(s, QuantumChannel) else dagger(s) @ m @ s
        return m

    def to_channel(self) -> QuantumChannel:
        ks = [np.eye(self.in_dim, dtype=complex)]
        for s in self.steps:
            step_ks = s.kraus if isinstance(s, QuantumChannel) else (s,)
            ks = [k2 @ k1 for k2 in step_ks for k1 in ks]
            if len(ks) > self.in_dim ** 2:
                j = sum(np.outer(k.reshape(-1), k.reshape(-1).conj()) for k in ks)
                ks = list(channel_from_choi(j, self.in_dim, self.in_dim).kraus)
        return QuantumChannel(self.in_dim, self.out_dim, tuple(ks))


@dataclass(frozen=True, eq=False)
class SampleChannel:
    channel: object  # QuantumChannel or ChannelSequence
    samples_consumed: int
    mode: str
    per_query_error: float
    diamond: DiamondBracket | None = None

    def __post_init__(self):
        if self.samples_consumed < 0:
            raise ValueError("samples_consumed must be non-negative")


@dataclass(frozen=True, eq=False)
class FaithfulParts:
    """Pieces of the faithful construction for one per-query budget."""

    steps: int
    arcsin_degree: int
    arcsin_eps: float
    lcu_unitary: np.ndarray          # W on (system, lcu qubit)
    lcu_corner_error: float          # |<0|W|0> - sin(rho)|
    noise: QuantumChannel            # N^deg on (system, lcu qubit)
    noise_diamond: DiamondBracket    # |N^deg - id|_diamond
    coherent_unitary: np.ndarray     # U~ on (system, 4 ancillas)
    unitary_distance: float          # |U~ - U_rho|_diamond, exact
    samples_per_query: int

    @property
    def upper(self) -> float:
        return self.unitary_distance + self.noise_diamond.upper

    @property
    def lower(self) -> float:
        return max(0.0, self.unitary_distance - self.noise_diamond.upper)


@dataclass(frozen=True, eq=False)
class SampleBlockEncoding:
    forward: SampleChannel
    inverse: SampleChannel
    nominal: BlockEncoding
    parts: FaithfulParts | None = None


def _lcu_superop(rho: DensityMatrix, steps: int) -> np.ndarray:
    """``L`` on (system, lcu qubit): corner ``(exp(i rho) - exp(-i rho)) / (2i) = sin(rho)``."""
    d = rho.dim
    s_plus = _lmr_superop(rho, -1.0, steps, True)    # control 1 -> exp(+i rho)
    s_minus = _lmr_superop(rho, +1.0, steps, True)   # control 1 -> exp(-i rho)
    x = np.kron(np.eye(d), np.array([[0, 1], [1, 0]]))
    had = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    w_pre = np.kron(np.eye(d), had)
    w_post = np.kron(np.eye(d), had @ np.diag([-1j, 1j]))
    sx = _superop([x])
    # control 0 -> exp(+i rho) (flip, controlled, flip back); control 1 -> exp(-i rho)
    select = s_minus @ sx @ s_plus @ sx
    return _superop([w_post]) @ select @ _superop([w_pre])


def _factor_lcu(rho: DensityMatrix, steps: int):
    """Split ``L = W o N`` with ``W`` the polar unitary of the dominant Kraus operator."""
    d2 = 2 * rho.dim
    lcu = channel_from_superoperator(_lcu_superop(rho, steps), d2, d2)
    weights = [np.linalg.norm(k) for k in lcu.kraus]
    dominant = lcu.kraus[int(np.argmax(weights))]
    w, _ = polar(dominant)
    c = corner(w, 1)
    tr = np.trace(c)
    if abs(tr) > 1e-14:
        w = w * (abs(tr) / tr)
    noise = QuantumChannel(d2, d2, tuple(dagger(w) @ k for k in lcu.kraus))
    return w, noise


def _noise_power(noise: QuantumChannel, power: int) -> QuantumChannel:
    s = np.linalg.matrix_power(noise.superoperator, power)
    return channel_from_superoperator(s, noise.in_dim, noise.out_dim)


def _faithful_parts(rho: DensityMatrix, steps: int, poly) -> FaithfulParts:
    d = rho.dim
    w, noise = _factor_lcu(rho, steps)
    sin_rho = matrix_function(rho.data, np.sin, psd=True)
    err = operator_norm(corner(w, 1) - sin_rho)
    be = BlockEncoding(UnitaryMatrix(w), num_qubits(d), 1, 1.0, err + 1e-12, sin_rho, 0)
    res = eigen_transform(be, poly)
    # eigen_transform yields 3 ancillas; pad to the pinned 4
    u_tilde = embed_ancilla_identity(res.encoding.unitary.data, ORACLE_ANCILLAS - 3)
    nominal = nominal_unitary(rho).unitary.data
    udist = unitary_diamond_distance(u_tilde, nominal)
    noise_q = _noise_power(noise, poly.degree)
    nd = diamond_distance(noise_q, identity_channel(2 * d))
    return FaithfulParts(steps, poly.degree, float(poly.params.get("eps", 0.0)), w, err, noise_q, nd,
                         u_tilde, udist, poly.degree * 2 * steps)


def arcsin_precision(delta: float) -> float:
    """Precision of the arcsin polynomial for a per-query budget ``delta``."""
    return min(delta / 16, ARCSIN_EPS_FLOOR)


@lru_cache(maxsize=32)
def _calibrated_parts(rho_key: bytes, dim: int, delta: float) -> FaithfulParts:
    rho = DensityMatrix(np.frombuffer(rho_key, dtype=complex).reshape(dim, dim))
    # the minimax arcsin degree grows like 0.02 / eps; refuse hopeless budgets before building it
    est_degree = 0.02 / arcsin_precision(delta)
    if est_degree / delta > STEP_BUDGET:
        raise SampleBudgetError(f"delta={delta} needs more than {STEP_BUDGET} steps")
    poly = build_arcsin_half(arcsin_precision(delta))
    deg = poly.degree
    n = max(4, math.ceil(2 * deg / delta))
    if n > STEP_BUDGET:
        raise SampleBudgetError(f"delta={delta} needs more than {STEP_BUDGET} steps")
    parts = _faithful_parts(rho, n, poly)
    # the decoherent part falls like 1/n; rescale n once from the measurement
    budget = 0.97 * delta - parts.unitary_distance
    if budget <= 0:
        raise SampleBudgetError(f"coherent error {parts.unitary_distance:.3g} leaves no budget for delta={delta}")
    n = max(4, math.ceil(n * parts.noise_diamond.upper / budget))
    for _ in range(40):
        if n > STEP_BUDGET:
            raise SampleBudgetError(f"delta={delta} needs more than {STEP_BUDGET} steps")
        parts = _faithful_parts(rho, n, poly)
        if parts.upper <= delta:
            return parts
        n = math.ceil(n * 1.1)
    raise SampleBudgetError(f"could not meet delta={delta} within the step budget")


def faithful_parts(rho: DensityMatrix, delta: float) -> FaithfulParts:
    """Calibrated faithful construction meeting the diamond budget ``delta``."""
    _check_lmr_dim(rho)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return _calibrated_parts(np.ascontiguousarray(rho.data).tobytes(), rho.dim, float(delta))


def _lift(ks, extra_dim: int) -> QuantumChannel:
    big = tuple(np.kron(k, np.eye(extra_dim)) for k in ks)
    dim = big[0].shape[0]
    return QuantumChannel(dim, dim, big)


def sample_block_encoding(rho: DensityMatrix, delta: float, mode: str = "ideal") -> SampleBlockEncoding:
    """Channels ``E`` and ``E^inv`` built from copies of ``rho`` close to ``U_rho`` and ``U_rho^dag``."""
    _check_lmr_dim(rho)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    nominal = nominal_unitary(rho)
    u = nominal.unitary.data
    if mode == "ideal":
        zero = DiamondBracket(0.0, 0.0, "identical")
        fwd = SampleChannel(unitary_channel(u), 0, "ideal", 0.0, zero)
        inv = SampleChannel(unitary_channel(dagger(u)), 0, "ideal", 0.0, zero)
        return SampleBlockEncoding(fwd, inv, nominal)
    if mode != "faithful":
        raise ValueError("mode must be 'ideal' or 'faithful'")
    parts = faithful_parts(rho, delta)
    noise = _lift(parts.noise.kraus, 2 ** (ORACLE_ANCILLAS - 1))
    dim = u.shape[0]
    bracket = DiamondBracket(parts.lower, parts.upper, "unitary-plus-noise")
    fwd = SampleChannel(ChannelSequence(dim, [noise, parts.coherent_unitary]), parts.samples_per_query,
                        "faithful", parts.upper, bracket)
    inv = SampleChannel(ChannelSequence(dim, [dagger(parts.coherent_unitary), noise]), parts.samples_per_query,
                        "faithful", parts.upper, bracket)
    return SampleBlockEncoding(fwd, inv, nominal, parts)


# ---------------------------------------------------------------------------
# Query circuits
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FixedGate:
    unitary: np.ndarray


@dataclass(frozen=True)
class OracleSlot:
    """One query: ``U`` (or ``U^dag`` when ``inverse``), optionally controlled by an extra qubit."""

    inverse: bool = False
    control: int | None = None


@dataclass(frozen=True, eq=False)
class QueryCircuit:
    """``G_Q U_Q ... G_1 U_1 G_0`` on system (x) oracle ancillas (x) extra qubits."""

    system_qubits: int
    oracle_ancillas: int
    gates: tuple
    extra_qubits: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        dim = self.dim
        for g in self.gates:
            if isinstance(g, FixedGate):
                UnitaryMatrix(g.unitary)
                if g.unitary.shape[0] != dim:
                    raise CircuitError(f"fixed gate has dimension {g.unitary.shape[0]}, register is {dim}")
            elif isinstance(g, OracleSlot):
                if g.control is not None and not 0 <= g.control < self.extra_qubits:
                    raise CircuitError("control must index one of the extra qubits")
            else:
                raise CircuitError(f"unknown gate {g!r}")

    @property
    def dim(self) -> int:
        return 2 ** (self.system_qubits + self.oracle_ancillas + self.extra_qubits)

    @property
    def query_count(self) -> int:
        return sum(isinstance(g, OracleSlot) for g in self.gates)


def _slot_unitary(circ: QueryCircuit, u4: np.ndarray, slot: OracleSlot) -> np.ndarray:
    """Embed a (system, 4 ancillas) unitary as an oracle slot on the full register."""
    op = dagger(u4) if slot.inverse else u4
    op = embed_ancilla_identity(op, circ.oracle_ancillas - ORACLE_ANCILLAS)
    e = circ.extra_qubits
    if slot.control is None:
        return embed_ancilla_identity(op, e)
    before = 2 ** slot.control
    after = 2 ** (e - slot.control - 1)
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    left = np.kron(np.eye(op.shape[0] * before), np.kron(p0, np.eye(after)))
    right = np.kron(np.kron(op, np.eye(before)), np.kron(p1, np.eye(after)))
    return left + right


def circuit_unitary(circ: QueryCircuit, u4: np.ndarray) -> np.ndarray:
    """``C[U]`` for a (system, 4 ancillas) oracle unitary."""
    total = np.eye(circ.dim, dtype=complex)
    for g in circ.gates:
        op = g.unitary if isinstance(g, FixedGate) else _slot_unitary(circ, u4, g)
        total = op @ total
    return total


def samplize(circuit: QueryCircuit, rho: DensityMatrix, delta: float, mode: str = "ideal",
             measure_lower: bool = False, seed: int = 0) -> SampleChannel:
    """Replace each oracle slot of ``circuit`` by sample-based channels at budget ``delta / Q``."""
    if circuit.oracle_ancillas < ORACLE_ANCILLAS:
        raise CircuitError(f"need at least {ORACLE_ANCILLAS} oracle ancillas")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if 2 ** circuit.system_qubits != rho.dim:
        raise DimensionError("state dimension does not match the circuit's system register")
    q = circuit.query_count
    nominal = nominal_unitary(rho).unitary.data
    ideal = circuit_unitary(circuit, nominal)
    if mode == "ideal" or q == 0:
        zero = DiamondBracket(0.0, 0.0, "identical")
        return SampleChannel(unitary_channel(ideal), 0, mode, 0.0, zero)
    if mode != "faithful":
        raise ValueError("mode must be 'ideal' or 'faithful'")
    per_query = delta / q
    parts = faithful_parts(rho, min(per_query, 0.999))
    extra = 2 ** (circuit.oracle_ancillas - 1 + circuit.extra_qubits)
    noise = _lift(parts.noise.kraus, extra)
    steps, coherent = [], np.eye(circuit.dim, dtype=complex)
    for g in circuit.gates:
        if isinstance(g, FixedGate):
            steps.append(g.unitary)
            coherent = g.unitary @ coherent
            continue
        op = _slot_unitary(circuit, parts.coherent_unitary, g)
        if g.inverse:
            steps += [op, noise]
        else:
            steps += [noise, op]
        coherent = op @ coherent
    seq = ChannelSequence(circuit.dim, steps)
    udist = unitary_diamond_distance(coherent, ideal)
    noise_total = q * parts.noise_diamond.upper
    upper = min(2.0, udist + noise_total)
    lower = max(0.0, udist - noise_total)
    if measure_lower:
        lower = max(lower, channel_trace_distance(seq, unitary_channel(ideal), restarts=4, seed=seed).value)
    bracket = DiamondBracket(min(lower, upper), upper, "unitary-plus-noise")
    return SampleChannel(seq, q * parts.samples_per_query, "faithful", parts.upper, bracket)


# ---------------------------------------------------------------------------
# Composite bound of a block-encoded evolution under a perturbed channel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InstanceReport:
    distance: float
    bound: float
    encoding_error: float
    channel_distance: float

    @property
    def passed(self) -> bool:
        return self.distance <= self.bound + 1e-9

    @property
    def margin(self) -> float:
        return self.bound - self.distance


def lower_bound_instance_check(rho: DensityMatrix, t: float, eps: float, delta: float = 0.0,
                               seed: int = 0, ancillas: int = 3) -> InstanceReport:
    """Check ``|F - exp(-i rho t)|_tr <= delta + 5 eps`` on a concrete instance.

    A ``(1, ancillas, eps)``-block-encoding ``V`` of ``exp(-i rho t)`` is made by
    dilating a random contraction within ``eps`` of the evolution; a channel
    ``E`` at trace distance exactly ``delta`` from ``V`` is ``V`` preceded by a
    full-register depolarizing channel of strength ``delta / (2 (1 - 1/D))``;
    ``F`` runs ``E`` on ``rho' (x) |0><0|`` and discards the ancillas.
    """
    rng = np.random.default_rng(seed)
    d = rho.dim
    evo = matrix_function(rho.data, lambda x: np.exp(-1j * x * t))
    if eps > 0:
        r = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        a = evo + (eps / 2) * r / operator_norm(r)
        a = a / max(1.0, operator_norm(a))
    else:
        a = evo
    enc_err = operator_norm(a - evo)
    v = embed_ancilla_identity(dilate_to_unitary(a).data, ancillas - 1)
    big = v.shape[0]
    anc = 2 ** ancillas
    q = delta / (2 * (1 - 1 / big)) if delta > 0 else 0.0
    # full-register depolarizing then V: on the system this mixes F_V with tr(.) I/d
    v4 = v.reshape(d, anc, d, anc)[:, :, :, 0]  # (out_s, out_anc, in_s)
    f_kraus = [math.sqrt(1 - q) * v4[:, j, :] for j in range(anc)]
    if q > 0:
        f_kraus += [math.sqrt(q / d) * np.outer(np.eye(d)[i], np.eye(d)[k]) for i in range(d) for k in range(d)]
    f = channel_from_kraus(f_kraus, d, d)
    dist = channel_trace_distance(f, unitary_channel(evo), restarts=8, seed=seed).value
    return InstanceReport(dist, delta + 5 * eps, enc_err, delta)


def unitarity_defect(a: np.ndarray, u: np.ndarray) -> tuple[float, float]:
    """``(|I - A^dag A|, 3 |A - U|)``: a contraction close to a unitary is nearly isometric."""
    a = np.asarray(a, dtype=complex)
    eps = operator_norm(a - np.asarray(u))
    return operator_norm(np.eye(a.shape[0]) - dagger(a) @ a), 3 * eps
