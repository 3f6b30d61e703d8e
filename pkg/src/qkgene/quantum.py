"""Statevector simulator and phase-embedding kernels.

Qubit 0 is the least significant bit of the amplitude index (little
endian), so |q1 q0> = |10> sits at index 2. Gates act on views obtained by
reshaping the amplitude vector, never on full 2^n x 2^n matrices, which
keeps circuits with around 20 qubits feasible. The supported gate set is
exactly what the embeddings need: H, PHASE, RZ, CX, RYY.

Kernel values are state fidelities K(x, z) = |<phi(z)|phi(x)>|^2, either
from cached statevectors (exact) or by sampling the all-zeros outcome of
the compute-uncompute circuit with a finite shot budget (sampled).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifier import KernelMatrix
from .errors import ConfigError, NumericalError

MAX_QUBITS = 24
_RSQRT2 = 1.0 / math.sqrt(2.0)

_ARITY = {"h": 1, "phase": 1, "rz": 1, "cx": 2, "ryy": 2}
_PARAMETRIC = {"phase", "rz", "ryy"}

MAP_KINDS = ("z", "zz", "pauli_zyy")


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise ConfigError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != _ARITY[self.kind]:
            raise ConfigError(f"{self.kind} gate takes {_ARITY[self.kind]} qubit(s)")
        if len(set(self.qubits)) != len(self.qubits):
            raise ConfigError("gate qubits must be distinct")
        if any(q < 0 for q in self.qubits):
            raise ConfigError("gate qubits must be non-negative")

    @classmethod
    def h(cls, q: int) -> "Gate":
        return cls("h", (q,))

    @classmethod
    def phase(cls, q: int, angle: float) -> "Gate":
        return cls("phase", (q,), angle)

    @classmethod
    def rz(cls, q: int, angle: float) -> "Gate":
        return cls("rz", (q,), angle)

    @classmethod
    def cx(cls, control: int, target: int) -> "Gate":
        return cls("cx", (control, target))

    @classmethod
    def ryy(cls, a: int, b: int, angle: float) -> "Gate":
        return cls("ryy", (a, b), angle)

    def inverse(self) -> "Gate":
        if self.kind in _PARAMETRIC:
            return Gate(self.kind, self.qubits, -self.angle)
        return self  # h and cx are self-inverse


@dataclass
class Statevector:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ConfigError("amplitude length must be 2**n_qubits")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.amplitudes.real**2 + self.amplitudes.imag**2)))


def zero_state(n_qubits: int) -> Statevector:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigError(f"n_qubits must be in 1..{MAX_QUBITS}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(amps, n_qubits)


def _apply_inplace(amps: np.ndarray, n_qubits: int, gate: Gate) -> None:
    if max(gate.qubits) >= n_qubits:
        raise ConfigError(f"gate on qubit {max(gate.qubits)} exceeds register size {n_qubits}")
    kind = gate.kind
    if kind in ("h", "phase", "rz"):
        q = gate.qubits[0]
        view = amps.reshape(-1, 2, 1 << q)
        if kind == "h":
            a0 = view[:, 0, :] + view[:, 1, :]
            a1 = view[:, 0, :] - view[:, 1, :]
            view[:, 0, :] = a0 * _RSQRT2
            view[:, 1, :] = a1 * _RSQRT2
        elif kind == "phase":
            view[:, 1, :] *= np.exp(1j * gate.angle)
        else:  # rz
            view[:, 0, :] *= np.exp(-0.5j * gate.angle)
            view[:, 1, :] *= np.exp(0.5j * gate.angle)
        return

    hi, lo = max(gate.qubits), min(gate.qubits)
    view = amps.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    if kind == "cx":
        control, _target = gate.qubits
        if control == hi:
            swap_a = view[:, 1, :, 0, :]
            swap_b = view[:, 1, :, 1, :]
        else:
            swap_a = view[:, 0, :, 1, :]
            swap_b = view[:, 1, :, 1, :]
        tmp = swap_a.copy()
        swap_a[...] = swap_b
        swap_b[...] = tmp
        return

    # ryy = exp(-i * angle/2 * Y(x)Y): mixes |00>/|11> and |01>/|10> blocks,
    # symmetric under swapping its two qubits
    cos = math.cos(gate.angle / 2.0)
    isin = 1j * math.sin(gate.angle / 2.0)
    b00 = view[:, 0, :, 0, :].copy()
    b01 = view[:, 0, :, 1, :].copy()
    view[:, 0, :, 0, :] = cos * b00 + isin * view[:, 1, :, 1, :]
    view[:, 1, :, 1, :] = isin * b00 + cos * view[:, 1, :, 1, :]
    view[:, 0, :, 1, :] = cos * b01 - isin * view[:, 1, :, 0, :]
    view[:, 1, :, 0, :] = -isin * b01 + cos * view[:, 1, :, 0, :]


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    amps = state.amplitudes.copy()
    _apply_inplace(amps, state.n_qubits, gate)
    return Statevector(amps, state.n_qubits)


def run_circuit(gates, n_qubits: int) -> Statevector:
    state = zero_state(n_qubits)
    amps = state.amplitudes
    for gate in gates:
        _apply_inplace(amps, n_qubits, gate)
    norm = state.norm()
    if abs(norm - 1.0) > 1e-9:
        raise NumericalError(f"statevector norm drifted to {norm}")
    return state


def inverse_circuit(gates) -> list[Gate]:
    return [g.inverse() for g in reversed(gates)]


def data_map(x, subset) -> float:
    """Phase coefficient: x_i for single qubits, (pi-x_i)(pi-x_j) for pairs."""
    x = np.asarray(x, dtype=np.float64)
    if len(subset) == 1:
        return float(x[subset[0]])
    if len(subset) == 2:
        i, j = subset
        return float((math.pi - x[i]) * (math.pi - x[j]))
    raise ConfigError("data_map supports only 1- and 2-qubit subsets")


@dataclass(frozen=True)
class FeatureMapSpec:
    n_qubits: int
    kind: str = "zz"
    reps: int = 3
    entanglement: str = "linear"

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ConfigError(f"n_qubits must be in 1..{MAX_QUBITS}")
        if self.kind not in MAP_KINDS:
            raise ConfigError(f"kind must be one of {MAP_KINDS}, got {self.kind!r}")
        if self.kind in ("zz", "pauli_zyy") and self.n_qubits < 2:
            raise ConfigError(f"{self.kind} maps need at least 2 qubits")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if self.entanglement != "linear":
            raise ConfigError("only linear entanglement is supported")


def _linear_pairs(n_qubits: int) -> list[tuple[int, int]]:
    return [(q, q + 1) for q in range(n_qubits - 1)]


def build_feature_map(spec: FeatureMapSpec, x) -> list[Gate]:
    """Gate list embedding x: per repetition an H layer, single-qubit phases
    2*x_q, then the pairwise entangler (none for 'z', CX-RZ-CX for 'zz',
    RYY for 'pauli_zyy') with angle 2*(pi-x_i)(pi-x_j) on each linear pair."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (spec.n_qubits,):
        raise ConfigError(f"expected {spec.n_qubits} features, got {x.shape}")
    gates: list[Gate] = []
    for _ in range(spec.reps):
        gates.extend(Gate.h(q) for q in range(spec.n_qubits))
        gates.extend(Gate.phase(q, 2.0 * data_map(x, (q,))) for q in range(spec.n_qubits))
        for a, b in _linear_pairs(spec.n_qubits):
            angle = 2.0 * data_map(x, (a, b))
            if spec.kind == "zz":
                gates.append(Gate.cx(a, b))
                gates.append(Gate.rz(b, angle))
                gates.append(Gate.cx(a, b))
            elif spec.kind == "pauli_zyy":
                gates.append(Gate.ryy(a, b, angle))
    return gates


def embedding_state(x, spec: FeatureMapSpec) -> Statevector:
    return run_circuit(build_feature_map(spec, x), spec.n_qubits)


def _embedding_matrix(X: np.ndarray, spec: FeatureMapSpec) -> np.ndarray:
    states = np.empty((len(X), 1 << spec.n_qubits), dtype=np.complex128)
    for i, x in enumerate(X):
        states[i] = embedding_state(x, spec).amplitudes
    return states


def exact_kernel_entry(x, z, spec: FeatureMapSpec) -> float:
    overlap = np.vdot(embedding_state(z, spec).amplitudes,
                      embedding_state(x, spec).amplitudes)
    return float(np.clip(overlap.real**2 + overlap.imag**2, 0.0, 1.0))


@dataclass(frozen=True)
class ShotConfig:
    shots: int = 100
    seed: int = 10598

    def __post_init__(self):
        if self.shots < 1:
            raise ConfigError("shots must be at least 1")


def sampled_kernel_entry(x, z, spec: FeatureMapSpec, shot_config: ShotConfig,
                         rng: np.random.Generator | None = None) -> float:
    """Estimate the fidelity by measuring the compute-uncompute circuit.

    One uniform draw per shot: the all-zeros outcome owns the leading
    interval of the cumulative distribution, so u < p0 is inverse-CDF
    measurement of the full register restricted to the statistic we need.
    Estimates are exact multiples of 1/shots.
    """
    if rng is None:
        rng = np.random.default_rng(shot_config.seed)
    gates = build_feature_map(spec, x) + inverse_circuit(build_feature_map(spec, z))
    state = run_circuit(gates, spec.n_qubits)
    amp0 = state.amplitudes[0]
    p0 = float(np.clip(amp0.real**2 + amp0.imag**2, 0.0, 1.0))
    hits = int(np.sum(rng.random(shot_config.shots) < p0))
    return hits / shot_config.shots


def _fidelity_from_states(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    overlap = left @ right.conj().T
    return np.clip(overlap.real**2 + overlap.imag**2, 0.0, 1.0)


def kernel_matrix(X, spec: FeatureMapSpec, mode: str = "exact",
                  shot_config: ShotConfig | None = None) -> KernelMatrix:
    """Square fidelity kernel over the rows of X.

    Exact mode caches one statevector per row; sampled mode seeds every
    entry independently from (seed, i, j) so the result does not depend on
    evaluation order, and fills the lower triangle by symmetry.
    """
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    if mode == "exact":
        states = _embedding_matrix(X, spec)
        K = _fidelity_from_states(states, states)
        K = np.triu(K, 1)
        K = K + K.T  # bit-exact symmetry regardless of BLAS summation order
        np.fill_diagonal(K, 1.0)
    elif mode == "sampled":
        if shot_config is None:
            raise ConfigError("sampled mode needs a ShotConfig")
        K = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                rng = np.random.default_rng((shot_config.seed, i, j))
                K[i, j] = K[j, i] = sampled_kernel_entry(X[i], X[j], spec,
                                                         shot_config, rng=rng)
    else:
        raise ConfigError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    return KernelMatrix(values=K, sample_ids=np.arange(n))


def cross_kernel_matrix(X_left, X_right, spec: FeatureMapSpec, mode: str = "exact",
                        shot_config: ShotConfig | None = None) -> np.ndarray:
    """Rectangular fidelity kernel K[i, j] = k(X_left[i], X_right[j])."""
    X_left = np.asarray(X_left, dtype=np.float64)
    X_right = np.asarray(X_right, dtype=np.float64)
    if mode == "exact":
        return _fidelity_from_states(_embedding_matrix(X_left, spec),
                                     _embedding_matrix(X_right, spec))
    if mode == "sampled":
        if shot_config is None:
            raise ConfigError("sampled mode needs a ShotConfig")
        K = np.empty((len(X_left), len(X_right)))
        for i in range(len(X_left)):
            for j in range(len(X_right)):
                rng = np.random.default_rng((shot_config.seed, i, j))
                K[i, j] = sampled_kernel_entry(X_left[i], X_right[j], spec,
                                               shot_config, rng=rng)
        return K
    raise ConfigError(f"mode must be 'exact' or 'sampled', got {mode!r}")
