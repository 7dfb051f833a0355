"""Dense statevector simulation of the layered hardware-efficient ansatz.

Basis index ``b`` encodes qubit 0 as the most significant bit, so qubit ``q``
lives at bit position ``n - 1 - q``.

Each layer applies one general single-qubit unitary

    U(t1, t2, t3) = RZ(t2 + pi) RX(pi/2) RZ(t1 + pi) RX(pi/2) RZ(t3)

to every qubit, followed by CZ entanglers in a brick pattern: the first layer
(and every odd layer, counting from 1) couples (0,1), (2,3), ...; even layers
couple (1,2), (3,4), ...; there is no wrap-around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi
NORM_ATOL = 1e-10


class Statevector:
    """A normalized ``n``-qubit state held as a complex128 array of length ``2**n``."""

    __slots__ = ("n", "amplitudes")

    def __init__(self, n: int, amplitudes, *, check: bool = True):
        amps = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if n < 1:
            raise ValueError(f"qubit count must be >= 1, got {n}")
        if amps.shape != (1 << n,):
            raise ValueError(f"expected {1 << n} amplitudes for n={n}, got shape {amps.shape}")
        if check:
            norm = float(np.vdot(amps, amps).real)
            if abs(norm - 1.0) > NORM_ATOL:
                raise ValueError(f"state is not normalized (|psi|^2 = {norm!r})")
        self.n = n
        self.amplitudes = amps

    @classmethod
    def from_bitstring(cls, bits: str) -> "Statevector":
        """Computational basis state, e.g. ``"01"`` is qubit 0 in |0> and qubit 1 in |1>."""
        n = len(bits)
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[int(bits, 2)] = 1.0
        return cls(n, amps)

    def probabilities(self) -> np.ndarray:
        return self.amplitudes.real ** 2 + self.amplitudes.imag ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.probabilities())))

    def copy(self) -> "Statevector":
        return Statevector(self.n, self.amplitudes.copy(), check=False)

    def __len__(self) -> int:
        return self.amplitudes.shape[0]

    def __repr__(self) -> str:
        return f"Statevector(n={self.n})"


@dataclass(frozen=True)
class AnsatzSpec:
    """Layout of the layered ansatz: ``n`` qubits, ``p`` layers, CZ brick entanglers."""

    n: int
    p: int
    entangler_pattern: str = "brick"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"ansatz needs n >= 2 qubits for entanglers, got {self.n}")
        if self.p < 1:
            raise ValueError(f"ansatz needs p >= 1 layers, got {self.p}")
        if self.entangler_pattern != "brick":
            raise ValueError(f"unsupported entangler pattern {self.entangler_pattern!r}")

    @property
    def m(self) -> int:
        """Number of rotation angles, three per qubit per layer."""
        return 3 * self.n * self.p

    def entangler_pairs(self, layer: int) -> list[tuple[int, int]]:
        """CZ pairs applied in ``layer`` (0-based)."""
        start = 0 if layer % 2 == 0 else 1
        return [(q, q + 1) for q in range(start, self.n - 1, 2)]

    def param_index(self, layer: int, qubit: int, which: int) -> int:
        """Flat index of angle ``which`` (0, 1, 2 for t1, t2, t3) of ``qubit`` in ``layer``."""
        return 3 * (layer * self.n + qubit) + which


def wrap_angles(values) -> np.ndarray:
    """Map angles onto [0, 2pi)."""
    out = np.mod(np.asarray(values, dtype=float), TWO_PI)
    # np.mod can return exactly 2pi for tiny negative inputs
    out[out >= TWO_PI] = 0.0
    return out


def torus_displacement(a, b) -> np.ndarray:
    """Shortest signed per-coordinate displacement from ``a`` to ``b``, in [-pi, pi)."""
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    return np.mod(d + math.pi, TWO_PI) - math.pi


def torus_distance(a, b) -> float:
    """Geodesic distance on the m-torus of circumference 2pi per coordinate."""
    d = np.abs(np.mod(np.asarray(b, dtype=float) - np.asarray(a, dtype=float), TWO_PI))
    d = np.minimum(d, TWO_PI - d)
    return float(np.sqrt(np.sum(d * d, axis=-1)))


class ParamVector:
    """Rotation angles stored on [0, 2pi)."""

    __slots__ = ("values",)

    def __init__(self, values):
        self.values = wrap_angles(np.atleast_1d(values))

    def __len__(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def distance(self, other: "ParamVector") -> float:
        return torus_distance(self.values, np.asarray(other))

    @staticmethod
    def max_distance(m: int) -> float:
        return math.sqrt(m) * math.pi

    @classmethod
    def random(cls, m: int, rng: np.random.Generator) -> "ParamVector":
        return cls(rng.uniform(0.0, TWO_PI, size=m))

    def __repr__(self) -> str:
        return f"ParamVector(m={len(self)})"


class Gate(NamedTuple):
    name: str
    qubits: tuple[int, ...]
    angle: float = 0.0


def RZ(q: int, alpha: float) -> Gate:
    return Gate("RZ", (q,), float(alpha))


def RX(q: int, alpha: float) -> Gate:
    return Gate("RX", (q,), float(alpha))


def CZ(q1: int, q2: int) -> Gate:
    return Gate("CZ", (q1, q2))


def rz_matrix(alpha: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * alpha), 0.0], [0.0, np.exp(0.5j * alpha)]])


def rx_matrix(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha / 2), math.sin(alpha / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def u3_matrix(t1: float, t2: float, t3: float) -> np.ndarray:
    """2x2 matrix of the five-factor single-qubit unitary (rightmost factor acts first)."""
    half_x = rx_matrix(math.pi / 2)
    return rz_matrix(t2 + math.pi) @ half_x @ rz_matrix(t1 + math.pi) @ half_x @ rz_matrix(t3)


# ---------------------------------------------------------------------------
# in-place stride kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _apply_1q(psi, n, q, u00, u01, u10, u11):
    stride = 1 << (n - 1 - q)
    dim = psi.shape[0]
    for base in range(0, dim, 2 * stride):
        for i in range(base, base + stride):
            a0 = psi[i]
            a1 = psi[i + stride]
            psi[i] = u00 * a0 + u01 * a1
            psi[i + stride] = u10 * a0 + u11 * a1


@njit(cache=True)
def _apply_diag_1q(psi, n, q, d0, d1):
    stride = 1 << (n - 1 - q)
    dim = psi.shape[0]
    for base in range(0, dim, 2 * stride):
        for i in range(base, base + stride):
            psi[i] *= d0
            psi[i + stride] *= d1


@njit(cache=True)
def _apply_cz(psi, n, q1, q2):
    mask = (1 << (n - 1 - q1)) | (1 << (n - 1 - q2))
    for i in range(psi.shape[0]):
        if i & mask == mask:
            psi[i] = -psi[i]


@njit(cache=True)
def _u3_entries(t1, t2, t3):
    # RZ(a) = diag(e^{-ia/2}, e^{ia/2}); RX(pi/2) = [[r, -ir], [-ir, r]], r = 1/sqrt(2)
    r = 0.7071067811865476
    # start from RZ(t3)
    a00 = np.exp(-0.5j * t3)
    a01 = 0j
    a10 = 0j
    a11 = np.exp(0.5j * t3)
    # RX(pi/2) @ A
    b00 = r * a00 - 1j * r * a10
    b01 = r * a01 - 1j * r * a11
    b10 = -1j * r * a00 + r * a10
    b11 = -1j * r * a01 + r * a11
    # RZ(t1 + pi) @ B
    z0 = np.exp(-0.5j * (t1 + np.pi))
    z1 = np.exp(0.5j * (t1 + np.pi))
    b00 *= z0
    b01 *= z0
    b10 *= z1
    b11 *= z1
    # RX(pi/2) @ B
    c00 = r * b00 - 1j * r * b10
    c01 = r * b01 - 1j * r * b11
    c10 = -1j * r * b00 + r * b10
    c11 = -1j * r * b01 + r * b11
    # RZ(t2 + pi) @ C
    z0 = np.exp(-0.5j * (t2 + np.pi))
    z1 = np.exp(0.5j * (t2 + np.pi))
    return c00 * z0, c01 * z0, c10 * z1, c11 * z1


@njit(cache=True)
def _run_ansatz(psi, n, p, params):
    for layer in range(p):
        for q in range(n):
            k = 3 * (layer * n + q)
            u00, u01, u10, u11 = _u3_entries(params[k], params[k + 1], params[k + 2])
            _apply_1q(psi, n, q, u00, u01, u10, u11)
        start = layer % 2
        for q in range(start, n - 1, 2):
            _apply_cz(psi, n, q, q + 1)


@njit(cache=True)
def _ansatz_amplitudes(n, p, params):
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    _run_ansatz(psi, n, p, params)
    return psi


@njit(cache=True)
def _local_cost(psi, n):
    # 1 - (1/n) sum_i P(qubit i = 0)
    dim = psi.shape[0]
    zeros = 0.0
    for i in range(dim):
        pr = psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
        if pr == 0.0:
            continue
        z = 0
        for q in range(n):
            if not (i >> (n - 1 - q)) & 1:
                z += 1
        zeros += pr * z
    return 1.0 - zeros / n


@njit(cache=True)
def _batch_probabilities(n, p, params_batch):
    batch = params_batch.shape[0]
    out = np.empty((batch, 1 << n))
    psi = np.empty(1 << n, dtype=np.complex128)
    for b in range(batch):
        psi[:] = 0.0
        psi[0] = 1.0
        _run_ansatz(psi, n, p, params_batch[b])
        for i in range(psi.shape[0]):
            out[b, i] = psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
    return out


@njit(cache=True)
def _batch_costs(n, p, params_batch):
    batch = params_batch.shape[0]
    out = np.empty(batch)
    psi = np.empty(1 << n, dtype=np.complex128)
    for b in range(batch):
        psi[:] = 0.0
        psi[0] = 1.0
        _run_ansatz(psi, n, p, params_batch[b])
        out[b] = _local_cost(psi, n)
    return out


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def zero_state(n: int) -> Statevector:
    if n < 1:
        raise ValueError(f"qubit count must be >= 1, got {n}")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(n, amps, check=False)


def _check_qubit(state: Statevector, q: int) -> None:
    if not 0 <= q < state.n:
        raise ValueError(f"qubit index {q} out of range for n={state.n}")


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Return ``gate`` applied to ``state``; the input is left untouched."""
    for q in gate.qubits:
        _check_qubit(state, q)
    out = state.copy()
    if gate.name == "RZ":
        half = 0.5 * gate.angle
        _apply_diag_1q(out.amplitudes, state.n, gate.qubits[0],
                       complex(math.cos(half), -math.sin(half)),
                       complex(math.cos(half), math.sin(half)))
    elif gate.name == "RX":
        c, s = math.cos(0.5 * gate.angle), math.sin(0.5 * gate.angle)
        _apply_1q(out.amplitudes, state.n, gate.qubits[0],
                  complex(c, 0.0), complex(0.0, -s), complex(0.0, -s), complex(c, 0.0))
    elif gate.name == "CZ":
        q1, q2 = gate.qubits
        if q1 == q2:
            raise ValueError("CZ needs two distinct qubits")
        _apply_cz(out.amplitudes, state.n, q1, q2)
    else:
        raise ValueError(f"unknown gate {gate.name!r}")
    return out


def u3_gates(q: int, t1: float, t2: float, t3: float) -> list[Gate]:
    """The five rotations of U(t1, t2, t3) in application order."""
    return [RZ(q, t3), RX(q, math.pi / 2), RZ(q, t1 + math.pi), RX(q, math.pi / 2), RZ(q, t2 + math.pi)]


def apply_u3(state: Statevector, q: int, t1: float, t2: float, t3: float) -> Statevector:
    _check_qubit(state, q)
    out = state.copy()
    _apply_1q(out.amplitudes, state.n, q, *_u3_entries(float(t1), float(t2), float(t3)))
    return out


def _as_params(spec: AnsatzSpec, params) -> np.ndarray:
    values = np.ascontiguousarray(np.asarray(params, dtype=float))
    if values.shape[-1] != spec.m:
        raise ValueError(f"expected {spec.m} parameters for n={spec.n}, p={spec.p}, got {values.shape[-1]}")
    return values


def apply_ansatz(spec: AnsatzSpec, params: Union[ParamVector, Sequence[float], np.ndarray]) -> Statevector:
    """V(params)|0...0>."""
    values = _as_params(spec, params)
    if values.ndim != 1:
        raise ValueError("apply_ansatz takes a single parameter vector")
    return Statevector(spec.n, _ansatz_amplitudes(spec.n, spec.p, values), check=False)


def batch_probabilities(spec: AnsatzSpec, params_batch) -> np.ndarray:
    """Born probabilities of V(theta)|0> for each row of ``params_batch``."""
    values = np.atleast_2d(_as_params(spec, params_batch))
    return _batch_probabilities(spec.n, spec.p, values)


def batch_costs(spec: AnsatzSpec, params_batch) -> np.ndarray:
    """Exact local compilation cost for each row of ``params_batch``."""
    values = np.atleast_2d(_as_params(spec, params_batch))
    return _batch_costs(spec.n, spec.p, values)


def circuit_gates(spec: AnsatzSpec, params) -> list[Gate]:
    """Flat gate list of the ansatz, in application order."""
    values = _as_params(spec, params)
    gates: list[Gate] = []
    for layer in range(spec.p):
        for q in range(spec.n):
            k = spec.param_index(layer, q, 0)
            gates.extend(u3_gates(q, values[k], values[k + 1], values[k + 2]))
        gates.extend(CZ(a, b) for a, b in spec.entangler_pairs(layer))
    return gates
