"""Dense state-vector engine for named qudits of a common dimension d.

Basis ordering: the leftmost name in ``QuantumState.names`` is the most
significant base-d digit of the amplitude index, so
``index = sum(digit_k * d**(n-1-k))``.
"""

from __future__ import annotations

import cmath
import enum
import functools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-9
# Outcomes whose probability is below this are treated as impossible.
ZERO_WEIGHT = 1e-14


class QuditError(ValueError):
    """Base class for state-engine errors."""


class InvalidDimensionError(QuditError):
    pass


class AllocationError(QuditError):
    pass


class UnknownQuditError(QuditError):
    pass


class DuplicateQuditError(QuditError):
    pass


class GateArityError(QuditError):
    pass


class NormalizationError(QuditError):
    pass


class ShapeMismatchError(QuditError):
    pass


class NonSeparableError(QuditError):
    pass


def _check_dimension(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool) or d < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {d!r}")


def omega(d: int, power: int = 1) -> complex:
    """Return ``exp(2*pi*i*power/d)``, the primitive d-th root of unity raised to ``power``."""
    _check_dimension(d)
    power %= d
    if power == 0:
        return 1 + 0j
    return cmath.exp(2j * math.pi * power / d)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Normalized amplitude vector over an ordered tuple of qudit names.

    Instances are immutable; the amplitude array is stored read-only.
    """

    d: int
    names: tuple[str, ...]
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        _check_dimension(self.d)
        names = tuple(self.names)
        if len(set(names)) != len(names):
            raise DuplicateQuditError(f"duplicate qudit names in {names}")
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != self.d ** len(names):
            raise ShapeMismatchError(
                f"{len(names)} qudits of dimension {self.d} need {self.d ** len(names)} "
                f"amplitudes, got {amps.size}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NormalizationError(f"state norm^2 is {norm2!r}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return len(self.names)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownQuditError(f"unknown qudit {name!r}; state holds {list(self.names)}") from None

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.d,) * self.n)

    def amplitude(self, digits: Sequence[int]) -> complex:
        return complex(self.tensor()[tuple(digits)])

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def reorder(self, names: Sequence[str]) -> QuantumState:
        """Return the same state with tensor factors listed in ``names`` order."""
        names = tuple(names)
        if sorted(names) != sorted(self.names):
            raise ShapeMismatchError(f"cannot reorder {self.names} as {names}")
        if names == self.names:
            return self
        perm = [self.index_of(q) for q in names]
        amps = np.transpose(self.tensor(), perm).reshape(-1)
        return QuantumState(self.d, names, amps)

    def isclose(self, other: QuantumState, tol: float = 1e-12) -> bool:
        """Amplitude-wise comparison (phase sensitive)."""
        return (
            self.d == other.d
            and self.names == other.names
            and bool(np.max(np.abs(self.amplitudes - other.amplitudes), initial=0.0) <= tol)
        )

    def __repr__(self) -> str:
        return f"QuantumState(d={self.d}, names={self.names}, amplitudes={np.round(self.amplitudes, 6)})"


def make_state(d: int, names: Iterable[str]) -> QuantumState:
    """Allocate ``names`` in the all-zero basis state."""
    _check_dimension(d)
    names = tuple(names)
    if len(set(names)) != len(names):
        raise AllocationError(f"cannot allocate duplicate qudit names {names}")
    amps = np.zeros(d ** len(names), dtype=np.complex128)
    amps[0] = 1.0
    return QuantumState(d, names, amps)


def basis_state(d: int, names: Iterable[str], digits: Sequence[int]) -> QuantumState:
    names = tuple(names)
    if len(digits) != len(names) or any(not 0 <= x < d for x in digits):
        raise ShapeMismatchError(f"basis digits {tuple(digits)} invalid for {len(names)} qudits, d={d}")
    amps = np.zeros(d ** len(names), dtype=np.complex128)
    amps[int(np.ravel_multi_index(tuple(digits), (d,) * len(names))) if names else 0] = 1.0
    return QuantumState(d, names, amps)


def haar_random_state(d: int, names: Iterable[str], rng: np.random.Generator) -> QuantumState:
    """Normalized vector of independent complex Gaussians (Haar-distributed)."""
    names = tuple(names)
    size = d ** len(names)
    v = rng.normal(size=size) + 1j * rng.normal(size=size)
    return QuantumState(d, names, v / np.linalg.norm(v))


def join(a: QuantumState, b: QuantumState) -> QuantumState:
    """Tensor product ``a (x) b``; names are ``a.names + b.names``."""
    if a.d != b.d:
        raise ShapeMismatchError(f"dimension mismatch: {a.d} vs {b.d}")
    clash = set(a.names) & set(b.names)
    if clash:
        raise DuplicateQuditError(f"qudit names {sorted(clash)} present in both states")
    return QuantumState(a.d, a.names + b.names, np.kron(a.amplitudes, b.amplitudes))


# --------------------------------------------------------------------------
# gates


class GateKind(enum.Enum):
    SHIFT_X = "X"
    PHASE_Z = "Z"
    HADAMARD = "H"
    HADAMARD_INV = "Hinv"
    CNOT_RIGHT = "Rc"
    CNOT_LEFT = "Lc"
    PAULI_U = "U"


_TWO_QUDIT = {GateKind.CNOT_RIGHT, GateKind.CNOT_LEFT}


@dataclass(frozen=True)
class GateSpec:
    """Symbolic unitary. ``j`` is the shift exponent, ``k`` the phase exponent.

    Exponents may be negative or exceed d; they are reduced mod d when the
    matrix is built.
    """

    kind: GateKind
    j: int = 0
    k: int = 0

    @property
    def arity(self) -> int:
        return 2 if self.kind in _TWO_QUDIT else 1

    @classmethod
    def shift_x(cls, j: int = 1) -> GateSpec:
        return cls(GateKind.SHIFT_X, j=j)

    @classmethod
    def phase_z(cls, k: int = 1) -> GateSpec:
        return cls(GateKind.PHASE_Z, k=k)

    @classmethod
    def hadamard(cls) -> GateSpec:
        return cls(GateKind.HADAMARD)

    @classmethod
    def hadamard_inv(cls) -> GateSpec:
        return cls(GateKind.HADAMARD_INV)

    @classmethod
    def cnot_right(cls) -> GateSpec:
        return cls(GateKind.CNOT_RIGHT)

    @classmethod
    def cnot_left(cls) -> GateSpec:
        return cls(GateKind.CNOT_LEFT)

    @classmethod
    def pauli(cls, j: int, k: int) -> GateSpec:
        return cls(GateKind.PAULI_U, j=j, k=k)

    def matrix(self, d: int) -> np.ndarray:
        _check_dimension(d)
        j = self.j % d if self.kind in (GateKind.SHIFT_X, GateKind.PAULI_U) else 0
        k = self.k % d if self.kind in (GateKind.PHASE_Z, GateKind.PAULI_U) else 0
        return _gate_matrix(self.kind, j, k, d)

    def __str__(self) -> str:
        if self.kind is GateKind.SHIFT_X:
            return f"X^{self.j}"
        if self.kind is GateKind.PHASE_Z:
            return f"Z^{self.k}"
        if self.kind is GateKind.PAULI_U:
            return f"U({self.j},{self.k})"
        return self.kind.value


@functools.lru_cache(maxsize=512)
def _gate_matrix(kind: GateKind, j: int, k: int, d: int) -> np.ndarray:
    # columns are images of basis vectors: u[:, m] = U|m>
    if kind is GateKind.SHIFT_X:
        u = np.zeros((d, d), dtype=np.complex128)
        for m in range(d):
            u[(m + j) % d, m] = 1.0
    elif kind is GateKind.PHASE_Z:
        u = np.diag([omega(d, k * m) for m in range(d)])
    elif kind is GateKind.PAULI_U:
        u = np.zeros((d, d), dtype=np.complex128)
        for m in range(d):
            u[(m + j) % d, m] = omega(d, k * m)
    elif kind in (GateKind.HADAMARD, GateKind.HADAMARD_INV):
        sign = -1 if kind is GateKind.HADAMARD else 1
        u = np.array(
            [[omega(d, sign * col * row) for col in range(d)] for row in range(d)],
            dtype=np.complex128,
        ) / math.sqrt(d)
    elif kind in _TWO_QUDIT:
        sign = 1 if kind is GateKind.CNOT_RIGHT else -1
        u = np.zeros((d * d, d * d), dtype=np.complex128)
        for m in range(d):
            for n in range(d):
                u[m * d + (n + sign * m) % d, m * d + n] = 1.0
    else:  # pragma: no cover
        raise ValueError(kind)
    u.setflags(write=False)
    return u


def _target_axes(state: QuantumState, targets: Sequence[str]) -> list[int]:
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise DuplicateQuditError(f"repeated target in {targets}")
    return [state.index_of(q) for q in targets]


def _apply_matrix(state: QuantumState, axes: list[int], u: np.ndarray) -> np.ndarray:
    d, r = state.d, len(axes)
    psi = np.moveaxis(state.tensor(), axes, list(range(r)))
    shape = psi.shape
    psi = (u @ psi.reshape(d**r, -1)).reshape(shape)
    return np.moveaxis(psi, list(range(r)), axes).reshape(-1)


def apply_gate(state: QuantumState, targets: Sequence[str], gate: GateSpec) -> QuantumState:
    """Apply ``gate`` to the named targets (control first for two-qudit gates)."""
    if isinstance(targets, str):
        targets = [targets]
    if len(targets) != gate.arity:
        raise GateArityError(f"{gate} acts on {gate.arity} qudit(s), got targets {list(targets)}")
    axes = _target_axes(state, targets)
    return QuantumState(state.d, state.names, _apply_matrix(state, axes, gate.matrix(state.d)))


def apply_unitary(state: QuantumState, targets: Sequence[str], u: np.ndarray) -> QuantumState:
    """Apply an explicit ``d**r x d**r`` matrix to ``targets``."""
    axes = _target_axes(state, targets)
    if u.shape != (state.d ** len(axes),) * 2:
        raise GateArityError(f"matrix of shape {u.shape} does not fit {len(axes)} target(s)")
    return QuantumState(state.d, state.names, _apply_matrix(state, axes, u))


# --------------------------------------------------------------------------
# measurement


@dataclass(frozen=True)
class MeasurementOutcome:
    outcome: int
    weight: float
    post_state: QuantumState


def measure(state: QuantumState, targets: Sequence[str]) -> list[MeasurementOutcome]:
    """Standard-basis measurement of ``targets``.

    The targets are moved to the leading tensor positions so that outcome
    ``m`` owns the contiguous index block ``[d**(n-r)*m, d**(n-r)*(m+1))``.
    Zero-probability outcomes are dropped. The outcome integer reads the
    target digits in the order given, most significant first.
    """
    if isinstance(targets, str):
        targets = [targets]
    if not targets:
        raise GateArityError("measure needs at least one qudit")
    d, n = state.d, state.n
    axes = _target_axes(state, targets)
    r = len(axes)
    front = list(range(r))
    permuted = np.moveaxis(state.tensor(), axes, front).reshape(-1)
    block = d ** (n - r)
    results = []
    for m in range(d**r):
        lo, hi = block * m, block * (m + 1)
        segment = permuted[lo:hi]
        g = float(np.vdot(segment, segment).real)
        if g <= ZERO_WEIGHT:
            continue
        post = np.zeros_like(permuted)
        post[lo:hi] = segment / math.sqrt(g)
        post = np.moveaxis(post.reshape((d,) * n), front, axes).reshape(-1)
        results.append(MeasurementOutcome(m, g, QuantumState(d, state.names, post)))
    return results


# --------------------------------------------------------------------------
# Bell states, comparison, reduction


def bell_state(d: int, n: int, m: int, names: Sequence[str]) -> QuantumState:
    """Generalised Bell state ``(1/sqrt d) sum_j w^(-jn) |j>|j+m>``."""
    _check_dimension(d)
    if not (0 <= n < d and 0 <= m < d):
        raise ValueError(f"Bell indices ({n}, {m}) out of range for d={d}")
    names = tuple(names)
    if len(names) != 2:
        raise ShapeMismatchError("a Bell state spans exactly two qudits")
    amps = np.zeros(d * d, dtype=np.complex128)
    for j in range(d):
        amps[j * d + (j + m) % d] = omega(d, -j * n) / math.sqrt(d)
    return QuantumState(d, names, amps)


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """``|<a|b>|**2``; callers align name order."""
    if a.d != b.d or a.n != b.n:
        raise ShapeMismatchError(f"cannot compare {a.n} qudits (d={a.d}) with {b.n} qudits (d={b.d})")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def reduced_density_matrix(state: QuantumState, keep: Sequence[str]) -> np.ndarray:
    """Partial trace over every factor not in ``keep``."""
    keep = list(keep)
    rest = [q for q in state.names if q not in keep]
    psi = state.reorder(keep + rest).amplitudes.reshape(state.d ** len(keep), -1)
    return psi @ psi.conj().T


def discard(state: QuantumState, names: Sequence[str]) -> QuantumState:
    """Drop the factors ``names``; the kept factor must be pure.

    The returned vector is the conditional state for the largest-weight
    configuration of the discarded factors, which for a product state is
    the kept factor with its phase relationship intact.
    """
    if isinstance(names, str):
        names = [names]
    for q in names:
        state.index_of(q)
    if len(set(names)) != len(names):
        raise DuplicateQuditError(f"repeated name in {list(names)}")
    keep = [q for q in state.names if q not in names]
    if not names:
        return state
    psi = state.reorder(keep + list(names)).amplitudes.reshape(state.d ** len(keep), -1)
    top = float(np.linalg.svd(psi, compute_uv=False)[0]) ** 2
    if 1.0 - top > NORM_TOL:
        raise NonSeparableError(
            f"discarding {list(names)} leaves a mixed state (largest Schmidt weight {top:.6g})"
        )
    col = psi[:, int(np.argmax(np.linalg.norm(psi, axis=0)))]
    return QuantumState(state.d, tuple(keep), col / np.linalg.norm(col))
