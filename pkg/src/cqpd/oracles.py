"""Independent dense-matrix reference computations for the two protocols.

Nothing here uses :mod:`cqpd.qudit`; every operator is assembled as an
explicit full-register matrix from basis-index loops, so agreement with the
interpreter is a genuine cross-check.
"""

from __future__ import annotations

import itertools

import numpy as np


def _w(d: int) -> complex:
    return np.exp(2j * np.pi / d)


def _digits(d: int, n: int):
    return list(itertools.product(range(d), repeat=n))


def _index(d: int, digits) -> int:
    out = 0
    for x in digits:
        out = out * d + x
    return out


def permutation_operator(d: int, n: int, fn) -> np.ndarray:
    """Full matrix of the basis map ``digits -> fn(digits)`` on n qudits."""
    u = np.zeros((d**n, d**n), dtype=complex)
    for digits in _digits(d, n):
        u[_index(d, fn(list(digits))), _index(d, digits)] = 1.0
    return u


def single(d: int, n: int, pos: int, m: np.ndarray) -> np.ndarray:
    ops = [np.eye(d)] * n
    ops[pos] = m
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def shift(d: int, j: int) -> np.ndarray:
    return np.array([[1.0 if r == (c + j) % d else 0.0 for c in range(d)] for r in range(d)], dtype=complex)


def clock(d: int, k: int) -> np.ndarray:
    return np.diag([_w(d) ** (k * m) for m in range(d)])


def fourier(d: int) -> np.ndarray:
    """Column j holds ``(1/sqrt d) sum_m w^(-jm) |m>``."""
    return np.array([[_w(d) ** (-j * m) for j in range(d)] for m in range(d)]) / np.sqrt(d)


def controlled_add(d: int, n: int, control: int, target: int, sign: int = 1) -> np.ndarray:
    def fn(digits):
        digits[target] = (digits[target] + sign * digits[control]) % d
        return digits

    return permutation_operator(d, n, fn)


def projector(d: int, n: int, pos: int, value: int) -> np.ndarray:
    p = np.zeros((d, d))
    p[value, value] = 1.0
    return single(d, n, pos, p)


def basis(d: int, digits) -> np.ndarray:
    v = np.zeros(d ** len(digits), dtype=complex)
    v[_index(d, digits)] = 1.0
    return v


def teleport_oracle(d: int, psi: np.ndarray) -> dict[tuple[int, int], tuple[float, np.ndarray]]:
    """Map ``(M1, M2)`` = (result on z, result on x) to (probability, final state).

    Register order is ``x, z, y``. Steps: H on z, R_C z->y, L_C x->z, H on x,
    project x and z, then X^(-M1) and Z^(M2) on y.
    """
    x, z, y = 0, 1, 2
    state = np.kron(np.asarray(psi, dtype=complex), basis(d, [0, 0]))
    state = single(d, 3, z, fourier(d)) @ state
    state = controlled_add(d, 3, z, y, +1) @ state
    state = controlled_add(d, 3, x, z, -1) @ state
    state = single(d, 3, x, fourier(d)) @ state
    out = {}
    for m1, m2 in itertools.product(range(d), repeat=2):
        v = projector(d, 3, z, m1) @ projector(d, 3, x, m2) @ state
        g = float(np.vdot(v, v).real)
        v = v / np.sqrt(g)
        v = single(d, 3, y, shift(d, -m1)) @ v
        v = single(d, 3, y, clock(d, m2)) @ v
        out[(m1, m2)] = (g, v)
    return out


def sdc_paper_states(d: int, a: int, b: int) -> dict[str, np.ndarray]:
    """The two-qudit (q1, q2) states psi1..psi6 written out from their closed forms."""
    w = _w(d)
    s = 1 / np.sqrt(d)
    psi1 = sum(basis(d, [j, j]) for j in range(d)) * s
    psi2 = sum(basis(d, [(j + b) % d, j]) for j in range(d)) * s
    psi3 = sum(w ** (a * ((j + b) % d)) * basis(d, [(j + b) % d, j]) for j in range(d)) * s
    psi4 = sum(w ** (a * k) * basis(d, [k, (-b) % d]) for k in range(d)) * s
    psi5 = basis(d, [a, (-b) % d])
    return {"psi1": psi1, "psi2": psi2, "psi3": psi3, "psi4": psi4, "psi5": psi5, "psi6": psi5}


def sdc_dense_states(d: int, a: int, b: int) -> dict[str, np.ndarray]:
    """The same checkpoints obtained by multiplying full two-qudit matrices."""
    q1, q2 = 0, 1
    out = {}
    v = basis(d, [0, 0])
    v = single(d, 2, q1, fourier(d)) @ v
    v = controlled_add(d, 2, q1, q2, +1) @ v
    out["psi1"] = v
    v = single(d, 2, q1, shift(d, b)) @ v
    out["psi2"] = v
    v = single(d, 2, q1, clock(d, a)) @ v
    out["psi3"] = v
    v = controlled_add(d, 2, q1, q2, -1) @ v
    out["psi4"] = v
    v = single(d, 2, q1, fourier(d)) @ v
    out["psi5"] = v
    out["psi6"] = v
    return out


def projector_measure(state: np.ndarray, d: int, n: int, positions) -> dict[int, tuple[float, np.ndarray]]:
    """Outcome -> (probability, renormalized post-state) via explicit projectors."""
    out = {}
    for digits in itertools.product(range(d), repeat=len(positions)):
        p = np.eye(d**n, dtype=complex)
        for pos, val in zip(positions, digits):
            p = projector(d, n, pos, val) @ p
        v = p @ state
        g = float(np.vdot(v, v).real)
        out[_index(d, digits)] = (g, v / np.sqrt(g) if g > 0 else v)
    return out
