"""Closed-form RQC stage states, kept independent of the circuit engine.

Each stage is written once as a SymPy ket in the angle ``theta`` and then
compiled with ``lambdify`` into a NumPy amplitude function over the full
register (A, a, B, b, e1, e2).  The circuit snapshots are checked against
these.

Atom patterns
-------------
With two atoms both start excited (``e_pre = 11``).  The atom sitting in the
path a photon took is de-excited, so the two path branches leave the atoms
in ``e_c = 10`` (photon in the lower path) or ``e_s = 01`` (upper path).
With one atom only e1 takes part and e2 stays in ``|0>``:
``e_pre = 10``, ``e_c = 10``, ``e_s = 00``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np
import sympy
from sympy import I, Rational, Symbol, cos, lambdify, sin, sqrt

from simulator.errors import DomainError, RegisterError

REGISTER = ("A", "a", "B", "b", "e1", "e2")

THETA = Symbol("theta", real=True)
C = cos(THETA / 2)
S = sin(THETA / 2)

STAGE_NAMES = (
    "psi0", "psi1", "psi2", "psi2_branch",
    "psi3", "psi4", "psi5", "psi5_branch",
    "mzi_output",
)

# (labels, {bits: coefficient})
SymKet = tuple[tuple[str, ...], dict[str, sympy.Expr]]


# ── Ket algebra ──────────────────────────────────────────────────────────

def ket(labels: str, bits: str) -> SymKet:
    """Basis ket, e.g. ``ket("A b", "01")`` for |0>_A |1>_b."""
    names = tuple(labels.split())
    if len(names) != len(bits):
        raise RegisterError(f"Ket '{bits}' does not match labels {names}.")
    return names, {bits: sympy.Integer(1)}


def superpose(*terms: tuple[sympy.Expr, SymKet]) -> SymKet:
    labels = terms[0][1][0]
    amplitudes: dict[str, sympy.Expr] = {}
    for coefficient, (names, components) in terms:
        if names != labels:
            raise RegisterError(f"Cannot add kets on {names} and {labels}.")
        for bits, value in components.items():
            amplitudes[bits] = amplitudes.get(bits, 0) + coefficient * value
    return labels, amplitudes


def tensor(*kets: SymKet) -> SymKet:
    labels: tuple[str, ...] = ()
    amplitudes: dict[str, sympy.Expr] = {"": sympy.Integer(1)}
    for names, components in kets:
        labels += names
        amplitudes = {
            left + right: a * b
            for left, a in amplitudes.items()
            for right, b in components.items()
        }
    if len(set(labels)) != len(labels):
        raise RegisterError(f"Tensor product repeats a qubit: {labels}.")
    return labels, amplitudes


def scale(coefficient: sympy.Expr, k: SymKet) -> SymKet:
    return k[0], {bits: coefficient * value for bits, value in k[1].items()}


def reorder(k: SymKet, register: tuple[str, ...] = REGISTER) -> SymKet:
    labels, components = k
    if sorted(labels) != sorted(register):
        raise RegisterError(f"Ket on {labels} does not cover register {register}.")
    positions = [labels.index(q) for q in register]
    return register, {
        "".join(bits[p] for p in positions): value for bits, value in components.items()
    }


# ── Building blocks ──────────────────────────────────────────────────────

def atom_patterns(atoms: int) -> tuple[str, str, str]:
    """(e_pre, e_c, e_s) for one or two atoms."""
    if atoms == 2:
        return "11", "10", "01"
    if atoms == 1:
        return "10", "10", "00"
    raise DomainError(f"atoms must be 1 or 2, got {atoms!r}.")


def _omega(sign: int) -> SymKet:
    return superpose((1 / sqrt(2), ket("b", "0")), (sign * I / sqrt(2), ket("b", "1")))


def _beta(sign: int) -> SymKet:
    return superpose((S, ket("b", "0")), (sign * I * C, ket("b", "1")))


def _xi(sign: int, atoms: int) -> SymKet:
    _, e_c, e_s = atom_patterns(atoms)
    return superpose((S, ket("e1 e2", e_s)), (sign * C, ket("e1 e2", e_c)))


def symbolic_state(stage: str, qwp_in: bool, atoms: int = 2) -> SymKet:
    """Closed-form ket of *stage* over the full register."""
    e_pre, e_c, e_s = atom_patterns(atoms)
    pre, lower, upper = ket("e1 e2", e_pre), ket("e1 e2", e_c), ket("e1 e2", e_s)

    if stage == "psi0":
        state = tensor(superpose((C, ket("A B", "01")), (S, ket("A B", "10"))),
                       ket("a b", "00"), pre)
    elif stage == "psi1":
        state = tensor(superpose((I * C, ket("A B b", "011")), (S, ket("A B b", "100"))),
                       ket("a", "0"), pre)
    elif stage == "psi2":
        state = tensor(superpose((I * C, ket("A b", "01")), (S, ket("A b", "10"))),
                       ket("B a", "00"), pre)
    elif stage == "psi3":
        state = tensor(superpose((I * C, tensor(ket("A b", "01"), lower)),
                                 (S, tensor(ket("A b", "10"), upper))),
                       ket("B a", "00"))
    elif stage == "psi4":
        state = tensor(superpose((-C, tensor(ket("A b", "00"), lower)),
                                 (I * S, tensor(ket("A b", "11"), upper))),
                       ket("B a", "00"))
    elif stage == "psi5":
        state = tensor(superpose((C, tensor(ket("A", "0"), lower, _omega(+1))),
                                 (S, tensor(ket("A", "1"), upper, _omega(-1)))),
                       ket("B a", "00"))
    elif stage == "psi2_branch" and not qwp_in:
        state = scale(I, tensor(superpose((C, ket("A a b", "001")), (S, ket("A a b", "110"))),
                                ket("B", "0"), pre))
    elif stage == "psi2_branch":
        state = tensor(superpose((1 / sqrt(2), tensor(ket("A a", "00"), _beta(+1))),
                                 (1 / sqrt(2), tensor(ket("A a", "11"), _beta(-1)))),
                       ket("B", "0"), pre)
    elif stage == "psi5_branch" and not qwp_in:
        state = tensor(superpose((C, tensor(ket("A a", "00"), lower, _omega(+1))),
                                 (I * S, tensor(ket("A a", "11"), upper, _omega(-1)))),
                       ket("B", "0"))
    elif stage == "psi5_branch":
        half = Rational(1, 2)
        state = tensor(superpose(
            (half, tensor(ket("A a b", "000"), _xi(+1, atoms))),
            (-I * half, tensor(ket("A a b", "001"), _xi(-1, atoms))),
            (half, tensor(ket("A a b", "110"), _xi(-1, atoms))),
            (-I * half, tensor(ket("A a b", "111"), _xi(+1, atoms))),
        ), ket("B", "0"))
    elif stage == "mzi_output" and not qwp_in:
        state = tensor(ket("A a B", "000"), _omega(+1), lower)
    elif stage == "mzi_output":
        state = tensor(ket("A a B", "000"),
                       superpose((1 / sqrt(2), tensor(ket("b", "1"), _xi(-1, atoms))),
                                 (I / sqrt(2), tensor(ket("b", "0"), _xi(+1, atoms)))))
    else:
        raise DomainError(f"No closed form for stage '{stage}'.")
    return reorder(state)


# ── Numeric evaluation ───────────────────────────────────────────────────

@lru_cache(maxsize=None)
def _compiled(stage: str, qwp_in: bool, atoms: int) -> Callable[[float], np.ndarray]:
    labels, components = symbolic_state(stage, qwp_in, atoms)
    indices = [int(bits, 2) for bits in components]
    evaluate = lambdify(THETA, [sympy.expand(v) for v in components.values()], modules="numpy")
    dim = 2 ** len(labels)

    def amplitudes(theta: float) -> np.ndarray:
        vector = np.zeros(dim, dtype=complex)
        vector[indices] = np.asarray(evaluate(theta), dtype=complex)
        return vector

    return amplitudes


def oracle_amplitudes(stage: str, qwp_in: bool, atoms: int, theta: float) -> np.ndarray:
    """Amplitude vector of the closed-form *stage* state at angle *theta*."""
    return _compiled(stage, bool(qwp_in), int(atoms))(float(theta))


def xi_amplitudes(sign: int, atoms: int, theta: float) -> np.ndarray:
    """Amplitudes of the atom state s|e_s> +/- c|e_c> over (e1, e2)."""
    _, components = _xi(sign, atoms)
    vector = np.zeros(4, dtype=complex)
    for bits, value in components.items():
        vector[int(bits, 2)] += complex(value.subs(THETA, theta).evalf())
    return vector


def norm_squared(stage: str, qwp_in: bool, atoms: int = 2) -> sympy.Expr:
    """Simplified <psi|psi> of the closed form (identically 1)."""
    _, components = symbolic_state(stage, qwp_in, atoms)
    total = sum(sympy.expand(v * sympy.conjugate(v)) for v in components.values())
    return sympy.simplify(total)
