"""Irreality, coherence, measurement discord and entanglement entropy.

All measures are in bits.  The ``*_raw`` variants keep tiny negative
floating-point residues; the public ones clamp them to zero.

    irreality(rho, A)  = S(Phi_A(rho)) - S(rho)
    coherence(rho, A)  = S(Phi_A(rho_A)) - S(rho_A)
    discord(rho, A)    = irreality - coherence
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from simulator.errors import RegisterError, ValidationError
from simulator.qmath import (
    ComplexMatrix,
    DensityMatrix,
    StateVector,
    as_matrix,
    embed,
    partial_trace,
    reduce_state,
    von_neumann_entropy,
)

_BASIS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MeasureTarget:
    """A single-qubit observable: its label and eigenbasis (columns).

    The default basis is the computational one, which for the atom qubits
    is the energy basis.
    """

    label: str
    basis: Optional[ComplexMatrix] = None

    def __post_init__(self) -> None:
        if self.basis is None:
            return
        basis = as_matrix(self.basis)
        if basis.shape != (2, 2):
            raise ValidationError(f"Target basis must be 2x2, got {basis.shape}.")
        if np.max(np.abs(basis.conj().T @ basis - np.eye(2))) > _BASIS_TOL:
            raise ValidationError(f"Basis of target '{self.label}' is not orthonormal.")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def coerce(cls, target: Union[str, "MeasureTarget"]) -> "MeasureTarget":
        return target if isinstance(target, MeasureTarget) else cls(str(target))

    def projectors(self) -> list[ComplexMatrix]:
        basis = np.eye(2, dtype=complex) if self.basis is None else self.basis
        return [np.outer(basis[:, i], basis[:, i].conj()) for i in range(2)]


TargetLike = Union[str, MeasureTarget]


# ── Dephasing ────────────────────────────────────────────────────────────

def dephase(rho: DensityMatrix, target: TargetLike) -> DensityMatrix:
    """Nonselective measurement of *target*: sum_i M_i rho M_i."""
    target = MeasureTarget.coerce(target)
    position = rho.index_of(target.label)
    n = rho.n_qubits
    matrix = np.zeros_like(rho.matrix)
    for projector in target.projectors():
        m = embed(projector, position, n)
        matrix += m @ rho.matrix @ m
    return DensityMatrix(rho.register, matrix)


def dephase_many(rho: DensityMatrix, targets: Iterable[TargetLike]) -> DensityMatrix:
    """Composition of single-qubit dephasings (they commute)."""
    targets = [MeasureTarget.coerce(t) for t in targets]
    labels = [t.label for t in targets]
    if len(set(labels)) != len(labels):
        raise RegisterError(f"Dephasing targets must be distinct, got {labels}.")
    for target in targets:
        rho = dephase(rho, target)
    return rho


# ── Irreality and its decomposition ──────────────────────────────────────

def irreality_raw(rho: DensityMatrix, target: TargetLike) -> float:
    return von_neumann_entropy(dephase(rho, target)) - von_neumann_entropy(rho)


def irreality(rho: DensityMatrix, target: TargetLike) -> float:
    return max(irreality_raw(rho, target), 0.0)


def joint_irreality(rho: DensityMatrix, targets: Iterable[TargetLike]) -> float:
    """Irreality of measuring several qubits at once."""
    raw = von_neumann_entropy(dephase_many(rho, targets)) - von_neumann_entropy(rho)
    return max(raw, 0.0)


def coherence_raw(rho: DensityMatrix, target: TargetLike) -> float:
    target = MeasureTarget.coerce(target)
    reduced = reduce_state(rho, [target.label])
    return von_neumann_entropy(dephase(reduced, target)) - von_neumann_entropy(reduced)


def coherence_rel_entropy(rho: DensityMatrix, target: TargetLike) -> float:
    """Relative entropy of coherence of the target's reduced state."""
    return max(coherence_raw(rho, target), 0.0)


def discord_raw(rho: DensityMatrix, target: TargetLike) -> float:
    return irreality_raw(rho, target) - coherence_raw(rho, target)


def discord_of_measurement(rho: DensityMatrix, target: TargetLike) -> float:
    return max(discord_raw(rho, target), 0.0)


def decompose(rho: DensityMatrix, target: TargetLike) -> dict:
    """Irreality split into local coherence and measurement discord."""
    return {
        "irreality": irreality(rho, target),
        "coherence": coherence_rel_entropy(rho, target),
        "discord": discord_of_measurement(rho, target),
    }


# ── Entanglement ─────────────────────────────────────────────────────────

def entanglement_entropy(psi: StateVector, cut: Iterable[str]) -> float:
    """Entropy of the reduced state of *cut* for a pure state."""
    cut = tuple(cut)
    if not cut:
        raise RegisterError("Entanglement cut must not be empty.")
    for label in cut:
        psi.index_of(label)
    if set(cut) == set(psi.register):
        raise RegisterError("Entanglement cut must be a proper subset of the register.")
    rest = [q for q in psi.register if q not in cut]
    return von_neumann_entropy(partial_trace(psi.density(), rest))
