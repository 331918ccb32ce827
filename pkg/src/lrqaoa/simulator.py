"""Noiseless state-vector engine for linear-ramp QAOA.

The cost unitary ``exp(-i gamma H)`` is diagonal, so a layer is one phase pass
over a precomputed energy table followed by ``n`` strided single-qubit sweeps
for the mixer ``prod_m exp(+i beta X_m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .errors import CapacityError, ParameterError
from .ising import BRUTE_FORCE_CAP, GroundTruth, IsingModel, energy_table
from .metrics import SampleSet
from .schedule import LinearRampSchedule

STATE_CAP = 26
LEVEL_TOL = 1e-12


@dataclass(eq=False)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())


@dataclass(frozen=True, eq=False)
class EnergyTable:
    energies: np.ndarray

    @classmethod
    def from_model(cls, model: IsingModel, cap: int = STATE_CAP) -> "EnergyTable":
        return cls(energy_table(model, cap=max(cap, BRUTE_FORCE_CAP)))

    @property
    def num_qubits(self) -> int:
        return int(self.energies.size).bit_length() - 1


@dataclass
class TrajectoryRecord:
    """Per-layer probability mass on each distinct energy level.

    Row ``t`` of ``level_probs`` is the state after ``t`` layers (row 0 is the
    initial state); injected gates at boundary ``t`` are included in row ``t``.
    """

    levels: np.ndarray
    level_probs: list = field(default_factory=list)
    tracked: dict = field(default_factory=dict)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.level_probs)

    def ground_probability(self) -> np.ndarray:
        return self.as_array()[:, 0]

    def rows(self):
        """``(layer, energy, probability)`` triples for CSV export."""
        for t, probs in enumerate(self.level_probs):
            for e, pr in zip(self.levels, probs):
                yield t, float(e), float(pr)


# ---------------------------------------------------------------------------
# kernels


@numba.njit(cache=True)
def _mixer_kernel(psi, c, s, n):
    # (a, b) <- (c a + i s b, i s a + c b) on every pair differing in bit q
    size = psi.shape[0]
    js = 1j * s
    for q in range(n):
        stride = 1 << q
        for base in range(0, size, 2 * stride):
            for k in range(base, base + stride):
                a = psi[k]
                b = psi[k + stride]
                psi[k] = c * a + js * b
                psi[k + stride] = js * a + c * b


@numba.njit(cache=True)
def _phase_kernel(psi, energies, gamma):
    for k in range(psi.shape[0]):
        theta = -gamma * energies[k]
        psi[k] *= complex(math.cos(theta), math.sin(theta))


# ---------------------------------------------------------------------------
# operations


def _check_cap(n: int, cap: int) -> None:
    if n < 1:
        raise ParameterError("need at least one qubit")
    if n > cap:
        raise CapacityError(f"{n} qubits exceeds the state-vector cap of {cap}")


def init_plus(n: int, cap: int = STATE_CAP) -> StateVector:
    _check_cap(n, cap)
    return StateVector(n, np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128))


def apply_cost_phase(state: StateVector, table, gamma: float) -> StateVector:
    """``alpha_k <- exp(-i gamma E_k) alpha_k`` in place."""
    e = table.energies if isinstance(table, EnergyTable) else np.asarray(table, dtype=float)
    if e.shape != state.amplitudes.shape:
        raise ParameterError("energy table size does not match the state")
    if gamma != 0.0:
        _phase_kernel(state.amplitudes, e, float(gamma))
    return state


def apply_mixer(state: StateVector, beta: float) -> StateVector:
    """Apply ``exp(+i beta X)`` to every qubit in place."""
    if beta != 0.0:
        _mixer_kernel(state.amplitudes, math.cos(beta), math.sin(beta), state.num_qubits)
    return state


def apply_x_layer(state: StateVector) -> StateVector:
    """Bit-flip every qubit: ``alpha_k <- alpha_{~k}``."""
    state.amplitudes[:] = state.amplitudes[::-1].copy()
    return state


def hamming_matrix(n: int) -> np.ndarray:
    k = np.arange(1 << n)
    x = k[:, None] ^ k[None, :]
    return np.array([[bin(v).count("1") for v in row] for row in x])


def mixer_oracle(state: StateVector, beta: float, cap: int = 8) -> StateVector:
    """Direct Hamming-distance form of the mixer, O(4**n).

    ``alpha'_k = sum_l cos(beta)**(n - d(k,l)) (i sin(beta))**d(k,l) alpha_l``.
    """
    n = state.num_qubits
    if n > cap:
        raise CapacityError(f"mixer oracle limited to {cap} qubits")
    d = hamming_matrix(n)
    m = np.cos(beta) ** (n - d) * (1j * np.sin(beta)) ** d
    return StateVector(n, m @ state.amplitudes)


INJECTIONS = {"X": apply_x_layer}


def energy_levels(energies: np.ndarray, tol: float = LEVEL_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Distinct levels (ascending) and the level id of every basis state."""
    order = np.argsort(energies, kind="stable")
    srt = energies[order]
    new = np.concatenate([[True], np.diff(srt) > tol])
    ids_sorted = np.cumsum(new) - 1
    ids = np.empty_like(ids_sorted)
    ids[order] = ids_sorted
    return srt[new], ids


def run(
    model: IsingModel,
    schedule: LinearRampSchedule,
    *,
    record_trajectory: bool = False,
    gate_injections: Sequence[tuple[int, str]] = (),
    table: EnergyTable | np.ndarray | None = None,
    track: Sequence[int] = (),
    cap: int = STATE_CAP,
) -> tuple[StateVector, TrajectoryRecord | None]:
    """Evolve ``|+>^n`` through ``p`` cost/mixer layers.

    ``gate_injections`` holds ``(boundary, tag)`` pairs; boundary ``t`` means
    after ``t`` complete layers (``0 <= t <= p``). ``track`` lists basis-state
    indices whose raw amplitudes are recorded.
    """
    n = model.num_vars
    _check_cap(n, cap)
    if table is None:
        table = EnergyTable.from_model(model, cap)
    e = table.energies if isinstance(table, EnergyTable) else np.asarray(table, dtype=float)
    if e.size != 1 << n:
        raise ParameterError("energy table does not match the model size")

    inject: dict[int, list[str]] = {}
    for boundary, tag in gate_injections:
        if not 0 <= boundary <= schedule.p:
            raise ParameterError(f"injection boundary {boundary} outside [0, {schedule.p}]")
        if tag not in INJECTIONS:
            raise ParameterError(f"unknown injection {tag!r}")
        inject.setdefault(int(boundary), []).append(tag)

    state = init_plus(n, cap)
    record = None
    if record_trajectory:
        levels, ids = energy_levels(e)
        record = TrajectoryRecord(levels, tracked={int(k): [] for k in track})

    def boundary(t):
        for tag in inject.get(t, ()):
            INJECTIONS[tag](state)
        if record is not None:
            record.level_probs.append(np.bincount(ids, weights=state.probabilities(),
                                                  minlength=levels.size))
            for k, amps in record.tracked.items():
                amps.append(complex(state.amplitudes[k]))

    boundary(0)
    for t, (gamma, beta) in enumerate(zip(schedule.gammas, schedule.betas), start=1):
        apply_cost_phase(state, e, gamma)
        apply_mixer(state, beta)
        boundary(t)
    return state, record


def success_probability(state: StateVector, truth: GroundTruth) -> float:
    if truth.num_vars != state.num_qubits:
        raise ParameterError("ground truth size does not match the state")
    amps = state.amplitudes[truth.optimal_indices]
    return float(np.sum(amps.real ** 2 + amps.imag ** 2))


def sample(state: StateVector, shots: int, seed=None, model: IsingModel | None = None) -> SampleSet:
    """Multinomial measurement in the computational basis."""
    if shots < 1:
        raise ParameterError("shots must be >= 1")
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(int(shots), probs)
    nz = np.flatnonzero(counts)
    return SampleSet.from_indices(nz, counts[nz], state.num_qubits, model)


def expected_energy(state: StateVector, table) -> float:
    e = table.energies if isinstance(table, EnergyTable) else np.asarray(table)
    return float(state.probabilities() @ e)
