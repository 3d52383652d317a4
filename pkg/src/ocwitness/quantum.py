"""Dense density-matrix and POVM layer for small Hilbert spaces.

Covers Born-rule values of prepare-and-measure and entanglement-assisted
protocols, orthogonal mixtures, partial traces, conditional collapses and
the conversion of entanglement-assisted protocols into prepare-and-measure
ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tasks import CCTask, require_valid

TOL = 1e-9
ZERO_BRANCH = 1e-12


class ShapeMismatch(ValueError):
    pass


class ZeroProbabilityBranch(ValueError):
    pass


def _hermitian_defect(m: np.ndarray) -> float:
    return float(np.abs(m - m.conj().T).max(initial=0.0))


def _min_eigenvalue(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        if _hermitian_defect(m) > TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1) > TOL:
            raise ValueError(f"density matrix has trace {tr!r}")
        if _min_eigenvalue(m) < -TOL:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, ket: Sequence[complex]) -> "DensityMatrix":
        v = np.asarray(ket, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim)


@dataclass(frozen=True, eq=False)
class Povm:
    """Ordered effects, one per outcome; stored as an array ``(k, dim, dim)``."""

    effects: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.effects, dtype=complex)
        if e.ndim != 3 or e.shape[1] != e.shape[2]:
            raise ValueError(f"POVM effects must have shape (k, d, d), got {e.shape}")
        for i, eff in enumerate(e):
            if _hermitian_defect(eff) > TOL:
                raise ValueError(f"effect {i} is not Hermitian")
            if _min_eigenvalue(eff) < -TOL:
                raise ValueError(f"effect {i} is not positive semidefinite")
        if np.abs(e.sum(axis=0) - np.eye(e.shape[1])).max() > TOL:
            raise ValueError("POVM effects do not sum to the identity")
        object.__setattr__(self, "effects", e)

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.effects.shape[0]

    def __len__(self) -> int:
        return self.n_outcomes

    def __getitem__(self, k: int) -> np.ndarray:
        return self.effects[k]

    @classmethod
    def projective(cls, basis: np.ndarray) -> "Povm":
        """Rank-1 projectors onto the columns of ``basis``."""
        b = np.asarray(basis, dtype=complex)
        return cls(np.stack([np.outer(b[:, k], b[:, k].conj()) for k in range(b.shape[1])]))


@dataclass(eq=False)
class PMProtocol:
    """Prepare-and-measure protocol: ``states[x]`` and ``measurements[y]``."""

    states: list[DensityMatrix]
    measurements: list[Povm]

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def check(self, task: CCTask | None = None) -> None:
        d = self.dim
        if any(s.dim != d for s in self.states) or any(
            m.dim != d for m in self.measurements
        ):
            raise ShapeMismatch("protocol states and measurements disagree on dimension")
        if task is None:
            return
        if len(self.states) != task.n_x:
            raise ShapeMismatch(f"protocol has {len(self.states)} states, task has n_x={task.n_x}")
        if len(self.measurements) != task.n_y:
            raise ShapeMismatch(
                f"protocol has {len(self.measurements)} measurements, task has n_y={task.n_y}"
            )
        for y, m in enumerate(self.measurements):
            if m.n_outcomes != task.n_z:
                raise ShapeMismatch(f"measurement {y} has {m.n_outcomes} outcomes, expected {task.n_z}")


@dataclass(eq=False)
class EAProtocol:
    """Entanglement-assisted protocol with a ``d``-valued classical message.

    ``alice[x]`` is a ``d``-outcome POVM on A; ``bob[y][m]`` is Bob's POVM on
    B after receiving message ``m``.
    """

    shared: DensityMatrix
    dims: tuple[int, int]
    alice: list[Povm]
    bob: list[list[Povm]]

    @property
    def d(self) -> int:
        return self.alice[0].n_outcomes

    def check(self, task: CCTask | None = None) -> None:
        d_a, d_b = self.dims
        if self.shared.dim != d_a * d_b:
            raise ShapeMismatch("shared state dimension is not d_A * d_B")
        d = self.d
        for x, a in enumerate(self.alice):
            if a.dim != d_a or a.n_outcomes != d:
                raise ShapeMismatch(f"Alice POVM {x} does not act on d_A with {d} outcomes")
        for y, row in enumerate(self.bob):
            if len(row) != d:
                raise ShapeMismatch(f"Bob row {y} needs one POVM per message value")
            for m, b in enumerate(row):
                if b.dim != d_b:
                    raise ShapeMismatch(f"Bob POVM ({y}, {m}) does not act on d_B")
        if task is None:
            return
        if len(self.alice) != task.n_x or len(self.bob) != task.n_y:
            raise ShapeMismatch("EA protocol does not match task input sizes")
        if d != task.d:
            raise ShapeMismatch(f"Alice sends d={d} values, task allows d={task.d}")
        for row in self.bob:
            for b in row:
                if b.n_outcomes != task.n_z:
                    raise ShapeMismatch("Bob POVM outcome count differs from the task's")


def born(rho: np.ndarray, effect: np.ndarray) -> float:
    return float(np.einsum("ij,ji->", rho, effect).real)


def outcome_table(protocol: PMProtocol) -> np.ndarray:
    """``P[x, y, z] = tr(rho_x M^y_z)``."""
    rhos = np.stack([s.matrix for s in protocol.states])
    effects = np.stack([m.effects for m in protocol.measurements])
    return np.einsum("xij,yzji->xyz", rhos, effects).real


def pm_value(task: CCTask, protocol: PMProtocol) -> float:
    """Average success ``sum p(x,y) tr(rho_x M^y_z)`` over successful ``z``."""
    require_valid(task)
    protocol.check(task)
    return float((task.prior[:, :, None] * task.success_mask() * outcome_table(protocol)).sum())


def chi(task: CCTask, protocol: PMProtocol) -> float:
    """Prior-weighted trace of the successful effects."""
    require_valid(task)
    protocol.check(task)
    traces = np.array(
        [[np.trace(e).real for e in m.effects] for m in protocol.measurements]
    )
    return float((task.prior[:, :, None] * task.success_mask() * traces[None, :, :]).sum())


def ea_value(task: CCTask, protocol: EAProtocol) -> float:
    require_valid(task)
    protocol.check(task)
    rho = protocol.shared.matrix
    mask = task.success_mask()
    total = 0.0
    for x in range(task.n_x):
        for y in range(task.n_y):
            p = task.prior[x, y]
            if p == 0:
                continue
            for m in range(protocol.d):
                bob = protocol.bob[y][m]
                good = sum(bob[z] for z in range(task.n_z) if mask[x, y, z])
                if isinstance(good, int):
                    continue
                total += p * born(rho, np.kron(protocol.alice[x][m], good))
    return total


def partial_trace_A(rho_ab: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    r = np.asarray(rho_ab).reshape(d_a, d_b, d_a, d_b)
    return np.einsum("ibid->bd", r)


def partial_trace_B(rho_ab: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    r = np.asarray(rho_ab).reshape(d_a, d_b, d_a, d_b)
    return np.einsum("ajbj->ab", r)


def collapse_B(
    rho_ab: np.ndarray, effect_a: np.ndarray, d_a: int, d_b: int
) -> tuple[float, DensityMatrix]:
    """Probability of ``effect_a`` on A and Bob's conditional state.

    Raises
    ------
    ZeroProbabilityBranch
        If the outcome probability is below ``1e-12``.
    """
    unnorm = unnormalized_collapse(rho_ab, effect_a, d_a, d_b)
    p = float(np.trace(unnorm).real)
    if p < ZERO_BRANCH:
        raise ZeroProbabilityBranch(f"zero-probability branch (p={p:.3g})")
    return p, DensityMatrix(_hermitize(unnorm / p))


def unnormalized_collapse(rho_ab, effect_a, d_a: int, d_b: int) -> np.ndarray:
    op = np.kron(effect_a, np.eye(d_b))
    return partial_trace_A(op @ np.asarray(rho_ab), d_a, d_b)


def _hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def orthogonal_mixture(rho: DensityMatrix) -> DensityMatrix:
    """``(I - rho) / (d - 1)``: the state completing ``rho`` to ``I / d``."""
    d = rho.dim
    if d < 2:
        raise ValueError("orthogonal mixture needs dimension >= 2")
    return DensityMatrix((np.eye(d) - rho.matrix) / (d - 1))


def ea_to_pm(protocol: EAProtocol) -> PMProtocol:
    """Prepare-and-measure protocol on ``C^d (x) C^e`` with the same value.

    Alice's state for ``x`` is ``sum_m |m><m| (x) Tr_A[(M^x_m (x) I) rho_AB]``
    and Bob's measurement for ``y`` is the block POVM
    ``{sum_m |m><m| (x) M^{y,m}_z}_z``. Zero-weight branches contribute a
    zero block.
    """
    protocol.check()
    d_a, d_b = protocol.dims
    d = protocol.d
    rho = protocol.shared.matrix
    kets = np.eye(d)
    states = []
    for povm in protocol.alice:
        block = np.zeros((d * d_b, d * d_b), dtype=complex)
        for m in range(d):
            sub = unnormalized_collapse(rho, povm[m], d_a, d_b)
            if np.trace(sub).real < ZERO_BRANCH:
                continue
            block += np.kron(np.outer(kets[m], kets[m]), sub)
        states.append(DensityMatrix(_hermitize(block)))
    measurements = []
    for row in protocol.bob:
        n_z = row[0].n_outcomes
        effects = [
            sum(np.kron(np.outer(kets[m], kets[m]), row[m][z]) for m in range(d))
            for z in range(n_z)
        ]
        measurements.append(Povm(np.stack(effects)))
    return PMProtocol(states, measurements)


def apply_channel(kraus: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in kraus)


def apply_adjoint_channel(kraus: Sequence[np.ndarray], effect: np.ndarray) -> np.ndarray:
    return sum(k.conj().T @ effect @ k for k in kraus)


def ea_cptp_protocol(
    shared: DensityMatrix,
    dims: tuple[int, int],
    alice: list[Povm],
    channels: list[Sequence[np.ndarray]],
    measurements: list[Povm],
) -> EAProtocol:
    """EA protocol where Bob applies channel ``channels[m]`` then measures ``measurements[y]``."""
    bob = [
        [
            Povm(np.stack([apply_adjoint_channel(channels[m], e) for e in meas.effects]))
            for m in range(len(channels))
        ]
        for meas in measurements
    ]
    return EAProtocol(shared, dims, alice, bob)


def ea_to_pm_cptp(
    shared: DensityMatrix,
    dims: tuple[int, int],
    alice: list[Povm],
    channels: list[Sequence[np.ndarray]],
    measurements: list[Povm],
) -> PMProtocol:
    """Dimension-``e`` conversion when Bob's message dependence is a channel.

    Alice, knowing ``m``, sends ``sum_m p(m|x) phi_m(rho_{B|x,m})``; Bob
    performs the fixed measurement ``measurements[y]``.
    """
    d_a, d_b = dims
    rho = shared.matrix
    states = []
    for povm in alice:
        out = np.zeros((d_b, d_b), dtype=complex)
        for m in range(povm.n_outcomes):
            sub = unnormalized_collapse(rho, povm[m], d_a, d_b)
            if np.trace(sub).real < ZERO_BRANCH:
                continue
            out += apply_channel(channels[m], sub)
        states.append(DensityMatrix(_hermitize(out)))
    return PMProtocol(states, list(measurements))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(_hermitize(m / np.trace(m).real))


def random_povm(dim: int, n_outcomes: int, rng: np.random.Generator) -> Povm:
    """Normalized Wishart effects ``S^{-1/2} G_k S^{-1/2}`` with ``S = sum_k G_k``."""
    gs = []
    for _ in range(n_outcomes):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        gs.append(a @ a.conj().T)
    s = sum(gs)
    w, v = np.linalg.eigh(s)
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    effects = [_hermitize(s_inv_half @ g @ s_inv_half) for g in gs]
    effects[-1] = np.eye(dim) - sum(effects[:-1])
    return Povm(np.stack(effects))
