"""Density matrices, instruments in Kraus form, and sequential joint tables.

An instrument is a finite collection of completely positive "branches",
one per outcome, whose sum is trace preserving. Applying branch b to a
state rho gives the unnormalized post-measurement state; its trace is the
outcome probability. Chaining three instruments in a declared temporal
order and tracing at the end yields the joint outcome table consumed by
the rest of the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import matrices as mx
from .errors import DimensionMismatch, NegativeMass, NotNormalized, ParameterOutOfRange
from .joint import DEFAULT_TOL, Event, JointDistribution, OutcomeSpace, validate_joint

DENSITY_TRACE_TOL = 1e-9
COMPLETENESS_TOL = 1e-9

ORDERS = ("ABE", "AEB")


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = mx.as_complex_matrix(self.matrix, "density matrix")
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got {m.shape}")
        if not mx.is_hermitian(m):
            raise DimensionMismatch(
                f"density matrix is not hermitian (deviation {mx.hermiticity_deviation(m):.3e})"
            )
        low = mx.min_eigenvalue(m)
        if low < -mx.PSD_TOL:
            raise NegativeMass(
                f"density matrix has eigenvalue {low:.3e} below -{mx.PSD_TOL}"
            )
        tr = complex(np.trace(m)).real
        if abs(tr - 1) > DENSITY_TRACE_TOL:
            raise NotNormalized(f"density matrix trace is {tr}, not 1")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, vec) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise DimensionMismatch("cannot build a state from the zero vector")
        return cls(mx.projector(v / n))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True)
class Instrument:
    """Outcome-indexed collection of CP maps summing to a trace-preserving map.

    ``branches[b]`` is the tuple of Kraus operators of branch b, each of
    shape (dim_out, dim_in). Construction checks trace preservation of the
    total map unless ``check=False`` (used to build deliberately broken
    instruments for diagnostics).
    """

    branches: tuple[tuple[np.ndarray, ...], ...]
    check: bool = True

    def __post_init__(self):
        if not self.branches or any(not b for b in self.branches):
            raise DimensionMismatch("instrument needs at least one Kraus operator per branch")
        frozen = []
        d_out, d_in = mx.as_complex_matrix(self.branches[0][0]).shape
        for branch in self.branches:
            ops = []
            for k in branch:
                k = mx.as_complex_matrix(k, "kraus operator").copy()
                if k.shape != (d_out, d_in):
                    raise DimensionMismatch(
                        f"kraus operator shape {k.shape} != {(d_out, d_in)}"
                    )
                k.setflags(write=False)
                ops.append(k)
            frozen.append(tuple(ops))
        object.__setattr__(self, "branches", tuple(frozen))
        if self.check:
            dev = completeness_deviation(self)
            if dev > COMPLETENESS_TOL:
                raise NotNormalized(
                    f"instrument is not trace preserving: ||sum K^dag K - 1|| = {dev:.3e}"
                )

    @property
    def dim_in(self) -> int:
        return self.branches[0][0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.branches[0][0].shape[0]

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    @classmethod
    def projective(cls, basis) -> "Instrument":
        """Projective instrument from an orthonormal basis (columns or list of kets)."""
        vecs = np.asarray(basis, dtype=complex)
        if vecs.ndim != 2:
            raise DimensionMismatch("basis must be a matrix of column vectors")
        return cls(tuple((mx.projector(vecs[:, c]),) for c in range(vecs.shape[1])))

    @classmethod
    def from_projectors(cls, projectors) -> "Instrument":
        """One branch per projector, with the projective update rule."""
        return cls(tuple((mx.as_complex_matrix(p),) for p in projectors))

    @classmethod
    def identity(cls, dim: int) -> "Instrument":
        return cls(((np.eye(dim, dtype=complex),),))


def completeness_deviation(instr: Instrument) -> float:
    """Spectral norm of sum_b sum_m K^dag K - identity."""
    d_in = instr.dim_in
    acc = np.zeros((d_in, d_in), dtype=complex)
    for branch in instr.branches:
        for k in branch:
            acc += mx.dagger(k) @ k
    return float(np.abs(np.linalg.eigvalsh(acc - np.eye(d_in))).max())


def apply_branch(branch: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    """Unnormalized post-measurement state sum_m K_m rho K_m^dag.

    The trace of the result is the branch probability.
    """
    rho = mx.as_complex_matrix(rho, "state")
    out = None
    for k in branch:
        k = mx.as_complex_matrix(k, "kraus operator")
        if k.shape[1] != rho.shape[0] or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatch(
                f"kraus operator {k.shape} cannot act on state {rho.shape}"
            )
        term = k @ rho @ mx.dagger(k)
        out = term if out is None else out + term
    return out


@dataclass(frozen=True)
class QuantumScenario:
    """Initial state, three instruments, a temporal order, and the event.

    ``order`` is "ABE" (Alice, Bob, then the event measurement) or "AEB"
    (event measurement between Alice and Bob). The joint table axes are
    always reported as (i, j, k) regardless of temporal order.
    """

    state: DensityMatrix
    instr_a: Instrument
    instr_b: Instrument
    instr_e: Instrument
    order: str = "ABE"
    event: Event | None = None

    def __post_init__(self):
        if self.order not in ORDERS:
            raise DimensionMismatch(f"order must be one of {ORDERS}, got {self.order!r}")
        chain = self.instrument_chain()
        dim = self.state.dim
        for instr in chain:
            if instr.dim_in != dim:
                raise DimensionMismatch(
                    f"instrument expects input dim {instr.dim_in}, chain carries {dim}"
                )
            dim = instr.dim_out
        if self.event is None:
            object.__setattr__(
                self, "event", Event(self.space, frozenset(range(self.instr_e.n_branches)))
            )
        elif self.event.space.sizes != self.space.sizes:
            raise DimensionMismatch("event was built over a different outcome space")

    @property
    def space(self) -> OutcomeSpace:
        return OutcomeSpace(
            self.instr_a.n_branches, self.instr_b.n_branches, self.instr_e.n_branches
        )

    def instrument_chain(self) -> tuple[Instrument, ...]:
        by_name = {"A": self.instr_a, "B": self.instr_b, "E": self.instr_e}
        return tuple(by_name[c] for c in self.order)


def sequential_joint(scenario: QuantumScenario, tol: float = DEFAULT_TOL) -> JointDistribution:
    """Joint table p(i, j, k) from composing the three instruments in order.

    p(i, j, k) is the trace of the selected branches applied to the state
    in the scenario's temporal order; the output axes are always (i, j, k).
    """
    s = scenario
    table = np.zeros(s.space.sizes, dtype=float)
    if s.order == "ABE":
        for i, br_a in enumerate(s.instr_a.branches):
            rho_i = apply_branch(br_a, s.state.matrix)
            for j, br_b in enumerate(s.instr_b.branches):
                rho_ij = apply_branch(br_b, rho_i)
                for k, br_e in enumerate(s.instr_e.branches):
                    table[i, j, k] = complex(np.trace(apply_branch(br_e, rho_ij))).real
    else:  # AEB
        for i, br_a in enumerate(s.instr_a.branches):
            rho_i = apply_branch(br_a, s.state.matrix)
            for k, br_e in enumerate(s.instr_e.branches):
                rho_ik = apply_branch(br_e, rho_i)
                for j, br_b in enumerate(s.instr_b.branches):
                    table[i, j, k] = complex(np.trace(apply_branch(br_b, rho_ik))).real
    return validate_joint(table, s.space, tol)


def _block_basis(theta: float, phi: float) -> np.ndarray:
    """Four-level basis rotated by theta in the {0,1} block and phi in {2,3}."""
    c_t, s_t = np.cos(theta), np.sin(theta)
    c_p, s_p = np.cos(phi), np.sin(phi)
    b = np.zeros((4, 4), dtype=complex)
    b[:, 0] = (c_t, s_t, 0, 0)
    b[:, 1] = (-s_t, c_t, 0, 0)
    b[:, 2] = (0, 0, c_p, s_p)
    b[:, 3] = (0, 0, -s_p, c_p)
    return b


def _check_block_params(q: float, r: float) -> None:
    if not 0 < q < 0.5:
        raise ParameterOutOfRange(f"q must satisfy 0 < q < 1/2, got {q}")
    if not 0 < r < 1 - 2 * q:
        raise ParameterOutOfRange(f"r must satisfy 0 < r < 1 - 2q = {1 - 2 * q}, got {r}")


def block_rotation_scenario(
    theta: float, phi: float, q: float, r: float, state: DensityMatrix | None = None
) -> QuantumScenario:
    """Four-level worked example with block-rotated bases and a binary event.

    Alice measures the computational basis {|a_i>}. Bob measures the basis
    obtained by rotating the {a_0, a_1} block by theta and the {a_2, a_3}
    block by phi. The event measurement is the binary projective instrument
    onto e_0 = sqrt(q) b_0 + sqrt(q) b_1 + sqrt(r) b_2 + sqrt(1-2q-r) b_3
    and its complement, with the event being outcome k = 0. Requires
    0 < q < 1/2 and 0 < r < 1 - 2q. Order is Alice, Bob, then the event.
    """
    _check_block_params(q, r)
    if state is None:
        state = DensityMatrix.maximally_mixed(4)
    if state.dim != 4:
        raise DimensionMismatch(f"this scenario is four dimensional, state has dim {state.dim}")
    basis_b = _block_basis(theta, phi)
    weights = np.sqrt([q, q, r, 1 - 2 * q - r])
    e0 = basis_b @ weights.astype(complex)
    p0 = mx.projector(e0)
    instr_a = Instrument.projective(np.eye(4, dtype=complex))
    instr_b = Instrument.projective(basis_b)
    instr_e = Instrument.from_projectors([p0, np.eye(4, dtype=complex) - p0])
    space = OutcomeSpace(4, 4, 2)
    return QuantumScenario(
        state, instr_a, instr_b, instr_e, order="ABE",
        event=Event(space, frozenset({0})),
    )


def closed_form_posteriors(
    theta: float, phi: float, q: float, r: float
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form posterior vectors (q_A, q_B) for the block-rotation example.

    q_A = (q, q, c_phi^2 r + s_phi^2 (1-2q-r), s_phi^2 r + c_phi^2 (1-2q-r))
    q_B = (q, q, r, 1-2q-r)

    q_B carries no angle dependence. These serve as the independent oracle
    for the full instrument pipeline.
    """
    _check_block_params(q, r)
    c2 = np.cos(phi) ** 2
    s2 = np.sin(phi) ** 2
    rest = 1 - 2 * q - r
    q_a = np.array([q, q, c2 * r + s2 * rest, s2 * r + c2 * rest])
    q_b = np.array([q, q, r, rest])
    return q_a, q_b


@dataclass(frozen=True)
class InstrumentDiagnostics:
    """Per-branch Choi positivity and total trace preservation report."""

    branch_min_choi_eigenvalues: tuple[float, ...]
    completeness_deviation: float
    passes: bool


def validate_instrument(instr: Instrument, tol: float = COMPLETENESS_TOL) -> InstrumentDiagnostics:
    """Diagnose an instrument: branch Choi spectra and trace preservation."""
    eigs = tuple(
        mx.min_eigenvalue(mx.choi_matrix(branch)) for branch in instr.branches
    )
    dev = completeness_deviation(instr)
    passes = dev <= tol and all(e >= -max(tol, mx.PSD_TOL) for e in eigs)
    return InstrumentDiagnostics(eigs, dev, passes)
