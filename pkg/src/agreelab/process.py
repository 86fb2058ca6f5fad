"""Process-matrix evaluation of joint outcome probabilities.

Three labs A, B, E each receive a system, apply one branch of their
instrument, and send the system out. A process matrix W assigns a joint
probability to the observed branches without presupposing a causal order:

    p(i, j, k) = tr[(C_Ai (x) C_Bj (x) C_Ek) W],

where C_X is the Choi operator of the branch. Definite-order circuits,
classical mixtures of orders, and causally indefinite processes all fit
this rule; the definite-order embedding here is cross-checked against the
sequential composition in :mod:`agreelab.quantum`.

Conventions, fixed once and used everywhere:

* Choi operators put the input factor first:
  ``C = (id (x) M)(|phi+><phi+|)`` on ``H_in (x) H_out`` with the
  unnormalized ``|phi+> = sum_x |x>|x>``.
* W acts on the six-factor space ordered
  ``(A_in, A_out, B_in, B_out, E_in, E_out)``.
* A valid W is hermitian, positive semidefinite, and has trace equal to
  the product of the lab output dimensions.

This ordering is part of the scenario file contract; a mismatched
convention is the dominant failure mode when importing external W
matrices, so validate with :func:`validate_process` before trusting one.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from typing import Mapping, Sequence

import numpy as np

from . import matrices as mx
from .errors import BadWeights, DimensionMismatch, NotNormalized, ValidationError
from .joint import DEFAULT_TOL, JointDistribution, OutcomeSpace, validate_joint
from .quantum import DensityMatrix, Instrument

LABS = ("A", "B", "E")

PROCESS_TRACE_TOL = 1e-8

LabDims = tuple[tuple[int, int], tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class ChoiOperator:
    """Choi matrix of one CP branch, on H_in (x) H_out (input factor first)."""

    dim_in: int
    dim_out: int
    matrix: np.ndarray

    def __post_init__(self):
        m = mx.as_complex_matrix(self.matrix, "choi matrix")
        d = self.dim_in * self.dim_out
        if m.shape != (d, d):
            raise DimensionMismatch(
                f"choi matrix shape {m.shape} != ({d}, {d}) for dims "
                f"{self.dim_in}->{self.dim_out}"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def choi_of_branch(branch: Sequence[np.ndarray]) -> ChoiOperator:
    """Choi operator of a CP map given in Kraus form.

    Positive semidefinite by construction; the identity channel maps to the
    unnormalized maximally entangled projector with trace equal to the
    dimension.
    """
    ks = [mx.as_complex_matrix(k, "kraus operator") for k in branch]
    d_out, d_in = ks[0].shape
    return ChoiOperator(d_in, d_out, mx.choi_matrix(ks))


def _normalize_lab_dims(lab_dims) -> LabDims:
    if isinstance(lab_dims, Mapping):
        try:
            dims = tuple(lab_dims[lab] for lab in LABS)
        except KeyError as e:
            raise DimensionMismatch(f"lab_dims missing lab {e.args[0]!r}") from None
    else:
        dims = tuple(lab_dims)
    if len(dims) != 3:
        raise DimensionMismatch(f"expected dims for the three labs {LABS}")
    out = []
    for lab, pair in zip(LABS, dims):
        d_in, d_out = (int(pair[0]), int(pair[1]))
        if d_in < 1 or d_out < 1:
            raise DimensionMismatch(f"lab {lab} dims must be positive, got {pair}")
        out.append((d_in, d_out))
    return tuple(out)


@dataclass(frozen=True)
class ProcessMatrix:
    """Positive operator assigning probabilities to local instrument outcomes.

    ``lab_dims`` lists (input, output) dimensions per lab in A, B, E order.
    ``validate=False`` skips all checks (diagnostic probing of broken
    candidates). ``certified=True`` skips the hermiticity scan and the
    eigendecomposition but keeps the trace check; it is reserved for
    constructions (wiring embeddings, convex mixtures) whose hermiticity
    and positivity hold factor-wise by construction. ``copy=False`` hands
    ownership of the array to the instance without a defensive copy.
    """

    matrix: np.ndarray
    lab_dims: LabDims
    validate: InitVar[bool] = True
    certified: InitVar[bool] = False
    copy: InitVar[bool] = True

    def __post_init__(self, validate: bool, certified: bool, copy: bool):
        object.__setattr__(self, "lab_dims", _normalize_lab_dims(self.lab_dims))
        m = mx.as_complex_matrix(self.matrix, "process matrix")
        d = self.total_dim
        if m.shape != (d, d):
            raise DimensionMismatch(
                f"process matrix shape {m.shape} != ({d}, {d}) for lab dims {self.lab_dims}"
            )
        if validate:
            if not certified:
                dev = mx.hermiticity_deviation(m)
                if dev > mx.HERMITICITY_TOL:
                    raise ValidationError(
                        f"process matrix is not hermitian (deviation {dev:.3e})"
                    )
            tr = complex(np.trace(m)).real
            if abs(tr - self.output_dim_product) > PROCESS_TRACE_TOL:
                raise ValidationError(
                    f"process matrix trace {tr} != product of output dims "
                    f"{self.output_dim_product}"
                )
            if not certified:
                low = mx.min_eigenvalue(m)
                if low < -mx.PSD_TOL:
                    raise ValidationError(
                        f"process matrix has eigenvalue {low:.3e} below -{mx.PSD_TOL}"
                    )
        if copy:
            m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def factor_dims(self) -> tuple[int, ...]:
        return tuple(d for pair in self.lab_dims for d in pair)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.factor_dims))

    @property
    def output_dim_product(self) -> int:
        return int(np.prod([pair[1] for pair in self.lab_dims]))

    def dims_of(self, lab: str) -> tuple[int, int]:
        return self.lab_dims[LABS.index(lab)]


def _stack_chois(instr: Instrument, lab: str, dims: tuple[int, int]) -> np.ndarray:
    if (instr.dim_in, instr.dim_out) != dims:
        raise DimensionMismatch(
            f"instrument for lab {lab} has dims {(instr.dim_in, instr.dim_out)}, "
            f"process expects {dims}"
        )
    return np.stack([choi_of_branch(b).matrix for b in instr.branches])


def process_joint(
    w: ProcessMatrix,
    instr_a: Instrument,
    instr_b: Instrument,
    instr_e: Instrument,
    tol: float = DEFAULT_TOL,
) -> JointDistribution:
    """Joint outcome table tr[(C_Ai (x) C_Bj (x) C_Ek) W] over all branches.

    Raises :class:`NotNormalized` when the table does not sum to one, which
    signals a W that is not a valid process for these instrument dimensions.
    """
    ca = _stack_chois(instr_a, "A", w.dims_of("A"))
    cb = _stack_chois(instr_b, "B", w.dims_of("B"))
    ce = _stack_chois(instr_e, "E", w.dims_of("E"))
    da = ca.shape[1]
    db = cb.shape[1]
    de = ce.shape[1]
    wt = w.matrix.reshape(da, db, de, da, db, de)
    # p[ijk] = sum C_A[i,a,a'] C_B[j,b,b'] C_E[k,c,c'] W[(a'b'c'),(abc)]
    raw = np.einsum("iaA,jbB,kcC,ABCabc->ijk", ca, cb, ce, wt, optimize=True)
    worst_imag = float(np.abs(raw.imag).max())
    if worst_imag > 1e-8:
        raise NotNormalized(
            f"joint table has imaginary parts up to {worst_imag:.3e}; "
            "W is not a valid process for these instruments"
        )
    space = OutcomeSpace(instr_a.n_branches, instr_b.n_branches, instr_e.n_branches)
    return validate_joint(raw.real, space, tol)


def embed_definite_order(
    state: DensityMatrix,
    order: Sequence[str] = LABS,
    lab_dims=None,
) -> ProcessMatrix:
    """Process matrix of a definite-order circuit.

    The state enters the first lab in ``order``; identity channels wire each
    lab's output to the next lab's input; the last output is discarded. The
    resulting W is positive by construction and its trace is the product of
    the lab output dimensions. ``process_joint`` on this W reproduces the
    sequential composition of the same instruments.
    """
    order = tuple(order)
    if sorted(order) != sorted(LABS):
        raise DimensionMismatch(f"order must be a permutation of {LABS}, got {order}")
    if lab_dims is None:
        d = state.dim
        dims = ((d, d), (d, d), (d, d))
    else:
        dims = _normalize_lab_dims(lab_dims)
    by_lab = dict(zip(LABS, dims))
    first, second, third = order
    if by_lab[first][0] != state.dim:
        raise DimensionMismatch(
            f"state dim {state.dim} != input dim {by_lab[first][0]} of first lab {first}"
        )
    for x, y in ((first, second), (second, third)):
        if by_lab[x][1] != by_lab[y][0]:
            raise DimensionMismatch(
                f"output dim of lab {x} ({by_lab[x][1]}) != input dim of lab {y} "
                f"({by_lab[y][0]})"
            )

    # W = rho^T on the first input, |I>><<I| wires between consecutive labs,
    # identity on the last output. The wire projector factorizes per matrix
    # side, |I>><<I|[(x,y),(x',y')] = d(x,y) d(x',y'), so W is a product of
    # two-axis factors and can be materialized directly in the canonical
    # (A_in, A_out, B_in, B_out, E_in, E_out) axis order in a single pass.
    canonical = [(lab, side) for lab in LABS for side in (0, 1)]
    slot = {name: pos for pos, name in enumerate(canonical)}
    factor_dims = [by_lab[lab][side] for lab, side in canonical]
    full_shape = tuple(factor_dims) + tuple(factor_dims)

    def expanded(factor: np.ndarray, ax_row: int, ax_col: int) -> np.ndarray:
        shape = [1] * 12
        lo, hi = sorted((ax_row, ax_col))
        mat = factor if ax_row < ax_col else factor.T
        shape[lo], shape[hi] = mat.shape
        return mat.reshape(shape)

    n = 6
    factors = [
        expanded(state.matrix.T.astype(complex), slot[(first, 0)], slot[(first, 0)] + n)
    ]
    for x, y in ((first, second), (second, third)):
        eye = np.eye(by_lab[x][1], dtype=complex)
        factors.append(expanded(eye, slot[(x, 1)], slot[(y, 0)]))
        factors.append(expanded(eye, slot[(x, 1)] + n, slot[(y, 0)] + n))
    eye_last = np.eye(by_lab[third][1], dtype=complex)
    factors.append(expanded(eye_last, slot[(third, 1)], slot[(third, 1)] + n))
    w = factors[0]
    for f in factors[1:]:
        w = w * f
    w = np.broadcast_to(w, full_shape).reshape(
        int(np.prod(factor_dims)), int(np.prod(factor_dims))
    )
    return ProcessMatrix(np.ascontiguousarray(w), dims, certified=True, copy=False)


def mix_processes(ws: Sequence[ProcessMatrix], weights: Sequence[float]) -> ProcessMatrix:
    """Convex combination of process matrices with identical lab dimensions."""
    if not ws:
        raise DimensionMismatch("need at least one process matrix")
    if len(ws) != len(weights):
        raise BadWeights(f"{len(ws)} processes but {len(weights)} weights")
    weights = [float(x) for x in weights]
    if any(x < 0 for x in weights):
        raise BadWeights(f"weights must be nonnegative, got {weights}")
    if abs(sum(weights) - 1) > DEFAULT_TOL:
        raise BadWeights(f"weights sum to {sum(weights)}, not 1")
    dims = ws[0].lab_dims
    for w in ws[1:]:
        if w.lab_dims != dims:
            raise DimensionMismatch(
                f"lab dims differ across components: {w.lab_dims} vs {dims}"
            )
    mixed = sum(x * w.matrix for x, w in zip(weights, ws))
    return ProcessMatrix(mixed, dims, certified=True, copy=False)


@dataclass(frozen=True)
class ProcessDiagnostics:
    """Consistency report for a candidate process matrix."""

    hermiticity_deviation: float
    min_eigenvalue: float
    trace_deviation: float
    max_normalization_error: float
    passes: bool


def validate_process(
    matrix: np.ndarray,
    lab_dims,
    probe_trials: int = 8,
    seed: int = 0,
    tol_psd: float = mx.PSD_TOL,
    tol_trace: float = PROCESS_TRACE_TOL,
    tol_norm: float = 1e-7,
) -> ProcessDiagnostics:
    """Diagnose a candidate W: hermiticity, positivity, trace, and an
    operational probe that checks normalization of the joint table against
    randomly generated valid instruments.

    The probe is the operative test of the consistency requirements: a W
    passing it yields well-defined joint distributions for the instruments
    exercised, which is what the downstream machinery needs.
    """
    from .randomgen import random_instrument, trial_rng

    dims = _normalize_lab_dims(lab_dims)
    m = mx.as_complex_matrix(matrix, "process matrix")
    herm = mx.hermiticity_deviation(m)
    low = mx.min_eigenvalue(m)
    out_product = int(np.prod([pair[1] for pair in dims]))
    trace_dev = abs(complex(np.trace(m)).real - out_product)
    candidate = ProcessMatrix(m, dims, validate=False)
    worst = 0.0
    for t in range(probe_trials):
        rng = trial_rng(seed, t)
        instrs = [random_instrument(d_in, d_out, rng) for d_in, d_out in dims]
        ca, cb, ce = (
            np.stack([choi_of_branch(b).matrix for b in instr.branches])
            for instr in instrs
        )
        da, db, de = ca.shape[1], cb.shape[1], ce.shape[1]
        wt = candidate.matrix.reshape(da, db, de, da, db, de)
        raw = np.einsum("iaA,jbB,kcC,ABCabc->ijk", ca, cb, ce, wt, optimize=True)
        worst = max(worst, abs(float(raw.real.sum()) - 1.0), float(np.abs(raw.imag).max()))
    passes = (
        herm <= mx.HERMITICITY_TOL
        and low >= -tol_psd
        and trace_dev <= tol_trace
        and worst <= tol_norm
    )
    return ProcessDiagnostics(herm, low, trace_dev, worst, passes)
