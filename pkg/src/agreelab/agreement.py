"""Iterated common-knowledge closure and agreement verification.

Given a joint outcome table, an event, and a posterior pair (q_a, q_b),
the closure starts from the level sets

    A_0 = outcomes i with posterior q_a,   B_0 = outcomes j with posterior q_b,

and repeatedly removes outcomes that fail to certify the other side:

    A_{n+1} = { i in A_n : P(B_n | i) = 1 },
    B_{n+1} = { j in B_n : P(A_n | j) = 1 },

both updates reading the level-n sets. The sets shrink monotonically, so a
fixed point (A*, B*) is reached within |I| + |J| productive steps. The
posteriors are common knowledge for an outcome pair exactly when the pair
lies in A* x B* with positive mass, and in that case q_a must equal q_b;
``verify_agreement`` checks that implication over every attained posterior
pair.

Certainty is implemented as P >= 1 - tol because floating-point tables
from the quantum backends never hit exactly 1; pass ``tol=0`` with an
exact-rational table for exact set logic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .classical import ClassicalModel
from .errors import NoConvergence, ZeroProbabilityConditioning
from .joint import (
    DEFAULT_TOL,
    Event,
    JointDistribution,
    posterior_alice,
    posterior_bob,
)


@dataclass(frozen=True)
class CKState:
    """Knowledge sets after n closure steps."""

    a_set: frozenset[int]
    b_set: frozenset[int]
    n: int = 0


@dataclass(frozen=True)
class CKReport:
    """Outcome of one closure run at a fixed posterior pair."""

    q_a: float
    q_b: float
    a_star: tuple[int, ...]
    b_star: tuple[int, ...]
    steps: int
    ck_holds: bool
    agrees: bool
    mass_a: float
    mass_b: float
    witness: tuple[int, int] | None


def _pair_marginal(p: JointDistribution) -> np.ndarray:
    return p.table.sum(axis=2)


def _zero(p: JointDistribution):
    return Fraction(0) if p.exact else 0.0


def initial_sets(
    p: JointDistribution, event: Event, q_a, q_b, tol: float = DEFAULT_TOL
) -> tuple[frozenset[int], frozenset[int]]:
    """Level sets of outcomes whose posterior matches q_a (q_b) within tol.

    Outcomes with mass at most tol are excluded: their posteriors are
    undefined and cannot ground knowledge.
    """
    masses_i = p.axis_masses("I")
    masses_j = p.axis_masses("J")
    a0 = frozenset(
        i
        for i in range(p.space.size_i)
        if masses_i[i] > tol and abs(posterior_alice(p, i, event) - q_a) <= tol
    )
    b0 = frozenset(
        j
        for j in range(p.space.size_j)
        if masses_j[j] > tol and abs(posterior_bob(p, j, event) - q_b) <= tol
    )
    return a0, b0


def ck_step(p: JointDistribution, state: CKState, tol: float = DEFAULT_TOL) -> CKState:
    """One simultaneous refinement of the knowledge sets."""
    m2 = _pair_marginal(p)
    a_rows = sorted(state.a_set)
    b_cols = sorted(state.b_set)

    def certain_rows(matrix, rows, cols):
        kept = []
        for r in rows:
            total = matrix[r, :].sum()
            inside = matrix[r, cols].sum() if cols else _zero(p)
            # tol == 0 keeps exact-rational tables exact (no float threshold)
            threshold = total if tol == 0 else (1 - tol) * total
            if inside >= threshold:
                kept.append(r)
        return frozenset(kept)

    next_a = certain_rows(m2, a_rows, b_cols)
    next_b = certain_rows(m2.T, b_cols, a_rows)
    return CKState(next_a, next_b, state.n + 1)


def ck_closure(
    p: JointDistribution, event: Event, q_a, q_b, tol: float = DEFAULT_TOL
) -> CKReport:
    """Iterate ck_step from the initial level sets to the fixed point.

    ``steps`` counts the productive iterations; monotone shrinkage bounds it
    by |I| + |J|. Common knowledge holds when both fixed-point sets are
    nonempty with mass above tol.
    """
    a0, b0 = initial_sets(p, event, q_a, q_b, tol)
    state = CKState(a0, b0, 0)
    steps = 0
    limit = p.space.size_i + p.space.size_j + 1
    for _ in range(limit + 1):
        nxt = ck_step(p, state, tol)
        if nxt.a_set == state.a_set and nxt.b_set == state.b_set:
            break
        state = nxt
        steps += 1
    else:
        raise AssertionError("closure failed to stabilize within its bound")
    mass_a = p.axis_mass("I", state.a_set)
    mass_b = p.axis_mass("J", state.b_set)
    ck_holds = bool(state.a_set and state.b_set and mass_a > tol and mass_b > tol)
    agrees = bool(abs(q_a - q_b) <= tol)
    witness = (min(state.a_set), min(state.b_set)) if ck_holds else None
    return CKReport(
        q_a=q_a,
        q_b=q_b,
        a_star=tuple(sorted(state.a_set)),
        b_star=tuple(sorted(state.b_set)),
        steps=steps,
        ck_holds=ck_holds,
        agrees=agrees,
        mass_a=mass_a,
        mass_b=mass_b,
        witness=witness,
    )


def is_common_knowledge(
    p: JointDistribution, event: Event, i: int, j: int, tol: float = DEFAULT_TOL
) -> bool:
    """Whether the posteriors induced by observing (i, j) are common knowledge."""
    q_a = posterior_alice(p, i, event)
    q_b = posterior_bob(p, j, event)
    report = ck_closure(p, event, q_a, q_b, tol)
    return i in report.a_star and j in report.b_star


def attained_posteriors(
    p: JointDistribution, event: Event, axis: str, tol: float = DEFAULT_TOL
) -> tuple:
    """Distinct posterior values over positive-mass outcomes of one axis.

    Values within tol of each other are merged into one representative so
    floating-point twins do not masquerade as different posteriors.
    """
    masses = p.axis_masses(axis)
    post = posterior_alice if axis == "I" else posterior_bob
    values = sorted(
        post(p, x, event)
        for x in range(p.space.axis_size(axis))
        if masses[x] > tol
    )
    clusters: list[list] = []
    for v in values:
        if clusters and abs(v - clusters[-1][-1]) <= tol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    if p.exact:
        return tuple(c[0] for c in clusters)
    return tuple(float(sum(c)) / len(c) for c in clusters)


def verify_agreement(
    p: JointDistribution, event: Event, tol: float = DEFAULT_TOL
) -> tuple[CKReport, ...]:
    """Run the closure at every attained posterior pair and report.

    A report with ``ck_holds`` and not ``agrees`` would witness common
    knowledge of differing posteriors; for any valid joint table none
    exists, and callers treat one as a hard failure.
    """
    qa_values = attained_posteriors(p, event, "I", tol)
    qb_values = attained_posteriors(p, event, "J", tol)
    return tuple(
        ck_closure(p, event, qa, qb, tol) for qa in qa_values for qb in qb_values
    )


def violations(reports) -> tuple[CKReport, ...]:
    return tuple(r for r in reports if r.ck_holds and not r.agrees)


def singular_disagreement_check(
    p: JointDistribution, event: Event, tol: float = DEFAULT_TOL
) -> bool:
    """True when no positive-mass pair has common knowledge of posteriors
    1 versus 0 (in either orientation). Always true for a well-defined
    joint table: certainty of the event on one side forces zero mass on
    every outcome the other side would need."""
    for q_a, q_b in ((1.0, 0.0), (0.0, 1.0)):
        if ck_closure(p, event, q_a, q_b, tol).ck_holds:
            return False
    return True


@dataclass(frozen=True)
class AnnouncementRound:
    """One round of the disclose-and-update protocol, after refinement."""

    alice_announcement: float
    bob_announcement: float
    alice_consistent: tuple[int, ...]
    bob_consistent: tuple[int, ...]


@dataclass(frozen=True)
class ProtocolTranscript:
    observed: tuple[int, int]
    rounds: tuple[AnnouncementRound, ...]
    final_alice: float
    final_bob: float
    rectangle_posterior: float

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)


def dynamic_protocol(
    p: JointDistribution,
    event: Event,
    i: int,
    j: int,
    max_rounds: int | None = None,
    tol: float = DEFAULT_TOL,
) -> ProtocolTranscript:
    """Alternating public posterior announcements until they stabilize.

    Alice observed i, Bob observed j. Publicly, Alice's outcome is known to
    lie in a set S_A and Bob's in S_B, initially full. Each round Alice
    announces her posterior given (i, S_B); S_A shrinks to the outcomes
    consistent with that announcement; Bob announces given (j, S_A) and S_B
    shrinks likewise. The protocol stops at the first round that changes
    neither set; both final announcements then equal the conditional
    probability of the event on the rectangle S_A x S_B.
    """
    ks = list(event.sorted_members)
    m2 = p.table.sum(axis=2)
    e2 = p.table[:, :, ks].sum(axis=2) if ks else np.zeros_like(m2)
    if m2[i, :].sum() <= tol or m2[:, j].sum() <= tol:
        raise ZeroProbabilityConditioning("observed outcomes need positive prior mass")
    if max_rounds is None:
        max_rounds = p.space.size_i * p.space.size_j

    def posterior_rows(rows_matrix, event_matrix, x, other):
        denom = rows_matrix[x, other].sum()
        if denom <= tol:
            raise ZeroProbabilityConditioning(
                "announcements eliminated every outcome consistent with an observation"
            )
        return event_matrix[x, other].sum() / denom

    s_a = list(range(p.space.size_i))
    s_b = list(range(p.space.size_j))
    rounds: list[AnnouncementRound] = []
    for _ in range(max_rounds):
        changed = False
        announce_a = posterior_rows(m2, e2, i, s_b)
        new_a = [
            x
            for x in s_a
            if m2[x, s_b].sum() > tol
            and abs(posterior_rows(m2, e2, x, s_b) - announce_a) <= tol
        ]
        if new_a != s_a:
            s_a = new_a
            changed = True
        announce_b = posterior_rows(m2.T, e2.T, j, s_a)
        new_b = [
            y
            for y in s_b
            if m2.T[y, s_a].sum() > tol
            and abs(posterior_rows(m2.T, e2.T, y, s_a) - announce_b) <= tol
        ]
        if new_b != s_b:
            s_b = new_b
            changed = True
        rounds.append(
            AnnouncementRound(
                float(announce_a), float(announce_b), tuple(s_a), tuple(s_b)
            )
        )
        if not changed:
            rect_mass = m2[np.ix_(s_a, s_b)].sum()
            rect = e2[np.ix_(s_a, s_b)].sum() / rect_mass
            return ProtocolTranscript(
                observed=(i, j),
                rounds=tuple(rounds),
                final_alice=float(announce_a),
                final_bob=float(announce_b),
                rectangle_posterior=float(rect),
            )
    raise NoConvergence(
        f"protocol did not stabilize within {max_rounds} rounds"
    )


def as_effective_state_space(p: JointDistribution, event: Event) -> ClassicalModel:
    """Reexpress a joint table as an ontic model over the outcome triples.

    States are the triples (i, j, k) in row-major order with the table as
    prior; Alice's partition groups states by i, Bob's by j, the event
    partition by k, and the event cells are the event members. Embedding
    this model back into a table recovers p entry for entry.
    """
    size_i, size_j, size_k = p.space.sizes
    prior = tuple(p.table.reshape(-1))
    part_a = []
    part_b = []
    part_e = []
    for i in range(size_i):
        for j in range(size_j):
            for k in range(size_k):
                part_a.append(i)
                part_b.append(j)
                part_e.append(k)
    return ClassicalModel(
        prior=prior,
        part_a=tuple(part_a),
        part_b=tuple(part_b),
        part_e=tuple(part_e),
        event_cells=event.members,
    )
