"""Scenario files: one JSON schema covering all four backends.

A scenario is a JSON object with a mandatory ``backend`` discriminator
("table", "classical", "quantum", or "process"), an ``event`` list of K
indices, optional ``id``, ``tolerance``, and ``seed``, and a
backend-specific payload. Complex matrices are nested lists of [re, im]
pairs; partitions are per-state cell-index lists; rational priors may be
written as "num/den" strings to select exact arithmetic. See the README
for the full schema and examples.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
import numpy as np

from .agreement import (
    CKReport,
    singular_disagreement_check,
    verify_agreement,
    violations,
)
from .classical import ClassicalModel, embed_classical
from .errors import AgreeLabError, ParseError, ValidationError
from .joint import DEFAULT_TOL, Event, JointDistribution, OutcomeSpace, validate_joint
from .process import (
    LABS,
    ProcessMatrix,
    embed_definite_order,
    mix_processes,
    process_joint,
)
from .quantum import (
    DensityMatrix,
    Instrument,
    QuantumScenario,
    block_rotation_scenario,
    sequential_joint,
)

BACKENDS = ("table", "classical", "quantum", "process")


def _require(payload: dict, key: str, where: str):
    if key not in payload:
        raise ValidationError("missing required key", f"{where}.{key}" if where else key)
    return payload[key]


def _complex_matrix(data, where: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"not a numeric array: {e}", where) from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValidationError(
            f"complex matrices are nested rows of [re, im] pairs, got shape {arr.shape}",
            where,
        )
    return arr[:, :, 0] + 1j * arr[:, :, 1]


def complex_matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _prior_entry(x, where: str):
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as e:
            raise ValidationError(f"bad rational {x!r}: {e}", where) from None
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValidationError(f"prior entries are numbers or 'a/b' strings, got {x!r}", where)
    return Fraction(x) if isinstance(x, int) else float(x)


def _state(data, where: str) -> DensityMatrix:
    if isinstance(data, dict) and "maximally_mixed" in data:
        return DensityMatrix.maximally_mixed(int(data["maximally_mixed"]))
    if isinstance(data, dict) and "matrix" in data:
        data = data["matrix"]
    return DensityMatrix(_complex_matrix(data, where))


def _instrument(data, where: str) -> Instrument:
    if not isinstance(data, list) or not data:
        raise ValidationError("an instrument is a nonempty list of branches", where)
    branches = []
    for b, branch in enumerate(data):
        if not isinstance(branch, list) or not branch:
            raise ValidationError(
                "a branch is a nonempty list of Kraus matrices", f"{where}[{b}]"
            )
        branches.append(
            tuple(_complex_matrix(k, f"{where}[{b}][{m}]") for m, k in enumerate(branch))
        )
    return Instrument(tuple(branches))


@dataclass(frozen=True)
class Scenario:
    """A parsed, validated scenario ready to run."""

    scenario_id: str
    backend: str
    event: Event
    tol: float
    seed: int
    joint: JointDistribution | None = None
    model: ClassicalModel | None = None
    quantum: QuantumScenario | None = None
    process: ProcessMatrix | None = None
    instruments: tuple[Instrument, Instrument, Instrument] | None = None

    def compute_joint(self) -> JointDistribution:
        if self.backend == "table":
            return self.joint
        if self.backend == "classical":
            return embed_classical(self.model)[0].to_float()
        if self.backend == "quantum":
            return sequential_joint(self.quantum, self.tol)
        return process_joint(self.process, *self.instruments, tol=self.tol)


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario JSON, locating errors by line or field."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(payload, dict):
        raise ParseError("scenario must be a JSON object")
    backend = _require(payload, "backend", "")
    if backend not in BACKENDS:
        raise ValidationError(f"unknown backend {backend!r}, expected one of {BACKENDS}", "backend")
    scenario_id = str(payload.get("id", "scenario"))
    tol = float(payload.get("tolerance", DEFAULT_TOL))
    seed = int(payload.get("seed", 0))
    try:
        builder = {
            "table": _parse_table,
            "classical": _parse_classical,
            "quantum": _parse_quantum,
            "process": _parse_process,
        }[backend]
        return builder(payload, scenario_id, tol, seed)
    except (ValidationError, ParseError):
        raise
    except AgreeLabError as e:
        raise ValidationError(str(e), backend) from e


def _event_from(payload: dict, space: OutcomeSpace) -> Event:
    members = _require(payload, "event", "")
    if not isinstance(members, list):
        raise ValidationError("event must be a list of K indices", "event")
    try:
        return Event(space, frozenset(int(k) for k in members))
    except AgreeLabError as e:
        raise ValidationError(str(e), "event") from e


def _parse_table(payload, scenario_id, tol, seed) -> Scenario:
    sizes = _require(payload, "sizes", "")
    if not (isinstance(sizes, list) and len(sizes) == 3):
        raise ValidationError("sizes must be the three axis sizes [|I|, |J|, |K|]", "sizes")
    labels = payload.get("labels", {})
    if not isinstance(labels, dict):
        raise ValidationError("labels must map axis names to label lists", "labels")
    try:
        space = OutcomeSpace(
            *(int(s) for s in sizes),
            labels_i=tuple(labels["I"]) if "I" in labels else None,
            labels_j=tuple(labels["J"]) if "J" in labels else None,
            labels_k=tuple(labels["K"]) if "K" in labels else None,
        )
    except AgreeLabError as e:
        raise ValidationError(str(e), "labels") from e
    flat = _require(payload, "p", "")
    expected = space.size_i * space.size_j * space.size_k
    if not isinstance(flat, list) or len(flat) != expected:
        raise ValidationError(
            f"p must be a flat row-major list of {expected} reals", "p"
        )
    table = np.asarray(flat, dtype=float).reshape(space.sizes)
    joint = validate_joint(table, space, tol)
    return Scenario(scenario_id, "table", _event_from(payload, space), tol, seed, joint=joint)


def _parse_classical(payload, scenario_id, tol, seed) -> Scenario:
    n = int(_require(payload, "num_states", ""))
    raw_prior = _require(payload, "prior", "")
    if not isinstance(raw_prior, list) or len(raw_prior) != n:
        raise ValidationError(f"prior must list {n} entries", "prior")
    prior = tuple(_prior_entry(x, f"prior[{w}]") for w, x in enumerate(raw_prior))
    if not all(isinstance(x, Fraction) for x in prior):
        prior = tuple(float(x) for x in prior)
    model = ClassicalModel(
        prior=prior,
        part_a=tuple(_require(payload, "partition_a", "")),
        part_b=tuple(_require(payload, "partition_b", "")),
        part_e=tuple(_require(payload, "partition_e", "")),
        event_cells=frozenset(int(c) for c in _require(payload, "event", "")),
    )
    space = OutcomeSpace(model.n_cells_a, model.n_cells_b, model.n_cells_e)
    return Scenario(
        scenario_id, "classical", Event(space, model.event_cells), tol, seed, model=model
    )


def _parse_quantum(payload, scenario_id, tol, seed) -> Scenario:
    if "preset" in payload:
        preset = payload["preset"]
        name = _require(preset, "name", "preset")
        if name != "block_rotation":
            raise ValidationError(f"unknown preset {name!r}", "preset.name")
        state = _state(preset["state"], "preset.state") if "state" in preset else None
        qs = block_rotation_scenario(
            float(_require(preset, "theta", "preset")),
            float(_require(preset, "phi", "preset")),
            float(_require(preset, "q", "preset")),
            float(_require(preset, "r", "preset")),
            state,
        )
        if "event" in payload:
            qs = QuantumScenario(
                qs.state, qs.instr_a, qs.instr_b, qs.instr_e, qs.order,
                _event_from(payload, qs.space),
            )
        return Scenario(scenario_id, "quantum", qs.event, tol, seed, quantum=qs)
    state = _state(_require(payload, "state", ""), "state")
    instrs = _require(payload, "instruments", "")
    order = str(payload.get("order", "ABE"))
    qs = QuantumScenario(
        state,
        _instrument(_require(instrs, "A", "instruments"), "instruments.A"),
        _instrument(_require(instrs, "B", "instruments"), "instruments.B"),
        _instrument(_require(instrs, "E", "instruments"), "instruments.E"),
        order=order,
        event=None,
    )
    event = _event_from(payload, qs.space)
    qs = QuantumScenario(qs.state, qs.instr_a, qs.instr_b, qs.instr_e, order, event)
    return Scenario(scenario_id, "quantum", event, tol, seed, quantum=qs)


def _parse_process(payload, scenario_id, tol, seed) -> Scenario:
    instrs_raw = _require(payload, "instruments", "")
    instruments = tuple(
        _instrument(_require(instrs_raw, lab, "instruments"), f"instruments.{lab}")
        for lab in LABS
    )
    if "w" in payload:
        lab_dims_raw = _require(payload, "lab_dims", "")
        lab_dims = []
        for lab in LABS:
            pair = _require(lab_dims_raw, lab, "lab_dims")
            if not isinstance(pair, list) or len(pair) != 2:
                raise ValidationError("expected [dim_in, dim_out]", f"lab_dims.{lab}")
            lab_dims.append((int(pair[0]), int(pair[1])))
        w = ProcessMatrix(_complex_matrix(payload["w"], "w"), tuple(lab_dims))
    elif "construction" in payload:
        cons = payload["construction"]
        kind = _require(cons, "kind", "construction")
        state = _state(_require(cons, "state", "construction"), "construction.state")
        if kind == "definite_order":
            order = tuple(_require(cons, "order", "construction"))
            w = embed_definite_order(state, order)
        elif kind == "mixture":
            comps = _require(cons, "components", "construction")
            ws = [
                embed_definite_order(state, tuple(c["order"])) for c in comps
            ]
            w = mix_processes(ws, [float(c["weight"]) for c in comps])
        else:
            raise ValidationError(f"unknown construction kind {kind!r}", "construction.kind")
    else:
        raise ValidationError("process scenarios need 'w' or 'construction'", "process")
    space = OutcomeSpace(
        instruments[0].n_branches, instruments[1].n_branches, instruments[2].n_branches
    )
    event = _event_from(payload, space)
    return Scenario(
        scenario_id, "process", event, tol, seed, process=w, instruments=instruments
    )


@dataclass(frozen=True)
class RunReport:
    """Everything computed for one scenario.

    ``duration`` is informational only: it is excluded from equality and
    from the machine-readable record stream so identical runs emit
    identical bytes.
    """

    scenario_id: str
    backend: str
    sizes: tuple[int, int, int]
    event: tuple[int, ...]
    q_a: tuple[float | None, ...]
    q_b: tuple[float | None, ...]
    reports: tuple[CKReport, ...]
    violation_count: int
    singular_ok: bool
    joint: tuple[float, ...] | None = None
    duration: float = field(default=0.0, compare=False)


def _posterior_row(p: JointDistribution, event: Event, axis: str) -> tuple[float | None, ...]:
    from .joint import posterior_alice, posterior_bob

    post = posterior_alice if axis == "I" else posterior_bob
    masses = p.axis_masses(axis)
    out = []
    for x in range(p.space.axis_size(axis)):
        out.append(float(post(p, x, event)) if masses[x] > p.tol else None)
    return tuple(out)


def run_scenario(s: Scenario, include_joint: bool = False) -> RunReport:
    """Compute the joint, sweep every attained posterior pair, and report."""
    start = time.perf_counter()
    joint = s.compute_joint()
    event = Event(joint.space, s.event.members)
    reports = verify_agreement(joint, event, s.tol)
    reports = tuple(
        CKReport(
            q_a=float(r.q_a), q_b=float(r.q_b), a_star=r.a_star, b_star=r.b_star,
            steps=r.steps, ck_holds=r.ck_holds, agrees=r.agrees,
            mass_a=float(r.mass_a), mass_b=float(r.mass_b), witness=r.witness,
        )
        for r in reports
    )
    singular_ok = singular_disagreement_check(joint, event, s.tol)
    return RunReport(
        scenario_id=s.scenario_id,
        backend=s.backend,
        sizes=joint.space.sizes,
        event=event.sorted_members,
        q_a=_posterior_row(joint, event, "I"),
        q_b=_posterior_row(joint, event, "J"),
        reports=reports,
        violation_count=len(violations(reports)),
        singular_ok=singular_ok,
        joint=tuple(float(x) for x in joint.flat()) if include_joint else None,
        duration=time.perf_counter() - start,
    )
