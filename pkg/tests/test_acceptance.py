"""Acceptance suite: one test per acceptance criterion, pinned tolerances.

Each test prints a PASS/FAIL line (run with ``pytest -s`` to see them all
inline; failures surface through pytest regardless).
"""

from __future__ import annotations

import time
from contextlib import contextmanager

import numpy as np
import pytest

from agreelab import (
    DensityMatrix,
    QuantumScenario,
    as_effective_state_space,
    block_rotation_scenario,
    classical_ck_at,
    classical_posterior,
    closed_form_posteriors,
    dynamic_protocol,
    embed_classical,
    embed_definite_order,
    is_common_knowledge,
    posterior_alice,
    posterior_bob,
    process_joint,
    sequential_joint,
    verify_agreement,
    violations,
)
from agreelab.randomgen import (
    random_classical_model,
    random_density,
    random_instrument,
    random_joint_table,
    trial_rng,
)
from agreelab.scenario import parse_scenario
from agreelab.search import fuzz_search

from conftest import SCENARIOS


@contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except BaseException:
        print(f"FAIL criterion {number}: {description}")
        raise
    print(f"PASS criterion {number}: {description}")


ANGLES = [0.0, np.pi / 6, np.pi / 4, np.pi / 3, np.pi / 2, 2 * np.pi / 3]
QR_PAIRS = [(0.2, 0.1), (0.1, 0.4), (0.3, 0.25)]


def test_criterion_1_closed_form_reproduction():
    with criterion(1, "closed-form posteriors reproduced on a 108-point grid within 1e-9"):
        start = time.perf_counter()
        checked = 0
        for theta in ANGLES:
            for phi in ANGLES:
                for q, r in QR_PAIRS:
                    scenario = block_rotation_scenario(theta, phi, q, r)
                    joint = sequential_joint(scenario)
                    q_a_ref, q_b_ref = closed_form_posteriors(theta, phi, q, r)
                    q_a = [posterior_alice(joint, i, scenario.event) for i in range(4)]
                    q_b = [posterior_bob(joint, j, scenario.event) for j in range(4)]
                    assert np.abs(np.array(q_a) - q_a_ref).max() <= 1e-9
                    assert np.abs(np.array(q_b) - q_b_ref).max() <= 1e-9
                    checked += 1
        elapsed = time.perf_counter() - start
        assert checked >= 100
        assert elapsed < 10.0, f"grid took {elapsed:.1f}s"


def test_criterion_2_block_common_knowledge():
    with criterion(2, "first-block pairs share common knowledge at posterior q; "
                      "block-supported states always reach common knowledge"):
        # maximally mixed state, any valid parameters (degenerate ones included)
        params = [
            (0.3, 0.9, 0.2, 0.1),
            (0.0, 0.0, 0.1, 0.3),
            (np.pi / 2, np.pi / 4, 0.25, 0.25),  # posterior coincidences
            (1.1, 2.0, 0.45, 0.05),
        ]
        for theta, phi, q, r in params:
            scenario = block_rotation_scenario(theta, phi, q, r)
            joint = sequential_joint(scenario)
            for i in (0, 1):
                assert abs(posterior_alice(joint, i, scenario.event) - q) <= 1e-9
                assert abs(posterior_bob(joint, i, scenario.event) - q) <= 1e-9
            for i in (0, 1):
                for j in (0, 1):
                    assert is_common_knowledge(joint, scenario.event, i, j)

        # states supported on the first block: every positive-mass pair agrees
        for trial in range(12):
            rng = trial_rng(1201, trial)
            block = random_density(2, rng).matrix
            state = np.zeros((4, 4), dtype=complex)
            state[:2, :2] = block
            theta, phi = rng.uniform(0, np.pi, size=2)
            q = float(rng.uniform(0.05, 0.45))
            r = float(rng.uniform(0.05, 1 - 2 * q - 0.01))
            scenario = block_rotation_scenario(theta, phi, q, r, state=DensityMatrix(state))
            joint = sequential_joint(scenario)
            pairs = joint.table.sum(axis=2)
            for i in range(4):
                for j in range(4):
                    if pairs[i, j] > 1e-9:
                        assert is_common_knowledge(joint, scenario.event, i, j)
                        q_a = posterior_alice(joint, i, scenario.event)
                        q_b = posterior_bob(joint, j, scenario.event)
                        assert abs(q_a - q_b) <= 1e-9


def test_criterion_3_classical_oracle_equivalence():
    with criterion(3, "500 random ontic models: state-space machinery and outcome "
                      "machinery agree exactly under rational arithmetic"):
        for trial in range(500):
            model = random_classical_model(trial_rng(3003, trial), max_states=8, exact=True)
            joint, event = embed_classical(model)
            assert joint.exact

            for cell in range(model.n_cells_a):
                assert classical_posterior(model, "A", cell, tol=0) == posterior_alice(
                    joint, cell, event
                )
            for cell in range(model.n_cells_b):
                assert classical_posterior(model, "B", cell, tol=0) == posterior_bob(
                    joint, cell, event
                )

            for omega in range(model.num_states):
                q_a = classical_posterior(model, "A", model.part_a[omega], tol=0)
                q_b = classical_posterior(model, "B", model.part_b[omega], tol=0)
                direct = classical_ck_at(model, omega, q_a, q_b, tol=0)
                engine = is_common_knowledge(
                    joint, event, model.part_a[omega], model.part_b[omega], tol=0
                )
                assert direct == engine

            for report in verify_agreement(joint, event, tol=0):
                if report.ck_holds:
                    assert report.q_a == report.q_b
                exists = any(
                    classical_ck_at(model, omega, report.q_a, report.q_b, tol=0)
                    for omega in range(model.num_states)
                    if model.prior[omega] > 0
                )
                assert exists == report.ck_holds


@pytest.fixture(scope="module")
def theorem_fuzz():
    start = time.perf_counter()
    quantum = fuzz_search("quantum", trials=1000, max_dim=4, seed=41)
    process = fuzz_search("process", trials=500, max_dim=4, seed=42)
    return quantum, process, time.perf_counter() - start


def test_criterion_4_theorem_fuzz(theorem_fuzz):
    with criterion(4, "1000 quantum + 500 process scenarios: zero violations, "
                      "zero singular disagreements, under two minutes"):
        quantum, process, elapsed = theorem_fuzz
        assert quantum.trials == 1000 and process.trials == 500
        assert quantum.violation_count == 0 and process.violation_count == 0
        assert quantum.singular_failures == 0 and process.singular_failures == 0
        assert elapsed < 120.0, f"fuzz took {elapsed:.1f}s"


def test_criterion_5_cross_backend_equivalence():
    with criterion(5, "200 random sequential scenarios match their process-matrix "
                      "embedding entrywise within 1e-10"):
        for trial in range(200):
            rng = trial_rng(5005, trial)
            hi = 4 if rng.random() < 0.15 else 3
            d0, d1, d2, d3 = (int(x) for x in rng.integers(2, hi + 1, size=4))
            state = random_density(d0, rng)
            order = "ABE" if rng.random() < 0.5 else "AEB"
            stages = [random_instrument(d0, d1, rng), random_instrument(d1, d2, rng),
                      random_instrument(d2, d3, rng)]
            stage_dims = [(d0, d1), (d1, d2), (d2, d3)]
            if order == "ABE":
                instr_a, instr_b, instr_e = stages
                lab_dims = dict(zip(("A", "B", "E"), stage_dims))
                w = embed_definite_order(state, ("A", "B", "E"), lab_dims)
            else:
                instr_a, instr_e, instr_b = stages
                lab_dims = dict(zip(("A", "E", "B"), stage_dims))
                w = embed_definite_order(state, ("A", "E", "B"), lab_dims)
            scenario = QuantumScenario(state, instr_a, instr_b, instr_e, order=order)
            seq = sequential_joint(scenario)
            emb = process_joint(w, instr_a, instr_b, instr_e)
            assert np.abs(seq.table - emb.table).max() <= 1e-10


def test_criterion_6_closure_termination(theorem_fuzz):
    with criterion(6, "every closure reaches its fixed point within |I| + |J| steps"):
        quantum, process, _ = theorem_fuzz
        # the harness raises on any closure exceeding the bound, so reaching
        # here with populated summaries certifies the property across trials
        assert quantum.max_steps <= 8
        assert process.max_steps <= 8
        extra = fuzz_search("table", trials=300, max_dim=4, seed=43)
        assert extra.max_steps <= 8
        assert extra.violation_count == 0


def test_criterion_7_dynamic_protocol():
    with criterion(7, "200 random tables: announcements stabilize within |I|*|J| "
                      "rounds at a common posterior equal to the rectangle value"):
        for trial in range(200):
            rng = trial_rng(7007, trial)
            joint, event = random_joint_table(rng, structured_zeros=trial % 2 == 0)
            m2 = joint.table.sum(axis=2)
            pairs = np.argwhere(m2 > 1e-9)
            i, j = pairs[int(rng.integers(0, len(pairs)))]
            transcript = dynamic_protocol(joint, event, int(i), int(j))
            assert transcript.n_rounds <= joint.space.size_i * joint.space.size_j
            assert abs(transcript.final_alice - transcript.final_bob) <= 1e-9
            assert abs(transcript.final_alice - transcript.rectangle_posterior) <= 1e-9


def _fixture_joints():
    for path in sorted(SCENARIOS.glob("*.json")):
        scenario = parse_scenario(path.read_text())
        joint = scenario.compute_joint().to_float()
        yield joint, scenario.event


def test_criterion_8_identification_round_trip():
    with criterion(8, "outcome-space-as-state-space identification is exact and "
                      "preserves every common-knowledge verdict"):
        cases = list(_fixture_joints())
        for trial in range(200):
            cases.append(random_joint_table(trial_rng(8008, trial), structured_zeros=trial % 3 == 0))
        for joint, event in cases:
            event = type(event)(joint.space, event.members)
            model = as_effective_state_space(joint, event)
            back, back_event = embed_classical(model)
            assert back.flat() == joint.flat()
            assert back_event.members == event.members

            sizes = joint.space.sizes
            masses_i = joint.axis_masses("I")
            masses_j = joint.axis_masses("J")
            for i in range(sizes[0]):
                for j in range(sizes[1]):
                    for k in range(sizes[2]):
                        if joint.table[i, j, k] <= joint.tol:
                            continue
                        if masses_i[i] <= joint.tol or masses_j[j] <= joint.tol:
                            continue
                        omega = (i * sizes[1] + j) * sizes[2] + k
                        q_a = posterior_alice(joint, i, event)
                        q_b = posterior_bob(joint, j, event)
                        assert classical_ck_at(model, omega, q_a, q_b) == is_common_knowledge(
                            joint, event, i, j
                        )
