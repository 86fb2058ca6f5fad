"""Ontic models: posteriors, common knowledge at a state, and embedding."""

from fractions import Fraction

import numpy as np
import pytest

from agreelab import (
    ClassicalModel,
    InvalidState,
    ValidationError,
    ZeroMassCell,
    classical_ck_at,
    classical_posterior,
    embed_classical,
    is_common_knowledge,
    posterior_alice,
    posterior_bob,
    verify_agreement,
    violations,
)
from agreelab.randomgen import random_classical_model, trial_rng


def brute_posterior(model, agent, cell):
    part = {"A": model.part_a, "B": model.part_b}[agent]
    cell_states = [w for w in range(model.num_states) if part[w] == cell]
    event = [w for w in cell_states if model.part_e[w] in model.event_cells]
    return sum(model.prior[w] for w in event) / sum(model.prior[w] for w in cell_states)


class TestClassicalPosterior:
    def test_four_state_alice(self, four_state_model):
        assert brute_posterior(four_state_model, "A", 0) == Fraction(1, 2)
        assert classical_posterior(four_state_model, "A", 0) == Fraction(1, 2)

    def test_four_state_bob(self, four_state_model):
        assert classical_posterior(four_state_model, "B", 1) == Fraction(1, 1)
        assert classical_posterior(four_state_model, "B", 0) == Fraction(1, 3)

    def test_certain_event(self, four_state_model):
        model = ClassicalModel(
            prior=four_state_model.prior,
            part_a=four_state_model.part_a,
            part_b=four_state_model.part_b,
            part_e=four_state_model.part_e,
            event_cells=frozenset({0, 1}),
        )
        for agent, n in (("A", 2), ("B", 2)):
            for cell in range(n):
                assert classical_posterior(model, agent, cell) == 1

    def test_zero_mass_cell_rejected(self):
        model = ClassicalModel(
            prior=(1.0, 0.0),
            part_a=(0, 1),
            part_b=(0, 0),
            part_e=(0, 1),
            event_cells=frozenset({0}),
        )
        with pytest.raises(ZeroMassCell):
            classical_posterior(model, "A", 1)


class TestClassicalCK:
    def test_trivial_partitions_always_common_knowledge(self):
        model = ClassicalModel(
            prior=(Fraction(1, 4),) * 4,
            part_a=(0, 0, 0, 0),
            part_b=(0, 0, 0, 0),
            part_e=(0, 1, 1, 0),
            event_cells=frozenset({0}),
        )
        p_event = Fraction(1, 2)
        for omega in range(4):
            assert classical_ck_at(model, omega, p_event, p_event, tol=0)

    def test_four_state_no_common_knowledge(self, four_state_model):
        # the knowledge sets empty out: B_2 = {} under hand iteration
        assert not classical_ck_at(
            four_state_model, 0, Fraction(1, 2), Fraction(1, 3), tol=0
        )

    def test_unattained_posterior_gives_false(self, four_state_model):
        assert not classical_ck_at(four_state_model, 0, Fraction(9, 10), Fraction(1, 3), tol=0)

    def test_invalid_state_rejected(self, four_state_model):
        with pytest.raises(InvalidState):
            classical_ck_at(four_state_model, 7, Fraction(1, 2), Fraction(1, 3))


class TestEmbedClassical:
    def test_four_state_table(self, four_state_model):
        joint, event = embed_classical(four_state_model)
        expected = np.zeros((2, 2, 2))
        expected[0, 0, 0] = expected[0, 0, 1] = expected[1, 0, 1] = expected[1, 1, 0] = 0.25
        assert joint.to_float().table == pytest.approx(expected)
        assert event.sorted_members == (0,)
        assert joint.exact

    def test_point_mass_prior(self):
        model = ClassicalModel(
            prior=(0.0, 1.0, 0.0, 0.0),
            part_a=(0, 0, 1, 1),
            part_b=(0, 0, 0, 1),
            part_e=(0, 1, 1, 0),
            event_cells=frozenset({0}),
        )
        joint, _ = embed_classical(model)
        assert joint.table[0, 0, 1] == 1.0
        assert joint.table.sum() == 1.0

    def test_trivial_partitions_collapse(self):
        model = ClassicalModel(
            prior=(0.5, 0.5),
            part_a=(0, 0),
            part_b=(0, 0),
            part_e=(0, 0),
            event_cells=frozenset({0}),
        )
        joint, _ = embed_classical(model)
        assert joint.space.sizes == (1, 1, 1)
        assert joint.table[0, 0, 0] == 1.0


class TestModelValidation:
    def test_partition_with_gap_rejected(self):
        with pytest.raises(ValidationError):
            ClassicalModel((0.5, 0.5), (0, 2), (0, 0), (0, 1), frozenset({0}))

    def test_bad_prior_mass_rejected(self):
        with pytest.raises(ValidationError):
            ClassicalModel((0.5, 0.4), (0, 1), (0, 0), (0, 1), frozenset({0}))

    def test_negative_prior_rejected(self):
        with pytest.raises(ValidationError):
            ClassicalModel((1.5, -0.5), (0, 1), (0, 0), (0, 1), frozenset({0}))

    def test_event_cell_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            ClassicalModel((0.5, 0.5), (0, 1), (0, 0), (0, 1), frozenset({4}))


class TestOracleEquivalence:
    """The two formulations must agree wherever both are defined."""

    def test_posteriors_match_embedding(self):
        for trial in range(40):
            model = random_classical_model(trial_rng(101, trial), exact=True)
            joint, event = embed_classical(model)
            for cell in range(model.n_cells_a):
                assert classical_posterior(model, "A", cell, tol=0) == posterior_alice(
                    joint, cell, event
                )
            for cell in range(model.n_cells_b):
                assert classical_posterior(model, "B", cell, tol=0) == posterior_bob(
                    joint, cell, event
                )

    def test_ck_verdicts_match_engine(self):
        for trial in range(40):
            model = random_classical_model(trial_rng(202, trial), exact=True)
            joint, event = embed_classical(model)
            for omega in range(model.num_states):
                q_a = classical_posterior(model, "A", model.part_a[omega], tol=0)
                q_b = classical_posterior(model, "B", model.part_b[omega], tol=0)
                direct = classical_ck_at(model, omega, q_a, q_b, tol=0)
                engine = is_common_knowledge(
                    joint, event, model.part_a[omega], model.part_b[omega], tol=0
                )
                assert direct == engine

    def test_agreement_theorem_classically(self):
        for trial in range(60):
            model = random_classical_model(trial_rng(303, trial), exact=True)
            joint, event = embed_classical(model)
            assert not violations(verify_agreement(joint, event, tol=0))
            for omega in range(model.num_states):
                q_a = classical_posterior(model, "A", model.part_a[omega], tol=0)
                q_b = classical_posterior(model, "B", model.part_b[omega], tol=0)
                if classical_ck_at(model, omega, q_a, q_b, tol=0):
                    assert q_a == q_b
