"""Shared fixtures: the four-state ontic model, the block-rotation example,
and brute-force oracles used to pin expected values independently of the
library code paths under test."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from agreelab import (
    ClassicalModel,
    DensityMatrix,
    block_rotation_scenario,
    embed_classical,
    sequential_joint,
)

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture
def scenarios_dir() -> Path:
    return SCENARIOS


@pytest.fixture
def four_state_model() -> ClassicalModel:
    # states {0,1,2,3} uniform; Alice {0,1}/{2,3}; Bob {0,1,2}/{3};
    # event partition {0,3}/{1,2} with the event being its first cell
    return ClassicalModel(
        prior=(Fraction(1, 4),) * 4,
        part_a=(0, 0, 1, 1),
        part_b=(0, 0, 0, 1),
        part_e=(0, 1, 1, 0),
        event_cells=frozenset({0}),
    )


@pytest.fixture
def four_state_joint(four_state_model):
    joint, event = embed_classical(four_state_model)
    return joint.to_float(), event


@pytest.fixture
def block_example():
    scenario = block_rotation_scenario(np.pi / 4, np.pi / 3, 0.2, 0.1)
    return scenario, sequential_joint(scenario)


@pytest.fixture
def uniform_222():
    from agreelab import Event, OutcomeSpace, validate_joint

    space = OutcomeSpace(2, 2, 2)
    joint = validate_joint(np.full((2, 2, 2), 0.125), space)
    return joint, Event(space, frozenset({0}))


def enum_posterior(table: np.ndarray, axis: int, index: int, event_ks) -> float:
    """Brute-force posterior by triple enumeration (independent oracle)."""
    num = 0.0
    den = 0.0
    for i in range(table.shape[0]):
        for j in range(table.shape[1]):
            for k in range(table.shape[2]):
                if (i, j, k)[axis] != index:
                    continue
                den += table[i, j, k]
                if k in event_ks:
                    num += table[i, j, k]
    return num / den


def enum_conditional(table: np.ndarray, t_axis: int, t_set, g_axis: int, g_set) -> float:
    """Brute-force conditional probability by triple enumeration."""
    num = 0.0
    den = 0.0
    for i in range(table.shape[0]):
        for j in range(table.shape[1]):
            for k in range(table.shape[2]):
                triple = (i, j, k)
                if triple[g_axis] not in g_set:
                    continue
                den += table[i, j, k]
                if triple[t_axis] in t_set:
                    num += table[i, j, k]
    return num / den


def pure_state(vec) -> DensityMatrix:
    return DensityMatrix.pure(np.asarray(vec, dtype=complex))
