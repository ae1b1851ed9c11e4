import numpy as np
import pytest

from slr.datagen import TEMPLATE
from slr.skeleton import GestureSequence, HandMode, SkeletonFrame


@pytest.fixture
def canonical_frame():
    return SkeletonFrame(TEMPLATE)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_frame(rng, spread=0.5):
    """Random joints around a plausible torso; never degenerate."""
    joints = TEMPLATE + rng.normal(0.0, spread * 0.1, size=TEMPLATE.shape)
    # Keep the shoulders well apart so the body plane is well conditioned.
    joints[4] = joints[1] + (-0.2, 0.45, 0.0) + rng.normal(0.0, 0.03, 3)
    joints[8] = joints[1] + (0.2, 0.45, 0.0) + rng.normal(0.0, 0.03, 3)
    return joints


def make_sequence(joints, class_id=0, signer_id=0, repetition=0, hand_mode=HandMode.Single,
                  class_name="c"):
    return GestureSequence(np.asarray(joints), class_id, class_name, signer_id, repetition, hand_mode, 0.0)


@pytest.fixture(scope="session")
def default_dataset():
    from slr.datagen import generate_dataset
    return generate_dataset()


def tiny_config(**overrides):
    from slr.datagen import GenConfig
    params = dict(num_classes=3, num_signers=2, reps_per_signer=3, frames_per_gesture=8, seed=5)
    params.update(overrides)
    return GenConfig(**params)


_criteria: list[tuple[int, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line and fail the test if the criterion is not met."""
    def record(number, name, ok, detail):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
        _criteria.append((number, line))
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_criteria):
            terminalreporter.write_line(line)
