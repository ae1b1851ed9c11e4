import collections
import dataclasses

import numpy as np
import pytest

from conftest import tiny_config
from slr.datagen import (TEMPLATE, GenConfig, canonical_gesture, class_separability_check, class_spec,
                         generate_dataset, signer_modifiers)
from slr.exceptions import InsufficientClasses, InvalidConfig
from slr.geometry import normalize_sequence
from slr.skeleton import HandMode, JointId

LEFT_ARM = [JointId.ElbowLeft, JointId.WristLeft, JointId.HandLeft]
RIGHT_ARM = [JointId.ElbowRight, JointId.WristRight, JointId.HandRight]


def test_default_counts(default_dataset):
    assert len(default_dataset) == 2700
    cells = collections.Counter((s.class_id, s.signer_id) for s in default_dataset)
    assert len(cells) == 300 and set(cells.values()) == {9}
    modes = {s.class_id: s.hand_mode for s in default_dataset}
    assert sum(m is HandMode.Single for m in modes.values()) == 16
    assert all(modes[k] is HandMode.Single for k in range(16))
    assert all(modes[k] is HandMode.Double for k in range(16, 30))
    assert all(s.joints.shape == (45, 20, 3) for s in default_dataset[:10])


def test_output_order_and_metadata(default_dataset):
    keys = [(s.class_id, s.signer_id, s.repetition) for s in default_dataset]
    assert keys == sorted(keys)
    assert len({s.class_name for s in default_dataset}) == 30


def test_rotation_schedule(default_dataset):
    per_cell = collections.defaultdict(collections.Counter)
    for s in default_dataset:
        per_cell[(s.class_id, s.signer_id)][s.rotation_deg] += 1
    assert all(c == {0.0: 3, 45.0: 3, 90.0: 3} for c in per_cell.values())


def test_rotation_schedule_other_set():
    data = generate_dataset(tiny_config(reps_per_signer=4, rotation_set=(10, -30)))
    assert [s.rotation_deg for s in data[:4]] == [10.0, 10.0, -30.0, -30.0]


def test_deterministic():
    a = generate_dataset(tiny_config())
    b = generate_dataset(tiny_config())
    assert a == b
    c = generate_dataset(tiny_config(seed=6))
    assert a != c


def test_no_randomness_gives_identical_reps():
    data = generate_dataset(tiny_config(noise_sigma=0.0, rotation_set=(0,), translation_range=0.0))
    by_cell = collections.defaultdict(list)
    for s in data:
        by_cell[(s.class_id, s.signer_id)].append(s.joints)
    for reps in by_cell.values():
        assert all(np.array_equal(reps[0], r) for r in reps[1:])


def test_noise_free_data_normalizes_back_to_canonical():
    config = tiny_config(noise_sigma=0.0, num_classes=6, translation_range=2.0)
    for seq in generate_dataset(config):
        scale, speed = signer_modifiers(seq.signer_id, config.seed)
        expected = canonical_gesture(class_spec(seq.class_id, config.num_single), config.frames_per_gesture,
                                     scale, speed)
        out, reports = normalize_sequence(seq)
        assert np.max(np.abs(out.joints - expected)) < 1e-9
        assert all(abs(np.degrees(r.theta_rad) - seq.rotation_deg) < 1e-9 for r in reports)


def test_signer_modifiers_in_range_and_stable():
    for signer in range(50):
        scale, speed = signer_modifiers(signer, 0)
        assert 0.9 <= scale <= 1.1 and 0.85 <= speed <= 1.15
        assert (scale, speed) == signer_modifiers(signer, 0)
    assert signer_modifiers(0, 0) != signer_modifiers(1, 0)


def test_single_moves_right_arm_only_and_double_moves_both():
    single = canonical_gesture(class_spec(2, 16), 30)
    double = canonical_gesture(class_spec(20, 16), 30)
    assert np.ptp(single[:, RIGHT_ARM], axis=0).max() > 0.05
    assert np.ptp(single[:, LEFT_ARM], axis=0).max() == 0.0
    assert np.ptp(double[:, LEFT_ARM], axis=0).max() > 0.05
    torso = [JointId.Spine, JointId.ShoulderLeft, JointId.ShoulderRight, JointId.Head]
    assert np.array_equal(single[:, torso], np.broadcast_to(TEMPLATE[torso], single[:, torso].shape))


def test_class_specs_distinct():
    specs = [class_spec(k, 16) for k in range(30)]
    keys = {dataclasses.astuple(dataclasses.replace(s, class_id=0, name="")) for s in specs}
    assert len(keys) == 30


def test_proportional_single_count():
    assert GenConfig().num_single == 16
    assert GenConfig(num_classes=10).num_single == 5
    assert GenConfig(num_classes=2).num_single == 1


@pytest.mark.parametrize("kwargs", [dict(num_classes=1), dict(num_signers=0), dict(reps_per_signer=8),
                                    dict(noise_sigma=-0.1), dict(frames_per_gesture=1),
                                    dict(rotation_set=()), dict(translation_range=-1.0)])
def test_invalid_config(kwargs):
    with pytest.raises(InvalidConfig):
        GenConfig(**kwargs)


# -- separability ---------------------------------------------------------------

def test_default_separability(default_dataset):
    assert class_separability_check(default_dataset) > 1.5


def test_zero_noise_is_more_separable():
    noisy = class_separability_check(generate_dataset(GenConfig(num_classes=8, num_signers=3)))
    clean = class_separability_check(generate_dataset(GenConfig(num_classes=8, num_signers=3, noise_sigma=0.0)))
    assert clean > noisy


def test_shared_trajectory_ratio_near_one():
    data = [s for s in generate_dataset(GenConfig(num_classes=2, num_signers=4)) if s.class_id == 0]
    relabelled = [dataclasses.replace(s, class_id=n % 3) for n, s in enumerate(data)]
    assert class_separability_check(relabelled) == pytest.approx(1.0, abs=0.05)


def test_separability_needs_two_classes():
    data = [s for s in generate_dataset(tiny_config()) if s.class_id == 0]
    with pytest.raises(InsufficientClasses):
        class_separability_check(data)
