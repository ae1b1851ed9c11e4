import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from slr.exceptions import InvalidValue
from slr.skeleton import (GestureSequence, HandMode, JointId, SkeletonFrame, Vec3, flatten_frame,
                          sequence_to_features)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_joint_enumeration_is_dense_kinect_order():
    assert len(JointId) == 20
    assert [j.value for j in JointId] == list(range(20))
    assert JointId.Spine == 1
    assert JointId.ShoulderLeft == 4 and JointId.ShoulderRight == 8
    assert JointId.FootRight == 19


def test_vec3_rejects_non_finite():
    with pytest.raises(InvalidValue):
        Vec3(0.0, float("nan"), 0.0)
    with pytest.raises(InvalidValue):
        Vec3(float("inf"), 0.0, 0.0)


@pytest.mark.parametrize("shape", [(19, 3), (20, 2), (20,), (2, 20, 3)])
def test_frame_rejects_bad_shape(shape):
    with pytest.raises(InvalidValue):
        SkeletonFrame(np.zeros(shape))


def test_frame_rejects_nan_and_is_read_only():
    bad = np.zeros((20, 3))
    bad[5, 1] = np.nan
    with pytest.raises(InvalidValue):
        SkeletonFrame(bad)
    frame = SkeletonFrame(np.zeros((20, 3)))
    with pytest.raises(ValueError):
        frame.joints[0, 0] = 1.0


def test_sequence_invariants():
    with pytest.raises(InvalidValue):
        GestureSequence(np.zeros((0, 20, 3)), 0)
    with pytest.raises(InvalidValue):
        GestureSequence(np.zeros((1, 20, 3)), -1)
    with pytest.raises(InvalidValue):
        GestureSequence(np.zeros((1, 20, 3)), 0, signer_id=-2)
    seq = GestureSequence([SkeletonFrame.zeros(), SkeletonFrame.zeros()], 3, "x", 1, 2, "Double", 45)
    assert len(seq) == 2 and seq.hand_mode is HandMode.Double
    assert seq.frames[1] == SkeletonFrame.zeros()


def test_flatten_zero_frame():
    assert np.array_equal(flatten_frame(SkeletonFrame.zeros()), np.zeros(60))


def test_flatten_first_and_last_joint_placement():
    joints = np.zeros((20, 3))
    joints[0] = (1, 2, 3)
    out = flatten_frame(SkeletonFrame(joints))
    assert out.tolist() == [1, 2, 3] + [0] * 57
    joints = np.zeros((20, 3))
    joints[19] = (0, 0, 5)
    out = flatten_frame(SkeletonFrame(joints))
    assert out[57:].tolist() == [0, 0, 5] and not out[:57].any()


def test_sequence_features_shape_order_and_determinism(rng):
    single = GestureSequence(rng.normal(size=(1, 20, 3)), 0)
    assert sequence_to_features(single).shape == (1, 60)

    frame = rng.normal(size=(20, 3))
    same = GestureSequence(np.repeat(frame[None], 5, axis=0), 0)
    feats = sequence_to_features(same)
    assert feats.shape == (5, 60) and np.all(feats == feats[0])

    joints = rng.normal(size=(4, 20, 3))
    seq = GestureSequence(joints, 0)
    feats = sequence_to_features(seq)
    for t in range(4):
        assert np.array_equal(feats[t], flatten_frame(seq.frames[t]))


@given(arrays(np.float64, (20, 3), elements=finite), arrays(np.float64, (20, 3), elements=finite))
def test_flatten_is_injective(a, b):
    same_vector = np.array_equal(flatten_frame(SkeletonFrame(a)), flatten_frame(SkeletonFrame(b)))
    assert same_vector == np.array_equal(a, b)


@given(st.integers(1, 6), st.data())
def test_features_rows_follow_joint_order(frames, data):
    joints = data.draw(arrays(np.float64, (frames, 20, 3), elements=finite))
    feats = sequence_to_features(GestureSequence(joints, 0))
    assert feats.shape == (frames, 60)
    for k in range(20):
        assert np.array_equal(feats[:, 3 * k:3 * k + 3], joints[:, k])
