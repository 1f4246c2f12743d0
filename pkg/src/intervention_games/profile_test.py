import pytest
import numpy as np

from .profile import MixedProfile, as_distribution

def test_as_distribution():

    vector = as_distribution([0.25, 0.75])
    assert vector.tolist() == [0.25, 0.75]
    assert not vector.flags.writeable

    with pytest.raises(AssertionError):
        as_distribution([0.5, 0.6])

    with pytest.raises(AssertionError):
        as_distribution([1.5, -0.5])

    with pytest.raises(AssertionError):
        as_distribution([])

    with pytest.raises(AssertionError):
        as_distribution([0.5, 0.5], size=3)

    with pytest.raises(AssertionError):
        as_distribution([np.nan, 1.0])

def test_pure():

    profile = MixedProfile.pure((2, 3), (1, 2))
    assert profile.per_user[0].tolist() == [0.0, 1.0]
    assert profile.per_user[1].tolist() == [0.0, 0.0, 1.0]
    assert profile.is_pure
    assert profile.pure_indices == (1, 2)
    assert profile.action_counts == (2, 3)
    assert profile.num_users == 2

    with pytest.raises(AssertionError):
        MixedProfile.pure((2, 2), (0, 2))

    with pytest.raises(AssertionError):
        MixedProfile.pure((2, 2), (0,))

def test_mixed():

    profile = MixedProfile(([0.5, 0.5], [1.0, 0.0]))
    assert not profile.is_pure
    assert profile.pure_indices is None
    assert profile.support(0) == (0, 1)
    assert profile.support(1) == (0,)
    assert profile.to_list() == [[0.5, 0.5], [1.0, 0.0]]

    with pytest.raises(AssertionError):
        MixedProfile(([0.5, 0.4],))

    with pytest.raises(AssertionError):
        MixedProfile(())

def test_equality_and_hash():

    a = MixedProfile(([0.5, 0.5], [1.0, 0.0]))
    b = MixedProfile((np.array([0.5, 0.5]), np.array([1.0, 0.0])))
    c = MixedProfile(([0.5, 0.5], [0.0, 1.0]))

    assert a == b
    assert hash(a) == hash(b)
    assert a != c
    assert len({a, b, c}) == 2

def test_replace_and_distance():

    a = MixedProfile.uniform((2, 2))
    b = a.replace(1, [0.9, 0.1])

    assert a.per_user[1].tolist() == [0.5, 0.5]
    assert b.per_user[1].tolist() == [0.9, 0.1]
    assert a.distance(b) == pytest.approx(0.4)
    assert a.distance(a) == 0.0

    with pytest.raises(AssertionError):
        a.distance(MixedProfile.uniform((2, 3)))

def test_is_symmetric():

    assert MixedProfile.uniform((3, 3, 3)).is_symmetric()
    assert not MixedProfile.pure((2, 2), (0, 1)).is_symmetric()
    assert not MixedProfile.uniform((2, 3)).is_symmetric()

def test_expectation():

    tensor = np.array([[1.0, 2.0], [3.0, 4.0]])

    assert float(MixedProfile.pure((2, 2), (1, 0)).expectation(tensor)) == 3.0
    assert float(MixedProfile.uniform((2, 2)).expectation(tensor)) == pytest.approx(2.5)

    # trailing axes survive
    stacked = np.stack([tensor, 10 * tensor], axis=-1)
    assert MixedProfile.pure((2, 2), (0, 1)).expectation(stacked).tolist() == [2.0, 20.0]

    with pytest.raises(AssertionError):
        MixedProfile.uniform((3, 2)).expectation(tensor)
