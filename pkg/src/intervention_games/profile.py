from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

# Probability vectors must sum to 1 within this tolerance before they are
# renormalised
PROBABILITY_TOLERANCE = 1e-12

def as_distribution(values : Iterable[float], size : int = None, what : str = "probability vector") -> np.ndarray:
    """Validate a probability vector and return it as a renormalised,
    read-only numpy array.
    """

    vector = np.array(values, dtype=float).reshape(-1)

    assert vector.size > 0, "%s is empty" % what
    assert size is None or vector.size == size, \
        "%s has %d entries, expected %d" % (what, vector.size, size)
    assert np.all(np.isfinite(vector)), "%s contains non-finite values" % what
    assert np.all(vector >= -PROBABILITY_TOLERANCE), "%s has negative entries: %s" % (what, vector.tolist())

    total = vector.sum()
    assert abs(total - 1.0) <= PROBABILITY_TOLERANCE, \
        "%s sums to %.15g, not 1" % (what, total)

    vector = np.clip(vector, 0.0, None)
    vector = vector / vector.sum()
    vector.setflags(write=False)

    return vector

@dataclass(frozen=True, eq=False)
class MixedProfile:
    """One probability vector per user over that user's pure actions.
    """

    per_user : Tuple[np.ndarray, ...]

    def __post_init__(self):
        assert len(self.per_user) >= 1, "A profile needs at least one user"

        per_user = tuple(
            as_distribution(v, what="mixed action of user %d" % (i + 1))
            for i, v in enumerate(self.per_user)
        )
        object.__setattr__(self, 'per_user', per_user)

    @classmethod
    def pure(cls, action_counts : Sequence[int], indices : Sequence[int]) -> "MixedProfile":
        assert len(action_counts) == len(indices), "Profile length does not match number of users"

        per_user = []
        for i, (count, index) in enumerate(zip(action_counts, indices)):
            assert 0 <= index < count, "Action index %d out of range for user %d" % (index, i + 1)
            vector = np.zeros(count)
            vector[index] = 1.0
            per_user.append(vector)

        return cls(tuple(per_user))

    @classmethod
    def uniform(cls, action_counts : Sequence[int]) -> "MixedProfile":
        return cls(tuple(np.full(count, 1.0 / count) for count in action_counts))

    @property
    def num_users(self) -> int:
        return len(self.per_user)

    @property
    def action_counts(self) -> Tuple[int, ...]:
        return tuple(v.size for v in self.per_user)

    @property
    def is_pure(self) -> bool:
        return all(np.max(v) == 1.0 for v in self.per_user)

    @property
    def pure_indices(self) -> Tuple[int, ...]:
        """Action indices of a degenerate profile, or None if any user mixes
        """

        if not self.is_pure:
            return None

        return tuple(int(np.argmax(v)) for v in self.per_user)

    @property
    def key(self) -> Tuple[float, ...]:
        return tuple(float(x) for v in self.per_user for x in v)

    def support(self, user : int, threshold : float = 0.0) -> Tuple[int, ...]:
        return tuple(int(k) for k in np.flatnonzero(self.per_user[user] > threshold))

    def replace(self, user : int, vector : Sequence[float]) -> "MixedProfile":
        """Copy of this profile with `user`'s mixed action replaced
        """

        per_user = list(self.per_user)
        per_user[user] = np.asarray(vector, dtype=float)
        return MixedProfile(tuple(per_user))

    def distance(self, other : "MixedProfile") -> float:
        """L-infinity distance between two profiles over the same action sets
        """

        assert self.action_counts == other.action_counts, "Profiles are over different action sets"
        return max(float(np.max(np.abs(a - b))) for a, b in zip(self.per_user, other.per_user))

    def is_symmetric(self, tolerance : float = 1e-12) -> bool:
        first = self.per_user[0]
        return all(v.size == first.size and np.max(np.abs(v - first)) <= tolerance for v in self.per_user[1:])

    def expectation(self, tensor : np.ndarray) -> np.ndarray:
        """Contract the leading N axes of `tensor` (one per user) with the
        users' mixed actions. Trailing axes are kept.
        """

        result = np.asarray(tensor, dtype=float)
        assert result.shape[:self.num_users] == self.action_counts, \
            "Tensor shape %s does not start with action counts %s" % (result.shape, self.action_counts)

        for vector in self.per_user:
            result = np.tensordot(vector, result, axes=([0], [0]))

        return result

    def to_list(self) -> List[List[float]]:
        return [[float(x) for x in v] for v in self.per_user]

    def __eq__(self, other):
        if not isinstance(other, MixedProfile):
            return NotImplemented
        return self.action_counts == other.action_counts and self.key == other.key

    def __hash__(self):
        return hash(self.key)
