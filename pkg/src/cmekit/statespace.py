"""Mixed-radix indexing of the truncated state box.

Species 1 varies fastest. Public indices are 1-based; the ``*_0`` helpers
work with 0-based indices for array access.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class StateSpace:
    caps: tuple[int, ...]

    def __post_init__(self):
        if not self.caps or any(c < 0 for c in self.caps):
            raise ValueError("caps must be a non-empty sequence of non-negative ints")
        object.__setattr__(self, "caps", tuple(int(c) for c in self.caps))

    @classmethod
    def for_model(cls, model) -> "StateSpace":
        return cls(tuple(model.caps))

    @property
    def n_species(self) -> int:
        return len(self.caps)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out, s = [], 1
        for c in self.caps:
            out.append(s)
            s *= c + 1
        return tuple(out)

    @cached_property
    def size(self) -> int:
        return int(np.prod([c + 1 for c in self.caps], dtype=object))

    def in_bounds(self, x) -> bool:
        return len(x) == len(self.caps) and all(0 <= xi <= c for xi, c in zip(x, self.caps))

    def index_of(self, x) -> int:
        if not self.in_bounds(x):
            raise IndexError(f"state {tuple(x)} outside box with caps {self.caps}")
        return 1 + sum(int(xi) * s for xi, s in zip(x, self.strides))

    def state_of(self, index: int) -> tuple[int, ...]:
        if not 1 <= index <= self.size:
            raise IndexError(f"index {index} outside 1..{self.size}")
        rem = index - 1
        out = []
        for c in self.caps:
            rem, xi = divmod(rem, c + 1)
            out.append(xi)
        return tuple(out)

    @cached_property
    def states(self) -> np.ndarray:
        """All states as a (size, N) array in index order."""
        grids = np.indices([c + 1 for c in reversed(self.caps)]).reshape(len(self.caps), -1)
        return np.ascontiguousarray(grids[::-1].T, dtype=np.int64)

    def indices_0(self, states: np.ndarray) -> np.ndarray:
        """0-based indices for a (k, N) array of in-box states."""
        return np.asarray(states, dtype=np.int64) @ np.array(self.strides, dtype=np.int64)

    def reaction_offsets(self, model) -> tuple[int, ...]:
        """Index shift d_r produced by one firing of each reaction."""
        if model.n_species != self.n_species:
            raise ValueError("model and state space dimensions differ")
        return tuple(
            int(sum(s * v for s, v in zip(self.strides, model.change_vector(r))))
            for r in range(model.n_reactions)
        )


def delta(space: StateSpace, x) -> np.ndarray:
    """Point mass at state ``x``."""
    p = np.zeros(space.size)
    p[space.index_of(x) - 1] = 1.0
    return p
