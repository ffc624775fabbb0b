"""Sparse CTMC generators over a truncated state box.

Every matrix here acts on probability column vectors: entry (i, j) is the
rate of jumping from state j to state i. Reactions whose firing would leave
the box are clipped, i.e. their propensity is dropped from both the
off-diagonal entry and the diagonal, so the full generator conserves mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .model import ReactionModel
from .statespace import StateSpace


class StructuralError(ValueError):
    """A matrix lacks the generator structure an algorithm relies on."""


@dataclass(frozen=True, eq=False)
class Generator:
    matrix: sp.csc_matrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def column_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=0)).ravel()

    @cached_property
    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def check(self, rtol: float = 1e-12, conservative: bool = True) -> None:
        """Raise StructuralError unless off-diagonals are >= 0 and column sums
        are zero (``conservative``) or at most zero."""
        coo = self.matrix.tocoo()
        off = coo.row != coo.col
        if np.any(coo.data[off] < 0):
            raise StructuralError("negative off-diagonal rate")
        scale = np.maximum(np.abs(self.diagonal), 1.0)
        sums = self.column_sums
        if conservative:
            bad = np.abs(sums) > rtol * scale
        else:
            bad = sums > rtol * scale
        if np.any(bad):
            j = int(np.flatnonzero(bad)[0])
            raise StructuralError(f"column {j + 1} sums to {sums[j]!r}")

    def dense_text(self) -> str:
        """Row-major dense dump, one matrix row per line."""
        return "\n".join(" ".join(repr(float(v)) for v in row) for row in self.toarray()) + "\n"


def _check_dims(model: ReactionModel, space: StateSpace) -> None:
    if model.n_species != space.n_species:
        raise ValueError(
            f"model has {model.n_species} species but the state space has {space.n_species}"
        )


def propensity_table(model: ReactionModel, space: StateSpace) -> np.ndarray:
    """Unclipped propensities a_r(x_j) as an (M, Q) array."""
    _check_dims(model, space)
    states = space.states
    out = np.empty((model.n_reactions, space.size))
    for r, spec in enumerate(model.propensities):
        comb = np.ones(space.size, dtype=object)
        for species, mult in spec.orders:
            table = np.array(
                [math.comb(v, mult) for v in range(space.caps[species] + 1)], dtype=object
            )
            comb = comb * table[states[:, species]]
        out[r] = [spec.rate * c for c in comb]
    return out


def _targets(model, space, r):
    """0-based target indices of reaction r and a mask of in-box firings."""
    moved = space.states + model.change_vector(r)
    caps = np.array(space.caps)
    ok = np.all((moved >= 0) & (moved <= caps), axis=1)
    src = np.flatnonzero(ok)
    return src, space.indices_0(moved[ok]), ok


def clipped_propensity_table(model: ReactionModel, space: StateSpace) -> np.ndarray:
    table = propensity_table(model, space)
    for r in range(model.n_reactions):
        _, _, ok = _targets(model, space, r)
        table[r, ~ok] = 0.0
    return table


def _csc(rows, cols, vals, q):
    m = sp.csc_matrix((vals, (rows, cols)), shape=(q, q))
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return m


def assemble_reaction_generators(model: ReactionModel, space: StateSpace) -> list[Generator]:
    """Single-reaction generators B_1..B_M (clipped, zero column sums)."""
    table = clipped_propensity_table(model, space)
    q = space.size
    out = []
    for r in range(model.n_reactions):
        src, dst, _ = _targets(model, space, r)
        a = table[r, src]
        rows = np.concatenate([dst, src])
        cols = np.concatenate([src, src])
        vals = np.concatenate([a, -a])
        out.append(Generator(_csc(rows, cols, vals, q)))
    return out


def assemble_channels(model: ReactionModel, space: StateSpace) -> list[Generator]:
    """[A_0, A_1, ..., A_M]: clipped diagonal -a_0 and per-reaction inflow parts."""
    table = clipped_propensity_table(model, space)
    q = space.size
    diag = np.zeros(q)
    for r in range(model.n_reactions):
        diag = diag + -table[r]
    channels = [Generator(_csc(np.arange(q), np.arange(q), diag, q))]
    for r in range(model.n_reactions):
        src, dst, _ = _targets(model, space, r)
        channels.append(Generator(_csc(dst, src, table[r, src], q)))
    return channels


def assemble_generator(model: ReactionModel, space: StateSpace) -> Generator:
    """Full truncated CME generator A = sum_r B_r."""
    total = None
    for b in assemble_reaction_generators(model, space):
        total = b.matrix if total is None else total + b.matrix
    total = total.tocsc()
    total.eliminate_zeros()
    total.sort_indices()
    return Generator(total)


def assemble_frozen(model: ReactionModel, space: StateSpace, xbar) -> list[Generator]:
    """[Ā_0, ..., Ā_M] with propensities frozen at ``xbar``.

    Values are not clipped; only positions whose target leaves the box are
    dropped, so the frozen sum leaks mass through the box boundary.
    """
    _check_dims(model, space)
    if not space.in_bounds(xbar):
        raise IndexError(f"freeze state {tuple(xbar)} outside the box")
    q = space.size
    a = [spec.evaluate(xbar) for spec in model.propensities]
    a0 = sum(a)
    out = [Generator(_csc(np.arange(q), np.arange(q), np.full(q, -a0), q))]
    for r in range(model.n_reactions):
        src, dst, _ = _targets(model, space, r)
        out.append(Generator(_csc(dst, src, np.full(src.size, a[r]), q)))
    return out


def column_piece(A: Generator, j: int):
    """Column j (1-based) of A as a sparse (Q, 1) matrix, with j."""
    if not 1 <= j <= A.dim:
        raise IndexError(f"column {j} outside 1..{A.dim}")
    return A.matrix[:, j - 1], j
