"""Marginals, distances and moments for densities and ensembles."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .samplers import EnsembleResult
from .statespace import StateSpace


def joint(dist, space: StateSpace) -> np.ndarray:
    """Normalized joint distribution over the box from a density or ensemble."""
    if isinstance(dist, EnsembleResult):
        v = dist.counts_vector(space.size)
    else:
        v = np.asarray(dist, dtype=np.float64)
    if v.shape != (space.size,):
        raise ValueError("distribution does not match the state space")
    total = v.sum()
    if total <= 0:
        raise ValueError("distribution has no mass")
    return v / total


def marginal(dist, space: StateSpace, species: int) -> np.ndarray:
    """Marginal over 0..cap of ``species`` (0-based)."""
    if not 0 <= species < space.n_species:
        raise IndexError(f"species index {species} out of range")
    p = joint(dist, space)
    shape = [c + 1 for c in reversed(space.caps)]
    axis = space.n_species - 1 - species
    others = tuple(a for a in range(space.n_species) if a != axis)
    out = p.reshape(shape).sum(axis=others)
    return out / out.sum()


def tv_distance(p, q) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError("distributions have different supports")
    return min(1.0, 0.5 * float(np.abs(p / p.sum() - q / q.sum()).sum()))


def l1_distance(p, q) -> float:
    return float(np.abs(np.asarray(p, dtype=np.float64) - np.asarray(q, dtype=np.float64)).sum())


def moments(p) -> tuple[float, float]:
    p = np.asarray(p, dtype=np.float64)
    p = p / p.sum()
    k = np.arange(p.size)
    mean = float(k @ p)
    return mean, float(((k - mean) ** 2) @ p)


def local_maxima(p, prominence: float = 0.1) -> list[int]:
    """Local maxima whose prominence exceeds ``prominence`` * global max."""
    from scipy.signal import find_peaks

    p = np.asarray(p, dtype=np.float64)
    padded = np.concatenate([[0.0], p, [0.0]])
    peaks, _ = find_peaks(padded, prominence=prominence * p.max())
    return [int(i - 1) for i in peaks]


@dataclass
class ComparisonReport:
    species: list[str]
    marginals: dict[str, list[float]]
    means: dict[str, float]
    variances: dict[str, float]
    diagnostics: dict = field(default_factory=dict)
    tv: dict[str, float] | None = None
    l1: dict[str, float] | None = None
    mean_delta: dict[str, float] | None = None
    variance_delta: dict[str, float] | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def describe(dist, space: StateSpace, species_names, diagnostics=None) -> ComparisonReport:
    marg, means, variances = {}, {}, {}
    for i, name in enumerate(species_names):
        m = marginal(dist, space, i)
        marg[name] = m.tolist()
        means[name], variances[name] = moments(m)
    return ComparisonReport(
        species=list(species_names),
        marginals=marg,
        means=means,
        variances=variances,
        diagnostics=dict(diagnostics or {}),
    )


def compare(a, b, space: StateSpace, species_names) -> ComparisonReport:
    """TV/L1/moment deltas between two densities or ensembles.

    The ``joint`` key of ``tv``/``l1`` compares full joint distributions.
    """
    ra = describe(a, space, species_names)
    rb = describe(b, space, species_names)
    pa, pb = joint(a, space), joint(b, space)
    tv = {"joint": tv_distance(pa, pb)}
    l1 = {"joint": l1_distance(pa, pb)}
    for name in species_names:
        tv[name] = tv_distance(ra.marginals[name], rb.marginals[name])
        l1[name] = l1_distance(ra.marginals[name], rb.marginals[name])
    return ComparisonReport(
        species=list(species_names),
        marginals={f"a:{k}": v for k, v in ra.marginals.items()}
        | {f"b:{k}": v for k, v in rb.marginals.items()},
        means={f"a:{k}": v for k, v in ra.means.items()} | {f"b:{k}": v for k, v in rb.means.items()},
        variances={f"a:{k}": v for k, v in ra.variances.items()}
        | {f"b:{k}": v for k, v in rb.variances.items()},
        tv=tv,
        l1=l1,
        mean_delta={k: ra.means[k] - rb.means[k] for k in species_names},
        variance_delta={k: ra.variances[k] - rb.variances[k] for k in species_names},
    )
