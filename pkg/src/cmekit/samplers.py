"""Trajectory samplers: SSA and the tau-leap family, plus seeded ensembles.

Each trajectory owns an independent random stream derived from
``(master_seed, stream_id)``: numpy's ``SeedSequence(master_seed,
spawn_key=(stream_id,))`` expands the pair into four 64-bit words that seed
a xoshiro256** generator. Ensembles are therefore identical for any thread
count or execution order.

Population policy: the tau-leap variants clamp components that would leave
[0, cap] and count each clamp. SSA disables firings that would leave the
box, so it samples the same truncated chain as the assembled generator.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field

import numba
import numpy as np

from . import _kernels as K
from .model import ReactionModel
from .statespace import StateSpace

METHODS = {
    "ssa": K.METHOD_SSA,
    "tau-leap": K.METHOD_TAU_LEAP,
    "accelerated": K.METHOD_ACCELERATED,
    "accelerated-split": K.METHOD_ACCELERATED_SPLIT,
    "symmetric": K.METHOD_SYMMETRIC,
}

THREADS_ENV = "CMEKIT_NUM_THREADS"


def stream_state(master_seed: int, stream_id: int) -> np.ndarray:
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(stream_id),))
    state = seq.generate_state(4, np.uint64)
    if not state.any():
        state[0] = 1
    return state


class RngStream:
    """Per-trajectory random stream."""

    def __init__(self, master_seed: int, stream_id: int = 0):
        if not 0 <= master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        self.state = stream_state(master_seed, stream_id)

    def uniform(self) -> float:
        return K.uniform(self.state)

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"


def _check_mean(mean):
    if not (math.isfinite(mean) and mean >= 0):
        raise ValueError(f"Poisson mean must be finite and non-negative, got {mean!r}")


def sample_poisson(rng: RngStream, mean: float) -> int:
    _check_mean(mean)
    return int(K.poisson(rng.state, float(mean)))


def sample_poisson_many(rng: RngStream, mean: float, n: int) -> np.ndarray:
    _check_mean(mean)
    return K.poisson_many(rng.state, float(mean), int(n))


@dataclass
class TrajectoryResult:
    final_state: tuple[int, ...]
    steps_taken: int
    boundary_clamps: int = 0
    wall_time: float = 0.0


def _check_tau(tau):
    if not tau > 0:
        raise ValueError("tau must be positive")


def n_leaps(T: float, tau: float) -> int:
    _check_tau(tau)
    n = int(round(T / tau))
    if abs(n * tau - T) > 1e-9 * max(T, tau):
        raise ValueError(f"horizon {T} is not a multiple of tau {tau}")
    return n


def _state(model, x):
    x = np.array(x, dtype=np.int64)
    if x.shape != (model.n_species,) or np.any(x < 0):
        raise ValueError("state must be a non-negative vector with one entry per species")
    return x


def _run(method, model, x0, T, tau, rng):
    code = METHODS[method]
    x = _state(model, x0)
    n = 0 if code == K.METHOD_SSA else n_leaps(T, tau)
    start = time.perf_counter()
    steps, clamps = K.run_one(code, rng.state, x, float(T), float(tau), n, *model.kernel_arrays)
    return TrajectoryResult(
        tuple(int(v) for v in x), int(steps), int(clamps), time.perf_counter() - start
    )


def ssa_run(model: ReactionModel, x0, T: float, rng: RngStream) -> TrajectoryResult:
    return _run("ssa", model, x0, T, 1.0, rng)


def tau_leap_run(model: ReactionModel, x0, T: float, tau: float, rng: RngStream) -> TrajectoryResult:
    return _run("tau-leap", model, x0, T, tau, rng)


def run_trajectory(method, model, x0, T, tau, rng) -> TrajectoryResult:
    if method not in METHODS:
        raise ValueError(f"unknown sampler {method!r}")
    return _run(method, model, x0, T, tau if method != "ssa" else 1.0, rng)


def _step(fn, model, x, tau, rng, *scratch):
    _check_tau(tau)
    x = _state(model, x)
    stoich, species, mult, count, rates, caps = model.kernel_arrays
    fn(rng.state, x, float(tau), *scratch, stoich, species, mult, count, rates, caps)
    return tuple(int(v) for v in x)


def accelerated_step(model: ReactionModel, x, tau: float, rng: RngStream):
    """One sweep over reactions M..1, each firing Poisson(a_r(current) τ) times."""
    return _step(K.accelerated_step, model, x, tau, rng)


def accelerated_half_split_step(model: ReactionModel, x, tau: float, rng: RngStream):
    """Two-block accelerated sweep.

    Reactions M down to M - ceil(M/2) + 1 fire with propensities frozen at
    ``x``; the remaining reactions fire with propensities frozen at the state
    reached after the first block.
    """
    return _step(K.accelerated_split_step, model, x, tau, rng, np.empty(model.n_reactions))


def symmetric_accelerated_step(model: ReactionModel, x, tau: float, rng: RngStream):
    """Half-step sweep over reactions M..1 followed by a half-step sweep 1..M."""
    return _step(K.symmetric_step, model, x, tau, rng)


def tau_leap_step(model: ReactionModel, x, tau: float, rng: RngStream):
    m = model.n_reactions
    return _step(K.tau_leap_step, model, x, tau, rng, np.empty(m), np.empty(m, dtype=np.int64))


def sample_path(method, model, x0, T, tau, rng):
    """Record every step of one trajectory; returns (times, states)."""
    x = _state(model, x0)
    stoich, species, mult, count, rates, caps = model.kernel_arrays
    a = np.empty(model.n_reactions)
    times, states = [0.0], [x.copy()]
    if method == "ssa":
        t = 0.0
        while True:
            t = K.ssa_event(rng.state, x, t, float(T), a, stoich, species, mult, count, rates, caps)
            if t >= T:
                break
            times.append(t)
            states.append(x.copy())
        return np.array(times), np.array(states)
    step = {
        "tau-leap": lambda xs: tau_leap_step(model, xs, tau, rng),
        "accelerated": lambda xs: accelerated_step(model, xs, tau, rng),
        "accelerated-split": lambda xs: accelerated_half_split_step(model, xs, tau, rng),
        "symmetric": lambda xs: symmetric_accelerated_step(model, xs, tau, rng),
    }[method]
    n = n_leaps(T, tau)
    for i in range(n):
        x = np.array(step(x), dtype=np.int64)
        times.append((i + 1) * tau)
        states.append(x)
    return np.array(times), np.array(states)


@dataclass
class EnsembleResult:
    histogram: dict[int, int]
    n_samples: int
    method: str
    tau: float | None
    T: float
    master_seed: int
    stream_offset: int = 0
    diagnostics: dict = field(default_factory=dict)
    final_states: np.ndarray | None = field(default=None, repr=False)

    def counts_vector(self, size: int) -> np.ndarray:
        out = np.zeros(size)
        for idx, c in self.histogram.items():
            out[idx - 1] = c
        return out


def configure_threads(n: int | None = None) -> int:
    """Set the compiled kernels' thread count (env CMEKIT_NUM_THREADS if unset)."""
    if n is None:
        env = os.environ.get(THREADS_ENV)
        if not env:
            return numba.get_num_threads()
        n = int(env)
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def run_ensemble(
    method: str,
    model: ReactionModel,
    x0,
    T: float,
    tau: float | None,
    n_samples: int,
    master_seed: int,
    stream_offset: int = 0,
    threads: int | None = None,
) -> EnsembleResult:
    """Run ``n_samples`` trajectories with streams offset..offset+n-1."""
    if method not in METHODS:
        raise ValueError(f"unknown sampler {method!r}")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    code = METHODS[method]
    if code == K.METHOD_SSA:
        n_steps, tau_arg = 0, 1.0
    else:
        if tau is None:
            raise ValueError(f"{method} requires tau")
        n_steps, tau_arg = n_leaps(T, tau), float(tau)
    x0 = _state(model, x0)
    space = StateSpace.for_model(model)
    if not space.in_bounds(x0):
        raise ValueError("initial state outside the box")
    configure_threads(threads)
    states = np.stack(
        [stream_state(master_seed, stream_offset + i) for i in range(n_samples)]
    )
    start = time.perf_counter()
    finals, steps, clamps = K.run_many(
        code, states, x0, float(T), tau_arg, n_steps, *model.kernel_arrays
    )
    elapsed = time.perf_counter() - start
    idx, counts = np.unique(space.indices_0(finals) + 1, return_counts=True)
    return EnsembleResult(
        histogram={int(i): int(c) for i, c in zip(idx, counts)},
        n_samples=n_samples,
        method=method,
        tau=None if code == K.METHOD_SSA else float(tau),
        T=float(T),
        master_seed=int(master_seed),
        stream_offset=int(stream_offset),
        diagnostics={
            "boundary_clamps": int(clamps.sum()),
            "trajectories_clamped": int(np.count_nonzero(clamps)),
            "mean_steps": float(steps.mean()),
            "wall_time": elapsed,
        },
        final_states=finals,
    )


def format_ensemble(result: EnsembleResult, model_name: str) -> str:
    """Header lines then "state-index count" pairs in index order."""
    lines = [
        f"# method {result.method}",
        f"# model {model_name}",
        f"# tau {result.tau!r}",
        f"# T {result.T!r}",
        f"# n {result.n_samples}",
        f"# seed {result.master_seed}",
        f"# stream_offset {result.stream_offset}",
        f"# boundary_clamps {result.diagnostics.get('boundary_clamps', 0)}",
    ]
    lines += [f"{i} {c}" for i, c in sorted(result.histogram.items())]
    return "\n".join(lines) + "\n"


def parse_ensemble(text: str) -> EnsembleResult:
    header, hist = {}, {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            header[key] = value
        else:
            i, c = line.split()
            hist[int(i)] = int(c)
    tau = header.get("tau", "None")
    return EnsembleResult(
        histogram=hist,
        n_samples=int(header["n"]),
        method=header["method"],
        tau=None if tau == "None" else float(tau),
        T=float(header["T"]),
        master_seed=int(header["seed"]),
        stream_offset=int(header.get("stream_offset", 0)),
        diagnostics={"boundary_clamps": int(header.get("boundary_clamps", 0))},
    )
