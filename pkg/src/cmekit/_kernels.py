"""Compiled trajectory kernels.

Random numbers come from xoshiro256** with a 4 x uint64 state per
trajectory; uniforms are ((next >> 11) + 0.5) * 2**-53, strictly inside
(0, 1). Poisson variates use inversion by sequential search for mean < 10
(one uniform per draw) and Hormann's PTRS transformed rejection for
mean >= 10 (two uniforms per attempt). A zero mean consumes no draws.
"""

import math
import os

import numba
import numpy as np

# TBB in some environments is too old for numba; workqueue is always available.
if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "workqueue"

METHOD_SSA = 0
METHOD_TAU_LEAP = 1
METHOD_ACCELERATED = 2
METHOD_ACCELERATED_SPLIT = 3
METHOD_SYMMETRIC = 4

_U53 = 1.0 / 9007199254740992.0


@numba.njit(inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@numba.njit(cache=True)
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@numba.njit(cache=True)
def uniform(s):
    return (float(next_u64(s) >> np.uint64(11)) + 0.5) * _U53


@numba.njit(cache=True)
def _poisson_inversion(s, mu):
    u = uniform(s)
    p = math.exp(-mu)
    cdf = p
    k = 0
    while u > cdf:
        k += 1
        p *= mu / k
        cdf += p
        if p == 0.0 and k > mu:
            break
    return k


@numba.njit(cache=True)
def _poisson_ptrs(s, mu):
    slam = math.sqrt(mu)
    loglam = math.log(mu)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = uniform(s) - 0.5
        v = uniform(s)
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mu + 0.43)
        if us >= 0.07 and v <= vr:
            return np.int64(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        if (math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)) <= (
            -mu + k * loglam - math.lgamma(k + 1.0)
        ):
            return np.int64(k)


@numba.njit(cache=True)
def poisson(s, mu):
    if mu <= 0.0:
        return np.int64(0)
    if mu < 10.0:
        return np.int64(_poisson_inversion(s, mu))
    return _poisson_ptrs(s, mu)


@numba.njit(cache=True)
def poisson_many(s, mu, n):
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = poisson(s, mu)
    return out


@numba.njit(cache=True)
def propensity(r, x, species, mult, count, rates):
    comb = 1.0
    for k in range(count[r]):
        xi = x[species[r, k]]
        m = mult[r, k]
        if xi < m:
            return 0.0
        # exact integer binomial C(xi, m)
        c = np.int64(1)
        for j in range(m):
            c = c * (xi - j) // (j + 1)
        comb *= c
    return rates[r] * comb


@numba.njit(cache=True)
def _fits(r, x, stoich, caps):
    for i in range(x.size):
        y = x[i] + stoich[i, r]
        if y < 0 or y > caps[i]:
            return False
    return True


@numba.njit(cache=True)
def _fire(r, k, x, stoich, caps):
    """x += k * v_r, clamping to [0, cap]; returns number of clamped components."""
    clamps = 0
    for i in range(x.size):
        y = x[i] + k * stoich[i, r]
        if y < 0:
            y = 0
            clamps += 1
        elif y > caps[i]:
            y = caps[i]
            clamps += 1
        x[i] = y
    return clamps


@numba.njit(cache=True)
def ssa_event(s, x, t, T, a, stoich, species, mult, count, rates, caps):
    """One direct-method event. Returns the new time (>= T when no event
    fired before the horizon). Firings that would leave the box are
    disabled, matching the clipped generator."""
    m = rates.size
    a0 = 0.0
    for r in range(m):
        if _fits(r, x, stoich, caps):
            a[r] = propensity(r, x, species, mult, count, rates)
        else:
            a[r] = 0.0
        a0 += a[r]
    if a0 <= 0.0:
        return T
    t = t - math.log(uniform(s)) / a0
    if t >= T:
        return t
    target = uniform(s) * a0
    acc = 0.0
    chosen = m - 1
    for r in range(m):
        acc += a[r]
        if target < acc:
            chosen = r
            break
    while a[chosen] == 0.0:
        chosen -= 1
    for i in range(x.size):
        x[i] += stoich[i, chosen]
    return t


@numba.njit(cache=True)
def tau_leap_step(s, x, tau, a, kk, stoich, species, mult, count, rates, caps):
    m = rates.size
    for r in range(m):
        a[r] = propensity(r, x, species, mult, count, rates)
    for r in range(m):
        kk[r] = poisson(s, a[r] * tau)
    clamps = 0
    n = x.size
    for i in range(n):
        y = x[i]
        for r in range(m):
            y += kk[r] * stoich[i, r]
        if y < 0:
            y = 0
            clamps += 1
        elif y > caps[i]:
            y = caps[i]
            clamps += 1
        x[i] = y
    return clamps


@numba.njit(cache=True)
def accelerated_step(s, x, tau, stoich, species, mult, count, rates, caps):
    clamps = 0
    for r in range(rates.size - 1, -1, -1):
        k = poisson(s, propensity(r, x, species, mult, count, rates) * tau)
        if k:
            clamps += _fire(r, k, x, stoich, caps)
    return clamps


@numba.njit(cache=True)
def split_point(m):
    """Number of reactions (counted from M downward) in the first block."""
    return (m + 1) // 2


@numba.njit(cache=True)
def accelerated_split_step(s, x, tau, a, stoich, species, mult, count, rates, caps):
    m = rates.size
    if m < 2:
        return accelerated_step(s, x, tau, stoich, species, mult, count, rates, caps)
    first = split_point(m)
    clamps = 0
    for r in range(m):
        a[r] = propensity(r, x, species, mult, count, rates)
    for r in range(m - 1, m - 1 - first, -1):
        k = poisson(s, a[r] * tau)
        if k:
            clamps += _fire(r, k, x, stoich, caps)
    for r in range(m):
        a[r] = propensity(r, x, species, mult, count, rates)
    for r in range(m - 1 - first, -1, -1):
        k = poisson(s, a[r] * tau)
        if k:
            clamps += _fire(r, k, x, stoich, caps)
    return clamps


@numba.njit(cache=True)
def symmetric_step(s, x, tau, stoich, species, mult, count, rates, caps):
    half = 0.5 * tau
    m = rates.size
    clamps = 0
    for r in range(m - 1, -1, -1):
        k = poisson(s, propensity(r, x, species, mult, count, rates) * half)
        if k:
            clamps += _fire(r, k, x, stoich, caps)
    for r in range(m):
        k = poisson(s, propensity(r, x, species, mult, count, rates) * half)
        if k:
            clamps += _fire(r, k, x, stoich, caps)
    return clamps


@numba.njit(cache=True)
def run_one(method, s, x, T, tau, n_steps, stoich, species, mult, count, rates, caps):
    """Advance x in place to the horizon; returns (steps, clamps)."""
    m = rates.size
    a = np.empty(m)
    kk = np.empty(m, dtype=np.int64)
    steps = 0
    clamps = 0
    if method == METHOD_SSA:
        t = 0.0
        while True:
            t = ssa_event(s, x, t, T, a, stoich, species, mult, count, rates, caps)
            if t >= T:
                break
            steps += 1
        return steps, clamps
    for _ in range(n_steps):
        if method == METHOD_TAU_LEAP:
            clamps += tau_leap_step(s, x, tau, a, kk, stoich, species, mult, count, rates, caps)
        elif method == METHOD_ACCELERATED:
            clamps += accelerated_step(s, x, tau, stoich, species, mult, count, rates, caps)
        elif method == METHOD_ACCELERATED_SPLIT:
            clamps += accelerated_split_step(s, x, tau, a, stoich, species, mult, count, rates, caps)
        else:
            clamps += symmetric_step(s, x, tau, stoich, species, mult, count, rates, caps)
        steps += 1
    return steps, clamps


@numba.njit(parallel=True, cache=True)
def run_many(method, states, x0, T, tau, n_steps, stoich, species, mult, count, rates, caps):
    n = states.shape[0]
    finals = np.empty((n, x0.size), dtype=np.int64)
    steps = np.empty(n, dtype=np.int64)
    clamps = np.empty(n, dtype=np.int64)
    for i in numba.prange(n):
        x = x0.copy()
        s = states[i].copy()
        st, cl = run_one(method, s, x, T, tau, n_steps, stoich, species, mult, count, rates, caps)
        finals[i] = x
        steps[i] = st
        clamps[i] = cl
    return finals, steps, clamps
