"""Pure-numpy simulated-annealing kernel (fallback for ``bhtn._sa_cy``).

Vectorized across chains; every chain consumes its own splitmix64 stream in
exactly the same order as the compiled kernel (one draw per initial bit, one
draw per proposed flip), and the Metropolis acceptance uses the shared
portable exponential, so both kernels produce bitwise-identical states for a
given seed. Keep the arithmetic here in lockstep with ``_sa_cy.pyx``.
"""

from __future__ import annotations

import numpy as np

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2^-53
_LOG2E = 1.4426950408889634
_LN2 = 0.6931471805599453


def _mix(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


def _metro_exp(x):
    """exp(x) for x <= 0, identical formula in both kernels (~1e-9 relative)."""
    y = x * _LOG2E
    k = np.floor(y)
    f = (y - k) * _LN2
    p = 1.0 / 3628800.0
    p = p * f + 1.0 / 362880.0
    p = p * f + 1.0 / 40320.0
    p = p * f + 1.0 / 5040.0
    p = p * f + 1.0 / 720.0
    p = p * f + 1.0 / 120.0
    p = p * f + 1.0 / 24.0
    p = p * f + 1.0 / 6.0
    p = p * f + 0.5
    p = p * f + 1.0
    p = p * f + 1.0
    out = np.ldexp(p, k.astype(np.int32))
    return np.where(x <= -746.0, 0.0, out)


def anneal(h, W, betas, num_reads, seed, read_offset=0):
    """Run ``num_reads`` independent single-flip Metropolis chains.

    h: (n,) linear coefficients; W: (n, n) symmetric couplings, zero diagonal;
    betas: (sweeps,) inverse-temperature schedule. Returns the best state
    visited per chain, (num_reads, n) uint8, and its energy (offset excluded).
    """
    h = np.ascontiguousarray(h, dtype=np.float64)
    W = np.ascontiguousarray(W, dtype=np.float64)
    betas = np.ascontiguousarray(betas, dtype=np.float64)
    n = h.shape[0]
    R = int(num_reads)

    chains = np.arange(read_offset, read_offset + R, dtype=np.uint64)
    state = _mix(U64(int(seed) & 0xFFFFFFFFFFFFFFFF) ^ _mix((chains + U64(1)) * _GOLDEN))

    def draw():
        nonlocal state
        state = state + _GOLDEN
        return _mix(state)

    x = np.empty((R, n), dtype=np.uint8)
    for i in range(n):
        x[:, i] = (draw() >> U64(63)).astype(np.uint8)

    # local fields F[c, i] = h[i] + sum_j W[i, j] x[c, j], accumulated in j order
    F = np.repeat(h[None, :], R, axis=0)
    xf = x.astype(np.float64)
    for j in range(n):
        F += xf[:, j : j + 1] * W[j][None, :]

    E = np.zeros(R)
    for i in range(n):
        E += 0.5 * (h[i] + F[:, i]) * xf[:, i]

    best_x = x.copy()
    best_e = E.copy()

    for t in range(betas.shape[0]):
        beta = betas[t]
        for i in range(n):
            u = (draw() >> U64(11)).astype(np.float64) * _INV53
            xi = x[:, i].astype(np.float64)
            sgn = 1.0 - 2.0 * xi
            delta = sgn * F[:, i]
            pos = delta > 0.0
            arg = -beta * np.where(pos, delta, 0.0)
            acc = ~pos | (u < _metro_exp(arg))
            accf = acc.astype(np.float64)
            x[:, i] ^= acc
            E += delta * accf
            F += (sgn * accf)[:, None] * W[i][None, :]
            imp = E < best_e
            if imp.any():
                best_e[imp] = E[imp]
                best_x[imp] = x[imp]

    return best_x, best_e
