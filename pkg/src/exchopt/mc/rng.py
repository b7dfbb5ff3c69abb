"""Counter-based random streams shared by the numpy and compiled kernels.

Stream contract
---------------
Each path owns a fixed window of the Philox-4x64-10 stream keyed by
(seed, 0).  With B = ceil(n_steps * N_COMP / 4) blocks per path, path p reads
raw 64-bit words from blocks [p*B, (p+1)*B) (the generator emits its first
block at counter + 1, matching numpy's Philox).  Draw (step s, component k)
of a path is word s*N_COMP + k of its window; trailing words of the last
block are discarded.

A raw word x maps to the open-interval uniform u = ((x >> 12) + 0.5) * 2^-52
and to a standard normal via the rational inverse-CDF below.  Antithetic
paths mirror u -> 1 - u (exact in binary), i.e. z -> -z.

This layout makes every output a pure function of (seed, path index, step,
component): block sizes, chunking and thread counts cannot change results.
"""
from __future__ import annotations

import numpy as np
from numpy.random import Philox

N_COMP = 5  # draws per path per step, all kernels

_TWO_M52 = float(np.ldexp(1.0, -52))


def blocks_per_path(n_steps: int) -> int:
    return -(-(n_steps * N_COMP) // 4)


def raw_words(seed: int, path_lo: int, path_hi: int, n_steps: int) -> np.ndarray:
    """Raw uint64 draws, shape (path_hi - path_lo, n_steps, N_COMP)."""
    b = blocks_per_path(n_steps)
    n = path_hi - path_lo
    bg = Philox(key=np.uint64(seed & (2**64 - 1)), counter=path_lo * b)
    raw = bg.random_raw(4 * b * n).reshape(n, 4 * b)
    return raw[:, : n_steps * N_COMP].reshape(n, n_steps, N_COMP)


def to_uniform(raw: np.ndarray) -> np.ndarray:
    return ((raw >> np.uint64(12)).astype(np.float64) + 0.5) * _TWO_M52


# Wichura's rational approximation of the inverse normal CDF (double
# precision, relative error ~1e-15).  The compiled kernel carries the same
# constants and branch structure.
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coef, r):
    out = np.full_like(r, coef[7])
    for c in coef[6::-1]:
        out = out * r + c
    return out


def norm_ppf(u: np.ndarray) -> np.ndarray:
    """Inverse standard normal CDF for u strictly inside (0, 1)."""
    u = np.asarray(u, dtype=float)
    q = u - 0.5
    central = np.abs(q) <= 0.425
    r_c = 0.180625 - q * q
    with np.errstate(all="ignore"):
        val_c = q * _poly(_A, r_c) / _poly(_B, r_c)
        r_t = np.where(q < 0.0, u, 1.0 - u)
        r_t = np.sqrt(-np.log(np.where(central, 0.5, r_t)))
        near = r_t <= 5.0
        r1 = r_t - 1.6
        val_n = _poly(_C, r1) / _poly(_D, r1)
        r2 = r_t - 5.0
        val_f = _poly(_E, r2) / _poly(_F, r2)
    val_t = np.where(near, val_n, val_f)
    val_t = np.where(q < 0.0, -val_t, val_t)
    return np.where(central, val_c, val_t)
