"""Seeded counter-based random number generator and distribution samplers.

The bit stream is SplitMix64 (Steele, Lea & Flood 2014; Vigna's reference
constants): output block i is ``mix64(seed + (i+1) * GOLDEN)``, a pure
function of the seed and a draw counter.  That makes blocks computable in
bulk with vectorized uint64 arithmetic, and the stream identical for a
given seed on every platform.

Samplers are classical documented algorithms on top of the uniform stream:
Box-Muller for Gaussians, exp-of-normal for log-normals, Marsaglia-Tsang
for gammas, and the two-gamma ratio for betas.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Rng"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = (1 << 64) - 1
_INV_2_53 = 2.0**-53


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class Rng:
    """Deterministic 64-bit generator: fixed seed gives a fixed stream."""

    __slots__ = ("seed", "_counter")

    def __init__(self, seed: int):
        self.seed = int(seed) & _U64_MASK
        self._counter = 0

    def _bits(self, n: int) -> np.ndarray:
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        with np.errstate(over="ignore"):
            state = np.uint64(self.seed) + idx * _GOLDEN
            return _mix64(state)

    def u64(self, n: int | None = None):
        out = self._bits(1 if n is None else n)
        return int(out[0]) if n is None else out

    def uniform(self, shape=None) -> np.ndarray | float:
        """Uniform draws on [0, 1) with 53-bit resolution."""
        n, shape_out = _resolve_shape(shape)
        u = (self._bits(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53
        return _reshape(u, shape, shape_out)

    def randbelow(self, k: int) -> int:
        """Unbiased integer in [0, k) by rejection on masked bits."""
        if k <= 0:
            raise ValueError(f"randbelow requires k > 0, got {k}")
        mask = (1 << (k - 1).bit_length()) - 1
        while True:
            r = int(self._bits(1)[0]) & mask
            if r < k:
                return r

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def permutation(self, n: int) -> np.ndarray:
        """Random permutation of range(n) by sorting a uniform key per index."""
        return np.argsort(self.uniform(n), kind="stable")

    def normal(self, mean: float = 0.0, sd: float = 1.0, shape=None):
        """Gaussian draws by the Box-Muller transform; ``sd`` is the standard deviation."""
        if sd <= 0.0:
            raise ValueError(f"normal requires sd > 0, got {sd}")
        n, shape_out = _resolve_shape(shape)
        pairs = (n + 1) // 2
        # u1 in (0, 1] keeps the log finite; u2 in [0, 1)
        u1 = ((self._bits(pairs) >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
        u2 = (self._bits(pairs) >> np.uint64(11)).astype(np.float64) * _INV_2_53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * np.pi) * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        return _reshape(mean + sd * z, shape, shape_out)

    def lognormal(self, shape=None):
        """Standard log-normal: exp of a standard normal."""
        return np.exp(self.normal(0.0, 1.0, shape))

    def gamma(self, a: float, shape=None):
        """Gamma(a, 1) draws via the Marsaglia-Tsang squeeze-rejection method."""
        if a <= 0.0:
            raise ValueError(f"gamma requires a > 0, got {a}")
        n, shape_out = _resolve_shape(shape)
        if a < 1.0:
            # boost: Gamma(a) = Gamma(a+1) * U^(1/a)
            g = self._gamma_ge1(a + 1.0, n)
            u = 1.0 - self.uniform(n)  # (0, 1], keeps the power positive
            out = g * u ** (1.0 / a)
        else:
            out = self._gamma_ge1(a, n)
        return _reshape(out, shape, shape_out)

    def _gamma_ge1(self, a: float, n: int) -> np.ndarray:
        d = a - 1.0 / 3.0
        c = 1.0 / np.sqrt(9.0 * d)
        out = np.empty(n, dtype=np.float64)
        pending = np.arange(n)
        while pending.size:
            m = pending.size
            x = self.normal(0.0, 1.0, m)
            v = (1.0 + c * x) ** 3
            u = 1.0 - self.uniform(m)  # (0, 1]
            ok = v > 0.0
            with np.errstate(invalid="ignore", divide="ignore"):
                accept = ok & (np.log(u) < 0.5 * x * x + d - d * v + d * np.log(np.where(ok, v, 1.0)))
            out[pending[accept]] = d * v[accept]
            pending = pending[~accept]
        return out

    def beta(self, a: float, b: float, shape=None):
        """Beta(a, b) as the ratio of two gamma draws."""
        if a <= 0.0 or b <= 0.0:
            raise ValueError(f"beta requires a, b > 0, got a={a}, b={b}")
        n, shape_out = _resolve_shape(shape)
        g1 = self.gamma(a, n)
        g2 = self.gamma(b, n)
        return _reshape(g1 / (g1 + g2), shape, shape_out)

    def spawn_key(self) -> int:
        """A fresh 64-bit value drawn from this stream, usable as a child seed."""
        return int(self._bits(1)[0])

    def __repr__(self):
        return f"Rng(seed={self.seed:#018x}, counter={self._counter})"


def _resolve_shape(shape) -> tuple[int, tuple | None]:
    if shape is None:
        return 1, None
    if isinstance(shape, (int, np.integer)):
        if shape < 0:
            raise ValueError(f"negative sample count {shape}")
        return int(shape), (int(shape),)
    shape = tuple(int(s) for s in shape)
    n = 1
    for s in shape:
        if s < 0:
            raise ValueError(f"negative dimension in shape {shape}")
        n *= s
    return n, shape


def _reshape(flat: np.ndarray, shape, shape_out):
    if shape is None:
        return float(flat[0])
    return flat.reshape(shape_out)
