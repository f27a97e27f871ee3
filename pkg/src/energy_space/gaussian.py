"""Finite-dimensional Gaussian fields over dipole windows, and Hermite polynomials.

The Gaussian process ξ ↦ ũ(ξ) indexed by the energy space is mean zero with
covariance <u₁, u₂>_E. Over a window of dipoles it is the centered normal
vector with covariance the dipole kernel, which is all the transform
identities below need.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from energy_space.dipole import KernelMatrix
from energy_space.numerics import NumericsError, RandomSource, psd_root

DEFAULT_SAMPLES = 200_000
BATCH = 1 << 16


def hermite(N: int) -> list[np.ndarray]:
    """H_0..H_N from H_0 = 1 and H_{n+1} = H_n' - x H_n (monomial coefficients)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    fam = [np.array([1.0])]
    for _ in range(N):
        h = fam[-1]
        fam.append(P.polysub(P.polyder(h) if len(h) > 1 else np.array([0.0]), P.polymulx(h)))
    return [P.polytrim(h, 0) if np.any(h) else h for h in fam]


def hermite_moment_target(n: int, f_u: float, f_f: float, u_u: float) -> complex:
    """E[f̃ⁿ e^{iũ}] for jointly Gaussian (f̃, ũ).

    Obtained as (-i)ⁿ (d/dε)ⁿ e^{-||u+εf||²/2} at ε = 0; the derivatives are
    H_n-type polynomials in <u,f> and ||f||².
    """
    a, b = f_u, f_f
    if n == 0:
        poly = 1.0
    elif n == 1:
        poly = 1j * a
    elif n == 2:
        poly = b - a * a
    elif n == 3:
        poly = -1j * (a**3 - 3 * a * b)
    else:
        raise ValueError("order not supported")
    return complex(poly) * math.exp(-u_u / 2)


@dataclass
class MonteCarloEstimate:
    estimate: complex
    stderr: float
    samples: int
    target: complex | None = None

    @property
    def z(self) -> float:
        """|estimate - target| in units of the standard error."""
        if self.target is None:
            return math.nan
        d = abs(self.estimate - self.target)
        if self.stderr == 0:
            return 0.0 if d == 0 else math.inf
        return d / self.stderr

    def within(self, k: float = 5.0) -> bool:
        return self.z <= k


@dataclass
class GaussianModel:
    window: list
    covariance: np.ndarray
    factor: np.ndarray
    seed: int = 0

    def sample(self, n: int, rs: RandomSource | None = None, start: int = 0) -> np.ndarray:
        """n × len(window) draws; row i depends only on (seed, i + start)."""
        rs = rs or RandomSource(self.seed)
        m = len(self.window)
        z = rs.normals(n * m, start * m).reshape(n, m)
        return z @ self.factor.T

    def batches(self, n: int, batch: int = BATCH):
        """Yield sample blocks of at most ``batch`` rows (a multiple of 4).

        The draws do not depend on the batch size.
        """
        if batch % 4:
            raise ValueError("batch must be a multiple of 4")
        for s in range(0, n, batch):
            yield self.sample(min(batch, n - s), start=s)

    def coeffs(self, u: dict) -> np.ndarray:
        a = np.zeros(len(self.window))
        for x, c in u.items():
            if c:
                a[self.window.index(x)] = c
        return a

    def inner(self, f: dict, u: dict) -> float:
        return float(self.coeffs(f) @ self.covariance @ self.coeffs(u))


def gaussian_field(gram: KernelMatrix, seed: int = 0) -> GaussianModel:
    C = np.asarray(gram.entries, dtype=float)
    try:
        L = psd_root(C)
    except NumericsError as exc:
        raise NumericsError(f"kernel is not positive semidefinite: {exc}") from exc
    return GaussianModel(list(gram.window), C, L, seed)


def _estimate(model: GaussianModel, samples: int, fn) -> MonteCarloEstimate:
    """Mean of fn(block) over all sample blocks with stderr sqrt(E|Z - EZ|²/n)."""
    s1 = 0j
    s2 = 0.0
    for blk in model.batches(samples):
        z = fn(blk)
        s1 += complex(np.sum(z))
        s2 += float(np.sum(np.abs(z) ** 2))
    mean = s1 / samples
    var = max(s2 / samples - abs(mean) ** 2, 0.0) * samples / max(samples - 1, 1)
    return MonteCarloEstimate(mean, math.sqrt(var / samples), samples)


def mc_characteristic(model: GaussianModel, u: dict, samples: int = DEFAULT_SAMPLES) -> MonteCarloEstimate:
    """E[e^{iũ}] against e^{-||u||²/2}."""
    a = model.coeffs(u)
    est = _estimate(model, samples, lambda blk: np.exp(1j * (blk @ a)))
    est.target = cmath.exp(-model.inner(u, u) / 2)
    return est


def mc_moment(model: GaussianModel, f: dict, u: dict, n: int, samples: int = DEFAULT_SAMPLES) -> MonteCarloEstimate:
    """E[f̃ⁿ e^{iũ}] for n ≤ 3."""
    if not 0 <= n <= 3:
        raise ValueError("order not supported")
    a, b = model.coeffs(u), model.coeffs(f)
    est = _estimate(model, samples, lambda blk: (blk @ b) ** n * np.exp(1j * (blk @ a)))
    est.target = hermite_moment_target(n, model.inner(f, u), model.inner(f, f), model.inner(u, u))
    return est


def mc_dipole_transform(
    model: GaussianModel, x, y, u: dict, samples: int = DEFAULT_SAMPLES, base=None, u_function=None
) -> MonteCarloEstimate:
    """E[w̃_{x,y} e^{iũ}] against i(u(x) - u(y)) e^{-||u||²/2}, with w = v_x - v_y, v_o = 0.

    ``u_function`` evaluates u pointwise; without it u(x) - u(o) = <v_x, u>
    is read from the kernel.
    """
    w = {}
    for p, s in ((x, 1.0), (y, -1.0)):
        if p == base:
            continue
        if p not in model.window:
            raise ValueError(f"{p!r} not in window")
        w[p] = w.get(p, 0.0) + s
    est = mc_moment(model, w, u, 1, samples)
    if u_function is not None:
        ux, uy = u_function(x), u_function(y)
    else:
        ux = model.inner({x: 1.0}, u) if x != base else 0.0
        uy = model.inner({y: 1.0}, u) if y != base else 0.0
    est.target = 1j * (ux - uy) * math.exp(-model.inner(u, u) / 2)
    return est


def sample_covariance(model: GaussianModel, samples: int = DEFAULT_SAMPLES) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(mean, covariance, entrywise stderr of the covariance estimate)."""
    m = len(model.window)
    s1 = np.zeros(m)
    s2 = np.zeros((m, m))
    s4 = np.zeros((m, m))
    for blk in model.batches(samples):
        s1 += blk.sum(0)
        prod = blk[:, :, None] * blk[:, None, :]
        s2 += prod.sum(0)
        s4 += (prod**2).sum(0)
    mean = s1 / samples
    cov = s2 / samples
    var = s4 / samples - cov**2
    return mean, cov, np.sqrt(np.clip(var, 0, None) / samples)
