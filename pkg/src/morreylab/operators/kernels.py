"""Bilinear kernel descriptors.

Kernels act in convolution form: K(x, y1, y2) = k(u1, u2) with
u1 = x - y1, u2 = x - y2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

FORMS = ("fractional", "rough", "cz")

# offsets (grid units) within which 1D fractional tables use exact cell integrals
NEAR_FIELD = 16


def _norm(u: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(u * u, axis=-1))


# cell integrals of (|u| + |v|)^(alpha - 2) in one dimension


def _abs_pieces(a: np.ndarray, b: np.ndarray):
    """Split [a, b] into pieces of |t|: returns (lo1, hi1, lo2, hi2) with the
    second piece empty unless the interval straddles 0."""
    lo1 = np.where(a >= 0, a, np.where(b <= 0, -b, 0.0))
    hi1 = np.where(a >= 0, b, np.where(b <= 0, -a, -a))
    lo2 = np.zeros_like(a)
    hi2 = np.where((a < 0) & (b > 0), b, 0.0)
    return (lo1, hi1), (lo2, hi2)


def _H(u, v, alpha):
    s = u + v
    if abs(alpha - 1.0) < 1e-14:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(s > 0, s * np.log(np.where(s > 0, s, 1.0)), 0.0)
    return s**alpha / (alpha * (alpha - 1.0))


def _rect(u0, u1, v0, v1, alpha):
    """int_{u0}^{u1} int_{v0}^{v1} (u + v)^(alpha - 2) for u, v >= 0."""
    return _H(u1, v1, alpha) - _H(u0, v1, alpha) - _H(u1, v0, alpha) + _H(u0, v0, alpha)


def fractional_cell_integrals_1d(a1: np.ndarray, a2: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """Exact integrals of (|u1| + |u2|)^(alpha-2) over the cells
    [(a1 -+ 1/2) h] x [(a2 -+ 1/2) h], as an (len(a1), len(a2)) table."""
    A0 = (a1 - 0.5) * h
    A1 = (a1 + 0.5) * h
    B0 = (a2 - 0.5) * h
    B1 = (a2 + 0.5) * h
    pa = _abs_pieces(A0, A1)
    pb = _abs_pieces(B0, B1)
    total = np.zeros((a1.size, a2.size))
    for lo_u, hi_u in pa:
        for lo_v, hi_v in pb:
            total += _rect(lo_u[:, None], hi_u[:, None], lo_v[None, :], hi_v[None, :], alpha)
    return total


def _disc_radial_density(s: float) -> float:
    """Density of |u| for u uniform on the unit square [-1/2, 1/2]^2."""
    if s <= 0.5:
        return 2 * math.pi * s
    if s <= math.sqrt(0.5):
        return s * (2 * math.pi - 8 * math.acos(0.5 / s))
    return 0.0


_CENTRE_2D: dict[float, float] = {}


def fractional_centre_constant_2d(alpha: float) -> float:
    """int over ([-1/2,1/2]^2)^2 of (|u| + |v|)^(alpha - 4) du dv."""
    if alpha not in _CENTRE_2D:
        rmax = 2 * math.sqrt(0.5)

        def inner(c):
            f = lambda R: (
                _disc_radial_density(R * c) * _disc_radial_density(R * (1 - c)) * R ** (alpha - 3)
            )
            return integrate.quad(f, 0, rmax, limit=200, points=[0.5, math.sqrt(0.5)])[0]

        _CENTRE_2D[alpha] = integrate.quad(inner, 0, 1, limit=200)[0]
    return _CENTRE_2D[alpha]


@dataclass(frozen=True, eq=False)
class BilinearKernel:
    """Kernel descriptor.

    fractional: (|u1| + |u2|)^(alpha - 2n)
    rough:      Omega(u / |u|) / |u|^(2n - alpha), u = (u1, u2)
    cz:         smooth closed form of order 0 (see ``cz_kernel``)
    """

    form: str
    n: int = 1
    alpha: float = 0.0
    bound: float = 1.0
    omega: np.ndarray | Callable | None = field(default=None, repr=False)
    mean_zero: bool = True
    regularity: float = 1.0
    func: Callable | None = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown kernel form {self.form!r}")
        if self.n not in (1, 2):
            raise ValueError("kernel dimension must be 1 or 2")
        if not 0 <= self.alpha < 2 * self.n:
            raise ValueError("kernel order must satisfy 0 <= alpha < 2n")
        if self.form == "fractional" and self.alpha <= 0:
            raise ValueError("fractional kernel needs alpha > 0")
        if self.form == "rough":
            if self.omega is None:
                raise ValueError("rough kernel needs Omega")
            if self.n == 1 and not callable(self.omega):
                object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))
        if self.form == "cz" and self.func is None:
            raise ValueError("cz kernel needs a closed form")

    # pointwise values

    def omega_at(self, sigma: np.ndarray) -> np.ndarray:
        """Omega on unit vectors sigma of shape (..., 2n)."""
        if callable(self.omega):
            return np.asarray(self.omega(sigma), dtype=float)
        samples = self.omega
        m = samples.size
        theta = np.mod(np.arctan2(sigma[..., 1], sigma[..., 0]), 2 * math.pi)
        pos = theta / (2 * math.pi) * m
        k0 = np.floor(pos).astype(int) % m
        frac = pos - np.floor(pos)
        return (1 - frac) * samples[k0] + frac * samples[(k0 + 1) % m]

    def __call__(self, u1, u2) -> np.ndarray:
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        if self.n == 1 and (u1.ndim == 0 or u1.shape[-1] != 1):
            u1 = u1[..., None]
            u2 = u2[..., None]
        u1, u2 = np.broadcast_arrays(u1, u2)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.form == "fractional":
                return (_norm(u1) + _norm(u2)) ** (self.alpha - 2 * self.n)
            if self.form == "rough":
                u = np.concatenate([u1, u2], axis=-1)
                r = _norm(u)
                sigma = u / r[..., None]
                return self.omega_at(sigma) / r ** (2 * self.n - self.alpha)
            return np.asarray(self.func(u1, u2), dtype=float)

    def majorant(self, u1, u2) -> np.ndarray:
        """The size bound C / (|u1| + |u2|)^(2n - alpha)."""
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        if self.n == 1 and (u1.ndim == 0 or u1.shape[-1] != 1):
            u1, u2 = u1[..., None], u2[..., None]
        with np.errstate(divide="ignore"):
            return self.bound / (_norm(u1) + _norm(u2)) ** (2 * self.n - self.alpha)

    @property
    def cell_averaged(self) -> bool:
        """1D fractional kernels use exact cell integrals (product integration)
        for offsets up to NEAR_FIELD cells and nodal values beyond."""
        return self.form == "fractional" and self.n == 1

    def table(self, a1: np.ndarray, a2: np.ndarray, h: float) -> np.ndarray:
        """Kernel weights over offset vectors a1 (L1, n), a2 (L2, n) in grid
        units, as an (L1, L2) array; the all-zero pair is set to 0."""
        a1 = np.asarray(a1).reshape(len(a1), self.n)
        a2 = np.asarray(a2).reshape(len(a2), self.n)
        tab = self(a1[:, None, :] * h, a2[None, :, :] * h)
        if self.cell_averaged:
            n1 = np.flatnonzero(np.abs(a1[:, 0]) <= NEAR_FIELD)
            n2 = np.flatnonzero(np.abs(a2[:, 0]) <= NEAR_FIELD)
            if n1.size and n2.size:
                near = fractional_cell_integrals_1d(
                    a1[n1, 0].astype(float), a2[n2, 0].astype(float), h, self.alpha
                )
                tab[np.ix_(n1, n2)] = near / h**2
        z1 = np.all(a1 == 0, axis=1)
        z2 = np.all(a2 == 0, axis=1)
        tab[np.ix_(z1, z2)] = 0.0
        return np.ascontiguousarray(tab, dtype=float)

    def centre_cell_integral(self, h: float) -> float:
        """Integral of the kernel over the centre cell [-h/2, h/2]^(2n);
        defined for fractional kernels (zero otherwise: the p.v. of an
        odd kernel over a symmetric cell vanishes)."""
        if self.form != "fractional":
            return 0.0
        if self.n == 1:
            z = np.zeros(1)
            return float(fractional_cell_integrals_1d(z, z, h, self.alpha)[0, 0])
        return fractional_centre_constant_2d(self.alpha) * h**self.alpha

    # certificates

    def size_bound_ratio(self, samples: int = 20000, seed: int = 0, scale: float = 4.0) -> float:
        """max over random off-diagonal pairs of |K| / majorant."""
        rng = np.random.default_rng(seed)
        r = scale * np.exp(rng.uniform(-8, 0, size=(samples, 1)))
        u1 = rng.normal(size=(samples, self.n)) * r
        u2 = rng.normal(size=(samples, self.n)) * r
        ratio = np.abs(self(u1, u2)) / self.majorant(u1, u2)
        return float(np.nanmax(ratio))

    def sphere_mean(self, m: int = 64) -> float:
        """Mean of Omega over the unit sphere S^(2n-1) (rough kernels)."""
        if self.form != "rough":
            raise ValueError("sphere mean is defined for rough kernels")
        if self.n == 1 and not callable(self.omega):
            # linear interpolation integrates to the sample mean
            return float(self.omega.mean())
        if self.n == 1:
            th = (np.arange(4 * m) + 0.5) * (2 * math.pi / (4 * m))
            sig = np.stack([np.cos(th), np.sin(th)], axis=-1)
            return float(self.omega_at(sig).mean())
        # S^3 in Hopf coordinates: measure sin(eta) cos(eta) d eta d xi1 d xi2
        eta = (np.arange(m) + 0.5) * (math.pi / 2 / m)
        xi = (np.arange(2 * m) + 0.5) * (2 * math.pi / (2 * m))
        E, X1, X2 = np.meshgrid(eta, xi, xi, indexing="ij")
        sig = np.stack(
            [np.cos(X1) * np.sin(E), np.sin(X1) * np.sin(E), np.cos(X2) * np.cos(E), np.sin(X2) * np.cos(E)],
            axis=-1,
        )
        wts = np.sin(E) * np.cos(E)
        return float(np.sum(self.omega_at(sig) * wts) / np.sum(wts))

    def smoothness_constant(self, samples: int = 20000, seed: int = 0) -> float:
        """max over random admissible triples of
        |K(x,y1,y2) - K(x,y1',y2)| (|x-y1| + |y1-y2|)^(2n+eps) / |y1-y1'|^eps,
        with |y1 - y1'| <= max(|y1 - x|, |y1 - y2|) / 2."""
        rng = np.random.default_rng(seed)
        eps = self.regularity
        y1 = rng.normal(size=(samples, self.n))
        y2 = rng.normal(size=(samples, self.n))
        x = np.zeros((samples, self.n))
        reach = 0.5 * np.maximum(_norm(y1 - x), _norm(y1 - y2))
        d = rng.normal(size=(samples, self.n))
        d *= (reach * rng.uniform(0.01, 1.0, size=samples) / _norm(d))[:, None]
        y1p = y1 + d
        diff = np.abs(self(x - y1, x - y2) - self(x - y1p, x - y2))
        denom = (_norm(x - y1) + _norm(y1 - y2)) ** (2 * self.n + eps)
        return float(np.nanmax(diff * denom / _norm(d) ** eps))

    def describe(self) -> dict:
        d = {"form": self.form, "n": self.n, "alpha": self.alpha, "bound": self.bound, "name": self.name}
        if self.form == "rough":
            d["mean_zero"] = self.mean_zero
        if self.form == "cz":
            d["regularity"] = self.regularity
        return d


def fractional_kernel(alpha: float, n: int = 1) -> BilinearKernel:
    return BilinearKernel("fractional", n=n, alpha=alpha, bound=1.0, name=f"fractional(alpha={alpha})")


def odd_rough_kernel(n: int = 1, m: int = 256) -> BilinearKernel:
    """Omega(sigma) = sigma_1 + sigma_2: odd, bounded by sqrt(2), mean zero."""
    if n == 1:
        th = np.arange(m) * (2 * math.pi / m)
        samples = np.cos(th) + np.sin(th)
        bound = math.sqrt(2) * 2.0
        return BilinearKernel("rough", n=1, omega=samples, bound=bound, mean_zero=True, name="odd-rough")
    omega = lambda s: s[..., 0] + s[..., 2]
    return BilinearKernel("rough", n=2, omega=omega, bound=math.sqrt(2) * 4.0, mean_zero=True, name="odd-rough")


def constant_rough_kernel(n: int = 1, m: int = 256) -> BilinearKernel:
    """Omega = 1: violates the cancellation condition (negative control)."""
    if n == 1:
        return BilinearKernel(
            "rough", n=1, omega=np.ones(m), bound=2.0, mean_zero=False, name="constant-rough"
        )
    return BilinearKernel(
        "rough", n=2, omega=lambda s: np.ones(s.shape[:-1]), bound=4.0, mean_zero=False, name="constant-rough"
    )


def _cz_func(u1, u2):
    u = np.concatenate([u1, u2], axis=-1)
    r = _norm(u)
    return (u1[..., 0] + u2[..., 0]) / r ** (u.shape[-1] + 1)


def cz_kernel(n: int = 1) -> BilinearKernel:
    """k(u1, u2) = (u1 + u2)_1 / |(u1, u2)|^(2n+1): odd, smooth off the origin,
    size constant 2^(n + 1/2)."""
    return BilinearKernel("cz", n=n, alpha=0.0, bound=2.0 ** (n + 0.5), func=_cz_func, regularity=1.0, name="cz")
