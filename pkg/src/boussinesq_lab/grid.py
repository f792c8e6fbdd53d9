"""Uniform 1-D grids, Fourier transforms and Sobolev norms.

Convention used everywhere in the package::

    fhat(xi) = int exp(-i x xi) f(x) dx
    f(x)     = (2 pi)^{-1} int exp(i x xi) fhat(xi) dxi

On the grid x_j = -X/2 + j dx (dx = X/N) with frequencies xi_k = 2 pi k / X,
k in [-N/2, N/2), the Riemann sum of the forward integral is
``fhat_k = dx * (-1)^k * FFT(f)_k`` (stored in centred order).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    """Invalid grid or signal data."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _check_grid(X: float, N: int) -> None:
    if not _is_pow2(int(N)) or N < 8:
        raise GridError(f"sample count must be a power of two >= 8, got {N}")
    if not (np.isfinite(X) and X > 0):
        raise GridError(f"domain length must be positive and finite, got {X}")


def x_grid(X: float, N: int) -> np.ndarray:
    return -X / 2 + np.arange(N) * (X / N)


def xi_grid(X: float, N: int) -> np.ndarray:
    return 2 * np.pi * np.arange(-N // 2, N // 2) / X


@dataclass(frozen=True)
class SampledSignal:
    """Complex samples on x_j = -X/2 + j X/N."""

    X: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        _check_grid(self.X, vals.size)
        if not np.all(np.isfinite(vals)):
            raise GridError("signal contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def dx(self) -> float:
        return self.X / self.N

    @property
    def x(self) -> np.ndarray:
        return x_grid(self.X, self.N)

    def l2_norm(self) -> float:
        return float(np.sqrt(self.dx * np.sum(np.abs(self.values) ** 2)))

    @classmethod
    def from_function(cls, func, X: float, N: int) -> "SampledSignal":
        return cls(X, func(x_grid(X, N)))


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients on xi_k = 2 pi k / X, k = -N/2 .. N/2-1."""

    X: float
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        _check_grid(self.X, c.size)
        if not np.all(np.isfinite(c)):
            raise GridError("spectrum contains non-finite values")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return self.coeffs.size

    @property
    def dxi(self) -> float:
        return 2 * np.pi / self.X

    @property
    def xi(self) -> np.ndarray:
        return xi_grid(self.X, self.N)

    def l2_norm(self) -> float:
        """(2 pi)^{-1/2} ||fhat||, the L^2 norm of the underlying signal."""
        return float(np.sqrt(self.dxi * np.sum(np.abs(self.coeffs) ** 2) / (2 * np.pi)))

    def with_coeffs(self, coeffs) -> "Spectrum":
        return Spectrum(self.X, coeffs)

    @classmethod
    def from_function(cls, fhat, X: float, N: int) -> "Spectrum":
        return cls(X, fhat(xi_grid(X, N)))


def _alternating(N: int) -> np.ndarray:
    k = np.arange(-N // 2, N // 2)
    return np.where(k % 2 == 0, 1.0, -1.0)


def forward(signal: SampledSignal) -> Spectrum:
    N = signal.N
    c = np.fft.fftshift(np.fft.fft(signal.values)) * signal.dx * _alternating(N)
    return Spectrum(signal.X, c)


def inverse(spec: Spectrum) -> SampledSignal:
    N = spec.N
    dx = spec.X / N
    v = np.fft.ifft(np.fft.ifftshift(spec.coeffs * _alternating(N))) / dx
    return SampledSignal(spec.X, v)


def transform(obj, direction: str = "forward"):
    """Forward (signal -> spectrum) or inverse (spectrum -> signal) transform."""
    if direction == "forward":
        if not isinstance(obj, SampledSignal):
            raise TypeError("forward transform expects a SampledSignal")
        return forward(obj)
    if direction == "inverse":
        if not isinstance(obj, Spectrum):
            raise TypeError("inverse transform expects a Spectrum")
        return inverse(obj)
    raise ValueError(f"unknown direction {direction!r}")


@dataclass(frozen=True)
class SobolevParams:
    s: float
    homogeneous: bool = False


def sobolev_weight(xi, params: SobolevParams) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if params.homogeneous:
        with np.errstate(divide="ignore"):
            w = np.abs(xi) ** (2 * params.s)
        if params.s == 0:
            w = np.ones_like(xi)
        return w
    return (1 + xi * xi) ** params.s


def sobolev_norm(spec: Spectrum, params: SobolevParams) -> float:
    """(int w(xi) |fhat|^2 dxi)^{1/2} by the trapezoid rule on the xi grid.

    No (2 pi)^{-1} factor is applied; s = 0 gives the L^2 norm of fhat.
    """
    c = spec.coeffs
    xi = spec.xi
    if params.homogeneous and params.s < 0:
        zero = xi == 0
        if np.any(np.abs(c[zero]) > 0):
            raise GridError("homogeneous norm with s < 0 needs a vanishing xi=0 coefficient")
        w = np.zeros_like(xi)
        w[~zero] = np.abs(xi[~zero]) ** (2 * params.s)
    else:
        w = sobolev_weight(xi, params)
    # periodic grid: trapezoid weights are uniform
    return float(np.sqrt(spec.dxi * np.sum(w * np.abs(c) ** 2)))


def smooth_step(u):
    """C-infinity step: 1 for u <= 0, 0 for u >= 1."""
    u = np.asarray(u, dtype=float)

    def e(z):
        out = np.zeros_like(z)
        m = z > 0
        out[m] = np.exp(-1.0 / z[m])
        return out

    a = e(1.0 - u)
    b = e(u)
    return a / (a + b)


def cutoff(xi) -> np.ndarray:
    """Smooth bump: 1 on |xi| <= 1, 0 on |xi| >= 2."""
    return smooth_step(np.abs(np.asarray(xi, dtype=float)) - 1.0)


def band_split(spec: Spectrum) -> tuple[Spectrum, Spectrum]:
    low = spec.coeffs * cutoff(spec.xi)
    high = spec.coeffs - low
    return spec.with_coeffs(low), spec.with_coeffs(high)


# serialization -------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def to_csv(obj) -> str:
    if isinstance(obj, SampledSignal):
        coord, vals, name = obj.x, obj.values, "x"
    elif isinstance(obj, Spectrum):
        coord, vals, name = obj.xi, obj.coeffs, "xi"
    else:
        raise TypeError("expected SampledSignal or Spectrum")
    lines = [f"{name},real,imag"]
    lines += [f"{_fmt(c)},{_fmt(v.real)},{_fmt(v.imag)}" for c, v in zip(coord, vals)]
    return "\n".join(lines) + "\n"


def to_json(obj) -> str:
    if isinstance(obj, SampledSignal):
        kind, vals = "signal", obj.values
    elif isinstance(obj, Spectrum):
        kind, vals = "spectrum", obj.coeffs
    else:
        raise TypeError("expected SampledSignal or Spectrum")
    return json.dumps({
        "kind": kind,
        "X": obj.X,
        "N": int(vals.size),
        "real": [float(_fmt(v)) for v in vals.real],
        "imag": [float(_fmt(v)) for v in vals.imag],
    })


def from_json(text: str):
    d = json.loads(text)
    vals = np.asarray(d["real"]) + 1j * np.asarray(d["imag"])
    if d["kind"] == "signal":
        return SampledSignal(d["X"], vals)
    if d["kind"] == "spectrum":
        return Spectrum(d["X"], vals)
    raise GridError(f"unknown kind {d['kind']!r}")
