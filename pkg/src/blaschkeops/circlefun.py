"""Circle-grid calculus: sampling, Fourier analysis, inner products, outer functions.

Functions on the unit circle live either as samples on a uniform power-of-two
grid (BoundaryFunction) or as a finite two-sided Fourier window (FourierSeries).
Normalized Lebesgue measure is used throughout: means, not sums.

The outer-function construction turns a positive boundary modulus h into the
analytic, zero-free function with |O| = h^power on the circle and O(0) > 0, by
doubling the positive log-modulus modes (Riesz projection) and exponentiating.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import AnalyticExtensionError, GridMismatchError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class CircleGrid:
    """Uniform grid of K = 2^k nodes t_j = 2*pi*j/K on [0, 2*pi)."""

    size: int

    def __post_init__(self):
        if self.size < 2 or self.size & (self.size - 1):
            raise ValueError(f"grid size must be a power of two, got {self.size}")

    @property
    def angles(self) -> np.ndarray:
        return TWO_PI * np.arange(self.size) / self.size

    @property
    def points(self) -> np.ndarray:
        return np.exp(1j * self.angles)


@dataclass(frozen=True)
class BoundaryFunction:
    """Complex samples of a circle function on a CircleGrid.

    `meta` records processing notes (e.g. indices of nodes nudged off the
    branch point by the transfer operator); it never affects equality of the
    mathematical content.
    """

    grid: CircleGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.size,):
            raise ValueError("values must be one complex number per grid node")
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite sample")
        object.__setattr__(self, "values", vals)

    def to_csv(self) -> str:
        lines = ["t,re,im"]
        for t, v in zip(self.grid.angles, self.values):
            lines.append(f"{float(t)!r},{float(v.real)!r},{float(v.imag)!r}")
        return "\n".join(lines) + "\n"


def boundary_from_csv(text: str) -> BoundaryFunction:
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    vals = np.array([complex(float(r), float(i)) for _, r, i in rows])
    return BoundaryFunction(CircleGrid(len(vals)), vals)


@dataclass(frozen=True)
class FourierSeries:
    """Finite two-sided Fourier window: coefficients c_n for n in [-window, window]."""

    coeffs: np.ndarray  # length 2*window + 1, index 0 <-> mode -window

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError("coefficient array must have odd length 2M+1")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficient")
        object.__setattr__(self, "coeffs", c)

    @property
    def window(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.window, self.window + 1)

    def coeff(self, n: int) -> complex:
        if abs(n) > self.window:
            return 0.0 + 0.0j
        return complex(self.coeffs[n + self.window])

    def negative_energy(self) -> float:
        """l2 mass sum |c_n|^2 over n < 0."""
        return float(np.sum(np.abs(self.coeffs[: self.window]) ** 2))

    def total_energy(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def to_json(self) -> str:
        return json.dumps(
            {"min_n": -self.window, "coeffs": [[c.real, c.imag] for c in self.coeffs]}
        )


def series_from_json(text: str) -> FourierSeries:
    data = json.loads(text)
    coeffs = np.array([complex(re, im) for re, im in data["coeffs"]])
    if data["min_n"] != -(coeffs.size - 1) // 2:
        raise ValueError("series window is not symmetric around mode 0")
    return FourierSeries(coeffs)


def trim_series(s: FourierSeries, floor: float = 1e-16) -> FourierSeries:
    """Shrink the window symmetrically, dropping outer coefficients below floor * max|c|."""
    mags = np.abs(s.coeffs)
    mx = float(mags.max())
    if mx == 0.0:
        return FourierSeries(np.zeros(1, dtype=complex))
    keep = np.nonzero(mags > floor * mx)[0]
    m = int(np.max(np.abs(keep - s.window)))
    return FourierSeries(s.coeffs[s.window - m : s.window + m + 1])


def exponential(n: int, window: int | None = None) -> FourierSeries:
    """The basis series e_n(z) = z^n."""
    m = abs(n) if window is None else window
    if abs(n) > m:
        raise ValueError("mode outside requested window")
    c = np.zeros(2 * m + 1, dtype=complex)
    c[n + m] = 1.0
    return FourierSeries(c)


def sample(f, grid: CircleGrid) -> BoundaryFunction:
    """Sample a pointwise-evaluable function of z = e^{it} on the grid nodes."""
    return BoundaryFunction(grid, np.asarray(f(grid.points), dtype=complex))


def fourier_coeffs(f: BoundaryFunction, window: int) -> FourierSeries:
    """Discrete Fourier window c_n = (1/K) sum_k f(t_k) e^{-i n t_k}, n in [-window, window].

    Exact for band-limited inputs whose band fits the grid (aliasing otherwise).
    """
    K = f.grid.size
    if 2 * window + 1 > K:
        raise ValueError(f"window {window} exceeds grid capacity {(K - 1) // 2}")
    c = np.fft.fft(f.values) / K
    idx = np.mod(np.arange(-window, window + 1), K)
    return FourierSeries(c[idx])


def synthesize(s: FourierSeries, z, *, analytic: bool | None = None, tol: float = 1e-10):
    """Evaluate the finite sum sum c_n z^n at points on the circle or inside the disc.

    For strictly interior z the series is evaluated as its analytic extension
    (nonnegative modes only); this is refused if the negative-mode energy
    exceeds `tol`.  On the circle, z^{-n} = conj(z)^n.
    """
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    pts = np.atleast_1d(arr)
    interior = np.abs(pts) < 1.0 - 1e-12
    want_analytic = bool(np.any(interior)) if analytic is None else analytic
    m = s.window
    if want_analytic and s.negative_energy() > tol:
        raise AnalyticExtensionError(
            f"negative-mode energy {s.negative_energy():.3e} exceeds {tol:.1e}"
        )
    # Horner on nonnegative modes; negative modes via conj(z)^n, valid on the circle
    pos = np.zeros_like(pts)
    for c in s.coeffs[m:][::-1]:
        pos = pos * pts + c
    if want_analytic:
        vals = pos
    else:
        neg = np.zeros_like(pts)
        zc = np.conj(pts)
        for c in s.coeffs[:m]:  # modes -m, ..., -1, deepest first
            neg = neg * zc + c
        vals = pos + neg * zc
    if scalar:
        return complex(vals[0])
    return vals.reshape(arr.shape)


def synthesize_grid(s: FourierSeries, grid: CircleGrid) -> BoundaryFunction:
    """Exact synthesis on a full grid via zero-padded inverse FFT."""
    K = grid.size
    if 2 * s.window + 1 > K:
        return sample(lambda z: synthesize(s, z, analytic=False), grid)
    c = np.zeros(K, dtype=complex)
    idx = np.mod(s.modes, K)
    np.add.at(c, idx, s.coeffs)
    return BoundaryFunction(grid, np.fft.ifft(c) * K)


def l2_inner(f: BoundaryFunction, g: BoundaryFunction) -> complex:
    """(f, g) = integral of f * conj(g) against normalized measure (grid mean)."""
    if f.grid.size != g.grid.size:
        raise GridMismatchError(f"grids of size {f.grid.size} and {g.grid.size}")
    return complex(np.mean(f.values * np.conj(g.values)))


def l2_norm(f: BoundaryFunction) -> float:
    return float(np.sqrt(np.mean(np.abs(f.values) ** 2)))


@dataclass(frozen=True)
class OuterFunction:
    """Outer function O with |O| = h^power on the circle and O(0) > 0.

    `boundary` holds the grid samples; `eval` extends analytically to the
    closed disc through the truncated log-series exp(c0 + sum_{n>=1} g_n z^n).
    `log_tail` bounds the dropped log-coefficient mass (sup-norm of the error
    of log O, hence a relative error bound on O itself).
    """

    boundary: BoundaryFunction
    log_c0: float
    log_coeffs: np.ndarray  # g_n for n = 1..len, coefficients of log O
    log_tail: float

    def at_zero(self) -> float:
        return float(np.exp(self.log_c0))

    def eval(self, z):
        arr = np.asarray(z, dtype=complex)
        scalar = arr.ndim == 0
        pts = np.atleast_1d(arr)
        acc = np.zeros_like(pts)
        for g in self.log_coeffs[::-1]:
            acc = (acc + g) * pts
        vals = np.exp(self.log_c0 + acc)
        if scalar:
            return complex(vals[0])
        return vals.reshape(arr.shape)

    def __call__(self, z):
        return self.eval(z)


def outer_function(h: BoundaryFunction, power: float = 1.0, *, tail_tol: float = 1e-12) -> OuterFunction:
    """Outer function with boundary modulus h^power, positive at the origin.

    h must be strictly positive (real part taken; imaginary part must be
    negligible).  Spectral accuracy requires smooth h; the dropped tail of the
    log-coefficient window is reported on the result and a warning is attached
    to the boundary meta when it exceeds `tail_tol`.
    """
    vals = h.values
    if np.max(np.abs(vals.imag)) > 1e-10 * max(1.0, np.max(np.abs(vals.real))):
        raise ValueError("outer_function input must be real and positive")
    hr = vals.real
    if np.min(hr) <= 1e-12:
        raise ValueError(f"outer_function input must be positive, min = {np.min(hr):.3e}")
    K = h.grid.size
    g = power * np.log(hr)
    c = np.fft.fft(g) / K
    # analytic completion: c0 + 2*sum_{n>0} c_n e^{int}; conjugate symmetry holds for real g
    half = K // 2
    sym_defect = np.max(np.abs(c[1:half] - np.conj(c[-1:-half:-1])))
    if sym_defect > 1e-8:
        raise ValueError("log-modulus coefficients are not conjugate symmetric")
    doubled = np.zeros(K, dtype=complex)
    doubled[0] = c[0]
    doubled[1:half] = 2.0 * c[1:half]
    log_boundary = np.fft.ifft(doubled) * K
    boundary = BoundaryFunction(h.grid, np.exp(log_boundary))

    coeffs = doubled[1:half]
    mags = np.abs(coeffs)
    big = np.nonzero(mags > 1e-17 * max(1.0, float(np.max(mags))))[0]
    keep = int(big[-1]) + 1 if big.size else 1
    tail = float(np.sum(mags[keep:])) + float(abs(c[half])) if half < K else float(np.sum(mags[keep:]))
    if tail > tail_tol:
        boundary.meta["accuracy_warning"] = f"log-coefficient tail {tail:.3e} exceeds {tail_tol:.1e}"
    return OuterFunction(
        boundary=boundary,
        log_c0=float(c[0].real),
        log_coeffs=coeffs[:keep],
        log_tail=tail,
    )
