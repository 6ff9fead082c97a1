"""Finite Blaschke products and their boundary parametrization.

A degree-N Blaschke product b is the product of Moebius factors

    b_w(z) = (|w|/w) (w - z) / (1 - conj(w) z),      b_0(z) = z,

one per prescribed zero w in the open unit disc.  On the circle, b wraps N
times around; the increasing argument lift theta with b(e^{it}) = e^{i theta(t)}
and its N monotone inverse branches are what every downstream operator
(transfer operator, composition matrices) is built from.

theta is obtained by integrating its derivative N*j0, where j0 is the strictly
positive boundary symbol; the integration is spectral (FFT antiderivative), so
the lift is smooth, strictly increasing and cheap to evaluate off the table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchPointError

TWO_PI = 2.0 * np.pi

#: refinement target for theta(t) = s root finding, in radians
ROOT_TOL = 1e-13

#: default chordal exclusion radius around the branch point b(1)
BRANCH_EXCLUSION = 1e-8

#: angular snap radius: points this close to b(1) are treated as exact hits
BRANCH_SNAP = 1e-12


def _as_points(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


@dataclass(frozen=True)
class BlaschkeProduct:
    """Finite Blaschke product given by its zero list (multiplicity = repetition).

    Zeros are kept in the order supplied; the canonical model-space basis
    depends on that order.
    """

    zeros: tuple

    def __post_init__(self):
        if len(self.zeros) == 0:
            raise ValueError("degree-0 Blaschke products (constants) are not supported")
        mods = np.abs(np.asarray(self.zeros, dtype=complex))
        if np.any(mods >= 1.0):
            raise ValueError("all zeros must satisfy |alpha| < 1, got moduli %s" % mods)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    def __call__(self, z):
        return evaluate(self, z)

    def to_json(self) -> str:
        return json.dumps({"zeros": [[z.real, z.imag] for z in map(complex, self.zeros)]})


def make_blaschke(zeros) -> BlaschkeProduct:
    """Build a Blaschke product from an iterable of complex zeros, |alpha_j| < 1."""
    return BlaschkeProduct(tuple(complex(z) for z in zeros))


def blaschke_from_json(text: str) -> BlaschkeProduct:
    data = json.loads(text)
    return make_blaschke(complex(re, im) for re, im in data["zeros"])


def moebius_factor(w: complex, z):
    """The single factor b_w(z); b_0(z) = z."""
    if w == 0:
        return np.asarray(z, dtype=complex)
    z = np.asarray(z, dtype=complex)
    denom = 1.0 - np.conj(w) * z
    if np.any(np.abs(denom) < 1e-14 * (1.0 + np.abs(np.conj(w) * z))):
        raise ValueError("evaluation at (or within machine tolerance of) a pole 1/conj(alpha)")
    return (abs(w) / w) * (w - z) / denom


def _factor_values(b: BlaschkeProduct, z: np.ndarray) -> np.ndarray:
    """Values of the N Moebius factors, shape (N,) + z.shape."""
    out = np.empty((b.degree,) + z.shape, dtype=complex)
    for j, w in enumerate(b.zeros):
        out[j] = moebius_factor(w, z)
    return out


def evaluate(b: BlaschkeProduct, z):
    """Evaluate b at scalar or array z (closed disc and slightly beyond; poles rejected)."""
    arr, scalar = _as_points(z)
    vals = _factor_values(b, np.atleast_1d(arr)).prod(axis=0)
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite Blaschke value (pole hit)")
    if scalar:
        return complex(vals[0])
    return vals.reshape(arr.shape)


def derivative(b: BlaschkeProduct, z):
    """Exact analytic derivative b'(z) via the product rule (no division by factors)."""
    arr, scalar = _as_points(z)
    pts = np.atleast_1d(arr)
    fac = _factor_values(b, pts)
    dfac = np.empty_like(fac)
    for j, w in enumerate(b.zeros):
        if w == 0:
            dfac[j] = 1.0
        else:
            denom = 1.0 - np.conj(w) * pts
            dfac[j] = (abs(w) / w) * (abs(w) ** 2 - 1.0) / denom**2
    # prefix/suffix products keep the formula finite at the zeros of b
    n = b.degree
    prefix = np.ones_like(fac)
    suffix = np.ones_like(fac)
    for j in range(1, n):
        prefix[j] = prefix[j - 1] * fac[j - 1]
    for j in range(n - 2, -1, -1):
        suffix[j] = suffix[j + 1] * fac[j + 1]
    vals = (dfac * prefix * suffix).sum(axis=0)
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite derivative (pole hit)")
    if scalar:
        return complex(vals[0])
    return vals.reshape(arr.shape)


def j0(b: BlaschkeProduct, t):
    """Boundary symbol j0(e^{it}) = (1/N) sum_j (1-|a_j|^2)/|a_j - e^{it}|^2, strictly positive.

    Zero factors contribute the constant 1.  Equals Re(e^{it} b'(e^{it}) / (N b(e^{it}))).
    """
    tt = np.asarray(t, dtype=float)
    scalar = tt.ndim == 0
    pts = np.exp(1j * np.atleast_1d(tt))
    acc = np.zeros(pts.shape, dtype=float)
    for w in b.zeros:
        if w == 0:
            acc += 1.0
        else:
            acc += (1.0 - abs(w) ** 2) / np.abs(w - pts) ** 2
    acc /= b.degree
    if scalar:
        return float(acc[0])
    return acc.reshape(tt.shape)


def _lift_eval(theta0, c0, dcoef, p1, t):
    """theta(t) = theta0 + c0*t + Im(P(e^{it})) - p1 with Horner-evaluated P."""
    e = np.exp(1j * t)
    p = np.zeros_like(e)
    for d in dcoef[::-1]:
        p = (p + d) * e
    return theta0 + c0 * t + (p.imag - p1)


@dataclass(frozen=True)
class BranchSystem:
    """The argument lift theta on [0, 2pi] and its N monotone inverse branches.

    theta(0) is the principal argument of b(1) in (-pi, pi]; theta increases by
    2*pi*N over one turn.  The inverse branch sigma_j maps the circle (minus
    the branch point b(1)) onto the open arc A_j between consecutive endpoints.
    """

    owner: BlaschkeProduct
    theta0: float
    theta_table: np.ndarray  # theta at table_size+1 uniform nodes on [0, 2pi]
    arc_endpoints: np.ndarray  # t_0 = 0 < t_1 < ... < t_N = 2pi
    _c0: float = field(repr=False)
    _dcoef: np.ndarray = field(repr=False)
    _p1: float = field(repr=False)

    def __post_init__(self):
        # idempotent memo for per-grid fibres/symbols; concurrent recompute is
        # harmless, so shared read-mostly use from many threads is safe
        object.__setattr__(self, "_grid_cache", {})

    @property
    def branch_count(self) -> int:
        return self.owner.degree

    # -- the lift ----------------------------------------------------------

    def theta(self, t):
        """theta(t) for scalar or array t."""
        tt = np.asarray(t, dtype=float)
        val = _lift_eval(self.theta0, self._c0, self._dcoef, self._p1, tt)
        return float(val) if tt.ndim == 0 else val

    def theta_prime(self, t):
        """theta'(t) = N * j0(t), strictly positive."""
        return self.owner.degree * j0(self.owner, t)

    def theta_inv(self, s):
        """Solve theta(t) = s for t in [0, 2pi], vectorized safeguarded Newton.

        Brackets come from the table; converged points leave the active set, so
        stragglers do not force extra global iterations.
        """
        ss = np.asarray(s, dtype=float)
        scalar = ss.ndim == 0
        target = np.atleast_1d(ss).astype(float).reshape(-1)
        table = self.theta_table
        n_cells = table.size - 1
        h = TWO_PI / n_cells
        idx = np.clip(np.searchsorted(table, target, side="right") - 1, 0, n_cells - 1)
        lo = idx * h
        hi = lo + h
        # linear seed inside the bracketing cell
        t = np.clip(lo + (target - table[idx]) / (table[idx + 1] - table[idx]) * h, lo, hi)
        active = np.arange(t.size)
        for _ in range(60):
            if not active.size:
                break
            ta = t[active]
            f = self.theta(ta) - target[active]
            conv = np.abs(f) < ROOT_TOL
            if conv.any():
                active = active[~conv]
                if not active.size:
                    break
                ta = ta[~conv]
                f = f[~conv]
            la = lo[active]
            ha = hi[active]
            ha = np.where(f > 0, ta, ha)
            la = np.where(f <= 0, ta, la)
            tn = ta - f / self.theta_prime(ta)
            out = (tn < la) | (tn > ha)
            tn = np.where(out, 0.5 * (la + ha), tn)
            t[active] = tn
            lo[active] = la
            hi[active] = ha
        if active.size:
            worst = float(np.max(np.abs(self.theta(t[active]) - target[active])))
            if worst > 1e-9:
                raise RuntimeError(f"theta inversion stalled with residual {worst:.3e}")
        if scalar:
            return float(t[0])
        return t.reshape(ss.shape)

    # -- preimages ----------------------------------------------------------

    def preimage_angles(self, angles, snap: float = BRANCH_SNAP) -> np.ndarray:
        """Angles of the full preimage fibre, shape (N, len(angles)).

        Row j-1 holds the branch sigma_j.  Points within `snap` radians of the
        branch point are resolved to the arc-endpoint fibre (the preimage set
        varies continuously through b(1); only the branch labels jump there).
        """
        a = np.atleast_1d(np.asarray(angles, dtype=float)).reshape(-1)
        rep = np.mod(a - self.theta0, TWO_PI)
        rep = np.where(np.minimum(rep, TWO_PI - rep) < snap, 0.0, rep)
        offsets = self.theta0 + TWO_PI * np.arange(self.branch_count)
        targets = rep[None, :] + offsets[:, None]
        return self.theta_inv(targets)


def build_branches(b: BlaschkeProduct, table_size: int = 4096) -> BranchSystem:
    """Construct the branch system; theta comes from spectral quadrature of N*j0."""
    n = b.degree
    if table_size < 64 * n:
        raise ValueError(f"table_size must be >= 64*N = {64 * n}")
    theta0 = float(np.angle(evaluate(b, 1.0)))

    # FFT antiderivative of g = N*j0: Theta(t) = c0*t + sum_{m>=1} (2/m) Im(c_m (e^{imt}-1))
    fft_size = 1 << max(11, int(np.ceil(np.log2(table_size))))
    s_nodes = TWO_PI * np.arange(fft_size) / fft_size
    g = n * j0(b, s_nodes)
    c = np.fft.fft(g) / fft_size
    c0 = float(c[0].real)
    pos = c[1 : fft_size // 2]
    big = np.nonzero(np.abs(pos) > 1e-17 * max(1.0, n))[0]
    keep = int(big[-1]) + 1 if big.size else 1
    dcoef = 2.0 * pos[:keep] / np.arange(1, keep + 1)
    p1 = float(np.sum(dcoef).imag)

    t_nodes = np.linspace(0.0, TWO_PI, table_size + 1)
    table = _lift_eval(theta0, c0, dcoef, p1, t_nodes)
    if np.any(np.diff(table) <= 0):
        raise RuntimeError("theta table is not strictly increasing; quadrature of j0 failed")

    bs = BranchSystem(
        owner=b,
        theta0=theta0,
        theta_table=table,
        arc_endpoints=np.empty(0),
        _c0=c0,
        _dcoef=dcoef,
        _p1=p1,
    )
    endpoints = bs.theta_inv(theta0 + TWO_PI * np.arange(n + 1.0))
    endpoints[0] = 0.0
    endpoints[-1] = TWO_PI
    object.__setattr__(bs, "arc_endpoints", endpoints)
    return bs


def preimages(bs: BranchSystem, z, exclusion: float = BRANCH_EXCLUSION) -> np.ndarray:
    """The N circle preimages sigma_1(z), ..., sigma_N(z) of a unit-modulus z.

    Exact (machine-level) hits of the branch point b(1) are allowed and return
    the arc-endpoint fibre; anything else inside the exclusion radius raises
    BranchPointError, since the branch labelling is discontinuous there.
    """
    zc = complex(z)
    if abs(abs(zc) - 1.0) > 1e-8:
        raise ValueError(f"preimages require |z| = 1, got |z| = {abs(zc)}")
    rep = np.mod(np.angle(zc) - bs.theta0, TWO_PI)
    dist = min(rep, TWO_PI - rep)
    if BRANCH_SNAP < dist < exclusion:
        raise BranchPointError(
            f"z is within the exclusion radius {exclusion} of the branch point b(1)"
        )
    t = bs.preimage_angles(np.angle(zc))
    return np.exp(1j * t[:, 0])
