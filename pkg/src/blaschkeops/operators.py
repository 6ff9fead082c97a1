"""Truncated matrices of the circle operators in the exponential basis.

Multiplication pi(phi) is Toeplitz; composition Gamma_b has column n equal to
the Fourier window of b^n; the master isometry C_b = pi(J^{1/2}) Gamma_b; the
Cuntz isometries S_i have columns v_i b^n; the transfer matrix has columns
L(e_n).  All matrices carry per-column discarded-mass certificates, and every
identity is certified on an interior mode block where those tails are small:
the identities are exact only in the infinite limit, so honest pass/fail needs
the tail bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blaschke import BranchSystem, evaluate, j0
from .circlefun import BoundaryFunction, CircleGrid, FourierSeries, fourier_coeffs
from .model_space import ModelBasis, induced_module_basis, validate_basis
from .transfer import ModuleVector, grid_fibre, outer_symbol

import json


@dataclass(frozen=True)
class TruncatedOperator:
    """Dense complex matrix indexed by Fourier modes, with accuracy certificates.

    `column_tail[j]` bounds the l2 mass of column j discarded by the row
    window (for sampled constructions) or accumulated through composition.
    `space` is "L2" (modes [-M, M]) or "H2" (modes [0, M]).
    """

    matrix: np.ndarray
    row_modes: tuple  # (lo, hi) inclusive
    col_modes: tuple
    space: str
    column_tail: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        rows = self.row_modes[1] - self.row_modes[0] + 1
        cols = self.col_modes[1] - self.col_modes[0] + 1
        if m.shape != (rows, cols):
            raise ValueError(f"matrix shape {m.shape} does not match mode intervals")
        tails = np.asarray(self.column_tail, dtype=float)
        if tails.shape != (cols,):
            raise ValueError("one tail entry per column required")
        if np.any(tails < 0):
            raise ValueError("column tails must be nonnegative")
        if self.space not in ("L2", "H2"):
            raise ValueError("space must be L2 or H2")
        if self.space == "H2" and (self.row_modes[0] < 0 or self.col_modes[0] < 0):
            raise ValueError("H2 operators carry nonnegative modes only")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "column_tail", tails)

    @property
    def row_mode_array(self) -> np.ndarray:
        return np.arange(self.row_modes[0], self.row_modes[1] + 1)

    @property
    def col_mode_array(self) -> np.ndarray:
        return np.arange(self.col_modes[0], self.col_modes[1] + 1)

    def entry(self, m: int, n: int) -> complex:
        return complex(self.matrix[m - self.row_modes[0], n - self.col_modes[0]])

    def to_json(self) -> str:
        return json.dumps(
            {
                "space": self.space,
                "row_modes": list(self.row_modes),
                "col_modes": list(self.col_modes),
                "data": [[v.real, v.imag] for v in self.matrix.reshape(-1)],
                "column_tail": list(map(float, self.column_tail)),
            }
        )

    def to_csv(self, plane: str = "re") -> str:
        if plane not in ("re", "im"):
            raise ValueError("plane must be 're' or 'im'")
        part = self.matrix.real if plane == "re" else self.matrix.imag
        return "\n".join(",".join(repr(float(x)) for x in row) for row in part) + "\n"


def operator_from_json(text: str) -> TruncatedOperator:
    d = json.loads(text)
    rows = d["row_modes"][1] - d["row_modes"][0] + 1
    cols = d["col_modes"][1] - d["col_modes"][0] + 1
    data = np.array([complex(re, im) for re, im in d["data"]]).reshape(rows, cols)
    return TruncatedOperator(
        matrix=data,
        row_modes=tuple(d["row_modes"]),
        col_modes=tuple(d["col_modes"]),
        space=d["space"],
        column_tail=np.array(d["column_tail"], dtype=float),
    )


def identity_operator(window: int, space: str = "L2") -> TruncatedOperator:
    lo = -window if space == "L2" else 0
    size = window - lo + 1
    return TruncatedOperator(
        matrix=np.eye(size, dtype=complex),
        row_modes=(lo, window),
        col_modes=(lo, window),
        space=space,
        column_tail=np.zeros(size),
    )


# -- constructions ------------------------------------------------------------


def mult_operator(phi: FourierSeries, window: int) -> TruncatedOperator:
    """Toeplitz matrix of multiplication by phi on modes [-window, window]."""
    if phi.window > window:
        raise ValueError("symbol window exceeds the operator window")
    modes = np.arange(-window, window + 1)
    diff = modes[:, None] - modes[None, :]
    mat = np.zeros(diff.shape, dtype=complex)
    inside = np.abs(diff) <= phi.window
    mat[inside] = phi.coeffs[diff[inside] + phi.window]
    # per column: symbol mass pushed outside the row window
    tails = np.empty(modes.size)
    c2 = np.abs(phi.coeffs) ** 2
    for idx, n in enumerate(modes):
        k = phi.modes + n
        tails[idx] = np.sqrt(np.sum(c2[(k < -window) | (k > window)]))
    return TruncatedOperator(mat, (-window, window), (-window, window), "L2", tails)


def toeplitz_operator(phi: FourierSeries, window: int) -> TruncatedOperator:
    """Compression of mult_operator to the analytic modes [0, window]."""
    full = mult_operator(phi, window)
    return block(full, (0, window), (0, window), space="H2")


def _columns_from_samples(
    samples: np.ndarray, grid: CircleGrid, window: int, col_modes: tuple
) -> TruncatedOperator:
    """Operator whose column j is the Fourier window of samples[j] (length-K rows)."""
    K = grid.size
    if 2 * window + 1 > K:
        raise ValueError("row window exceeds grid capacity")
    coef = np.fft.fft(samples, axis=1) / K
    idx = np.mod(np.arange(-window, window + 1), K)
    mat = coef[:, idx].T
    # measured mass of the discarded modes (no cancellation against the total)
    outside = np.ones(K, dtype=bool)
    outside[idx] = False
    tails = np.sqrt(np.sum(np.abs(coef[:, outside]) ** 2, axis=1))
    return TruncatedOperator(mat, (-window, window), col_modes, "L2", tails)


def _power_samples(bs: BranchSystem, grid: CircleGrid, window: int) -> np.ndarray:
    """b^n on the grid for n = -window..window, shape (2*window+1, K)."""
    bvals = evaluate(bs.owner, grid.points)
    ns = np.arange(-window, window + 1)
    return bvals[None, :] ** ns[:, None]


def weighted_composition_matrix(
    bs: BranchSystem, weight: np.ndarray, window: int, grid: CircleGrid
) -> TruncatedOperator:
    """Direct sampling of pi(w) Gamma_b: column n is the Fourier window of w * b^n.

    The recorded tails are measured discarded mass, which makes these the sharp
    certificates for identities involving products with Gamma_b.
    """
    w = np.asarray(weight, dtype=complex)
    if w.shape != (grid.size,):
        raise ValueError("weight must be sampled on the grid")
    return _columns_from_samples(
        w[None, :] * _power_samples(bs, grid, window), grid, window, (-window, window)
    )


def gamma_b_matrix(bs: BranchSystem, window: int, grid: CircleGrid) -> TruncatedOperator:
    """Composition operator: column n is the Fourier window of b^n."""
    return _columns_from_samples(_power_samples(bs, grid, window), grid, window, (-window, window))


def master_isometry_matrix(bs: BranchSystem, window: int, grid: CircleGrid) -> TruncatedOperator:
    """C_b = pi(J^{1/2}) Gamma_b as a product of truncated matrices."""
    j_half = fourier_coeffs(outer_symbol(bs, grid, 0.5).boundary, window)
    return compose(mult_operator(j_half, window), gamma_b_matrix(bs, window, grid))


def master_isometry_matrix_direct(bs: BranchSystem, window: int, grid: CircleGrid) -> TruncatedOperator:
    """C_b with column n sampled directly as J^{1/2} b^n (cross-check construction)."""
    jh = outer_symbol(bs, grid, 0.5).boundary.values
    return weighted_composition_matrix(bs, jh, window, grid)


def cuntz_family_matrices(
    bs: BranchSystem,
    basis: ModelBasis,
    window: int,
    grid: CircleGrid,
    *,
    method: str = "direct",
    check_basis: bool = True,
) -> list[TruncatedOperator]:
    """The Cuntz isometries S_i determined by a model-space basis.

    method="direct" samples the defining columns S_i e_n = v_i b^n;
    method="module" forms pi(v_i J^{-1/2}) C_b.  The two agree on interior
    blocks and are cross-checked in the verification suite.  The basis is
    validated (Gram, H2 membership, orthogonality to b*H2) unless disabled.
    """
    if check_basis:
        validate_basis(basis, grid)
    if method == "direct":
        return [
            weighted_composition_matrix(bs, v.evaluate(grid.points), window, grid)
            for v in basis.elements
        ]
    if method == "module":
        cb = master_isometry_matrix(bs, window, grid)
        out = []
        for m in induced_module_basis(bs, basis, grid):
            symbol = fourier_coeffs(BoundaryFunction(grid, m.evaluate(grid.points)), window)
            out.append(compose(mult_operator(symbol, window), cb))
        return out
    raise ValueError(f"unknown method {method!r}")


def transfer_matrix(bs: BranchSystem, window: int, grid: CircleGrid) -> TruncatedOperator:
    """Transfer operator: column n is the Fourier window of L(e_n)."""
    fib = grid_fibre(bs, grid)  # (N, K) preimage points
    ns = np.arange(-window, window + 1)
    samples = np.empty((ns.size, grid.size), dtype=complex)
    for i, n in enumerate(ns):
        samples[i] = (fib**n).mean(axis=0)
    return _columns_from_samples(samples, grid, window, (-window, window))


# -- dense algebra -------------------------------------------------------------


def adjoint(op: TruncatedOperator) -> TruncatedOperator:
    """Conjugate transpose.  Column tails are not transported (row mass is not
    tracked); downstream certification must rely on interior blocks."""
    return TruncatedOperator(
        matrix=op.matrix.conj().T,
        row_modes=op.col_modes,
        col_modes=op.row_modes,
        space=op.space,
        column_tail=np.zeros(op.matrix.shape[0]),
    )


def compose(a: TruncatedOperator, b: TruncatedOperator) -> TruncatedOperator:
    """Matrix product a @ b; mode intervals must chain; tails accumulate.

    tail_ab[n] <= ||a|| tail_b[n] + sum_k tail_a[k] |b[k, n]| is the bound used.
    """
    if a.col_modes != b.row_modes:
        raise ValueError(f"mode mismatch: {a.col_modes} vs {b.row_modes}")
    norm_a = operator_norm(a)
    tails = norm_a * b.column_tail + a.column_tail @ np.abs(b.matrix)
    space = "H2" if a.space == b.space == "H2" else "L2"
    return TruncatedOperator(a.matrix @ b.matrix, a.row_modes, b.col_modes, space, tails)


def operator_norm(op: TruncatedOperator) -> float:
    """Largest singular value of the truncated matrix."""
    return float(np.linalg.svd(op.matrix, compute_uv=False)[0])


def block(
    op: TruncatedOperator, row_modes: tuple, col_modes: tuple, *, space: str | None = None
) -> TruncatedOperator:
    """Submatrix on the given mode intervals; dropped-row mass is added to the tails."""
    if not (op.row_modes[0] <= row_modes[0] and row_modes[1] <= op.row_modes[1]):
        raise ValueError("row interval outside operator")
    if not (op.col_modes[0] <= col_modes[0] and col_modes[1] <= op.col_modes[1]):
        raise ValueError("column interval outside operator")
    r0 = row_modes[0] - op.row_modes[0]
    r1 = row_modes[1] - op.row_modes[0] + 1
    c0 = col_modes[0] - op.col_modes[0]
    c1 = col_modes[1] - op.col_modes[0] + 1
    sub = op.matrix[r0:r1, c0:c1]
    dropped = np.sum(np.abs(op.matrix[:r0, c0:c1]) ** 2, axis=0) + np.sum(
        np.abs(op.matrix[r1:, c0:c1]) ** 2, axis=0
    )
    tails = np.sqrt(op.column_tail[c0:c1] ** 2 + dropped)
    return TruncatedOperator(sub, row_modes, col_modes, space or op.space, tails)


def restrict_to_h2(op: TruncatedOperator) -> TruncatedOperator:
    """Compression to the analytic modes [0, M] (houses R_i and C_{b+})."""
    hi = min(op.row_modes[1], op.col_modes[1])
    return block(op, (0, hi), (0, hi), space="H2")


# -- certification helpers ------------------------------------------------------


def interior_block(op: TruncatedOperator, inner: int) -> TruncatedOperator:
    """The certified sub-operator on modes |n| <= inner (or [0, inner] on H2)."""
    lo = 0 if op.space == "H2" else -inner
    return block(op, (max(lo, op.row_modes[0]), min(inner, op.row_modes[1])),
                 (max(lo, op.col_modes[0]), min(inner, op.col_modes[1])))


def uncertified_modes(tail_sources: list, eps_tail: float = 1e-10) -> set:
    """Column modes whose recorded tail exceeds eps_tail in any source operator.

    The sources should be the sampled/constructed operators entering an
    identity (their tails are measured discarded mass, not bounds).
    """
    bad: set = set()
    for op in tail_sources:
        modes = op.col_mode_array
        bad.update(int(m) for m in modes[op.column_tail > eps_tail])
    return bad


def interior_residual(
    a: TruncatedOperator,
    b: TruncatedOperator,
    inner: int,
    *,
    eps_tail: float = 1e-10,
    tail_sources: list | None = None,
) -> tuple[float, list[int]]:
    """max |a - b| entrywise on the shared interior block.

    Columns whose recorded tail exceeds eps_tail in any tail source (default:
    the two operands) are excluded from the max and returned for reporting.
    Raises if the exclusion leaves no column: a vacuous check is not a pass.
    """
    ba = interior_block(a, inner)
    bb = interior_block(b, inner)
    if ba.row_modes != bb.row_modes or ba.col_modes != bb.col_modes:
        raise ValueError("operators do not share the interior block")
    bad_modes = uncertified_modes(tail_sources if tail_sources is not None else [a, b], eps_tail)
    cols = np.arange(ba.col_modes[0], ba.col_modes[1] + 1)
    mask = np.array([c in bad_modes for c in cols])
    if mask.all():
        raise ValueError(
            "no certified column remains on the interior block; "
            "increase the mode window or relax eps_tail"
        )
    diff = np.abs(ba.matrix - bb.matrix)
    diff[:, mask] = 0.0
    return float(diff.max()), [int(c) for c in cols[mask]]


def pair_power_gram(
    bs: BranchSystem,
    xi: ModuleVector,
    eta: ModuleVector,
    window: int,
    *,
    panel_points: int = 16,
    oversample: float = 4.0,
) -> TruncatedOperator:
    """Exact Gram matrix [(xi b^n, eta b^m)]_{m,n} by piecewise Gauss-Legendre.

    Integrates conj(eta) xi e^{i(n-m) theta(t)} between the declared exception
    angles of the symbols, so it stays spectrally accurate for indicator-type
    symbols where grid quadrature and truncated matrix products lose O(1/M).
    Used to certify Cuntz orthogonality for arbitrary module bases.
    """
    two_pi = 2.0 * np.pi
    breaks = sorted({0.0, two_pi} | {float(np.mod(e, two_pi)) for e in xi.exceptions}
                    | {float(np.mod(e, two_pi)) for e in eta.exceptions})
    nodes_x, weights_x = np.polynomial.legendre.leggauss(panel_points)
    max_slope = bs.branch_count * float(np.max(j0(bs.owner, np.linspace(0, two_pi, 1024))))
    ts, ws = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi - lo < 1e-14:
            continue
        # resolve the fastest oscillation 2*window*theta' with `oversample` points per period
        periods = (hi - lo) * 2 * window * max_slope / two_pi
        n_panels = max(4, int(np.ceil(periods * oversample / panel_points)))
        edges = np.linspace(lo, hi, n_panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        ts.append((mid[:, None] + half[:, None] * nodes_x[None, :]).reshape(-1))
        ws.append((half[:, None] * weights_x[None, :]).reshape(-1))
    t = np.concatenate(ts)
    w = np.concatenate(ws) / two_pi
    z = np.exp(1j * t)
    amp = w * xi.evaluate(z) * np.conj(eta.evaluate(z))
    phases = np.exp(1j * np.outer(np.arange(-window, window + 1), bs.theta(t)))
    gram = (phases * amp[None, :]) @ phases.conj().T  # [n, m] -> transpose below
    return TruncatedOperator(
        matrix=gram.T,
        row_modes=(-window, window),
        col_modes=(-window, window),
        space="L2",
        column_tail=np.zeros(2 * window + 1),
    )
