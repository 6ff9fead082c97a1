"""The Rochberg decomposition f = sum_i v_i * (f_i o b).

Against a model-space basis {v_i}, every bounded f splits with coefficients

    f_i = <v_i J^{-1/2}, J^{-1/2} f> = L(conj(v_i) J0^{-1} f),

computed by one transfer-operator application each.  When f is analytic, so is
every f_i; a coefficient with negative-mode mass witnesses that f was not.
The expansion is injective on coefficient tuples, which uniqueness_check
certifies by a reconstruct-then-recover round trip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blaschke import BlaschkeProduct, BranchSystem, evaluate, j0
from .circlefun import (
    BoundaryFunction,
    CircleGrid,
    FourierSeries,
    fourier_coeffs,
    synthesize,
    trim_series,
)
from .model_space import ModelBasis, validate_basis
from .transfer import grid_fibre


@dataclass(frozen=True)
class Decomposition:
    """Result bundle: coefficients, reconstruction residual, analyticity evidence."""

    owner: BlaschkeProduct
    basis_kind: str
    input: FourierSeries
    coefficients: list
    residual: float
    membership: list  # negative-mode energy per coefficient

    def to_json_dict(self) -> dict:
        import json

        return {
            "basis": self.basis_kind,
            "input": json.loads(self.input.to_json()),
            "coefficients": [json.loads(c.to_json()) for c in self.coefficients],
            "residual": self.residual,
            "membership": list(map(float, self.membership)),
        }


def decompose(
    bs: BranchSystem,
    basis: ModelBasis,
    f: FourierSeries,
    grid: CircleGrid,
    *,
    window: int | None = None,
    check_basis: bool = True,
) -> Decomposition:
    """Split f against the basis; coefficients come back as Fourier windows.

    The coefficient window defaults to grid.size // 4: the f_i of a band-limited
    f are generally full rational series, so truncating them at f's own window
    would lose geometric tail mass and spoil the round trip.
    """
    if 2 * f.window + 1 > grid.size // 2:
        raise ValueError("grid too coarse for the requested input window")
    if check_basis:
        validate_basis(basis, grid)
    win = grid.size // 4 if window is None else window

    # one shared preimage fibre serves every coefficient
    fib = grid_fibre(bs, grid)
    f_fib = synthesize(f, fib, analytic=False)
    weight = f_fib / j0(bs.owner, np.angle(fib))

    coeff_series = []
    membership = []
    for v in basis.elements:
        vals = (np.conj(v.evaluate(fib)) * weight).mean(axis=0)
        s = fourier_coeffs(BoundaryFunction(grid, vals), win)
        membership.append(s.negative_energy())  # measured before trimming
        # floor sits above the root-finding noise in the sampled values
        coeff_series.append(trim_series(s, floor=3e-14))

    recon = reconstruct(bs, basis, coeff_series, grid)
    residual = float(np.max(np.abs(recon.values - synthesize(f, grid.points, analytic=False))))
    return Decomposition(
        owner=bs.owner,
        basis_kind=basis.kind,
        input=f,
        coefficients=coeff_series,
        residual=residual,
        membership=membership,
    )


def reconstruct(
    bs: BranchSystem,
    basis: ModelBasis,
    coefficients: list,
    grid: CircleGrid,
) -> BoundaryFunction:
    """sum_i v_i(z) * f_i(b(z)) on the grid; coefficients may have negative modes."""
    if len(coefficients) != basis.size:
        raise ValueError("one coefficient series per basis element required")
    z = grid.points
    bz = evaluate(bs.owner, z)
    total = np.zeros(grid.size, dtype=complex)
    for v, s in zip(basis.elements, coefficients):
        total += v.evaluate(z) * synthesize(s, bz, analytic=False)
    return BoundaryFunction(grid, total)


def uniqueness_check(
    bs: BranchSystem,
    basis: ModelBasis,
    f: FourierSeries | None,
    perturbed_coeffs: list | None,
    grid: CircleGrid,
) -> dict:
    """Reconstruct from a coefficient tuple, re-derive the coefficients, compare.

    If perturbed_coeffs is None, the tuple is the decomposition of f itself
    (zero perturbation).  Coefficients need not be analytic: the expansion is
    injective on arbitrary bounded tuples.
    """
    if perturbed_coeffs is None:
        if f is None:
            raise ValueError("need either f or an explicit coefficient tuple")
        perturbed_coeffs = decompose(bs, basis, f, grid).coefficients
    if len(perturbed_coeffs) != basis.size:
        raise ValueError("one coefficient series per basis element required")

    b = bs.owner
    fib = grid_fibre(bs, grid)
    bz_fib = evaluate(b, fib)
    g_fib = np.zeros(fib.shape, dtype=complex)
    for v, s in zip(basis.elements, perturbed_coeffs):
        g_fib += v.evaluate(fib) * synthesize(s, bz_fib, analytic=False)
    weight = g_fib / j0(b, np.angle(fib))

    errors = []
    for v, s in zip(basis.elements, perturbed_coeffs):
        recovered = (np.conj(v.evaluate(fib)) * weight).mean(axis=0)
        expected = synthesize(s, grid.points, analytic=False)
        errors.append(float(np.max(np.abs(recovered - expected))))
    return {"recovery_sup_error": max(errors), "per_coefficient": errors}


def analytic_membership(s: FourierSeries, tol: float = 1e-8) -> dict:
    """Negative-mode energy and the (approximate) disc-algebra evidence.

    `abs_coeff_sum` reports window summability as a proxy for continuity; it is
    informational, not a certificate.
    """
    neg = s.negative_energy()
    return {
        "is_h2_like": bool(neg < tol),
        "neg_energy": float(neg),
        "abs_coeff_sum": float(np.sum(np.abs(s.coeffs))),
    }
