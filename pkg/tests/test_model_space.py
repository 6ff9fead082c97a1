import numpy as np
import pytest
from hypothesis import given

from blaschkeops import build_branches, evaluate, make_blaschke
from blaschkeops.circlefun import CircleGrid
from blaschkeops.errors import GramCheckError
from blaschkeops.model_space import (
    basis_series,
    canonical_basis,
    check_wandering,
    induced_module_basis,
    linking_reconstruction_deviation,
    linking_unitary,
    pointwise_unitarity_deviation,
    rotate_basis,
    user_basis,
    validate_basis,
)
from blaschkeops.transfer import arcs_basis, constant, module_gram_deviation, module_inner

from conftest import blaschke_zeros


def test_canonical_for_squaring_is_monomials(z2, grid1024):
    b, _ = z2
    basis = canonical_basis(b)
    z = grid1024.points[:16]
    assert np.allclose(basis.elements[0].evaluate(z), 1.0)
    assert np.allclose(basis.elements[1].evaluate(z), z)


def test_canonical_closed_form_for_half():
    # w_1(z) = sqrt(1 - 0.25) / (1 - 0.5 z)
    basis = canonical_basis(make_blaschke([0.5]))
    z = np.array([0.2 + 0.1j, -0.7j, 0.99])
    target = np.sqrt(0.75) / (1 - 0.5 * z)
    assert np.max(np.abs(basis.elements[0].evaluate(z) - target)) < 1e-14


def test_canonical_gram_identity(grid4096):
    basis = canonical_basis(make_blaschke([0.5, -0.3j]))
    vals = np.stack([v.evaluate(grid4096.points) for v in basis.elements])
    gram = vals @ vals.conj().T / grid4096.size
    assert np.max(np.abs(gram - np.eye(2))) < 1e-10


def test_canonical_elements_nonvanishing_on_circle(grid1024):
    basis = canonical_basis(make_blaschke([0.5, -0.3j, 0.6j]))
    for v in basis.elements:
        assert np.min(np.abs(v.evaluate(grid1024.points))) > 0.05


def test_validate_basis_reports(grid4096):
    rep = validate_basis(canonical_basis(make_blaschke([0.5, -0.3j])), grid4096)
    assert rep["gram_deviation"] < 1e-12
    assert rep["negative_energy"] < 1e-20
    assert rep["bh2_overlap"] < 1e-12


def test_validate_rejects_non_basis(grid1024):
    b = make_blaschke([0.5, -0.3j])
    fam = user_basis(b, [constant(1.0), constant(1.0)])
    with pytest.raises(GramCheckError):
        validate_basis(fam, grid1024)


# -- rotations ------------------------------------------------------------------


def test_rotate_identity_keeps_values(z2, grid1024):
    b, _ = z2
    basis = canonical_basis(b)
    rot = rotate_basis(basis, np.eye(2))
    z = grid1024.points[:8]
    for v, w in zip(basis.elements, rot.elements):
        assert np.allclose(v.evaluate(z), w.evaluate(z))


def test_rotate_by_quarter_turn(z2, grid4096):
    b, _ = z2
    c = np.cos(np.pi / 4)
    u = np.array([[c, c], [-c, c]])
    rot = rotate_basis(canonical_basis(b), u)
    z = np.array([0.5, 0.3 + 0.2j])
    assert np.allclose(rot.elements[0].evaluate(z), (1 + z) / np.sqrt(2))
    assert np.allclose(rot.elements[1].evaluate(z), (-1 + z) / np.sqrt(2))
    assert validate_basis(rot, grid4096)["gram_deviation"] < 1e-12


def test_rotate_rejects_non_unitary(z2):
    b, _ = z2
    with pytest.raises(ValueError):
        rotate_basis(canonical_basis(b), np.array([[1.0, 0.0], [1.0, 1.0]]))


def test_diagonal_phase_rotation_preserves_gram(grid4096):
    b = make_blaschke([0.5, -0.3j])
    u = np.diag(np.exp(1j * np.array([0.3, -1.2])))
    rot = rotate_basis(canonical_basis(b), u)
    assert validate_basis(rot, grid4096)["gram_deviation"] < 1e-11


# -- wandering subspace ----------------------------------------------------------


def test_wandering_for_squaring(z2, grid1024):
    b, _ = z2
    rep = check_wandering(canonical_basis(b), (-3, 3), grid1024)
    assert rep["max_deviation"] < 1e-12


def test_wandering_for_half(grid4096):
    rep = check_wandering(canonical_basis(make_blaschke([0.5])), (-4, 4), grid4096)
    assert rep["max_deviation"] < 1e-9


def test_wandering_unitary_invariance(grid4096):
    b = make_blaschke([0.5, -0.3j])
    basis = canonical_basis(b)
    c = np.cos(0.7)
    s = np.sin(0.7)
    rot = rotate_basis(basis, np.array([[c, s], [-s, c]]))
    d1 = check_wandering(basis, (-2, 2), grid4096)["max_deviation"]
    d2 = check_wandering(rot, (-2, 2), grid4096)["max_deviation"]
    assert abs(d1 - d2) < 1e-12


def test_model_space_has_dimension_n(grid4096):
    # any H2 polynomial orthogonal to all w_j and to b e_n must vanish
    b = make_blaschke([0.5, -0.3j, 0.2 + 0.4j])
    basis = canonical_basis(b)
    K = grid4096.size
    deg = 12
    rows = [v.evaluate(grid4096.points) for v in basis.elements]
    bvals = evaluate(b, grid4096.points)
    # (g - P_D g)/b has a geometric Taylor tail, so the b*e_n span must reach
    # far enough past deg for the residual to drop below tolerance
    rows += [bvals * grid4096.points**n for n in range(80)]
    a = np.stack(rows)
    q, _ = np.linalg.qr(a.T / np.sqrt(K))
    rng = np.random.default_rng(2)
    coef = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
    g = np.polynomial.polynomial.polyval(grid4096.points, coef)
    resid = g / np.sqrt(K) - q @ (q.conj().T @ (g / np.sqrt(K)))
    assert np.linalg.norm(resid) < 1e-8


# -- induced module basis and linking unitaries -----------------------------------


def test_induced_module_basis_gram(mixed, grid1024):
    b, bs = mixed
    mod = induced_module_basis(bs, canonical_basis(b), grid1024)
    assert module_gram_deviation(bs, mod, grid1024) < 1e-8


def test_linking_same_family_is_identity(mixed, grid1024):
    b, bs = mixed
    mod = induced_module_basis(bs, canonical_basis(b), grid1024)
    u = linking_unitary(bs, mod, mod, grid1024)
    for i in range(2):
        for j in range(2):
            target = 1.0 if i == j else 0.0
            assert np.max(np.abs(u[i][j].values - target)) < 1e-10


def test_linking_scalar_rotation_gives_constants(mixed, grid1024):
    # rotating the model basis by a scalar unitary rotates the induced module
    # basis; the linking matrix is that unitary transposed, entrywise constant
    b, bs = mixed
    basis = canonical_basis(b)
    c, s = np.cos(0.4), np.sin(0.4)
    scalar_u = np.array([[c, s + 0j], [-s, c]])
    mod_a = induced_module_basis(bs, basis, grid1024)
    mod_b = induced_module_basis(bs, rotate_basis(basis, scalar_u), grid1024)
    u = linking_unitary(bs, mod_a, mod_b, grid1024)
    for i in range(2):
        for j in range(2):
            direct = module_inner(bs, mod_a[i], mod_b[j], grid1024).values
            assert np.max(np.abs(u[i][j].values - direct)) < 1e-12
            assert np.max(np.abs(u[i][j].values - scalar_u[j, i])) < 1e-8


def test_linking_canonical_to_arcs(z2, grid1024):
    b, bs = z2
    mod = induced_module_basis(bs, canonical_basis(b), grid1024)
    arcs = arcs_basis(bs)
    u = linking_unitary(bs, mod, arcs, grid1024)
    assert pointwise_unitarity_deviation(u) < 1e-6
    assert linking_reconstruction_deviation(bs, mod, arcs, grid1024) < 1e-6


def test_linking_rejects_non_basis(mixed, grid1024):
    b, bs = mixed
    with pytest.raises(GramCheckError):
        linking_unitary(bs, [constant(1.0), constant(1.0)], arcs_basis(bs), grid1024)


@given(blaschke_zeros(max_degree=3, max_radius=0.7))
def test_linking_unitarity_generic(zeros):
    b = make_blaschke(zeros)
    bs = build_branches(b, 512)
    g = CircleGrid(256)
    mod = induced_module_basis(bs, canonical_basis(b), g)
    u = linking_unitary(bs, mod, arcs_basis(bs), g)
    assert pointwise_unitarity_deviation(u) < 1e-6


def test_basis_series_export(z2, grid1024):
    b, _ = z2
    series = basis_series(canonical_basis(b), grid1024, 4)
    assert abs(series[0].coeff(0) - 1.0) < 1e-13
    assert abs(series[1].coeff(1) - 1.0) < 1e-13
