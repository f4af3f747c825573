"""Basis polynomials and Gaussian-weighted inner products."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from momentbc.basis import (Polynomial3, basis_polynomial, build_basis_set,
                            harmonic_tensor, inner_full, inner_half,
                            laguerre_coefficients, laguerre_radial,
                            verify_orthogonality)
from momentbc.system import grad_theory

SQRT_2PI = math.sqrt(2.0 * math.pi)


def mono(i, j, k, c=1.0):
    return Polynomial3.monomial((i, j, k), c)


def gauss_pdf(x):
    return math.exp(-0.5 * x * x) / SQRT_2PI


def test_polynomial_arithmetic_and_eval():
    p = Polynomial3.axis("x") + Polynomial3.axis("y")
    q = p * p
    assert q.coefficient((2, 0, 0)) == 1.0
    assert q.coefficient((1, 1, 0)) == 2.0
    assert q.degree == 2
    assert q(1.0, 2.0, -3.0) == 9.0


def test_polynomial_drops_zero_terms():
    p = Polynomial3.axis("x") - Polynomial3.axis("x")
    assert p.terms == {}
    assert (0.0 * Polynomial3.constant(5.0)).terms == {}


def test_polynomial_reflection():
    p = mono(3, 2, 0) + mono(0, 1, 0)
    r = p.reflected("x")
    assert r.coefficient((3, 2, 0)) == -1.0
    assert r.coefficient((0, 1, 0)) == 1.0


def test_full_moments_frozen():
    # unit Gaussian: mu2 = 1, mu4 = 3, mu6 = 15, odd moments vanish
    assert inner_full(Polynomial3.constant(), Polynomial3.constant()) == 1.0
    assert inner_full(mono(1, 0, 0), mono(1, 0, 0)) == 1.0
    assert inner_full(mono(2, 0, 0), mono(2, 0, 0)) == 3.0
    assert inner_full(mono(3, 0, 0), mono(3, 0, 0)) == 15.0
    assert inner_full(mono(1, 0, 0), Polynomial3.constant()) == 0.0
    assert inner_full(mono(1, 1, 0), mono(1, 1, 0)) == 1.0


def test_full_moments_match_quadrature():
    for k in range(9):
        val = inner_full(mono(k, 0, 0), Polynomial3.constant())
        ref, _ = integrate.quad(lambda x: x ** k * gauss_pdf(x),
                                -np.inf, np.inf)
        assert abs(val - ref) < 1e-9 * max(1.0, abs(ref))


def test_half_moments_frozen():
    one = Polynomial3.constant()
    assert inner_half(one, one, "x") == 0.5
    assert np.isclose(inner_half(mono(1, 0, 0), one, "x"), 1.0 / SQRT_2PI)
    assert inner_half(mono(2, 0, 0), one, "x") == 0.5
    assert np.isclose(inner_half(mono(3, 0, 0), one, "x"), 2.0 / SQRT_2PI)
    # tangential axes keep full moments
    assert inner_half(mono(0, 2, 0), one, "x") == 0.5
    assert inner_half(mono(0, 1, 0), one, "x") == 0.0


def test_half_moments_match_quadrature():
    for k in range(8):
        val = inner_half(mono(k, 0, 0), Polynomial3.constant(), "x")
        ref, _ = integrate.quad(lambda x: x ** k * gauss_pdf(x), 0.0, np.inf)
        assert abs(val - ref) < 1e-9 * max(1.0, abs(ref))


def test_half_plus_reflected_half_is_full():
    rng = np.random.default_rng(42)
    exps = [(i, j, k) for i in range(4) for j in range(4) for k in range(3)]
    for axis in ("x", "y", "z"):
        for _ in range(10):
            pick = rng.choice(len(exps), size=4, replace=False)
            p = Polynomial3({exps[i]: rng.standard_normal() for i in pick})
            pick = rng.choice(len(exps), size=4, replace=False)
            q = Polynomial3({exps[i]: rng.standard_normal() for i in pick})
            lhs = inner_half(p, q, axis) + inner_half(
                p.reflected(axis), q.reflected(axis), axis)
            rhs = inner_full(p, q)
            assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))


def test_laguerre_frozen_coefficients():
    assert laguerre_coefficients(0, 0) == [1.0]
    c = laguerre_coefficients(0, 1)
    assert np.allclose(c, [math.sqrt(2.0 / 3.0) * 1.5, -math.sqrt(2.0 / 3.0)])
    rad = laguerre_radial(2, 0)
    assert rad == pytest.approx({Fraction(1): math.sqrt(2.0)})
    rad = laguerre_radial(1, 0)
    assert rad == pytest.approx({Fraction(1, 2): math.sqrt(2.0)})


def test_laguerre_rejects_negative_orders():
    with pytest.raises(ValueError):
        laguerre_coefficients(-1, 0)
    with pytest.raises(ValueError):
        laguerre_coefficients(0, -2)


def test_radial_family_orthonormal():
    # scalar ladder: psi^(s) built from rank 0 radial polynomials
    polys = [basis_polynomial(0, s, ()) for s in range(4)]
    for a, pa in enumerate(polys):
        for b, pb in enumerate(polys):
            val = inner_full(pa, pb)
            assert abs(val - (1.0 if a == b else 0.0)) < 1e-12


def test_harmonic_tensor_values():
    assert harmonic_tensor(()).terms == {(0, 0, 0): 1.0}
    assert harmonic_tensor(("x",)).terms == {(1, 0, 0): 1.0}
    xx = harmonic_tensor(("x", "x"))
    assert np.isclose(xx.coefficient((2, 0, 0)), 2.0 / 3.0)
    assert np.isclose(xx.coefficient((0, 2, 0)), -1.0 / 3.0)
    assert np.isclose(xx.coefficient((0, 0, 2)), -1.0 / 3.0)
    assert harmonic_tensor(("x", "y")).terms == {(1, 1, 0): 1.0}


def test_harmonic_tensor_trace_free():
    trace = (harmonic_tensor(("x", "x")) + harmonic_tensor(("y", "y"))
             + harmonic_tensor(("z", "z")))
    assert trace.terms == {}


def laplacian(p):
    out = {}
    for (i, j, k), c in p.terms.items():
        for d, e in (((i - 2, j, k), i * (i - 1)), ((i, j - 2, k), j * (j - 1)),
                     ((i, j, k - 2), k * (k - 1))):
            if e:
                out[d] = out.get(d, 0.0) + c * e
    return Polynomial3(out)


def test_harmonic_tensor_is_harmonic():
    # solid-harmonic property pins the whole construction
    for comp in (("x",), ("x", "y"), ("x", "x", "z"), ("x", "y", "y", "z"),
                 ("y", "y", "y", "y", "x")):
        res = laplacian(harmonic_tensor(comp))
        worst = max((abs(c) for c in res.terms.values()), default=0.0)
        assert worst < 1e-12, comp


def test_basis_polynomial_degree_and_validation():
    assert basis_polynomial(2, 1, ("x", "y")).degree == 4
    assert basis_polynomial(0, 0, ()).terms == {(0, 0, 0): 1.0}
    with pytest.raises(ValueError):
        basis_polynomial(2, 0, ("x",))


def test_rank2_gram_frozen():
    # family normalization: diagonal 2/3 and 1/2, cross entry -1/3
    xx = basis_polynomial(2, 0, ("x", "x"))
    yy = basis_polynomial(2, 0, ("y", "y"))
    xy = basis_polynomial(2, 0, ("x", "y"))
    assert np.isclose(inner_full(xx, xx), 2.0 / 3.0)
    assert np.isclose(inner_full(xx, yy), -1.0 / 3.0)
    assert np.isclose(inner_full(xy, xy), 0.5)
    assert inner_full(xx, xy) == 0.0


def test_unit_vector_and_temperature_moments():
    x1 = basis_polynomial(1, 0, ("x",))
    s1 = basis_polynomial(0, 1, ())
    assert np.isclose(inner_full(x1, x1), 1.0)
    assert np.isclose(inner_full(s1, s1), 1.0)
    # cross parity pairs integrate to zero
    assert inner_full(x1, s1) == 0.0


def test_basis_set_ordering_g20():
    bs = build_basis_set(grad_theory(3, "planar"), "x")
    assert bs.size == 13 and bs.n_o == 5 and bs.n_e == 8
    assert bs.names()[:5] == [
        "a_x^(0)", "a_xy^(0)", "a_x^(1)", "a_xxx^(0)", "a_xyy^(0)"]
    assert bs.names()[5:8] == ["a^(0)", "a_y^(0)", "a^(1)"]


def test_basis_set_normal_axis_validated():
    with pytest.raises(ValueError):
        build_basis_set(grad_theory(3, "planar"), "z")


def test_index_lookup():
    bs = build_basis_set(grad_theory(3, "planar"), "y")
    i = bs.index_of(1, 1, ("y",))
    assert bs.entries[i].name == "a_y^(1)"
    with pytest.raises(KeyError):
        bs.index_of(4, 0, ("x",) * 4)


def test_parity_signs_split():
    bs = build_basis_set(grad_theory(3, "planar"), "x")
    signs = bs.parity_signs("x")
    assert set(signs) == {-1.0, 1.0}
    assert (signs[:bs.n_o] == -1.0).all()
    assert (signs[bs.n_o:] == 1.0).all()


def test_declared_parity_matches_numeric_sign_flip():
    bs = build_basis_set(grad_theory(3, "planar"), "x")
    rng = np.random.default_rng(3)
    pts = rng.standard_normal((20, 3))
    for bf in bs.entries:
        vals = bf.poly(pts[:, 0], pts[:, 1], pts[:, 2])
        flipped = bf.poly(-pts[:, 0], pts[:, 1], pts[:, 2])
        sign = -1.0 if bf.parity_x == "odd" else 1.0
        np.testing.assert_allclose(flipped, sign * vals, atol=1e-12)


@pytest.mark.parametrize("degree,reduction", [
    (2, "planar"), (3, "planar"), (3, "full3d"), (5, "planar")])
def test_reconstruction_identity(degree, reduction):
    bs = build_basis_set(grad_theory(degree, reduction), "x")
    rep = verify_orthogonality(bs)
    assert rep.ok
    assert rep.max_deviation < 1e-12
    assert rep.matrix.shape == (bs.size, bs.size)


def test_macroscopic_moments_of_reconstruction():
    """Low-order moments of the reconstructed distribution recover the state."""
    bs = build_basis_set(grad_theory(3, "planar"), "x")
    rng = np.random.default_rng(11)
    alpha = rng.standard_normal(bs.size)
    f = Polynomial3.constant(0.0)
    for b in range(bs.size):
        f = f + alpha[b] * bs.expanded[b]
    assert np.isclose(inner_full(Polynomial3.constant(), f),
                      alpha[bs.index_of(0, 0, ())], atol=1e-12)
    assert np.isclose(inner_full(mono(1, 0, 0), f),
                      alpha[bs.index_of(1, 0, ("x",))], atol=1e-12)
    assert np.isclose(inner_full(mono(0, 1, 0), f),
                      alpha[bs.index_of(1, 0, ("y",))], atol=1e-12)
    # temperature reading: third of the centered energy moment
    energy = (mono(2, 0, 0) + mono(0, 2, 0) + mono(0, 0, 2)
              - Polynomial3.constant(3.0)) * (1.0 / 3.0)
    theta = inner_full(energy, f)
    assert np.isclose(theta, -math.sqrt(2.0 / 3.0) * alpha[bs.index_of(0, 1, ())],
                      atol=1e-12)
