import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reslab.ensembles import fixture
from reslab.graph import QuantumGraph, remove_leads
from reslab.secular import (
    assemble,
    evaluate_U,
    evaluate_U_derivative,
    hypothesis_diagnostics,
    secular_value,
    smallest_singular_value,
    trace_norm,
    vertex_sigma,
)

from conftest import small_random


def test_vertex_sigma_examples():
    s = vertex_sigma(3, 0)
    assert np.allclose(np.diag(s), -1 / 3) and s[0, 1] == pytest.approx(2 / 3)
    assert np.allclose(np.sort(np.linalg.eigvalsh(s)), [-1, -1, 1])
    assert np.array_equal(vertex_sigma(1, 1), [[0.0]])
    assert np.allclose(np.sort(np.linalg.eigvalsh(vertex_sigma(2, 1))), [-1, 1 / 3])


def test_assemble_single_edge(interval_sys):
    assert np.array_equal(interval_sys.S, [[0, 1], [1, 0]])
    half_open = assemble(QuantumGraph(2, [(0, 1, 1.0)], [1, 0]))
    assert np.count_nonzero(np.all(half_open.S == 0, axis=1)) == 1


def test_closed_triangle_unitary():
    s = assemble(remove_leads(fixture("triangle_lead")))
    assert s.S.shape == (6, 6)
    assert np.allclose(s.S @ s.S.T, np.eye(6), atol=1e-12)
    assert all(np.count_nonzero(row) == 1 for row in s.S)  # sigma = -Id + J for d=2, n=0 has zero diagonal


def test_evaluate_U_examples(interval_sys):
    assert np.array_equal(evaluate_U(interval_sys, 0), interval_sys.S)
    assert np.allclose(evaluate_U(interval_sys, math.pi), [[0, -1], [-1, 0]], atol=1e-15)
    assert np.allclose(evaluate_U_derivative(interval_sys, 0), 1j * np.array([[0, 1], [1, 0]]))


def test_single_edge_determinant_closed_form(interval_sys):
    for z in [0.3, 1 + 0.5j, 2.5 - 0.7j, 1j, 4 - 2j]:
        v = secular_value(interval_sys, z)
        assert v.det == pytest.approx(1 - cmath.exp(2j * z), rel=1e-13, abs=1e-14)
    v = secular_value(interval_sys, 1j)
    exact = -2j * cmath.exp(-2) / (1 - cmath.exp(-2))
    assert abs(v.log_derivative - exact) < 1e-10
    assert abs(v.det) <= math.exp(trace_norm(evaluate_U(interval_sys, 1j)))


def test_singular_point_flagged(interval_sys):
    v = secular_value(interval_sys, math.pi)
    assert not v.valid and math.isnan(v.log_derivative.real)
    assert v.smallest_singular < 1e-10 * max(1, abs(v.det)) + 1e-15


def test_trace_norm_examples(rng):
    assert trace_norm(np.eye(5)) == pytest.approx(5)
    u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    w = rng.standard_normal(3)
    assert trace_norm(np.outer(u, w)) == pytest.approx(np.linalg.norm(u) * np.linalg.norm(w))
    A = rng.standard_normal((4, 4))
    B = rng.standard_normal((4, 4))
    assert trace_norm(A @ B) <= np.linalg.norm(A, 2) * trace_norm(B) + 1e-12
    tri = fixture("triangle_lead")
    gap = trace_norm(assemble(tri).S - assemble(remove_leads(tri)).S)
    assert gap <= 2.0 * tri.lead_vertex_count + 1e-12


def test_smallest_singular_inverse_iteration(rng):
    n = 300
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    exact = np.linalg.svd(A, compute_uv=False)[-1]
    assert smallest_singular_value(A, iterations=30) == pytest.approx(exact, rel=1e-6)


def test_diagnostics_examples():
    tri = fixture("triangle_lead")
    o, c = assemble(tri), assemble(remove_leads(tri))
    pts = [x + 0.5j for x in (1.0, 2.0, 3.0)] + [x - 0.5j for x in (1.0, 2.0, 3.0)]
    d = hypothesis_diagnostics(o, c, pts)
    assert d["phase_velocity_min"] == pytest.approx(1.0, abs=1e-10)
    assert d["phase_velocity_max"] == pytest.approx(1.0, abs=1e-10)
    assert d["S_norm"] <= 1 + 1e-12 and d["unitarity_defect"] < 1e-12
    self_gap = hypothesis_diagnostics(c, c, pts)["max_trace_gap"]
    assert self_gap == 0.0


def test_diagnostics_random_graph():
    g = small_random(4, n=20, g=3)
    o, c = assemble(g), assemble(remove_leads(g))
    d = hypothesis_diagnostics(o, c, [1.3 + 0.2j, 4.1 - 0.3j, 7.7])
    assert 1.0 - 1e-10 <= d["phase_velocity_min"] <= d["phase_velocity_max"] <= 2.0 + 1e-10
    assert d["phase_velocity_hermitian_defect"] < 1e-10
    # each opened vertex changes one 3x3 block of S by a matrix of trace norm < 3
    assert d["max_trace_gap"] / d["lead_vertex_count"] <= 3.0


def test_reduced_kernel_matches_bond_matrix():
    for g in (small_random(7, n=12, g=3), fixture("triangle_lead"),
              QuantumGraph(2, [(0, 0, 1.3), (0, 1, 1.1), (1, 1, 0.7)], [1, 0])):
        s = assemble(g)
        zs = np.array([1.3 - 0.2j, 5.1 + 0.3j, 7.7 - 1.5j, 2.2 - 1e-3j])
        assert s._use_reduced(zs).all()
        red, _ = s._reduced_log_derivative(zs)
        bond, _ = s._bond_log_derivative(zs)
        assert np.allclose(red, bond, rtol=1e-9, atol=1e-9)
        sign, logabs = np.linalg.slogdet(s._identity_minus_U(zs))
        assert np.allclose(np.exp(s.log_det(zs)), sign * np.exp(logabs), rtol=1e-10)


@st.composite
def points(draw):
    return complex(draw(st.floats(0.2, 15)), draw(st.floats(-1.5, 1.5)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), points())
def test_operator_properties(seed, z):
    g = small_random(seed, n=8, g=2)
    s = assemble(g)
    assert np.linalg.norm(s.S, 2) <= 1 + 1e-12
    nz = s.S != 0
    assert np.all((s.bonds.origin[:, None] == s.bonds.terminus[None, :]) | ~nz)
    c = assemble(remove_leads(g))
    assert np.allclose(c.S @ c.S.T, np.eye(c.size), atol=1e-12)
    if z.imag > 0:
        U = evaluate_U(s, z)
        assert np.linalg.norm(U, 2) <= math.exp(-z.imag * s.min_length) + 1e-12
        radius = np.max(np.abs(np.linalg.eigvals(U)))
        assert radius <= math.exp(-z.imag * s.min_length) + 1e-12
        if z.imag >= 1e-3:
            assert radius < 1
    # reflection symmetry
    d1 = secular_value(s, z)
    d2 = secular_value(s, -z.conjugate())
    assert abs(d2.det.conjugate() - d1.det) <= 1e-10 * max(1.0, abs(d1.det))
