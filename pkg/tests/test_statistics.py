import math

import numpy as np
import pytest

from reslab.ensembles import EnsembleSpec, fixture, hermitian_pair
from reslab.graph import remove_leads, strip_bound
from reslab.solver import Rectangle
from reslab.statistics import (
    audit,
    bin_edges,
    box_count,
    compare_open_closed,
    delta_scan,
    empirical_measure,
    ensemble_comparison,
    hermitian_strip_count,
)

from conftest import small_random


def test_bin_edges():
    assert np.allclose(bin_edges((1, 2), 0.5), [1, 1.5, 2])
    assert np.allclose(bin_edges((1, 2.2), 0.5), [1, 1.5, 2, 2.2])
    with pytest.raises(ValueError):
        bin_edges((0, 1), 0.5)


def test_box_count_examples():
    assert box_count(fixture("interval", 1.0), Rectangle(0.5, 3.5, -0.1, 0.1)) == 1
    assert box_count(fixture("balanced_path", 3, 1.0), Rectangle(0.5, 10, -3, -1e-4)) == 0
    g = small_random(2, n=8, g=2)
    K = strip_bound(g)
    assert box_count(g, Rectangle(0.5, 10, -K - 2, -K - 1e-3)) == 0


def test_interval_measure():
    m = empirical_measure(fixture("interval", 1.0), (0.5, 10), 0.5, 3)
    occupied = m.edges[:-1][m.counts > 0]
    assert np.allclose(occupied, [3.0, 6.0, 9.0])
    assert np.allclose(m.weights[m.counts > 0], 1.0)
    empty = empirical_measure(fixture("interval", 1.0), (5.0, 5.1), 0.5, 3)
    assert np.all(empty.weights == 0)


def test_closed_measure_independent_of_cutoff():
    g = remove_leads(small_random(8, n=10))
    a = empirical_measure(g, (1, 8), 0.5, 0.0)
    b = empirical_measure(g, (1, 8), 0.5, 3.0)
    assert np.array_equal(a.counts, b.counts)


def test_measure_total_matches_box_count():
    g = small_random(13, n=10, g=2)
    m = empirical_measure(g, (1, 6), 0.5, 1.0)
    assert m.total_count == box_count(g, Rectangle(1, 6, -1.0, 0.05))
    assert m.total_count == pytest.approx(m.weights.sum() * g.total_length)


def test_compare_examples():
    tri = compare_open_closed(fixture("triangle_lead"), (1, 15), 0.5, 2)
    assert math.isfinite(tri.distance)
    closed = remove_leads(small_random(1, n=10))
    assert compare_open_closed(closed, (1, 8), 0.5).distance == 0.0
    d = tri.as_dict()
    assert d["shrunken_counts"]["epsilon"] == 0.5


def test_delta_scan():
    g = small_random(17, n=12, g=4)
    scan = delta_scan(g, 1, 10, 3, [0.05, 0.4, 0.1, 0.2])
    assert scan.deltas == (0.4, 0.2, 0.1, 0.05)
    assert all(b >= a for a, b in zip(scan.counts, scan.counts[1:]))
    for d, c in zip(scan.deltas, scan.counts):
        assert c <= scan.fitted_constant * scan.lead_count / d**2.5 + 1e-9
    empty = delta_scan(fixture("balanced_path", 3, 1.0), 1, 10, 3, [0.4, 0.2])
    assert empty.counts == (0, 0) and not empty.fit_defined and empty.fitted_exponent == 0
    with pytest.raises(ValueError):
        delta_scan(g, 1, 10, 0.3, [0.4])


def test_hermitian_strip_count():
    p0 = hermitian_pair(60, 0, 0.05, 1)
    assert all(hermitian_strip_count(p0, d) == 0 for d in (1e-3, 1e-2, 0.1))
    p = hermitian_pair(60, 30, 0.5, 1)
    assert 0 <= hermitian_strip_count(p, 1e-3, (-2, 2)) <= 60
    with pytest.raises(ValueError):
        hermitian_strip_count(p, 0.0)


def test_audit_examples():
    rep = audit(fixture("triangle_lead"), Rectangle(6, 6.6, -0.2, 0.01))
    assert rep.passed and len(rep.resonances) == 1
    closed = audit(remove_leads(fixture("triangle_lead")), Rectangle(1, 7, -0.3, 0.3))
    assert closed.passed and all(abs(r.z.imag) < 1e-9 for r in closed.resonances)
    bal = audit(fixture("balanced_path", 2, 1.0), Rectangle(0.5, 5, -1, -0.01))
    assert bal.strip_bound is None and bal.notes


def test_ensemble_comparison_order():
    base = EnsembleSpec(8, 3, (1, 2), 1, 4)
    reps = ensemble_comparison(base, [8, 6], (1, 5), 0.5, threads=2)
    assert [r.open.total_length for r in reps][0] > 0 and len(reps) == 2
