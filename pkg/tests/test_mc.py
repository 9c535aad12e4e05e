import numpy as np
import pytest

from graphpot import (
    Domain,
    generate,
    green_function,
    harmonic_measure,
    mc_green,
    mc_hitting,
    solve_dirichlet,
)

from conftest import random_transient_space


def test_determinism_fixed_seed(path5):
    dom = Domain.whole_interior(path5)
    a = mc_hitting(dom, "2", samples=2000, seed=7)
    b = mc_hitting(dom, "2", samples=2000, seed=7)
    assert np.array_equal(a.weights, b.weights)
    c = mc_hitting(dom, "2", samples=2000, seed=8)
    assert not np.array_equal(a.weights, c.weights)


def test_hitting_within_3_sigma_path5(path5):
    dom = Domain.whole_interior(path5)
    exact = harmonic_measure(dom, "1")
    est = mc_hitting(dom, "1", samples=100_000, seed=1)
    for pid, se in zip(est.ids, est.stderr):
        assert abs(est[pid] - exact[pid]) <= 3 * se + 1e-12


def test_hitting_within_3_sigma_grid2d():
    g = generate("grid2d(4)")
    dom = Domain.whole_interior(g)
    x = g.ids[int(dom.interior[0])]
    exact = harmonic_measure(dom, x)
    est = mc_hitting(dom, x, samples=100_000, seed=2)
    for pid, se in zip(est.ids, est.stderr):
        assert abs(est[pid] - exact[pid]) <= 3 * se + 1e-12


def test_green_within_3_sigma(path5):
    G = green_function(path5)
    exact = G.green("2", "2")
    mean, se = mc_green(path5, "2", "2", samples=100_000, seed=3)
    assert abs(mean - exact) <= 3 * se


def test_killed_chain_submass(rng):
    s = random_transient_space(rng, killed=True)
    dom = Domain.whole_interior(s)
    x = s.ids[int(dom.interior[0])]
    est = mc_hitting(dom, x, samples=50_000, seed=4)
    h = solve_dirichlet(dom, {s.ids[b]: 1.0 for b in dom.boundary})
    survival = h[s._idx(x)]
    # total MC mass tracks the survival probability
    assert abs(est.total - survival) <= 4 * np.sqrt(survival * (1 - survival) / 50_000) + 1e-9


def test_visits_to_absorbing_vertex_zero(path5):
    mean, _ = mc_green(path5, "2", "0", samples=1000, seed=5)
    assert mean == 0.0


def test_start_outside_interior_rejected(path5):
    dom = Domain.whole_interior(path5)
    with pytest.raises(ValueError):
        mc_hitting(dom, "0", samples=10, seed=0)
