import numpy as np
import pytest

from graphpot import (
    fine_metric,
    green_function,
    polar_flag,
    polar_witness,
    refinement_family,
    regularity_test,
    thin_at,
    thorn_lattice,
    wiener_series,
)
from graphpot.errors import (
    RefinementError,
    ThinnessUndefinedError,
    UnsupportedResolutionError,
    WitnessUnavailableError,
)
from graphpot.polar import DegenerateTestError


N = 16  # smallest supported lattice keeps the suite fast


@pytest.fixture(scope="module")
def thorn16():
    return thorn_lattice(N, "thorn")


@pytest.fixture(scope="module")
def cone16():
    return thorn_lattice(N, ("cone", 45.0))


@pytest.fixture(scope="module")
def segment_family():
    # three levels: the capacity decay of a one-dimensional set only clears
    # the vanishing threshold once the spacing has been quartered
    return refinement_family("segment", levels=(16, 32, 64))


def test_unsupported_resolution():
    with pytest.raises(UnsupportedResolutionError):
        thorn_lattice(17)


def test_lattice_shape(thorn16):
    space, A, tip = thorn16
    assert space.n == (N + 1) ** 3
    assert np.allclose(space.coords[space._idx(tip)], 0.0)
    assert space.spacing == pytest.approx(1.0 / N)
    # faces of the box are the (only) absorbing vertices
    assert int(space.absorbing.sum()) == (N + 1) ** 3 - (N - 1) ** 3


def test_thorn_inside_cone_and_tiny(thorn16, cone16):
    space, A_thorn, _ = thorn16
    _, A_cone, _ = cone16
    assert set(A_thorn) <= set(A_cone)
    # the cusp is far thinner than the 45-degree cone
    assert 0 < len(A_thorn) < len(A_cone) / 4
    # every thorn vertex sits strictly above the equator
    for v in A_thorn:
        assert space.coords[space._idx(v)][2] > 0


def test_halfspace_cone_count():
    space, A, _ = thorn_lattice(N, ("cone", 90.0))
    # upper open half-lattice minus the faces
    assert len(A) == (N - 1) ** 2 * (N // 2 - 1)


def test_wiener_report_structure(cone16):
    space, A, tip = cone16
    rep = wiener_series(space, A, tip)
    assert rep.shells == sorted(rep.shells)
    assert len(rep.caps) == len(rep.increments) == len(rep.partials)
    assert np.allclose(np.cumsum(rep.increments), rep.partials)
    assert all(c >= 0 for c in rep.caps)
    # shell k=1 has radius 1/2 and touches the absorbing frame: skipped
    assert 1 not in rep.shells
    assert any("frame" in n or "skip" in n for n in rep.notices)


def test_wiener_difference_obstacle(cone16):
    space, A, tip = cone16
    rep = wiener_series(space, A, tip, obstacle="difference")
    assert rep.obstacle == "difference"
    assert all(c >= 0 for c in rep.caps)


def test_regularity_halfspace_attained():
    space, A, tip = thorn_lattice(N, ("cone", 90.0))
    attained, gap = regularity_test(space, A, tip)
    assert attained and gap < 0.25


def test_regularity_constant_data_zero_gap(cone16):
    space, A, tip = cone16
    f = {v: 1.0 for v in A}
    for i in np.flatnonzero(space.absorbing):
        f[space.ids[i]] = 1.0
    f[tip] = 1.0
    attained, gap = regularity_test(space, A, tip, f=f)
    assert attained and gap < 1e-10


def test_regularity_degenerate_interior_tip():
    space, A, _ = thorn_lattice(N, ("cone", 90.0))
    # a point well inside the half-space body
    inner = f"{N // 2},{N // 2},{N // 2 + 2}"
    with pytest.raises(DegenerateTestError):
        regularity_test(space, A, inner)


def test_polar_flag_segment_vs_ball(segment_family):
    flag, caps = polar_flag(segment_family)
    assert flag == "vanishing"
    assert caps[-1] < caps[0]
    ball = refinement_family("ball", levels=(16, 32))
    flag_b, _ = polar_flag(ball)
    assert flag_b == "non-vanishing"


def test_polar_flag_empty_family():
    fam = refinement_family("empty", levels=(16, 32))
    flag, caps = polar_flag(fam)
    assert flag == "vanishing" and all(c == 0 for c in caps)


def test_polar_flag_requires_refinement(segment_family):
    with pytest.raises(RefinementError):
        polar_flag(segment_family[:1])
    with pytest.raises(RefinementError):
        polar_flag(list(reversed(segment_family)))


def test_witness_diverges_on_segment(segment_family):
    w = polar_witness(segment_family, x_check=(0.25, 0.25, 0.0))
    on_set = (0.0, 0.0, 0.125)
    partials = [w.partial_value(on_set, level=k) for k in (1, 2, 3)]
    assert partials[2] > partials[1] > partials[0] > 0
    assert w.partial_value((0.25, 0.25, 0.0)) < 0.1 * partials[-1]


def test_witness_unavailable_for_ball():
    ball = refinement_family("ball", levels=(16, 32))
    with pytest.raises(WitnessUnavailableError):
        polar_witness(ball)


def test_witness_checkpoint_collision(segment_family):
    with pytest.raises(WitnessUnavailableError):
        polar_witness(segment_family, x_check=(0.0, 0.0, 0.125))


def test_witness_function_is_superharmonic(segment_family):
    w = polar_witness(segment_family)
    u = w.function(1)
    space = segment_family[0][0]
    vals = u.values
    res = space.P @ vals - vals
    assert np.max(res[~space.absorbing]) < 1e-9


def test_thin_at_basics(path5):
    # equilibrium potential of {3} is linear: value 2/3 at vertex 2
    thin, prof = thin_at(path5, ["3"], "2", radii=[2.5, 1.5])
    assert not thin and prof[-1] == pytest.approx(2.0 / 3.0, abs=1e-10)
    # empty set is thin everywhere
    thin_e, prof_e = thin_at(path5, [], "2", radii=[2.5, 1.5])
    assert thin_e and prof_e == [0.0, 0.0]


def test_thin_at_monotone_in_set(thorn16):
    space, A_thorn, tip = thorn16
    _, A_cone, _ = thorn_lattice(N, ("cone", 45.0))
    x = f"{N // 2},{N // 2},{N // 2 - 1}"  # just below the tip
    radii = [0.3, 0.2, 0.1]
    _, p_small = thin_at(space, A_thorn, x, radii)
    _, p_big = thin_at(space, A_cone, x, radii)
    assert all(a <= b + 1e-12 for a, b in zip(p_small, p_big))


def test_thin_at_rejects_bad_input(path5):
    with pytest.raises(ThinnessUndefinedError):
        thin_at(path5, ["2"], "2", radii=[2.0, 1.0])
    with pytest.raises(ThinnessUndefinedError):
        thin_at(path5, ["3"], "2", radii=[1.0, 2.0])


def test_fine_metric_axioms(path5):
    from graphpot import martin_kernel

    table = martin_kernel(green_function(path5))
    assert fine_metric(table, "1", "1") == 0.0
    d12 = fine_metric(table, "1", "2")
    assert d12 == fine_metric(table, "2", "1") > 0
    d13 = fine_metric(table, "1", "3")
    assert d13 <= d12 + fine_metric(table, "2", "3") + 1e-12
