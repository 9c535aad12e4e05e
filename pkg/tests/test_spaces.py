import numpy as np
import pytest

from graphpot import (
    Domain,
    ExtendedFunction,
    HarmonicSpace,
    bounded_transform,
    generate,
    glue,
    join,
    meet,
    phi,
    restrict,
    sup_norm,
)
from graphpot.errors import (
    GraphPotError,
    IncompatibleFamilyError,
    InvalidGeometryError,
)


def test_path5_shape(path5):
    assert path5.n == 5
    assert path5.absorbing.tolist() == [True, False, False, False, True]
    assert path5.ids[path5.base_point] == "2"
    # interior rows average the two neighbours
    assert np.allclose(path5.P[1].toarray().ravel(), [0.5, 0, 0.5, 0, 0])
    # absorbing rows push no mass
    assert path5.P[0].nnz == 0


def test_no_route_to_absorption_rejected():
    import scipy.sparse as sp

    W = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(InvalidGeometryError):
        HarmonicSpace(["a", "b"], W, [], "a")


def test_killing_gives_finite_green_without_absorbing():
    import scipy.sparse as sp

    W = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    s = HarmonicSpace(["a", "b"], W, [], "a", killing={"a": 0.1, "b": 0.1})
    assert s.row_sums.max() < 1.0


def test_negative_weight_rejected():
    import scipy.sparse as sp

    W = sp.csr_matrix(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    with pytest.raises(InvalidGeometryError):
        HarmonicSpace(["a", "b"], W, ["b"], "a")


def test_domain_boundary_derived(path5):
    dom = Domain(path5, ["1", "2"])
    assert [path5.ids[i] for i in dom.boundary] == ["0", "3"]


def test_domain_whole_interior(path5):
    dom = Domain.whole_interior(path5)
    assert [path5.ids[i] for i in dom.interior] == ["1", "2", "3"]
    assert [path5.ids[i] for i in dom.boundary] == ["0", "4"]


def test_restrict_and_glue(path5):
    d1, d2 = Domain(path5, ["1", "2"]), Domain(path5, ["2", "3"])
    f = ExtendedFunction(path5, np.arange(5, dtype=float), domain=d1)
    g = ExtendedFunction(path5, np.arange(5, dtype=float), domain=d2)
    glued = glue([(d1, f), (d2, g)])
    assert set(glued.domain.interior.tolist()) == {1, 2, 3}
    back = restrict(glued, d1)
    assert np.array_equal(back.values[d1.vertices()], f.values[d1.vertices()])


def test_glue_conflict_reports_vertex(path5):
    d1, d2 = Domain(path5, ["1", "2"]), Domain(path5, ["2", "3"])
    f = ExtendedFunction(path5, np.arange(5, dtype=float), domain=d1)
    bad = np.arange(5, dtype=float)
    bad[2] = 99.0
    g = ExtendedFunction(path5, bad, domain=d2)
    with pytest.raises(IncompatibleFamilyError):
        glue([(d1, f), (d2, g)])


def test_lattice_ops(path5):
    a = ExtendedFunction(path5, np.array([0, 1, 2, 3, 4], dtype=float))
    b = ExtendedFunction(path5, np.array([4, 3, 2, 1, 0], dtype=float))
    assert meet(a, b).values.tolist() == [0, 1, 2, 1, 0]
    assert join(a, b).values.tolist() == [4, 3, 2, 3, 4]


def test_join_absorbs_infinity(path5):
    inf_mask = np.zeros(5, dtype=bool)
    inf_mask[2] = True
    a = ExtendedFunction(path5, np.zeros(5), inf_mask=inf_mask)
    b = ExtendedFunction(path5, np.ones(5))
    assert join(a, b).inf_mask[2]
    assert sup_norm(join(a, b)) == np.inf


def test_bounded_transform_range(path5):
    inf_mask = np.zeros(5, dtype=bool)
    inf_mask[0] = True
    f = ExtendedFunction(path5, np.array([0.0, -3.0, 1.0, 100.0, 2.0]),
                         inf_mask=inf_mask)
    out = bounded_transform(f)
    assert out[0] == 1.0
    assert np.all((out >= 0) & (out <= 1))
    assert out[1] == 0.75


def test_phi_scalar():
    assert phi(0.0) == 0.0
    assert phi(float("inf")) == 1.0
    assert phi(-1.0) == 0.5


def test_generators_parse():
    assert generate("grid2d(4)").n == 16
    assert generate("path5").n == 5
    assert generate("binary_tree(2)").n == 7
    with pytest.raises(GraphPotError):
        generate("nonsense(3)")


def test_restrict_outside_domain_raises(path5):
    f = ExtendedFunction(path5, np.zeros(5), domain=Domain(path5, ["1"]))
    with pytest.raises(GraphPotError):
        restrict(f, Domain(path5, ["3"]))
