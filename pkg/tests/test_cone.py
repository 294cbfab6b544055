import random

import pytest

from tropocone.cone import (
    EmptyCone,
    NotFullDimensional,
    NotIntoCodomain,
    Poic,
    check_morphism,
    dual_generators,
    faces,
    facets_from_rays,
    poic_equal_sets,
    poic_new,
    poic_subset,
    product,
    strict_feasible,
)
from tropocone.intlinalg import (
    IntMatrix,
    Lattice,
    dot,
    lattice_index,
    quotient,
)


def quadrant():
    return poic_new(2, [((1, 0), False), ((0, 1), False)])


def half_open_quadrant():
    return poic_new(2, [((1, 0), False), ((0, 1), True)])


def metrics_2cycle():
    # quadrant minus the origin: x>=0, y>=0, x+y>0
    return poic_new(2, [((1, 0), False), ((0, 1), False), ((1, 1), True)])


def test_dual_generators_quadrant():
    gens = dual_generators([(1, 0), (0, 1)], 2)
    assert set(gens) == {(1, 0), (0, 1)}


def test_dual_generators_halfspace():
    gens = dual_generators([(0, 1)], 2)
    # ± the lineality direction plus one ray with positive y
    assert (1, 0) in gens and (-1, 0) in gens
    assert any(dot((0, 1), g) > 0 for g in gens)


def test_dual_generators_point():
    gens = dual_generators([(1, 0), (-1, 0), (0, 1), (0, -1)], 2)
    assert gens == ()


def test_facets_from_rays_roundtrip():
    facets, ann = facets_from_rays([(1, 0), (1, 2)], 2)
    assert ann == ()
    assert set(facets) == {(0, 1), (2, -1)}
    facets, ann = facets_from_rays([(1, 1)], 2)
    assert len(ann) == 1
    assert len(facets) == 1


def test_poic_new_quadrant():
    q = quadrant()
    assert q.dim == 2
    assert set(q.closure_rays) == {(1, 0), (0, 1)}
    assert q.contains((0, 0))
    assert q.is_closed()


def test_poic_new_half_open():
    q = half_open_quadrant()
    assert set(q.closure_rays) == {(1, 0), (0, 1)}
    assert q.contains((1, 1)) and q.contains((0, 1))
    assert not q.contains((1, 0))
    assert not q.contains((0, 0))


def test_poic_new_empty():
    with pytest.raises(EmptyCone):
        poic_new(2, [((1, 0), True), ((-1, 0), True)])


def test_poic_new_not_full_dimensional():
    with pytest.raises(NotFullDimensional):
        poic_new(2, [((1, 0), False), ((-1, 0), False)])


def test_redundant_closed_strict_is_kept():
    c = metrics_2cycle()
    # x+y>0 is closed-redundant but strict-essential: origin excluded
    assert not c.contains((0, 0))
    assert c.contains((1, 0)) and c.contains((0, 1))
    assert len(c.facets) == 3


def test_implied_strict_is_removed():
    c = poic_new(2, [((1, 0), True), ((0, 1), False), ((1, 1), True)])
    # x+y>0 follows from x>0, y>=0
    assert len(c.facets) == 2


def test_faces_closed_quadrant():
    fs = faces(quadrant())
    assert [f.dim for f in fs] == [0, 1, 1, 2]


def test_faces_half_open_quadrant():
    fs = faces(half_open_quadrant())
    # only the cone itself and the ray x=0, y>0 survive
    assert [f.dim for f in fs] == [1, 2]
    ray = fs[0]
    assert ray.gens_key == ((0, 1),)
    assert not ray.sub.is_closed()  # the re-coordinated ray is open: t > 0
    assert ray.sub.facets == (((1,), True),)


def test_faces_metrics_2cycle():
    fs = faces(metrics_2cycle())
    # two half-open rays and the cone; the origin is excluded
    assert [f.dim for f in fs] == [1, 1, 2]
    for f in fs:
        if f.dim == 1:
            assert f.sub.facets == (((1,), True),)


def test_face_lattices_are_saturated():
    # Lin_N(face) saturated in N^sigma: quotient by the face lattice is free
    for sigma in (quadrant(), metrics_2cycle(),
                  poic_new(3, [((1, 0, 0), False), ((0, 1, 0), False),
                               ((0, 0, 1), True)])):
        for f in faces(sigma):
            if f.dim in (0, sigma.rank):
                continue
            gens = IntMatrix.from_rows(
                [f.matrix.col(j) for j in range(f.matrix.cols)], sigma.rank)
            q = quotient(sigma.rank, gens)
            assert q.torsion_factors == ()


def test_product():
    p = product(quadrant(), poic_new(1, [((1,), True)]))
    assert p.rank == 3
    assert p.contains((0, 0, 1))
    assert not p.contains((0, 0, 0))
    point = poic_new(0, [])
    assert product(point, quadrant()).facets == quadrant().facets
    open_q = product(poic_new(1, [((1,), True)]), poic_new(1, [((1,), True)]))
    assert not open_q.contains((1, 0))
    assert open_q.contains((1, 1))


def test_product_faces_count():
    # faces of a product are pairwise products of faces
    a = quadrant()
    b = poic_new(1, [((1,), False)])
    p = product(a, b)
    assert len(faces(p)) == len(faces(a)) * len(faces(b))


def test_check_morphism_identity_face_embedding():
    q = quadrant()
    m = check_morphism(IntMatrix.identity(2), q, q)
    assert m.injective and m.face_embedding


def test_check_morphism_paper_forgetful_map():
    # (x,y,l) -> (x, y+l) from R^2_{>=0} x R_{>0} to R_{>=0} x R_{>0}
    dom = poic_new(3, [((1, 0, 0), False), ((0, 1, 0), False),
                       ((0, 0, 1), True)])
    cod = poic_new(2, [((1, 0), False), ((0, 1), True)])
    mat = IntMatrix.from_rows([[1, 0, 0], [0, 1, 1]])
    m = check_morphism(mat, dom, cod)
    assert not m.injective
    assert not m.face_embedding


def test_check_morphism_not_into_codomain():
    ray = poic_new(1, [((1,), False)])
    with pytest.raises(NotIntoCodomain):
        check_morphism(IntMatrix.from_rows([[-1]]), ray, ray)


def test_check_morphism_strictness_violation():
    # identity maps the closed ray into the closure but not into the open ray
    closed = poic_new(1, [((1,), False)])
    open_ray = poic_new(1, [((1,), True)])
    with pytest.raises(NotIntoCodomain):
        check_morphism(IntMatrix.identity(1), closed, open_ray)
    # the other direction is fine
    m = check_morphism(IntMatrix.identity(1), open_ray, closed)
    assert m.injective


def test_face_of_face_is_face():
    sigma = poic_new(3, [((1, 0, 0), False), ((0, 1, 0), False),
                         ((0, 0, 1), False)])
    keys = {frozenset(f.gens_key) for f in faces(sigma)}
    for f in faces(sigma):
        for ff in faces(f.sub):
            lifted = frozenset(
                tuple(f.matrix.apply(ff.matrix.apply(g)))
                for g in ff.sub.closure_rays)
            # the lifted generators must be the key of some face of sigma
            assert lifted in keys


def test_membership_oracle_random():
    rng = random.Random(11)
    sigma = metrics_2cycle()
    for _ in range(200):
        p = (rng.randint(-3, 3), rng.randint(-3, 3))
        expected = p[0] >= 0 and p[1] >= 0 and p[0] + p[1] > 0
        assert sigma.contains(p) == expected


def test_poic_subset():
    assert poic_subset(half_open_quadrant(), quadrant())
    assert not poic_subset(quadrant(), half_open_quadrant())
    assert poic_equal_sets(quadrant(), quadrant())


def test_strict_feasible_witness():
    w = strict_feasible([((1, 0), False), ((0, 1), True)], 2)
    assert w is not None and w[1] > 0 and w[0] >= 0
    assert strict_feasible([((1, 0), True), ((-1, 0), False)], 2) is None


def test_rank_zero_poic():
    pt = poic_new(0, [])
    assert pt.dim == 0
    assert pt.contains(())
    assert len(faces(pt)) == 1
