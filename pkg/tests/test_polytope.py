import json
import math

import numpy as np
import pytest

from tensorkin.polytope import (
    GeometryError,
    Intersection,
    Polytope,
    RegionSpec,
    SphereRegion,
    catalog,
    clip_face,
    face_lattice_summary,
    intersect,
    nearest_point,
    nearest_points,
    normal_cone_contains,
    parse_polytope,
    parse_region,
    parse_sphere_region,
    scale,
    simplex_volume,
    support_function,
    transform,
    translation_window,
    triangulate,
)
from tensorkin.subspaces import RngStream, haar_rotations


@pytest.mark.parametrize("name,dim,fv", [
    ("cube", 2, (4, 4)), ("cube", 3, (8, 12, 6)), ("simplex", 3, (4, 6, 4)),
    ("crosspoly", 3, (6, 12, 8)), ("simplex", 2, (3, 3)),
])
def test_face_lattices_and_euler(name, dim, fv):
    P = catalog(name, dim=dim)
    assert P.f_vector == fv
    assert face_lattice_summary(P)["euler"] == 1


def test_volumes():
    assert math.isclose(catalog("cube", 2.0, dim=3).volume(), 8.0)
    assert math.isclose(catalog("simplex", dim=3).volume(), 1 / 6)
    assert math.isclose(catalog("crosspoly", dim=3).volume(), 4 / 3)
    m, r = 7, 1.3
    assert math.isclose(catalog("ngon", m, r).volume(), 0.5 * m * r * r * math.sin(2 * math.pi / m))


def test_redundant_points_and_degenerate_input():
    pts = [[0, 0], [1, 0], [0, 1], [1, 1], [0.5, 0.5], [0.5, 0]]
    assert Polytope.from_vertices(pts).f_vector == (4, 4)
    with pytest.raises(GeometryError):
        Polytope.from_vertices([[0, 0], [1, 1], [2, 2]])


def test_halfspace_round_trip_and_empty():
    P = catalog("cube", dim=3)
    Q = Polytope.from_halfspaces(P.normals, P.offsets)
    assert Q.f_vector == P.f_vector and math.isclose(Q.volume(), 1.0)
    empty = Polytope.from_halfspaces(np.array([[1.0, 0], [-1.0, 0], [0, 1.0], [0, -1.0]]),
                                     np.array([-1.0, 0.5, 1.0, 1.0]))
    assert empty is Intersection.EMPTY
    flat = Polytope.from_halfspaces(np.array([[1.0, 0], [-1.0, 0], [0, 1.0], [0, -1.0]]),
                                    np.array([0.0, 0.0, 1.0, 1.0]))
    assert flat is Intersection.DEGENERATE


def test_intersection_of_translated_squares():
    P = catalog("cube", dim=2)
    Q = transform(P, np.eye(2), [0.5, 0.25])
    K = intersect(P, Q)
    assert math.isclose(K.volume(), 0.5 * 0.75)
    assert intersect(P, transform(P, np.eye(2), [3.0, 0])) is Intersection.EMPTY


def test_transform_scale_support():
    P = catalog("simplex", dim=3)
    R = haar_rotations(RngStream(1, "r"), 3, 1)[0]
    t = np.array([0.1, -2.0, 0.3])
    Q = transform(P, R, t)
    assert math.isclose(Q.volume(), P.volume())
    u = np.array([0.3, 0.4, -0.5])
    assert math.isclose(support_function(Q, u), support_function(P, R.T @ u) + t @ u)
    assert math.isclose(scale(P, 2.0).volume(), 8 * P.volume())


def test_normal_cones_of_the_square():
    P = catalog("cube", dim=2)
    v = next(F for F in P.faces[0] if np.allclose(P.face_vertices(F)[0], [0, 0]))
    assert normal_cone_contains(P, v, np.array([-1.0, -1.0]) / math.sqrt(2))
    assert not normal_cone_contains(P, v, np.array([1.0, 0.0]))


def test_translation_window_contains_all_hits():
    P, Q = catalog("cube", dim=2), catalog("simplex", dim=2)
    W = translation_window(P, Q)
    rng = np.random.default_rng(0)
    lo, hi = W.lo - 1, W.hi + 1
    for t in lo + (hi - lo) * rng.uniform(size=(300, 2)):
        K = intersect(P, transform(Q, np.eye(2), t))
        if isinstance(K, Polytope):
            assert np.all(W.contains(t[None, :]))


def test_triangulation_and_clipping():
    P = catalog("cube", dim=3)
    top = P.faces[3][0]
    assert math.isclose(sum(simplex_volume(S) for S in triangulate(P, top)), 1.0)
    half = RegionSpec.halfspace([1.0, 0.0, 0.0], 0.5)
    assert math.isclose(sum(simplex_volume(S) for S in clip_face(P, top, half)), 0.5)
    sq = catalog("cube", dim=2)
    assert math.isclose(sum(simplex_volume(S) for S in clip_face(sq, sq.faces[2][0],
                                                                 RegionSpec.halfspace([1.0, 0.0], 0.5))), 0.5)
    assert clip_face(sq, sq.faces[2][0], RegionSpec.box([5, 5], [6, 6])) == []


def test_nearest_points_against_brute_force():
    P = catalog("simplex", dim=2)
    rng = np.random.default_rng(3)
    X = rng.uniform(-1, 2, size=(200, 2))
    p, inside = nearest_points(P, X)
    grid = np.array([[a, b] for a in np.linspace(0, 1, 201) for b in np.linspace(0, 1, 201) if a + b <= 1])
    for x, px, ins in zip(X[:40], p[:40], inside[:40]):
        d_brute = np.min(np.linalg.norm(grid - x, axis=1))
        assert abs(np.linalg.norm(x - px) - d_brute) < 6e-3
        assert ins == bool(P.contains(x[None, :])[0])
    q, normal = nearest_point(P, [2.0, 2.0])
    assert np.allclose(q, [0.5, 0.5]) and np.allclose(normal, np.array([1, 1]) / math.sqrt(2))


def test_regions():
    h = RegionSpec.halfspace([1.0, 0.0], 0.5)
    with pytest.raises(GeometryError):
        RegionSpec.halfspace([2.0, 0.0], 1.0)
    assert math.isclose(parse_region("halfspace:2,0:1").b, 0.5)
    assert list(h.contains(np.array([[0.4, 9.0], [0.6, 0.0]]))) == [True, False]
    assert h.volume() == math.inf
    assert RegionSpec.box([0, 0], [2, 3]).volume() == 6.0
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert np.allclose(h.rotated(R).a, [0.0, 1.0])
    cap = SphereRegion.cap([0.0, 1.0], 0.5)
    assert list(cap.contains(np.array([[0.0, 1.0], [1.0, 0.0]]))) == [True, False]
    with pytest.raises(GeometryError):
        SphereRegion.cap([0.0, 2.0], 0.5)


def test_parsers_and_json():
    assert parse_polytope("cube:2", dim=3).volume() == pytest.approx(8.0)
    assert parse_polytope("box:0,0:1,3").volume() == pytest.approx(3.0)
    assert parse_polytope("ngon:6,1").f_vector == (6, 6)
    with pytest.raises(GeometryError):
        parse_polytope("blob")
    r = parse_region("halfspace:1,0:0.5")
    assert r.kind == "halfspace" and r.b == 0.5
    assert parse_region("box:0,0:1,1").kind == "box"
    assert parse_sphere_region("cap:0,2:0.1").v.tolist() == [0.0, 1.0]
    P = catalog("simplex", dim=3)
    data = json.loads(json.dumps(P.to_json()))
    assert data["dim"] == 3 and Polytope.from_json(data).f_vector == P.f_vector
    with pytest.raises(GeometryError):
        Polytope.from_json({"dim": 2, "vertices": P.vertices.tolist()})
