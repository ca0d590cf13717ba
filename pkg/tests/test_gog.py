from fractions import Fraction

import pytest

from gradlab.gog import (
    VolumeVector,
    FreeBlock,
    AbelianBlock,
    SurfaceBlock,
    TRIVIAL_BLOCK,
    CYCLIC_BLOCK,
    Edge,
    GraphOfGroups,
    fundamental_presentation,
    assembled_volume_vector,
    euler_characteristic,
    subgroup_shadows,
    subgroup_volume_vector,
    edge_shadow_indices,
    coset_ratio_check,
    graph_from_dict,
)
from gradlab.permgrp import Perm, PermGroup, word_image
from gradlab.towers import double_of_free
from gradlab.words import parse_word


def cyclic_quotient(m, exponents):
    """Quotient Z/m with each generator acting as +e on m points."""
    group = PermGroup(m, [Perm(tuple((x + 1) % m for x in range(m)))])
    images = [Perm(tuple((x + e) % m for x in range(m))) for e in exponents]
    return group, images


def test_volume_vector_behaviour():
    vv = VolumeVector((1, 4, 4))
    assert vv[0] == 1 and vv[2] == 4
    assert vv[-1] == 0 and vv[5] == 0
    assert vv.euler() == 1
    assert len(vv) == 3
    with pytest.raises(ValueError):
        VolumeVector((1, -2))


def test_block_volume_vectors():
    assert FreeBlock(2).volume_vector().entries == (1, 2)
    assert FreeBlock(2).sub_volume_vector(3).entries == (1, 4)
    assert TRIVIAL_BLOCK.volume_vector().entries == (1, 0)
    assert CYCLIC_BLOCK.sub_volume_vector(5).entries == (1, 1)
    assert AbelianBlock(3).volume_vector().entries == (1, 3, 3, 1)
    assert AbelianBlock(3).sub_volume_vector(9).entries == (1, 3, 3, 1)
    assert SurfaceBlock(2).volume_vector().entries == (1, 4, 1)
    # degree-3 cover of genus 2 is genus 4
    assert SurfaceBlock(2).sub_volume_vector(3).entries == (1, 8, 1)
    with pytest.raises(ValueError):
        SurfaceBlock(1)
    with pytest.raises(ValueError):
        TRIVIAL_BLOCK.sub_volume_vector(2)


def test_block_sub_betti():
    assert FreeBlock(2).sub_betti(3, 1) == 4
    assert FreeBlock(2).sub_betti(3, 2) == 0
    assert AbelianBlock(3).sub_betti(7, 2) == 3
    assert SurfaceBlock(2).sub_betti(2, 2) == 1


def test_edge_validation():
    w = parse_word("a", ("a", "b"))
    with pytest.raises(ValueError):
        Edge(0, 1, FreeBlock(2), (w, w), (w, w))
    with pytest.raises(ValueError):
        Edge(0, 1, CYCLIC_BLOCK, (), ())
    with pytest.raises(ValueError):
        Edge(0, 1, CYCLIC_BLOCK, (parse_word("", ("a",)),), (w,))


def test_graph_validation():
    with pytest.raises(ValueError):
        GraphOfGroups((), ())
    # two vertices, no edges: disconnected
    with pytest.raises(ValueError):
        GraphOfGroups((FreeBlock(1), FreeBlock(1)), ())


@pytest.fixture
def z_star_z():
    """Z * Z as two cyclic vertices joined along the trivial group."""
    return GraphOfGroups((CYCLIC_BLOCK, CYCLIC_BLOCK),
                         (Edge(0, 1, TRIVIAL_BLOCK),))


@pytest.fixture
def double():
    return double_of_free(2, "a b")


def test_assembled_volume_vector(z_star_z, double):
    assert assembled_volume_vector(z_star_z).entries == (2, 3, 0)
    assert euler_characteristic(z_star_z) == -1
    assert assembled_volume_vector(double).entries == (2, 5, 1)
    assert euler_characteristic(double) == -2


def test_fundamental_presentation_free_product(z_star_z):
    p = fundamental_presentation(z_star_z)
    assert p.generator_names == ("a0", "a1")
    assert p.relators == ()


def test_fundamental_presentation_double(double):
    p = fundamental_presentation(double)
    assert p.generator_names == ("a0", "b0", "a1", "b1")
    assert [p.render(r) for r in p.relators] == ["a0 b0 b1^-1 a1^-1"]


def test_fundamental_presentation_loop_edge():
    # one vertex, one self edge: an ascending HNN letter appears
    g = GraphOfGroups(
        (FreeBlock(2),),
        (Edge(0, 0, CYCLIC_BLOCK,
              (parse_word("a", ("a", "b")),),
              (parse_word("b", ("a", "b")),)),))
    p = fundamental_presentation(g)
    assert p.generator_names == ("a0", "b0", "t0")
    assert [p.render(r) for r in p.relators] == ["t0 a0 t0^-1 b0^-1"]


def test_subgroup_volume_vector_double(double):
    p = fundamental_presentation(double)
    # kill both vertex words mod 2 by sending every generator to the flip
    group, images = cyclic_quotient(2, (1, 1, 1, 1))
    vv = subgroup_volume_vector(double, group, images)
    # both vertex groups survive with local index 2, the edge word a b
    # has image of order 1, so the edge splits into two trivial-meeting copies
    assert vv.entries == (2, 8, 2)
    assert vv.euler() == 2 * euler_characteristic(double)


def test_subgroup_shadow_bookkeeping(double):
    group, images = cyclic_quotient(2, (1, 0, 1, 0))
    vertex_rows, edge_rows = subgroup_shadows(double, group, images)
    assert [(copies, local) for _, copies, local in vertex_rows] == [(1, 2), (1, 2)]
    # edge word a b maps to the flip: one copy, local index 2
    assert [(copies, local) for _, copies, local in edge_rows] == [(1, 2)]
    assert edge_shadow_indices(double, group, images) == [2]
    vv = subgroup_volume_vector(double, group, images)
    assert vv.entries == (2, 7, 1)
    assert vv.euler() == -4


def test_subgroup_volume_vector_rejects_bad_images(double):
    group, images = cyclic_quotient(2, (1, 0, 0, 0))
    with pytest.raises(ValueError):
        subgroup_volume_vector(double, group, images)
    with pytest.raises(ValueError):
        subgroup_volume_vector(double, group, images[:2])


def test_coset_ratio_identity():
    group = PermGroup(3, [Perm((1, 2, 0)), Perm((1, 0, 2))])
    h = [Perm((1, 0, 2))]
    lhs, rhs = coset_ratio_check(group, h)
    assert lhs == rhs == Fraction(1, 2)
    # trivial H: image index 6 over order 6 on one side, 1/order(image) on the other
    lhs, rhs = coset_ratio_check(group, [])
    assert lhs == rhs == Fraction(1, 1)


def test_graph_from_dict_round_trip():
    d = {
        "vertices": [{"type": "free", "rank": 2}, {"type": "surface", "genus": 2}],
        "edges": [{"source": 0, "target": 1,
                   "iota_word": "a b", "tau_word": "a1"}],
    }
    g = graph_from_dict(d)
    assert isinstance(g.vertices[0], FreeBlock)
    assert isinstance(g.vertices[1], SurfaceBlock)
    assert g.edges[0].block == CYCLIC_BLOCK
    assert assembled_volume_vector(g).entries == (2, 7, 2)
    assert euler_characteristic(g) == -3
    with pytest.raises(ValueError):
        graph_from_dict({"vertices": [{"type": "mystery"}], "edges": []})


def test_relator_images_checked_through_lift(double):
    p = fundamental_presentation(double)
    group, images = cyclic_quotient(3, (1, 0, 1, 0))
    for r in p.relators:
        assert word_image(r, images).is_identity()
    vv = subgroup_volume_vector(double, group, images)
    # index 3: two free rank-4 pieces joined along three cyclic stripes
    assert vv.entries == (2, 9, 1)
    assert vv.euler() == 3 * euler_characteristic(double)
