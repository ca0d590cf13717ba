"""Tower constructions and the catalog of stock groups.

A tower starts from a wedge of base blocks and grows by attaching either a
torus along a maximal cyclic subgroup (asserted, not verified) or a compact
surface with boundary along loops, with the usual retraction hypothesis
recorded as a caller assertion.  Every stage keeps the result a graph of
groups with cyclic or trivial edges, so the volume calculus applies at
every height.
"""

from dataclasses import dataclass

from .errors import InvariantViolation
from .gog import (AbelianBlock, CYCLIC_BLOCK, Edge, FreeBlock,
                  GraphOfGroups, SurfaceBlock, TRIVIAL_BLOCK, VolumeVector,
                  assembled_volume_vector, euler_characteristic,
                  fundamental_presentation, _Layout)
from .words import Presentation, Word, parse_word, product_presentation


@dataclass(frozen=True)
class TorusAttach:
    """Attach Z^rank along a cyclic subgroup of the current group.

    The attaching word is written in the current fundamental presentation's
    generator names and must lie in a single vertex group.
    """

    rank: int
    word_text: str

    def __post_init__(self):
        if self.rank < 2:
            raise ValueError(f"torus attachments need rank >= 2, got {self.rank}")


@dataclass(frozen=True)
class SurfaceAttach:
    """Attach a compact surface of the given genus with one boundary circle
    per attaching word.  Only the punctured torus may have chi = -1; every
    other shape must satisfy 2 - 2g - b <= -2.  asserted_retraction records
    the caller's claim that the attachment admits the needed retraction.
    """

    genus: int
    boundary_attach_texts: tuple
    asserted_retraction: bool = True

    def __post_init__(self):
        b = len(self.boundary_attach_texts)
        if b < 1:
            raise ValueError("surface attachment needs at least one boundary circle")
        chi = 2 - 2 * self.genus - b
        if chi == -1 and (self.genus, b) != (1, 1):
            raise ValueError(f"chi = -1 surface attachment must be the punctured torus, "
                             f"got genus {self.genus} with {b} boundaries")
        if chi > -1:
            raise ValueError(f"surface attachment with chi = {chi} adds no hyperbolicity")


@dataclass(frozen=True)
class TowerSpec:
    base: tuple
    stages: tuple = ()


@dataclass(frozen=True)
class TowerResult:
    graph: GraphOfGroups
    presentation: Presentation
    euler: int


def _surface_with_boundary_block(genus, boundaries):
    """Free block for a compact surface: rank 2g + b - 1 with local names
    a1 b1 .. ag bg d1 .. d_{b-1}."""
    names = []
    for i in range(genus):
        names.extend((f"a{i + 1}", f"b{i + 1}"))
    names.extend(f"d{i + 1}" for i in range(boundaries - 1))
    rank = 2 * genus + boundaries - 1
    if rank < 1:
        raise ValueError("degenerate surface (disc) cannot be attached")
    block = FreeBlock(rank)
    # FreeBlock picks its own default names; the boundary words below are
    # written against these explicit ones, so translate by position
    return block, tuple(names)


def _boundary_words(genus, boundaries, names):
    words = []
    for i in range(boundaries - 1):
        words.append(parse_word(f"d{i + 1}", names))
    humps = " ".join(f"a{i + 1} b{i + 1} a{i + 1}^-1 b{i + 1}^-1" for i in range(genus))
    tail = " ".join(f"d{i + 1}" for i in range(boundaries - 1))
    last = (humps + " " + tail).strip()
    if not last:
        raise ValueError("surface attachment has a trivial boundary word")
    words.append(parse_word(last, names))
    return tuple(words)


def _owning_vertex(layout, w):
    """The unique vertex whose generators a lifted word uses."""
    owners = set()
    for gen, _ in w.runs:
        owner = None
        for v, off in enumerate(layout.offsets):
            count = layout.vertex_gen_counts[v]
            if off <= gen < off + count:
                owner = v
                break
        if owner is None:
            raise ValueError("attaching word uses a stable letter; it must lie "
                             "in a single vertex group")
        owners.add(owner)
    if len(owners) != 1:
        raise ValueError(f"attaching word must lie in one vertex group, spans {sorted(owners)}")
    return owners.pop()


def _localize(layout, w, vertex):
    off = layout.offsets[vertex]
    return Word(tuple((g - off, e) for g, e in w.runs))


def build_tower(spec):
    """Grow the graph of groups stage by stage.

    Attaching words are parsed against the fundamental presentation of the
    graph built so far and must lie in a single vertex group; the new block
    becomes a vertex joined by one cyclic edge per attached circle.
    """
    vertices = list(spec.base)
    edges = []
    assertions = []
    # wedge the base blocks at a point: a star of trivial edges
    for v in range(1, len(vertices)):
        edges.append(Edge(0, v, TRIVIAL_BLOCK))
    chi = sum(b.euler() for b in vertices) - (len(vertices) - 1)

    for stage in spec.stages:
        graph = GraphOfGroups(tuple(vertices), tuple(edges), tuple(assertions))
        layout = _Layout(graph)
        p = layout.presentation()

        if isinstance(stage, TorusAttach):
            w = p.word(stage.word_text)
            if w.is_empty():
                raise ValueError("attaching word is trivial")
            v = _owning_vertex(layout, w)
            local = _localize(layout, w, v)
            block = AbelianBlock(stage.rank)
            new_v = len(vertices)
            vertices.append(block)
            tau = parse_word("x1", block.local_names())
            edges.append(Edge(v, new_v, CYCLIC_BLOCK, (local,), (tau,)))
            assertions.append(f"torus attachment along {stage.word_text!r} "
                              "assumed maximal cyclic")
            chi += block.euler()
        elif isinstance(stage, SurfaceAttach):
            b = len(stage.boundary_attach_texts)
            block, names = _surface_with_boundary_block(stage.genus, b)
            new_v = len(vertices)
            vertices.append(block)
            # boundary words are parsed against the a/b/d naming but carry
            # positional generator indices, which is all the edge map needs
            taus = _boundary_words(stage.genus, b, names)
            for text, tau in zip(stage.boundary_attach_texts, taus):
                w = p.word(text)
                if w.is_empty():
                    raise ValueError("attaching word is trivial")
                v = _owning_vertex(layout, w)
                local = _localize(layout, w, v)
                edges.append(Edge(v, new_v, CYCLIC_BLOCK, (local,), (tau,)))
            assertions.append(
                f"surface attachment (genus {stage.genus}, {b} boundaries) "
                f"retraction asserted: {stage.asserted_retraction}")
            chi += 2 - 2 * stage.genus - b
        else:
            raise ValueError(f"unknown stage {stage!r}")

    graph = GraphOfGroups(tuple(vertices), tuple(edges), tuple(assertions))
    actual = euler_characteristic(graph)
    if actual != chi:
        raise InvariantViolation(f"euler accumulation {chi} != graph value {actual}")
    return TowerResult(graph, fundamental_presentation(graph), actual)


def double_of_free(rank, word_text):
    """Double of a free group along the cyclic subgroup the word generates."""
    block = FreeBlock(rank)
    w = parse_word(word_text, block.local_names())
    if w.is_empty():
        raise ValueError("doubling word is trivial")
    graph = GraphOfGroups(
        (block, FreeBlock(rank)),
        (Edge(0, 1, CYCLIC_BLOCK, (w,), (w,)),),
        (f"double along {word_text!r} assumed maximal cyclic",))
    return graph


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    presentation: Presentation
    euler: int
    volume_vector: VolumeVector
    graph: object = None
    factors: tuple = None
    note: str = ""

    @property
    def aspherical(self):
        return self.presentation.aspherical


def _free_entry(rank):
    block = FreeBlock(rank)
    return CatalogEntry(
        name=f"free_{rank}",
        presentation=block.presentation(),
        euler=1 - rank,
        volume_vector=block.volume_vector(),
        graph=GraphOfGroups((block,), ()),
        note=f"free group of rank {rank}")


def _surface_entry(genus):
    block = SurfaceBlock(genus)
    return CatalogEntry(
        name=f"surface_{genus}",
        presentation=block.presentation(),
        euler=2 - 2 * genus,
        volume_vector=block.volume_vector(),
        graph=GraphOfGroups((block,), ()),
        note=f"closed orientable surface of genus {genus}")


def _abelian_entry(rank):
    block = AbelianBlock(rank)
    return CatalogEntry(
        name=f"abelian_{rank}",
        presentation=block.presentation(),
        euler=0,
        volume_vector=block.volume_vector(),
        graph=GraphOfGroups((block,), ()),
        note=f"free abelian group of rank {rank}; presentation complex is a "
             "classifying space only for rank <= 2")


def _product_of_free_entry(ranks):
    factors = [FreeBlock(r).presentation() for r in ranks]
    p = product_presentation(factors)
    vv = [1]
    for r in ranks:
        vv = [c + r * (vv[i - 1] if i else 0) for i, c in enumerate(vv)] + [r * vv[-1]]
    chi = 1
    for r in ranks:
        chi *= 1 - r
    name = "x".join(f"f{r}" for r in ranks)
    return CatalogEntry(
        name=name,
        presentation=p,
        euler=chi,
        volume_vector=VolumeVector(tuple(vv)),
        factors=tuple(f"free_{r}" for r in ranks),
        note="direct product of free groups; volume vector from the product "
             "of wedges")


def catalog():
    """Stock groups by stable name."""
    entries = [
        _free_entry(1), _free_entry(2), _free_entry(3),
        _surface_entry(2), _surface_entry(3),
        _abelian_entry(1), _abelian_entry(2), _abelian_entry(3),
    ]

    zz = GraphOfGroups((FreeBlock(1), FreeBlock(1)), (Edge(0, 1, TRIVIAL_BLOCK),))
    entries.append(CatalogEntry(
        name="z_star_z",
        presentation=fundamental_presentation(zz),
        euler=-1,
        volume_vector=assembled_volume_vector(zz),
        graph=zz,
        note="free product Z * Z presented through its graph of groups"))

    dbl = double_of_free(2, "a b")
    entries.append(CatalogEntry(
        name="double_f2_ab",
        presentation=fundamental_presentation(dbl),
        euler=-2,
        volume_vector=assembled_volume_vector(dbl),
        graph=dbl,
        note="double of F2 along ab; one cyclic edge"))

    entries.append(_product_of_free_entry((2, 2)))
    entries.append(_product_of_free_entry((2, 2, 2)))

    out = {}
    for e in entries:
        if e.volume_vector.euler() != e.euler:
            raise InvariantViolation(f"catalog {e.name}: volume vector euler "
                                     f"{e.volume_vector.euler()} != {e.euler}")
        out[e.name] = e
    return out
