import numpy as np
import pytest

from platefem.errors import GeometryError, MeshError
from platefem.mesh import (
    DIRICHLET_CLAMPED,
    FREE,
    INTERIOR_JUNCTION,
    INTERIOR_SAME_PLANE,
    build_crossed_patch_mesh,
    build_patch_mesh,
    dump_mesh,
    mark_and_refine,
    mesh_structure,
    refine_uniform,
    stitch_structure,
)
from platefem.model import Load, Material, PlatePatch, StructureModel, make_patch
from platefem.structures import box_open_top, l_structure, square_plate

MAT = Material(youngs_modulus=12.0, poisson_ratio=0.3, thickness=0.1)


def unit_square_patch(tags=("clamped",) * 4, patch_id=0, z=0.0):
    return PlatePatch(
        id=patch_id,
        vertices=np.array([[0, 0, z], [1, 0, z], [1, 1, z], [0, 1, z]], dtype=float),
        normal=np.array([0.0, 0.0, 1.0]),
        boundary_tags=tags,
    )


def check_mesh_invariants(mesh):
    """Shared invariant assertions: conormals, watertightness, midsides."""
    for rec in mesh.edges:
        assert len(rec.sides) in (1, 2)
        x0, x1 = mesh.nodes[rec.nodes[0]], mesh.nodes[rec.nodes[1]]
        assert np.allclose(mesh.nodes[rec.midnode], 0.5 * (x0 + x1), atol=1e-13)
        for side in rec.sides:
            n_k = mesh.element_normal[side.element]
            assert abs(side.conormal @ n_k) <= 1e-12
            assert abs(np.linalg.norm(side.conormal) - 1.0) <= 1e-12
            centroid = mesh.nodes[mesh.elements[side.element, :3]].mean(axis=0)
            assert side.conormal @ (0.5 * (x0 + x1) - centroid) > 0.0
        if rec.kind == INTERIOR_SAME_PLANE:
            assert np.linalg.norm(rec.sides[0].conormal + rec.sides[1].conormal) <= 1e-12
        if rec.kind in (INTERIOR_SAME_PLANE, INTERIOR_JUNCTION):
            assert len(rec.sides) == 2
        else:
            assert len(rec.sides) == 1
    # every element edge appears in exactly one record
    seen = set()
    for e in range(mesh.n_elements):
        a, b, c = (int(x) for x in mesh.elements[e, :3])
        for i, j in ((a, b), (b, c), (c, a)):
            seen.add((min(i, j), max(i, j)))
    assert seen == {rec.nodes for rec in mesh.edges}


class TestBuildPatchMesh:
    def test_unit_square_one_subdivision(self):
        mesh = build_patch_mesh(unit_square_patch(), 1)
        assert mesh.n_elements == 2
        assert mesh.n_nodes == 9  # 4 corners, 4 edge midpoints, 1 diagonal midpoint
        check_mesh_invariants(mesh)

    def test_unit_square_two_subdivisions(self):
        mesh = build_patch_mesh(unit_square_patch(), 2)
        assert mesh.n_elements == 8

    def test_constant_normal(self):
        patch = PlatePatch(
            id=0,
            vertices=np.array([[0, 0, 0], [1, 0, 0], [1, 0, 1], [0, 0, 1]], dtype=float),
            normal=np.array([0.0, 1.0, 0.0]),
            boundary_tags=("free",) * 4,
        )
        mesh = build_patch_mesh(patch, 3)
        assert np.allclose(mesh.element_normal, [0.0, 1.0, 0.0])

    def test_triangle_patch(self):
        patch = make_patch(0, [[0, 0, 0], [1, 0, 0], [0, 1, 0]], tags=["free"] * 3)
        mesh = build_patch_mesh(patch, 2)
        assert mesh.n_elements == 4
        check_mesh_invariants(mesh)

    def test_pentagon_patch(self):
        ang = np.linspace(0, 2 * np.pi, 6)[:-1]
        verts = np.column_stack([np.cos(ang), np.sin(ang), np.zeros(5)])
        patch = make_patch(0, verts, tags=["free"] * 5)
        mesh = build_patch_mesh(patch, 2)
        assert mesh.n_elements == 5 * 4
        check_mesh_invariants(mesh)

    def test_degenerate_polygon_rejected(self):
        patch = PlatePatch(
            id=0,
            vertices=np.array(
                [[0, 0, 0], [1, 0, 0], [1, 1e-13, 0], [0, 1e-13, 0]], dtype=float
            ),
            normal=np.array([0.0, 0.0, 1.0]),
            boundary_tags=("free",) * 4,
        )
        with pytest.raises(GeometryError):
            build_patch_mesh(patch, 1)

    def test_area_preserved(self):
        mesh = build_patch_mesh(unit_square_patch(), 4)
        assert mesh.total_area() == pytest.approx(1.0, rel=1e-14)

    def test_crossed_variant_counts(self):
        mesh = build_crossed_patch_mesh(unit_square_patch(), 2)
        assert mesh.n_elements == 16
        check_mesh_invariants(mesh)


class TestStitch:
    def test_coplanar_pair_same_plane(self):
        # two unit squares sharing the x = 1 / x = 0 edge, same normal
        p0 = PlatePatch(
            id=0,
            vertices=np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float),
            normal=np.array([0.0, 0.0, 1.0]),
            boundary_tags=("free", "junction", "free", "free"),
        )
        p1 = PlatePatch(
            id=1,
            vertices=np.array([[1, 0, 0], [2, 0, 0], [2, 1, 0], [1, 1, 0]], dtype=float),
            normal=np.array([0.0, 0.0, 1.0]),
            boundary_tags=("free", "free", "free", "junction"),
        )
        model = StructureModel(patches=(p0, p1), material=MAT)
        mesh = stitch_structure(model, [build_patch_mesh(p, 2) for p in (p0, p1)])
        shared = [
            rec
            for rec in mesh.edges
            if len(rec.sides) == 2
            and {int(mesh.element_patch[s.element]) for s in rec.sides} == {0, 1}
        ]
        assert len(shared) == 2  # two subdivided segments along the shared side
        for rec in shared:
            assert rec.kind == INTERIOR_SAME_PLANE
            assert np.linalg.norm(rec.sides[0].conormal + rec.sides[1].conormal) <= 1e-12
        check_mesh_invariants(mesh)

    def test_right_angle_junction_conormals(self):
        model = l_structure(MAT)
        mesh = mesh_structure(model, 2)
        junction = [rec for rec in mesh.edges if rec.kind == INTERIOR_JUNCTION]
        assert len(junction) == 2
        for rec in junction:
            conormals = {}
            for side in rec.sides:
                pid = int(mesh.element_patch[side.element])
                conormals[pid] = side.conormal
            assert np.allclose(conormals[0], [0.0, 1.0, 0.0], atol=1e-12)
            assert np.allclose(conormals[1], [0.0, 0.0, -1.0], atol=1e-12)
        check_mesh_invariants(mesh)

    def test_box_junction_count(self):
        model = box_open_top(MAT)
        mesh = mesh_structure(model, 2)
        junction_edges = [rec for rec in mesh.edges if rec.kind == INTERIOR_JUNCTION]
        # 8 junction segments, each discretized into 2 edges
        assert len(junction_edges) == 16
        # nodes on junction lines are shared entities
        floor_ring = [
            i
            for i in range(mesh.n_nodes)
            if abs(mesh.nodes[i][2]) < 1e-12
            and (
                min(abs(mesh.nodes[i][0]), abs(mesh.nodes[i][0] - 1)) < 1e-12
                or min(abs(mesh.nodes[i][1]), abs(mesh.nodes[i][1] - 1)) < 1e-12
            )
        ]
        assert len(floor_ring) == 16  # 4 corners + 4 per side incl. midside nodes
        check_mesh_invariants(mesh)

    def test_nonconforming_junction_rejected(self):
        model = l_structure(MAT)
        meshes = [
            build_patch_mesh(model.patches[0], 2),
            build_patch_mesh(model.patches[1], 3),
        ]
        with pytest.raises(MeshError):
            stitch_structure(model, meshes)

    def test_inconsistent_normals_rejected(self):
        # flipping one plate's normal must be caught at stitch time
        p0 = PlatePatch(
            id=0,
            vertices=np.array([[0, -1, 0], [1, -1, 0], [1, 0, 0], [0, 0, 0]], dtype=float),
            normal=np.array([0.0, 0.0, 1.0]),
            boundary_tags=("free", "free", "junction", "free"),
        )
        p1 = PlatePatch(
            id=1,
            vertices=np.array([[0, 0, 0], [1, 0, 0], [1, 0, 1], [0, 0, 1]], dtype=float),
            normal=np.array([0.0, 1.0, 0.0]),  # inconsistent orientation
            boundary_tags=("junction", "free", "free", "free"),
        )
        model = StructureModel(patches=(p0, p1), material=MAT)
        with pytest.raises(GeometryError):
            stitch_structure(model, [build_patch_mesh(p, 2) for p in (p0, p1)])

    def test_antiparallel_coplanar_rejected(self):
        p0 = PlatePatch(
            id=0,
            vertices=np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float),
            normal=np.array([0.0, 0.0, 1.0]),
            boundary_tags=("free", "junction", "free", "free"),
        )
        p1 = PlatePatch(
            id=1,
            vertices=np.array([[1, 0, 0], [2, 0, 0], [2, 1, 0], [1, 1, 0]], dtype=float),
            normal=np.array([0.0, 0.0, -1.0]),
            boundary_tags=("free", "free", "free", "junction"),
        )
        model = StructureModel(patches=(p0, p1), material=MAT)
        with pytest.raises(GeometryError):
            stitch_structure(model, [build_patch_mesh(p, 2) for p in (p0, p1)])


class TestRefine:
    def test_red_refinement_counts(self):
        mesh = build_patch_mesh(unit_square_patch(), 1)
        fine = refine_uniform(mesh)
        assert fine.n_elements == 8

    def test_diameters_halve(self):
        mesh = build_patch_mesh(unit_square_patch(), 2)
        fine = refine_uniform(mesh)
        assert fine.mesh_size_h == pytest.approx(0.5 * mesh.mesh_size_h, rel=1e-12)

    def test_area_conserved(self):
        model = box_open_top(MAT)
        mesh = mesh_structure(model, 2)
        fine = refine_uniform(mesh)
        assert fine.total_area() == pytest.approx(mesh.total_area(), rel=1e-12)

    def test_junction_classification_preserved(self):
        model = l_structure(MAT)
        mesh = mesh_structure(model, 2)
        fine = refine_uniform(mesh)
        kinds = {}
        for m in (mesh, fine):
            kinds[id(m)] = {
                kind: sum(1 for rec in m.edges if rec.kind == kind)
                for kind in (INTERIOR_JUNCTION, DIRICHLET_CLAMPED, FREE)
            }
        assert kinds[id(fine)][INTERIOR_JUNCTION] == 2 * kinds[id(mesh)][INTERIOR_JUNCTION]
        assert kinds[id(fine)][DIRICHLET_CLAMPED] == 2 * kinds[id(mesh)][DIRICHLET_CLAMPED]
        check_mesh_invariants(fine)

    def test_boundary_tags_inherited(self):
        mesh = build_patch_mesh(unit_square_patch(("clamped", "free", "simply_supported", "free")), 1)
        fine = refine_uniform(mesh)
        kinds = sorted(rec.kind for rec in fine.edges if len(rec.sides) == 1)
        assert kinds.count(DIRICHLET_CLAMPED) == 2
        assert kinds.count("dirichlet_ss") == 2
        assert kinds.count(FREE) == 4


class TestMarkAndRefine:
    def test_all_marked_equals_uniform(self):
        mesh = build_patch_mesh(unit_square_patch(), 2)
        a = mark_and_refine(mesh, np.ones(mesh.n_elements), theta=1.0)
        b = refine_uniform(mesh)
        assert a.n_elements == b.n_elements
        assert np.allclose(np.sort(a.nodes, axis=0), np.sort(b.nodes, axis=0))

    def test_half_marked(self):
        mesh = build_patch_mesh(unit_square_patch(), 2)
        refined = mark_and_refine(mesh, np.ones(mesh.n_elements), theta=0.5)
        # at least half the elements red-refined: strictly more elements than
        # refining half of them alone could yield
        assert refined.n_elements >= mesh.n_elements + 3 * (mesh.n_elements // 2)
        check_mesh_invariants(refined)

    def test_single_indicator_plus_closure(self):
        mesh = build_patch_mesh(unit_square_patch(), 2)
        eta = np.zeros(mesh.n_elements)
        eta[0] = 1.0
        refined = mark_and_refine(mesh, eta, theta=0.5)
        # one red element (+3) plus green closure bisections (+1 each)
        assert mesh.n_elements + 3 <= refined.n_elements <= mesh.n_elements + 3 + 3
        assert refined.total_area() == pytest.approx(mesh.total_area(), rel=1e-12)
        check_mesh_invariants(refined)

    def test_junction_conformity_after_adaptive(self):
        model = l_structure(MAT)
        mesh = mesh_structure(model, 2)
        eta = np.zeros(mesh.n_elements)
        eta[:4] = 1.0
        refined = mark_and_refine(mesh, eta, theta=0.9)
        check_mesh_invariants(refined)

    def test_empty_mesh_rejected(self):
        mesh = build_patch_mesh(unit_square_patch(), 1)
        with pytest.raises(ValueError):
            mark_and_refine(mesh, np.ones(5), theta=0.5)


class TestDump:
    def test_golden_dump(self, tmp_path):
        from pathlib import Path

        mesh = build_patch_mesh(unit_square_patch(("clamped", "free", "simply_supported", "free")), 1)
        text = dump_mesh(mesh)
        golden = Path(__file__).parent / "golden" / "unit_square_n1_mesh.txt"
        assert text == golden.read_text()

    def test_dump_roundtrip_fields(self):
        mesh = build_patch_mesh(unit_square_patch(), 2)
        text = dump_mesh(mesh)
        assert f"nodes {mesh.n_nodes}" in text
        assert f"elements {mesh.n_elements}" in text
        assert f"edges {len(mesh.edges)}" in text
