import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fluxlab.geometry import (EmptyLevelSetError, Plane, extract_isosurface,
                              load_mesh, mesh_to_sdf, mesh_volume, primitives,
                              save_stl, slice_section, surface_area)
from fluxlab.geometry.mesh import (MeshError, NotWatertightError, TriMesh,
                                   save_obj)
from fluxlab.geometry.sdf import euler_characteristic


class TestLoadMesh:
    def test_unit_cube_stl(self, tmp_path):
        cube = primitives.box((1, 1, 1))
        path = tmp_path / "cube.stl"
        save_stl(cube, path)
        mesh = load_mesh(path)
        assert len(mesh.vertices) == 8
        assert len(mesh.triangles) == 12
        assert mesh.watertight

    def test_open_cube_not_watertight(self):
        cube = primitives.box((1, 1, 1))
        open_mesh = TriMesh(cube.vertices, cube.triangles[:-1])
        assert not open_mesh.watertight

    def test_icosphere_obj_roundtrip(self, tmp_path):
        sphere = primitives.icosphere(10.0, 3)
        path = tmp_path / "sphere.obj"
        save_obj(sphere, path)
        again = load_mesh(path)
        assert again.watertight
        assert len(again.vertices) == len(sphere.vertices)

    def test_quad_obj_rejected(self, tmp_path):
        path = tmp_path / "quad.obj"
        path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
        with pytest.raises(MeshError, match="non-triangulated"):
            load_mesh(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MeshError):
            load_mesh(tmp_path / "nope.stl")

    def test_empty_mesh_rejected(self, tmp_path):
        path = tmp_path / "empty.obj"
        path.write_text("v 0 0 0\n")
        with pytest.raises(MeshError):
            load_mesh(path)

    def test_stl_roundtrip_preserves_volume(self, tmp_path):
        sphere = primitives.icosphere(10.0, 4)
        path = tmp_path / "s.stl"
        save_stl(sphere, path)
        again = load_mesh(path)
        assert len(again.vertices) == len(sphere.vertices)
        v0, v1 = mesh_volume(sphere), mesh_volume(again)
        assert abs(v1 - v0) / v0 < 1e-6


class TestMeshVolume:
    def test_unit_cube(self):
        assert mesh_volume(primitives.box((1, 1, 1))) == pytest.approx(
            1.0, abs=1e-9)

    def test_icosphere_vs_analytic(self):
        sphere = primitives.icosphere(10.0, 4)
        analytic = 4.0 / 3.0 * np.pi * 10.0 ** 3
        assert mesh_volume(sphere) == pytest.approx(analytic, rel=0.01)

    def test_inverted_orientation_negative(self):
        cube = primitives.box((1, 1, 1))
        flipped = TriMesh(cube.vertices, cube.triangles[:, ::-1].copy())
        assert mesh_volume(flipped) == pytest.approx(-1.0, abs=1e-9)

    def test_open_mesh_rejected(self):
        cube = primitives.box((1, 1, 1))
        with pytest.raises(NotWatertightError):
            mesh_volume(TriMesh(cube.vertices, cube.triangles[:-1]))


class TestMeshToSdf:
    def test_cube_center_depth(self):
        grid = mesh_to_sdf(primitives.box((10, 10, 10)), 0.5)
        assert grid.sample(np.zeros(3)) == pytest.approx(-5.0, abs=0.5)

    def test_sphere_surface_value(self):
        grid = mesh_to_sdf(primitives.icosphere(10.0, 3), 0.5)
        assert abs(grid.sample(np.array([10.0, 0.0, 0.0]))) <= 0.5

    def test_sphere_volume_within_3pc(self):
        grid = mesh_to_sdf(primitives.icosphere(10.0, 4), 0.5)
        vol = grid.solid_volume()
        analytic = 4.0 / 3.0 * np.pi * 1000.0
        assert vol == pytest.approx(analytic, rel=0.03)

    def test_non_watertight_rejected(self):
        cube = primitives.box((10, 10, 10))
        with pytest.raises(NotWatertightError):
            mesh_to_sdf(TriMesh(cube.vertices, cube.triangles[:-1]), 0.5)

    def test_voxel_range_enforced(self):
        with pytest.raises(ValueError):
            mesh_to_sdf(primitives.box((5, 5, 5)), 0.1)

    def test_padding_at_least_two_voxels(self):
        grid = mesh_to_sdf(primitives.box((5, 5, 5)), 0.5)
        assert np.all(grid.origin <= -2.5 - 2 * 0.5)


class TestIsosurface:
    def test_sphere_volume_roundtrip(self):
        grid = mesh_to_sdf(primitives.icosphere(10.0, 4), 0.5)
        mesh = extract_isosurface(grid, 0.0)
        assert mesh.watertight
        analytic = 4.0 / 3.0 * np.pi * 1000.0
        assert mesh_volume(mesh) == pytest.approx(analytic, rel=0.03)

    def test_empty_level_set(self):
        grid = mesh_to_sdf(primitives.icosphere(10.0, 3), 0.5)
        with pytest.raises(EmptyLevelSetError):
            extract_isosurface(grid, grid.values.min() - 1.0)

    def test_gyroid_cell_genus(self):
        # one periodic gyroid shell cell has genus > 0 (Euler char < 2)
        from fluxlab.structuregen import GyroidSpec, lattice_sdf
        from fluxlab.geometry.grid import ScalarGrid
        n = 64
        cell = 20.0
        ax = np.linspace(-0.25 * cell, 1.25 * cell, n)
        X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij")
        pts = np.stack([X, Y, Z], axis=-1).reshape(-1, 3)
        vals = lattice_sdf(pts, GyroidSpec(cell)).reshape(n, n, n)
        # clip to a closed box inside the grid so the level set never
        # touches the sample boundary
        c = cell / 2
        box = np.maximum.reduce([np.abs(X - c) - 0.7 * cell,
                                 np.abs(Y - c) - 0.7 * cell,
                                 np.abs(Z - c) - 0.7 * cell])
        grid = ScalarGrid(np.array([ax[0]] * 3), ax[1] - ax[0],
                          np.maximum(vals, box))
        mesh = extract_isosurface(grid, 0.0)
        assert mesh.watertight
        assert euler_characteristic(mesh) < 2

    def test_volume_close_to_source(self):
        # |V(iso(sdf(M))) - V(M)| <= 3 * voxel * area(M) for convex fixtures
        voxel = 0.5
        for mesh in (primitives.box((10, 10, 10)),
                     primitives.icosphere(8.0, 3)):
            grid = mesh_to_sdf(mesh, voxel)
            recon = extract_isosurface(grid)
            bound = 3 * voxel * surface_area(mesh)
            assert abs(mesh_volume(recon) - mesh_volume(mesh)) < bound


class TestSliceSection:
    def test_cube_midplane(self):
        cube = primitives.box((10, 10, 10))
        sections = slice_section(cube, Plane((0, 0, 0), (0, 0, 1)))
        assert len(sections) == 1
        assert sections[0].area == pytest.approx(100.0, rel=1e-9)
        assert np.allclose(sections[0].centroid, 0.0, atol=1e-9)

    def test_cylinder_area_oracle(self):
        # oracle: pi r^2 (96-gon slightly below, within 0.2%)
        cyl = primitives.cylinder(25.0, 40.0, segments=96)
        sections = slice_section(cyl, Plane((0, 0, 5), (0, 0, 1)))
        assert len(sections) == 1
        assert sections[0].area == pytest.approx(np.pi * 625.0, rel=2e-3)
        assert np.allclose(sections[0].centroid[:2], 0.0, atol=1e-9)

    def test_torus_through_hole(self):
        torus = primitives.torus(20.0, 5.0)
        sections = slice_section(torus, Plane((0, 0, 0), (1, 0, 0)))
        assert len(sections) == 2

    def test_plane_missing_mesh(self):
        cube = primitives.box((10, 10, 10))
        assert slice_section(cube, Plane((0, 0, 30), (0, 0, 1))) == []

    def test_cylinder_centroids_on_axis(self):
        cyl = primitives.cylinder(10.0, 40.0, center=(3.0, 4.0, 0.0))
        for z in np.linspace(-15, 15, 7):
            secs = slice_section(cyl, Plane((0, 0, z), (0, 0, 1)))
            assert np.allclose(secs[0].centroid[:2], [3.0, 4.0], atol=0.25)


class TestPlane:
    def test_normal_normalized(self):
        p = Plane((0, 0, 0), (0, 0, 2))
        assert np.linalg.norm(p.normal) == pytest.approx(1.0, abs=1e-9)

    def test_zero_normal_rejected(self):
        with pytest.raises(ValueError):
            Plane((0, 0, 0), (0, 0, 0))


@settings(max_examples=25, deadline=None)
@given(st.floats(-40, 40), st.floats(-40, 40), st.floats(-40, 40))
def test_sdf_union_is_min(x, y, z):
    from fluxlab.geometry import sdf_union, sdf_intersect, sdf_subtract
    a = np.array([[x]])
    b = np.array([[y * 0.5 + z * 0.5]])
    assert sdf_union(a, b)[0, 0] == min(a[0, 0], b[0, 0])
    assert sdf_intersect(a, b)[0, 0] == max(a[0, 0], b[0, 0])
    assert sdf_subtract(a, b)[0, 0] == max(a[0, 0], -b[0, 0])
