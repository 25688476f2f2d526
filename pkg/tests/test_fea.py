import numpy as np
import pytest

from fluxlab.fea import (BoundaryConditions, MaterialParams, SmaSpringParams,
                         color_warmth, sma_contraction, solve_static,
                         strain_colormap)
from fluxlab.fea.hexmesh import voxelize
from fluxlab.fea.solver import (StaticSolver, element_stiffness,
                                element_strains)
from fluxlab.geometry.grid import ScalarGrid


def box_grid(size, h=0.5, pad=2):
    """Analytic box SDF grid (exact surfaces, no voxelization bias)."""
    size = np.asarray(size, dtype=float)
    half = size / 2
    n = np.ceil((size + 2 * pad * h) / h).astype(int) + 1
    ax = [np.linspace(-half[i] - pad * h, half[i] + pad * h, n[i])
          for i in range(3)]
    X, Y, Z = np.meshgrid(*ax, indexing="ij")
    q = np.stack([np.abs(X) - half[0], np.abs(Y) - half[1],
                  np.abs(Z) - half[2]], axis=-1)
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
    inside = np.minimum(q.max(axis=-1), 0.0)
    return ScalarGrid(np.array([ax[0][0], ax[1][0], ax[2][0]]), h,
                      outside + inside)


def uniaxial_bc(vox, displacement):
    """Statically determinate axial loading: roller base + corner pins."""
    bot = vox.cap_nodes("bottom")
    top = vox.cap_nodes("top")
    bn = vox.nodes[bot]
    c0 = bot[np.argmin(bn[:, 0] + bn[:, 1])]
    c1 = bot[np.argmin(-bn[:, 0] + bn[:, 1])]
    return BoundaryConditions(prescribed=[
        (bot, 2, 0.0), (top, 2, displacement),
        (np.array([c0]), 0, 0.0), (np.array([c0]), 1, 0.0),
        (np.array([c1]), 1, 0.0)])


@pytest.fixture(scope="module")
def bar_vox():
    return voxelize(box_grid((10, 10, 40), h=0.5), 1.0)


class TestSpring:
    def test_rate_hand_arithmetic(self):
        # k = G d^4 / (8 D^3 n) = 7500 * 0.75^4 / (8 * 343 * 30)
        p = SmaSpringParams(0.75, 7.0, 30, 7500.0, 24.0)
        assert p.rate == pytest.approx(0.0288, abs=0.0002)

    def test_zero_phase(self):
        f, s = sma_contraction(SmaSpringParams(), 0.0)
        assert f == 0.0 and s == 0.0

    def test_linearity_in_phase(self):
        p = SmaSpringParams()
        f1, _ = sma_contraction(p, 1.0)
        f05, _ = sma_contraction(p, 0.5)
        assert f05 == pytest.approx(0.5 * f1)

    def test_phase_range(self):
        with pytest.raises(ValueError):
            sma_contraction(SmaSpringParams(), 1.5)


class TestElementStiffness:
    def test_symmetric_psd(self):
        ke = element_stiffness(1.7, 0.45, 1.0)
        assert np.allclose(ke, ke.T, atol=1e-12)
        eig = np.linalg.eigvalsh(ke)
        assert eig.min() > -1e-10  # six rigid-body zero modes
        assert (np.abs(eig) < 1e-9).sum() == 6

    def test_scales_linearly_with_size(self):
        k1 = element_stiffness(2.0, 0.3, 1.0)
        k2 = element_stiffness(2.0, 0.3, 2.0)
        assert np.allclose(k2, 2.0 * k1, rtol=1e-12)


class TestSolveStatic:
    def test_uniaxial_bar_analytic(self, bar_vox):
        mat = MaterialParams(1.7, 0.45)
        disp, _ = solve_static(bar_vox, mat, uniaxial_bc(bar_vox, -4.0))
        strains = element_strains(bar_vox, disp)
        ezz = strains.tensor[:, 2]
        assert ezz.mean() == pytest.approx(-0.1, rel=0.02)
        lateral = -strains.tensor[:, 0].mean() / ezz.mean()
        assert lateral == pytest.approx(0.45, abs=0.01)

    def test_zero_load_zero_displacement(self, bar_vox):
        mat = MaterialParams(1.7, 0.45)
        bc = BoundaryConditions(fixed_nodes=bar_vox.cap_nodes("bottom"))
        disp, _ = solve_static(bar_vox, mat, bc)
        assert np.abs(disp.u).max() < 1e-12

    def test_linearity_exact(self, bar_vox):
        mat = MaterialParams(1.7, 0.45)
        solver = StaticSolver(bar_vox, mat)
        d1, _ = solver.solve(uniaxial_bc(bar_vox, -2.0))
        d2, _ = solver.solve(uniaxial_bc(bar_vox, -4.0))
        scale = np.abs(d2.u).max()
        assert np.abs(d2.u - 2 * d1.u).max() < 1e-5 * scale

    def test_reaction_balance(self, bar_vox):
        mat = MaterialParams(1.7, 0.45)
        top = bar_vox.cap_nodes("top")
        bot = bar_vox.cap_nodes("bottom")
        bc = BoundaryConditions(fixed_nodes=bot,
                                forces=[(top, np.array([0.0, 0.0, -5.0]))])
        disp, reactions = solve_static(bar_vox, mat, bc)
        fz = reactions.reshape(-1, 3)[:, 2].sum()
        assert abs(fz - (-5.0) * -1) / 5.0 < 1e-4  # reactions balance load

    def test_mesh_refinement_convergence(self):
        # halving the default element size moves the tip by well under 5%
        mat = MaterialParams(1.7, 0.45)
        tips = []
        for h in (1.0, 0.5):
            vox = voxelize(box_grid((6, 6, 20), h=0.5), h)
            top = vox.cap_nodes("top")
            bc = BoundaryConditions(
                fixed_nodes=vox.cap_nodes("bottom"),
                forces=[(top, np.array([0.0, 0.0, -1.0]))])
            disp, _ = solve_static(vox, mat, bc)
            tips.append(disp.u[top, 2].mean())
        assert abs(tips[1] - tips[0]) / abs(tips[1]) < 0.05

    def test_unconstrained_rejected(self, bar_vox):
        from fluxlab.fea import SolverError
        with pytest.raises(SolverError):
            solve_static(bar_vox, MaterialParams(), BoundaryConditions())

    def test_energy_nonnegative(self, bar_vox):
        from fluxlab.fea.solver import assemble
        mat = MaterialParams(1.7, 0.45)
        K = assemble(bar_vox, mat)
        disp, _ = solve_static(bar_vox, mat, uniaxial_bc(bar_vox, -1.0))
        u = disp.u.ravel()
        assert u @ (K @ u) >= 0
        assert (K - K.T).count_nonzero() == 0 or \
            abs((K - K.T)).max() < 1e-10


class TestStrainColormap:
    def test_constant_field_single_color(self):
        colors = strain_colormap(np.full(10, 0.5))
        assert np.allclose(colors, colors[0])

    def test_max_strain_warmest(self, rng):
        vals = rng.random(100)
        colors = strain_colormap(vals)
        warm = color_warmth(colors)
        assert warm.argmax() == vals.argmax()

    def test_rank_order_preserved(self, rng):
        from scipy import stats
        vals = rng.standard_normal(500)
        warm = color_warmth(strain_colormap(vals))
        rho = stats.spearmanr(vals, warm).statistic
        assert rho == pytest.approx(1.0, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            strain_colormap(np.array([]))
