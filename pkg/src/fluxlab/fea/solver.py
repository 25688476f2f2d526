"""Small-strain linear elasticity on the voxel mesh.

Trilinear hexahedra, 2x2x2 Gauss integration, preconditioned conjugate
gradients to a 1e-6 relative residual.  The model is linear: displacements
scale exactly with the load, which the actuation preview exploits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg, LinearOperator

try:
    import pyamg
    _HAVE_PYAMG = True
except ImportError:  # pragma: no cover
    _HAVE_PYAMG = False

from .hexmesh import VoxelModel, _CORNER_OFFSETS

CG_MAX_ITER = 10_000
CG_RTOL = 1e-6


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class MaterialParams:
    youngs_modulus: float = 1.7  # MPa, Shore A 40 silicone estimate
    poisson_ratio: float = 0.45

    def __post_init__(self):
        if not self.youngs_modulus > 0:
            raise ValueError("Young's modulus must be positive")
        if not 0.0 < self.poisson_ratio < 0.5:
            raise ValueError("Poisson ratio must be in (0, 0.5)")


@dataclass
class BoundaryConditions:
    """Fixed nodes clamp all three dofs; prescribed pins one axis on a node
    set; forces are nodal loads."""

    fixed_nodes: np.ndarray = field(default_factory=lambda: np.array([], int))
    prescribed: list = field(default_factory=list)  # (nodes, axis, value)
    forces: list = field(default_factory=list)  # (nodes, vector) shared evenly


@dataclass(frozen=True)
class DisplacementField:
    nodes: np.ndarray  # (nn, 3) coordinates
    u: np.ndarray  # (nn, 3) displacements, mm
    iterations: int
    residual: float


@dataclass(frozen=True)
class StrainField:
    centers: np.ndarray  # (ne, 3)
    von_mises: np.ndarray  # (ne,) equivalent strain, >= 0
    tensor: np.ndarray  # (ne, 6) [xx, yy, zz, xy, yz, zx]


def element_stiffness(E: float, nu: float, h: float) -> np.ndarray:
    """24x24 stiffness of a cube element of edge h (full Gauss quadrature)."""
    lam = E * nu / ((1 + nu) * (1 - 2 * nu))
    mu = E / (2 * (1 + nu))
    D = np.zeros((6, 6))
    D[:3, :3] = lam
    D[np.arange(3), np.arange(3)] += 2 * mu
    D[3:, 3:] = np.eye(3) * mu
    gp = np.array([-1, 1]) / np.sqrt(3)
    K = np.zeros((24, 24))
    # local corners in [-1, 1]^3 matching _CORNER_OFFSETS
    corners = _CORNER_OFFSETS * 2.0 - 1.0
    for xi in gp:
        for eta in gp:
            for zeta in gp:
                dN = np.zeros((8, 3))
                for a, (cx, cy, cz) in enumerate(corners):
                    dN[a, 0] = cx * (1 + cy * eta) * (1 + cz * zeta) / 8
                    dN[a, 1] = cy * (1 + cx * xi) * (1 + cz * zeta) / 8
                    dN[a, 2] = cz * (1 + cx * xi) * (1 + cy * eta) / 8
                dN = dN * 2.0 / h  # d/dx = d/dxi * dxi/dx
                B = np.zeros((6, 24))
                for a in range(8):
                    B[0, 3 * a] = dN[a, 0]
                    B[1, 3 * a + 1] = dN[a, 1]
                    B[2, 3 * a + 2] = dN[a, 2]
                    B[3, 3 * a] = dN[a, 1]
                    B[3, 3 * a + 1] = dN[a, 0]
                    B[4, 3 * a + 1] = dN[a, 2]
                    B[4, 3 * a + 2] = dN[a, 1]
                    B[5, 3 * a] = dN[a, 2]
                    B[5, 3 * a + 2] = dN[a, 0]
                K += B.T @ D @ B * (h / 2) ** 3
    return K


def assemble(vox: VoxelModel, mat: MaterialParams) -> sparse.csr_matrix:
    """Global stiffness; element stiffness scales with its solid fraction."""
    ke = element_stiffness(mat.youngs_modulus, mat.poisson_ratio, vox.size)
    ne = vox.n_elements
    rows = np.repeat(vox.edof, 24, axis=1).ravel()
    cols = np.tile(vox.edof, (1, 24)).ravel()
    data = (vox.densities[:, None] * ke.ravel()[None, :]).ravel()
    n_dof = vox.n_nodes * 3
    K = sparse.coo_matrix((data, (rows, cols)), shape=(n_dof, n_dof))
    return K.tocsr()


def _preconditioner(K: sparse.csr_matrix) -> LinearOperator:
    if _HAVE_PYAMG:
        ml = pyamg.smoothed_aggregation_solver(K, max_coarse=500)
        return ml.aspreconditioner(cycle="V")
    d = K.diagonal()
    d[d == 0] = 1.0
    inv = 1.0 / d
    return LinearOperator(K.shape, matvec=lambda x: inv * x)


class StaticSolver:
    """Assembled stiffness for one voxel model; reusable across load cases."""

    def __init__(self, vox: VoxelModel, mat: MaterialParams):
        self.vox = vox
        self.mat = mat
        self.K = assemble(vox, mat)
        self._precond_cache: tuple | None = None

    def solve(self, bc: BoundaryConditions) \
            -> tuple[DisplacementField, np.ndarray]:
        """Solve K u = f; returns the displacement field and the reaction
        force vector on constrained dofs (full length, zero elsewhere)."""
        vox, K = self.vox, self.K
        n_dof = vox.n_nodes * 3

        u = np.zeros(n_dof)
        constrained = np.zeros(n_dof, dtype=bool)
        fixed = np.asarray(bc.fixed_nodes, dtype=int)
        if len(fixed):
            idx = (fixed[:, None] * 3 + np.arange(3)).ravel()
            constrained[idx] = True
        for nodes, axis, value in bc.prescribed:
            idx = np.asarray(nodes, dtype=int) * 3 + axis
            u[idx] = value
            constrained[idx] = True
        if not constrained.any():
            raise SolverError("no constraints: system is singular")

        f = np.zeros(n_dof)
        for nodes, vector in bc.forces:
            nodes = np.asarray(nodes, dtype=int)
            share = np.asarray(vector, dtype=float) / len(nodes)
            for ax in range(3):
                f[nodes * 3 + ax] += share[ax]

        free = ~constrained
        rhs = f[free] - K[free][:, constrained] @ u[constrained]
        K_ff = K[free][:, free]
        key = constrained.tobytes()
        if self._precond_cache is not None and self._precond_cache[0] == key:
            M = self._precond_cache[1]
        else:
            M = _preconditioner(K_ff)
            self._precond_cache = (key, M)
        iters = 0

        def count(_):
            nonlocal iters
            iters += 1

        x, info = cg(K_ff, rhs, rtol=CG_RTOL, atol=0.0, maxiter=CG_MAX_ITER,
                     M=M, callback=count)
        if info > 0:
            raise SolverError(f"CG did not converge within {CG_MAX_ITER} "
                              f"iterations (info={info})")
        if info < 0:
            raise SolverError("CG failed: singular or ill-posed system")
        resid = np.linalg.norm(K_ff @ x - rhs)
        ref = np.linalg.norm(rhs)
        u[free] = x

        reactions = np.zeros(n_dof)
        reactions[constrained] = (K[constrained] @ u - f[constrained])
        field_res = float(resid / ref) if ref > 0 else 0.0
        return (DisplacementField(vox.nodes, u.reshape(-1, 3),
                                  iterations=iters, residual=field_res),
                reactions)


def solve_static(vox: VoxelModel, mat: MaterialParams,
                 bc: BoundaryConditions) -> tuple[DisplacementField, np.ndarray]:
    """One-shot convenience wrapper around StaticSolver."""
    return StaticSolver(vox, mat).solve(bc)


def element_strains(vox: VoxelModel, disp: DisplacementField) -> StrainField:
    """Strain tensor at element centers and its von Mises equivalent."""
    h = vox.size
    # gradient of shape functions at the element center
    corners = _CORNER_OFFSETS * 2.0 - 1.0
    dN = corners / 8.0 * (2.0 / h)  # (8, 3) at xi=eta=zeta=0
    ue = disp.u.reshape(-1)[vox.edof]  # (ne, 24)
    ux = ue[:, 0::3]
    uy = ue[:, 1::3]
    uz = ue[:, 2::3]
    exx = ux @ dN[:, 0]
    eyy = uy @ dN[:, 1]
    ezz = uz @ dN[:, 2]
    exy = 0.5 * (ux @ dN[:, 1] + uy @ dN[:, 0])
    eyz = 0.5 * (uy @ dN[:, 2] + uz @ dN[:, 1])
    ezx = 0.5 * (uz @ dN[:, 0] + ux @ dN[:, 2])
    tensor = np.stack([exx, eyy, ezz, exy, eyz, ezx], axis=1)
    tr = (exx + eyy + ezz) / 3.0
    dev_sq = ((exx - tr) ** 2 + (eyy - tr) ** 2 + (ezz - tr) ** 2
              + 2.0 * (exy ** 2 + eyz ** 2 + ezx ** 2))
    vm = np.sqrt(2.0 / 3.0 * dev_sq)
    return StrainField(vox.element_centers(), vm, tensor)
