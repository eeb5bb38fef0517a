#!/usr/bin/env python3
"""
测试投影模块
"""

import numpy as np
import pytest
from pathlib import Path
from scipy.linalg import block_diag

# 导入要测试的模块
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.basis import make_basis
from src.constraint import nullspace_basis
from src.errors import InputError
from src.mesh import make_partition, make_uniform_partition
from src.projection import (
    build_projection_context,
    max_jump,
    project_coefficients,
    project_H1,
    project_L2,
    step_function_coefficients,
)
from src.repmap import (
    CoefficientVector,
    Layout,
    build_interp_matrices,
    gram_blocks,
    jump_bound_constant,
    norm_H1Dpi,
    norm_L2,
    rep_map_conditioning,
)

PARTITIONS = {
    "uniform": make_uniform_partition(0.0, 1.0, 6),
    "nonuniform": make_partition([0.0, 0.1, 0.3, 0.35, 0.8, 1.0]),
}


def _random_coefficients(layout, seed=0):
    return CoefficientVector(layout, np.random.default_rng(seed).standard_normal(layout.dim))


class TestEuclideanProjection:
    """测试 Q_π"""

    @pytest.mark.parametrize("grid", sorted(PARTITIONS))
    @pytest.mark.parametrize("kind", ("L", "mL", "Ch", "RK"))
    def test_matches_nullspace_projector(self, grid, kind):
        """测试与 𝒟𝒟^T c 一致"""
        partition = PARTITIONS[grid]
        context = build_projection_context(partition, make_basis(kind, 3), 3, 2)
        c = _random_coefficients(context.layout, 1)
        projected = project_coefficients(c, context)
        expected = nullspace_basis(context.constraint).projector @ c.data
        np.testing.assert_allclose(projected.data, expected, atol=1e-11)

    def test_idempotent_and_feasible(self):
        context = build_projection_context(PARTITIONS["nonuniform"], make_basis("Ch", 4), 2, 1)
        once = project_coefficients(_random_coefficients(context.layout, 2), context)
        twice = project_coefficients(once, context)
        np.testing.assert_allclose(context.constraint.apply(once.data), 0.0, atol=1e-12)
        np.testing.assert_allclose(twice.data, once.data, atol=1e-12)

    @pytest.mark.parametrize("kind", ("L", "Ch"))
    def test_self_adjoint(self, kind):
        """测试 <Q_π u, v> = <u, Q_π v>"""
        context = build_projection_context(PARTITIONS["nonuniform"], make_basis(kind, 4), 3, 2)
        u = _random_coefficients(context.layout, 11)
        v = _random_coefficients(context.layout, 12)
        left = project_coefficients(u, context).data @ v.data
        right = u.data @ project_coefficients(v, context).data
        assert abs(left - right) <= 1e-12 * u.norm() * v.norm()

    def test_image_norm_transfer(self):
        """测试 c ∈ ker𝒞 时 ‖ℛQ_π(c+Δc) - ℛc‖_{H¹} ≤ σ_max(𝒰̂)|Δc|"""
        partition = make_uniform_partition(0.0, 1.0, 8)
        family = make_basis("Ch", 4)
        context = build_projection_context(partition, family, 3, 2)
        sigma = rep_map_conditioning(partition, family, 3, 2).sigma_max_Uhat
        D = nullspace_basis(context.constraint).D
        rng = np.random.default_rng(13)
        for _ in range(10):
            c = D @ rng.standard_normal(D.shape[1])
            delta = 1e-3 * rng.standard_normal(c.size)
            projected = project_coefficients(CoefficientVector(context.layout, c + delta), context)
            diff = projected.with_data(projected.data - c)
            assert norm_H1Dpi(diff, partition, family) <= sigma * np.linalg.norm(delta) * (1.0 + 1e-12)

    def test_algebraic_components_unchanged(self):
        context = build_projection_context(PARTITIONS["uniform"], make_basis("L", 3), 3, 1)
        c = _random_coefficients(context.layout, 3)
        projected = project_coefficients(c, context)
        for kappa in (1, 2):
            idx = context.layout.component_indices(kappa)
            np.testing.assert_array_equal(projected.data[idx], c.data[idx])

    def test_single_interval_identity(self):
        context = build_projection_context(make_uniform_partition(0.0, 1.0, 1), make_basis("L", 3), 2, 1)
        c = _random_coefficients(context.layout, 4)
        for project in (project_coefficients, project_L2, project_H1):
            np.testing.assert_array_equal(project(c, context).data, c.data)

    def test_layout_mismatch(self):
        context = build_projection_context(PARTITIONS["uniform"], make_basis("L", 3), 2, 1)
        c = CoefficientVector.zeros(Layout(6, 2, 1, 4))
        with pytest.raises(InputError):
            project_coefficients(c, context)


class TestGramProjections:
    """测试 Q_{L²} 与 Q_{H¹}"""

    @pytest.mark.parametrize("broken_h1", (False, True))
    def test_orthogonality(self, broken_h1):
        """测试 c - Qc 与 ker𝒞 在 Gram 内积下正交"""
        partition = PARTITIONS["nonuniform"]
        family = make_basis("RK", 3)
        context = build_projection_context(partition, family, 2, 1)
        c = _random_coefficients(context.layout, 5)
        project = project_H1 if broken_h1 else project_L2
        projected = project(c, context)
        np.testing.assert_allclose(context.constraint.apply(projected.data), 0.0, atol=1e-11)

        G = block_diag(*gram_blocks(partition, build_interp_matrices(family), 2, 1, broken_h1))
        D = nullspace_basis(context.constraint).D
        inner = D.T @ G @ (c.data - projected.data)
        assert np.max(np.abs(inner)) < 1e-10 * max(1.0, np.abs(G @ c.data).max())

    @pytest.mark.parametrize("broken_h1", (False, True))
    def test_generalized_inverse(self, broken_h1):
        """测试 𝒳 = G^{-1}𝒞^T(𝒞G^{-1}𝒞^T)^{-1} 满足广义逆的四个条件，且 Qc = (I - 𝒳𝒞)c"""
        partition = make_partition([0.0, 0.2, 0.35, 0.7, 1.0])
        family = make_basis("L", 3)
        context = build_projection_context(partition, family, 2, 1)
        G = block_diag(*gram_blocks(partition, build_interp_matrices(family), 2, 1, broken_h1))
        C = context.constraint.dense()
        GinvCt = np.linalg.solve(G, C.T)
        X = GinvCt @ np.linalg.inv(C @ GinvCt)
        XC, CX = X @ C, C @ X
        scale = np.abs(X).max()
        np.testing.assert_allclose(C @ X @ C, C, atol=1e-10)
        np.testing.assert_allclose(XC @ X, X, atol=1e-10 * scale)
        # (𝒳𝒞)^T = G𝒳𝒞G^{-1}，右乘 G 后比较
        GXC = G @ XC
        np.testing.assert_allclose(XC.T @ G, GXC, atol=1e-10 * np.abs(GXC).max())
        np.testing.assert_allclose(CX.T, CX, atol=1e-10)
        np.testing.assert_allclose(CX, np.eye(C.shape[0]), atol=1e-10)

        c = _random_coefficients(context.layout, 14)
        project = project_H1 if broken_h1 else project_L2
        np.testing.assert_allclose(
            project(c, context).data, c.data - XC @ c.data, atol=1e-10 * max(1.0, np.abs(XC).max())
        )

    @pytest.mark.parametrize("broken_h1", (False, True))
    def test_best_approximation(self, broken_h1):
        """测试 Qc 是 ker𝒞 中离 c 最近的元素，Q_{H¹} 对 X_π 中任意元素不扩张"""
        partition = PARTITIONS["nonuniform"]
        family = make_basis("mL", 3)
        context = build_projection_context(partition, family, 2, 1)
        project, norm = (project_H1, norm_H1Dpi) if broken_h1 else (project_L2, norm_L2)
        c = _random_coefficients(context.layout, 15)
        projected = project(c, context)
        D = nullspace_basis(context.constraint).D
        rng = np.random.default_rng(16)
        best = norm(c.with_data(c.data - projected.data), partition, family)
        for _ in range(20):
            y = D @ rng.standard_normal(D.shape[1])
            before = norm(c.with_data(c.data - y), partition, family)
            assert best <= before * (1.0 + 1e-12)
            after = norm(c.with_data(projected.data - y), partition, family)
            assert after <= before * (1.0 + 1e-12)

    @pytest.mark.parametrize("project", (project_coefficients, project_L2, project_H1))
    def test_idempotent(self, project):
        context = build_projection_context(PARTITIONS["nonuniform"], make_basis("RK", 3), 2, 1)
        once = project(_random_coefficients(context.layout, 17), context)
        np.testing.assert_allclose(project(once, context).data, once.data, atol=1e-10)

    def test_projection_of_continuous_is_identity(self):
        context = build_projection_context(PARTITIONS["uniform"], make_basis("L", 3), 2, 1)
        D = nullspace_basis(context.constraint).D
        c = CoefficientVector(context.layout, D @ np.ones(D.shape[1]))
        for project in (project_coefficients, project_L2, project_H1):
            np.testing.assert_allclose(project(c, context).data, c.data, atol=1e-10)


class TestStepFunction:
    """测试阶跃函数的跳跃与投影后的连续性"""

    @pytest.mark.parametrize("kind", ("L", "mL", "Ch", "RK"))
    def test_jumps_removed(self, kind):
        partition = make_uniform_partition(0.0, 1.0, 10)
        family = make_basis(kind, 5)
        c = step_function_coefficients(partition, family)
        assert max_jump(c, partition, family) == pytest.approx(1.0)
        context = build_projection_context(partition, family, 1, 1)
        for project in (project_coefficients, project_L2, project_H1):
            assert max_jump(project(c, context), partition, family) < 1e-10

    @pytest.mark.parametrize("kind", ("L", "mL", "Ch", "RK"))
    @pytest.mark.parametrize("N", (3, 5, 10, 20))
    def test_jumps_removed_to_rounding(self, kind, N):
        """测试 Q_π 后的跳跃只剩舍入误差"""
        for n in (10, 20):
            partition = make_uniform_partition(0.0, 1.0, n)
            family = make_basis(kind, N)
            c = step_function_coefficients(partition, family)
            assert max_jump(c, partition, family) == pytest.approx(1.0, abs=1e-12)
            context = build_projection_context(partition, family, 1, 1)
            assert max_jump(project_coefficients(c, context), partition, family) <= 1e-12

    @pytest.mark.slow
    @pytest.mark.parametrize("kind", ("L", "mL", "Ch", "RK"))
    @pytest.mark.parametrize("N", (3, 5, 10, 20))
    def test_jumps_removed_fine_meshes(self, kind, N):
        family = make_basis(kind, N)
        for n in (40, 80, 160, 320):
            partition = make_uniform_partition(0.0, 1.0, n)
            c = step_function_coefficients(partition, family)
            assert max_jump(c, partition, family) == pytest.approx(1.0, abs=1e-12)
            context = build_projection_context(partition, family, 1, 1)
            assert max_jump(project_coefficients(c, context), partition, family) <= 1e-12

    @pytest.mark.parametrize("kind", ("L", "mL", "Ch", "RK"))
    def test_jump_bound(self, kind):
        """测试任意 c ∈ ker𝒞 下 c̃ 的跳跃不超过 2√2 σ_max(ΓV)|c̃ - c|"""
        partition = make_uniform_partition(0.0, 1.0, 10)
        family = make_basis(kind, 3)
        context = build_projection_context(partition, family, 2, 1)
        D = nullspace_basis(context.constraint).D
        bound = jump_bound_constant(family)
        rng = np.random.default_rng(18)
        for _ in range(10):
            c_tilde = CoefficientVector(context.layout, rng.standard_normal(context.layout.dim))
            jump = max_jump(c_tilde, partition, family)
            assert jump > 0.0
            nearest = project_coefficients(c_tilde, context)
            assert jump <= bound * np.linalg.norm(c_tilde.data - nearest.data)
            c = D @ rng.standard_normal(D.shape[1])
            assert max_jump(c_tilde.with_data(c), partition, family) < 1e-12 * max(1.0, np.linalg.norm(c))
            assert jump <= bound * np.linalg.norm(c_tilde.data - c)

    def test_algebraic_components_zero(self):
        partition = make_uniform_partition(0.0, 1.0, 4)
        c = step_function_coefficients(partition, make_basis("L", 3), m=2, k=1)
        np.testing.assert_array_equal(c.data[c.layout.component_indices(1)], 0.0)

    def test_max_jump_layout_check(self):
        partition = make_uniform_partition(0.0, 1.0, 4)
        c = step_function_coefficients(partition, make_basis("L", 3))
        with pytest.raises(InputError):
            max_jump(c, partition, make_basis("L", 4))


# 如果这个文件直接运行，执行测试
if __name__ == "__main__":
    pytest.main([__file__, "-v"])
