#!/usr/bin/env python3
"""
测试连续性约束模块
"""

import numpy as np
import pytest
from pathlib import Path

# 导入要测试的模块
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.basis import integral_weights_f, make_basis
from src.constraint import (
    Cs_matrix,
    CsCst_matrix,
    build_C,
    constraint_conditioning,
    corollary_bounds,
    nullspace_basis,
    toeplitz_eigenvalues,
)
from src.errors import InputError
from src.mesh import make_partition, make_uniform_partition
from src.repmap import coefficients_from_function


class TestConstraintMatrix:
    """测试 𝒞 的结构"""

    def setup_method(self):
        self.partition = make_partition([0.0, 0.2, 0.5, 0.7, 1.0])
        self.family = make_basis("L", 3)
        self.C = build_C(self.partition, self.family, 2, 1)

    def test_shape(self):
        assert self.C.shape == (3, 28)
        assert self.C.dense().shape == (3, 28)

    def test_row_pattern(self):
        """测试第一行为 [h_1 f, -h_2 e_1]"""
        row = self.C.dense()[0]
        np.testing.assert_allclose(row[0:4], 0.2 * integral_weights_f(self.family))
        np.testing.assert_array_equal(row[4:7], 0.0)
        assert row[7] == pytest.approx(-0.3)
        assert np.count_nonzero(row[8:]) == 0

    def test_continuous_function_in_kernel(self):
        """测试连续多项式的插值系数满足 𝒞c = 0"""
        x = lambda t: np.array([1.0 + t - t**3, 2.0 * t])
        c = coefficients_from_function(x, self.partition, self.family, 2, 1)
        np.testing.assert_allclose(self.C.apply(c.data), 0.0, atol=1e-13)

    def test_jump_detected(self):
        c = np.zeros(self.C.layout.dim)
        c[self.C.layout.component_slice(1, 0).start] = 1.0
        residual = self.C.apply(c)
        assert residual[0] == pytest.approx(-0.3)
        assert residual[1] == pytest.approx(0.3 * integral_weights_f(self.family)[0])

    def test_single_interval_has_no_rows(self):
        C = build_C(make_uniform_partition(0.0, 1.0, 1), self.family, 2, 1)
        assert C.shape == (0, 7)
        np.testing.assert_array_equal(nullspace_basis(C).D, np.eye(7))

    def test_k_copies_of_spectrum(self):
        """测试 𝒞𝒞^T 的谱为 k 份 𝒞_s𝒞_s^T 的谱"""
        C = build_C(self.partition, self.family, 3, 2)
        dense = C.dense()
        lam = np.sort(np.linalg.eigvalsh(dense @ dense.T))
        single = CsCst_matrix(self.partition, C.f).eigenvalues()
        np.testing.assert_allclose(lam, np.sort(np.repeat(single, 2)), rtol=1e-10)


class TestCsCst:
    """测试三对角矩阵 𝒞_s𝒞_s^T"""

    def test_matches_dense_product_nonuniform(self):
        partition = make_partition([0.0, 0.1, 0.35, 0.4, 1.0])
        f = integral_weights_f(make_basis("Ch", 5))
        Cs = Cs_matrix(partition, f)
        np.testing.assert_allclose(CsCst_matrix(partition, f).dense(), Cs @ Cs.T, atol=1e-15)

    def test_banded_storage(self):
        tri = CsCst_matrix(make_uniform_partition(0.0, 1.0, 4), np.array([1.0, 1.0]))
        ab = tri.banded()
        np.testing.assert_allclose(ab[1], tri.diag)
        np.testing.assert_allclose(ab[0, 1:], tri.off)
        assert ab[0, 0] == 0.0

    @pytest.mark.parametrize("kind", ("L", "mL", "Ch", "RK"))
    @pytest.mark.parametrize("n", (2, 5, 17))
    def test_toeplitz_eigenvalues(self, kind, n):
        """测试等距网格的特征值闭式与数值特征分解一致"""
        f = integral_weights_f(make_basis(kind, 5))
        Cs = Cs_matrix(make_uniform_partition(0.0, float(n), n), f)
        np.testing.assert_allclose(
            toeplitz_eigenvalues(float(f @ f), n), np.linalg.eigvalsh(Cs @ Cs.T), rtol=1e-10
        )

    def test_invalid(self):
        with pytest.raises(InputError):
            CsCst_matrix(make_uniform_partition(0.0, 1.0, 1), np.array([1.0, 1.0]))
        with pytest.raises(InputError):
            toeplitz_eigenvalues(2.0, 1)
        with pytest.raises(InputError):
            toeplitz_eigenvalues(0.5, 4)


class TestConditioning:
    """测试 κ(𝒞) 与 ‖𝒞^+‖"""

    @pytest.mark.parametrize("kind", ("L", "Ch", "RK"))
    def test_matches_svd(self, kind):
        for partition in (make_uniform_partition(0.0, 1.0, 8), make_partition([0.0, 0.1, 0.6, 1.0])):
            C = build_C(partition, make_basis(kind, 4), 2, 1)
            s = np.linalg.svd(C.dense(), compute_uv=False)
            cond = constraint_conditioning(C)
            assert cond.norm_C == pytest.approx(s[0], rel=1e-10)
            assert cond.norm_Cplus == pytest.approx(1.0 / s[-1], rel=1e-10)
            assert cond.kappa == pytest.approx(s[0] / s[-1], rel=1e-10)

    @pytest.mark.parametrize("kind", ("L", "mL", "Ch", "RK"))
    @pytest.mark.parametrize("N", (3, 5, 10, 20))
    @pytest.mark.parametrize("n", (10, 40))
    def test_corollary_bounds(self, kind, N, n):
        """测试等距网格下 κ(𝒞) 与 ‖𝒞^+‖h 不超过理论上界"""
        family = make_basis(kind, N)
        partition = make_uniform_partition(0.0, 1.0, n)
        cond = constraint_conditioning(build_C(partition, family, 1, 1))
        kappa_bound, cplus_bound = corollary_bounds(family)
        assert cond.kappa <= kappa_bound * (1 + 1e-12)
        assert cond.norm_Cplus * partition.h <= cplus_bound * (1 + 1e-12)

    def test_modified_legendre_bound_values(self):
        kappa_bound, cplus_bound = corollary_bounds(make_basis("mL", 3))
        assert kappa_bound == pytest.approx(np.sqrt(2.0))
        assert cplus_bound == pytest.approx(1.0 / np.sqrt(6.0))

    def test_single_interval_undefined(self):
        C = build_C(make_uniform_partition(0.0, 1.0, 1), make_basis("L", 3), 2, 1)
        with pytest.raises(InputError):
            constraint_conditioning(C)


class TestNullspace:
    """测试 ker𝒞 的正交基"""

    @pytest.mark.parametrize("kind", ("L", "mL", "RK"))
    def test_properties(self, kind):
        partition = make_partition([0.0, 0.25, 0.5, 1.0])
        C = build_C(partition, make_basis(kind, 3), 3, 2)
        basis = nullspace_basis(C)
        D = basis.D
        lay = C.layout
        assert D.shape == (lay.dim, lay.n * lay.m * lay.N + lay.k)
        np.testing.assert_allclose(D.T @ D, np.eye(D.shape[1]), atol=1e-12)
        np.testing.assert_allclose(C.dense() @ D, 0.0, atol=1e-12)
        P = basis.projector
        np.testing.assert_allclose(P @ P, P, atol=1e-12)


# 如果这个文件直接运行，执行测试
if __name__ == "__main__":
    pytest.main([__file__, "-v"])
