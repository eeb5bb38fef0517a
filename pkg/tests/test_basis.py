#!/usr/bin/env python3
"""
测试多项式基模块
"""

import numpy as np
import pytest
from pathlib import Path

# 导入要测试的模块
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.basis import (
    KINDS,
    BasisFamily,
    all_kinds,
    chebyshev_interp_nodes,
    integral_weights_f,
    make_basis,
    normalize_kind,
    uniform_interp_nodes,
)
from src.errors import InputError

DEGREES = (1, 3, 5, 10, 20)


class TestKinds:
    """测试基族名称"""

    def test_aliases(self):
        assert normalize_kind("L") == "legendre"
        assert normalize_kind("mL") == "modified_legendre"
        assert normalize_kind("ch") == "chebyshev"
        assert normalize_kind("RK") == "runge_kutta"
        assert normalize_kind("RKu") == "runge_kutta_uniform"
        assert normalize_kind("Modified-Legendre") == "modified_legendre"

    def test_unknown(self):
        with pytest.raises(InputError):
            normalize_kind("hermite")

    def test_all_kinds(self):
        assert all_kinds() == list(KINDS)
        assert "runge_kutta_uniform" not in all_kinds(include_uniform=False)

    def test_short_name(self):
        assert make_basis("modified_legendre", 3).short_name == "mL"

    def test_factory_cache(self):
        """测试默认节点的基族被缓存"""
        assert make_basis("L", 3) is make_basis("legendre", 3)
        nodes = [0.2, 0.5, 0.8]
        assert make_basis("RK", 3, nodes) is not make_basis("RK", 3)


class TestBasisStructure:
    """测试所有基族共有的结构：p̄_0 ≡ 1、p̄_i(0) = 0、p̄'_{i+1} = p_i"""

    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("N", DEGREES)
    def test_pbar_at_zero(self, kind, N):
        family = make_basis(kind, N)
        row = family.pbar_table([0.0])[0]
        assert row[0] == pytest.approx(1.0)
        np.testing.assert_allclose(row[1:], 0.0, atol=1e-12)

    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("N", (3, 10))
    def test_derivative_relation(self, kind, N):
        """测试 p̄'_{i+1} = p_i"""
        family = make_basis(kind, N)
        tau = np.linspace(0.0, 1.0, 13)
        for i in range(N):
            deriv = family.pbar(i + 1).deriv()(tau)
            np.testing.assert_allclose(deriv, family.eval_p(i, tau), atol=1e-9 * max(1, N**2))
        np.testing.assert_array_equal(family.eval_pbar_derivative(0, tau), 0.0)

    @pytest.mark.parametrize("kind", KINDS)
    def test_table_shapes(self, kind):
        family = make_basis(kind, 4)
        tau = np.linspace(0.0, 1.0, 7)
        assert family.p_table(tau).shape == (7, 4)
        assert family.pbar_table(tau).shape == (7, 5)
        assert family.pbar_derivative_table(tau).shape == (7, 5)
        np.testing.assert_array_equal(family.pbar_derivative_table(tau)[:, 0], 0.0)

    def test_legendre_first_polynomials(self):
        """测试移位 Legendre 多项式"""
        family = make_basis("legendre", 3)
        tau = np.array([0.0, 0.3, 1.0])
        np.testing.assert_allclose(family.eval_p(0, tau), 1.0)
        np.testing.assert_allclose(family.eval_p(1, tau), 2.0 * tau - 1.0)
        np.testing.assert_allclose(family.eval_pbar(1, tau), tau)

    def test_modified_legendre_closed_form(self):
        """测试 p̄_i(τ) = P_i(2τ-1) - (-1)^i"""
        family = make_basis("mL", 4)
        tau = np.linspace(0.0, 1.0, 5)
        x = 2.0 * tau - 1.0
        np.testing.assert_allclose(family.eval_pbar(2, tau), 0.5 * (3 * x**2 - 1) - 1.0, atol=1e-14)
        np.testing.assert_allclose(family.eval_pbar(1, tau), x + 1.0, atol=1e-14)

    @pytest.mark.parametrize("kind", ("runge_kutta", "runge_kutta_uniform"))
    def test_lagrange_property(self, kind):
        """测试 Runge-Kutta 基在插值节点上的 Kronecker 性质"""
        family = make_basis(kind, 6)
        np.testing.assert_allclose(family.p_table(family.nodes), np.eye(6), atol=1e-11)

    def test_interp_nodes(self):
        nodes = chebyshev_interp_nodes(4)
        assert np.all(np.diff(nodes) > 0)
        np.testing.assert_allclose(nodes + nodes[::-1], 1.0, atol=1e-15)
        np.testing.assert_allclose(uniform_interp_nodes(4), [0.125, 0.375, 0.625, 0.875])

    def test_invalid_arguments(self):
        with pytest.raises(InputError):
            BasisFamily("legendre", 0)
        with pytest.raises(InputError):
            BasisFamily("legendre", 3, nodes=[0.1, 0.5, 0.9])
        with pytest.raises(InputError):
            BasisFamily("runge_kutta", 3, nodes=[0.0, 0.5, 0.9])
        with pytest.raises(InputError):
            BasisFamily("runge_kutta", 3, nodes=[0.5, 0.2, 0.9])
        family = make_basis("legendre", 3)
        with pytest.raises(InputError):
            family.eval_p(0, 1.5)
        with pytest.raises(InputError):
            family.p(3)
        with pytest.raises(InputError):
            family.pbar(4)


class TestIntegralWeights:
    """测试积分向量 f = [1, ∫p_0, ..., ∫p_{N-1}]"""

    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("N", DEGREES)
    def test_matches_endpoint_values(self, kind, N):
        """测试 f_i = p̄_i(1)"""
        family = make_basis(kind, N)
        np.testing.assert_allclose(
            integral_weights_f(family), family.pbar_table([1.0])[0], atol=1e-11
        )

    def test_legendre(self):
        np.testing.assert_allclose(integral_weights_f(make_basis("L", 5)), [1, 1, 0, 0, 0, 0])

    def test_modified_legendre(self):
        np.testing.assert_allclose(integral_weights_f(make_basis("mL", 4)), [1, 2, 0, 2, 0])

    def test_chebyshev(self):
        """测试 Chebyshev 族：第 i=4 项为 -1/15"""
        f = integral_weights_f(make_basis("Ch", 6))
        np.testing.assert_allclose(f, [1, 1, 0, -1 / 3, 0, -1 / 15, 0], atol=1e-15)

    @pytest.mark.parametrize("N", (3, 5, 10, 20))
    def test_runge_kutta_norm_bounds(self, N):
        """测试非负 f 时 1 + 1/N <= |f|² <= 2"""
        f = integral_weights_f(make_basis("RK", N))
        assert np.all(f >= 0)
        fnorm2 = float(f @ f)
        assert 1.0 + 1.0 / N - 1e-12 <= fnorm2 <= 2.0 + 1e-12
        assert f[1:].sum() == pytest.approx(1.0, abs=1e-12)


# 如果这个文件直接运行，执行测试
if __name__ == "__main__":
    pytest.main([__file__, "-v"])
