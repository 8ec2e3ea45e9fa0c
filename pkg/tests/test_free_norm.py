#!/usr/bin/env python3
"""
自由范数测试
测试原始/对偶求解、暴力枚举对照、支撑下界、证书复核与并行批量计算
"""

import unittest
import sys
import os
from dataclasses import replace
from fractions import Fraction

from hypothesis import given, settings, strategies as st

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from free_banach_reduction.metric_core import ScalarMode, StructuralError, adjoin_basepoint
from free_banach_reduction.free_norm import (
    LipschitzPotential,
    LowerBoundUndefinedError,
    Move,
    NormConfig,
    OracleBudgetError,
    TransportPlan,
    check_certificates,
    compute_norm,
    compute_norms,
    free_distance,
    norm_bruteforce,
    norm_dual,
    norm_primal,
    support_lower_bound,
)
from free_banach_reduction.instance_io import random_space, random_vector


def two_point_space(distance):
    return adjoin_basepoint(["a", "b"], [[0, distance], [distance, 0]])


class TestNormValues(unittest.TestCase):
    """范数取值测试类"""

    def setUp(self):
        self.d = Fraction(3, 10)
        self.space = two_point_space(self.d)
        self.a = self.space.point("a")
        self.b = self.space.point("b")

    def test_single_point(self):
        """测试单点向量的范数为1，方案把质量运到基点"""
        value, plan = norm_primal(self.space, self.a)
        self.assertEqual(value, 1)
        self.assertEqual(plan.moves, (Move("a", "*", 1),))
        dual_value, potential = norm_dual(self.space, self.a)
        self.assertEqual(dual_value, 1)
        self.assertEqual(potential.at("a"), 1)
        print("✓ 单点范数测试通过")

    def test_isometry(self):
        """测试 ||1·a - 1·b|| 等于两点距离"""
        value, _ = norm_primal(self.space, self.a - self.b)
        self.assertEqual(value, self.d)
        self.assertEqual(free_distance(self.space, "a", "b"), self.d)
        float_space = two_point_space(0.3)
        float_value, _ = norm_primal(float_space, float_space.point("a") - float_space.point("b"))
        self.assertAlmostEqual(float_value, 0.3, delta=NormConfig.TOLERANCE)
        print("✓ 等距测试通过")

    def test_homogeneity_example(self):
        """测试 2·a - 2·b 的范数为0.6"""
        v = 2 * (self.a - self.b)
        self.assertEqual(norm_primal(self.space, v)[0], Fraction(3, 5))
        self.assertEqual(norm_bruteforce(self.space, v), Fraction(3, 5))
        print("✓ 齐次性示例测试通过")

    def test_same_sign_pair(self):
        """测试 1·a + 1·b 在距离为1时范数为2"""
        space = two_point_space(1)
        v = space.point("a") + space.point("b")
        value, potential = norm_dual(space, v)
        self.assertEqual(value, 2)
        self.assertEqual(potential.at("a"), 1)
        self.assertEqual(potential.at("b"), 1)
        self.assertEqual(norm_primal(space, v)[0], 2)
        print("✓ 同号两点测试通过")

    def test_zero_vector(self):
        """测试零向量：值为0、方案为空、势函数恒为0"""
        zero = self.space.zero()
        value, plan = norm_primal(self.space, zero)
        self.assertEqual(value, 0)
        self.assertEqual(plan.moves, ())
        dual_value, potential = norm_dual(self.space, zero)
        self.assertEqual(dual_value, 0)
        self.assertTrue(all(v == 0 for v in potential.values.values()))
        self.assertEqual(norm_bruteforce(self.space, zero), 0)
        print("✓ 零向量测试通过")

    def test_foreign_vector(self):
        """测试不在给定空间上的向量被拒绝"""
        other = adjoin_basepoint(["x"], [[0]])
        with self.assertRaises(StructuralError):
            norm_primal(self.space, other.point("x"))
        with self.assertRaises(ValueError):
            norm_primal(self.space, self.a, "decimal")
        print("✓ 环境空间检查测试通过")


class TestBruteforceAndBounds(unittest.TestCase):
    """暴力枚举与支撑下界测试类"""

    def test_bruteforce_examples(self):
        """测试暴力枚举的示例取值"""
        space = two_point_space(Fraction(3, 10))
        self.assertEqual(norm_bruteforce(space, space.point("a")), 1)
        self.assertEqual(norm_bruteforce(space, space.point("a") - space.point("b")), Fraction(3, 10))
        print("✓ 暴力枚举示例测试通过")

    def test_bruteforce_budget(self):
        """测试超出预算时明确拒绝"""
        space = two_point_space(Fraction(1, 2))
        with self.assertRaises(OracleBudgetError):
            norm_bruteforce(space, 7 * space.point("a"))
        with self.assertRaises(ValueError):
            norm_bruteforce(space, Fraction(1, 2) * space.point("a"))
        print("✓ 暴力枚举预算测试通过")

    def test_lower_bound_examples(self):
        """测试支撑下界的示例取值"""
        half = two_point_space(Fraction(1, 2))
        a, b = half.point("a"), half.point("b")
        self.assertEqual(support_lower_bound(half, a + b), Fraction(1, 2))
        self.assertEqual(support_lower_bound(half, a - b), Fraction(1, 2))
        self.assertEqual(norm_primal(half, a - b)[0], Fraction(1, 2))

        fifth = two_point_space(Fraction(1, 5))
        v = 3 * fifth.point("a") + 3 * fifth.point("b")
        self.assertEqual(support_lower_bound(fifth, v), Fraction(3, 5))
        print("✓ 支撑下界示例测试通过")

    def test_lower_bound_undefined(self):
        """测试支撑少于两个点时下界没有定义"""
        space = two_point_space(Fraction(1, 2))
        with self.assertRaises(LowerBoundUndefinedError):
            support_lower_bound(space, space.point("a"))
        with self.assertRaises(LowerBoundUndefinedError):
            support_lower_bound(space, space.zero())
        print("✓ 支撑下界未定义测试通过")


class TestCertificates(unittest.TestCase):
    """证书复核测试类"""

    def setUp(self):
        self.space = two_point_space(Fraction(3, 10))
        self.v = self.space.point("a") - self.space.point("b")

    def test_valid_result(self):
        """测试合法结果复核通过且精确模式下间隙为0"""
        result = compute_norm(self.space, self.v)
        self.assertEqual(result.gap, 0)
        self.assertTrue(check_certificates(result).ok)
        self.assertEqual(set(result.potential.values), set(self.space.points))
        self.assertEqual(result.to_dict()['value'], "3/10")
        print("✓ 合法证书测试通过")

    def test_perturbed_plan(self):
        """测试扰动运输质量后报告散度违规"""
        result = compute_norm(self.space, self.v)
        move = result.plan.moves[0]
        broken = replace(result, plan=TransportPlan((replace(move, mass=move.mass + 1),)))
        report = check_certificates(broken)
        self.assertIn("divergence", report.axioms())
        self.assertIn(move.source, [v.witness[0] for v in report.by_axiom("divergence")])
        print("✓ 扰动运输方案测试通过")

    def test_non_lipschitz_potential(self):
        """测试 phi(a) = 1.5 时报告 (a, *) 上的Lipschitz违规"""
        result = compute_norm(self.space, self.space.point("a"))
        broken = replace(result, potential=LipschitzPotential((("*", 0), ("a", Fraction(3, 2)), ("b", 0))))
        report = check_certificates(broken)
        witnesses = [v.witness for v in report.by_axiom("lipschitz")]
        self.assertIn(("*", "a"), witnesses)
        print("✓ 非Lipschitz势函数测试通过")

    def test_float_result(self):
        """测试浮点模式的间隙不超过容差"""
        space = two_point_space(0.3)
        result = compute_norm(space, space.point("a") - 2 * space.point("b"))
        self.assertEqual(result.mode, ScalarMode.FLOAT)
        self.assertLessEqual(result.gap, NormConfig.TOLERANCE)
        self.assertTrue(check_certificates(result).ok)
        print("✓ 浮点证书测试通过")

    def test_batch(self):
        """测试并行批量计算结果按下标排序且与逐个计算一致"""
        space = random_space(6, seed=11)
        vectors = [random_vector(space, 3, seed=s) for s in range(8)]
        results = compute_norms(space, vectors, max_workers=3)
        self.assertEqual(list(results), list(range(8)))
        for i, v in enumerate(vectors):
            self.assertEqual(results[i].value, norm_primal(space, v)[0])
        self.assertEqual(compute_norms(space, []), {})
        print("✓ 批量计算测试通过")

    def test_forced_exact_on_float_space(self):
        """测试浮点距离的空间强制精确求解时证书按有理数化的距离复核通过"""
        space = adjoin_basepoint(["a", "b", "c"], [[0, 0.1, 0.3], [0.1, 0, 0.2], [0.3, 0.2, 0]])
        v = space.point("a") - 2 * space.point("b") + space.point("c")
        result = compute_norm(space, v, ScalarMode.EXACT)
        self.assertEqual(result.mode, ScalarMode.EXACT)
        self.assertEqual(result.value, Fraction(3, 10))
        self.assertEqual(result.gap, 0)
        self.assertTrue(check_certificates(result).ok)
        print("✓ 浮点空间强制精确证书测试通过")

    def test_batch_isolates_failures(self):
        """测试批量计算中单个向量失败时记录错误并保留其余结果"""
        foreign = adjoin_basepoint(["x"], [[0]]).point("x")
        vectors = [self.v, foreign, self.space.point("a")]
        with self.assertLogs("free_banach_reduction.free_norm", level="ERROR") as captured:
            results = compute_norms(self.space, vectors, max_workers=2)
        self.assertEqual(list(results), [0, 2])
        self.assertEqual(results[0].value, Fraction(3, 10))
        self.assertEqual(results[2].value, 1)
        self.assertTrue(any("第 1 个向量" in line for line in captured.output))
        print("✓ 批量计算失败隔离测试通过")


class TestNormProperties(unittest.TestCase):
    """范数性质的随机化测试类"""

    @given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2 ** 32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_exact_duality(self, size, seed):
        """测试精确模式下原始值与对偶值完全相等"""
        space = random_space(size, seed)
        v = random_vector(space, min(size, 4), seed, rational=True)
        result = compute_norm(space, v)
        self.assertEqual(norm_dual(space, v)[0], result.value)
        self.assertEqual(result.gap, 0)
        self.assertTrue(check_certificates(result).ok)

    @given(st.integers(min_value=4, max_value=14), st.integers(min_value=0, max_value=2 ** 32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_exact_solver_matches_linear_program(self, size, seed):
        """测试较大支撑上精确逐次最短路与线性规划的最优值一致，且势函数满足互补松弛"""
        space = random_space(size, seed)
        v = random_vector(space, min(size, 8), seed, rational=True)
        exact = compute_norm(space, v)
        lp = compute_norm(space, v, ScalarMode.FLOAT)
        self.assertAlmostEqual(float(exact.value), lp.value, delta=1e-7)
        self.assertEqual(exact.gap, 0)
        self.assertTrue(check_certificates(exact).ok)
        phi = exact.potential.values
        for move in exact.plan.moves:
            self.assertEqual(phi[move.source] - phi[move.target], space.distance(move.source, move.target))

    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2 ** 32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_oracle_agreement(self, size, seed):
        """测试预算内的整数向量与暴力枚举一致"""
        space = random_space(size, seed)
        v = random_vector(space, min(size, 3), seed, max_mass=NormConfig.ORACLE_MAX_MASS)
        self.assertEqual(norm_primal(space, v)[0], norm_bruteforce(space, v))

    @given(st.integers(min_value=2, max_value=8), st.integers(min_value=0, max_value=2 ** 32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_float_matches_exact(self, size, seed):
        """测试浮点后端与精确后端在容差内一致"""
        exact_space = random_space(size, seed)
        float_space = random_space(size, seed, ScalarMode.FLOAT)
        exact_value, _ = norm_primal(exact_space, random_vector(exact_space, 2, seed))
        float_value, _ = norm_primal(float_space, random_vector(float_space, 2, seed))
        self.assertAlmostEqual(float_value, float(exact_value), delta=1e-7)

    @given(st.integers(min_value=2, max_value=7), st.integers(min_value=0, max_value=2 ** 32 - 1),
           st.fractions(min_value=-3, max_value=3, max_denominator=3))
    @settings(max_examples=40, deadline=None)
    def test_norm_axioms(self, size, seed, c):
        """测试正定性、齐次性与三角不等式"""
        space = random_space(size, seed)
        u = random_vector(space, 2, seed)
        w = random_vector(space, 2, seed + 1)
        norm_u = norm_primal(space, u)[0]
        self.assertGreater(norm_u, 0)
        self.assertEqual(norm_primal(space, c * u)[0], abs(c) * norm_u)
        self.assertLessEqual(norm_primal(space, u + w)[0], norm_u + norm_primal(space, w)[0])
        self.assertGreaterEqual(norm_u, support_lower_bound(space, u))


if __name__ == "__main__":
    unittest.main()
