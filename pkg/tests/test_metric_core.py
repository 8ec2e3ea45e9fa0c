#!/usr/bin/env python3
"""
度量空间与形式向量测试
测试有点度量空间的构造与公理校验、归一化、添加基点以及 L(X) 上的向量运算
"""

import unittest
import sys
import os
from fractions import Fraction

from hypothesis import given, settings, strategies as st

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from free_banach_reduction.metric_core import (
    MetricConfig,
    MetricValidationError,
    PointedMetricSpace,
    ScalarMode,
    StructuralError,
    FreeVector,
    adjoin_basepoint,
    normalize_metric,
    validate_metric,
    validate_space,
    vec_add,
    vec_neg,
    vec_scale,
    vec_support,
)


@st.composite
def symmetric_matrices(draw, max_size=5):
    """零对角、正的对称整数矩阵，三角不等式可能不成立"""
    n = draw(st.integers(min_value=2, max_value=max_size))
    upper = draw(st.lists(st.integers(min_value=1, max_value=4),
                          min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    matrix = [[0] * n for _ in range(n)]
    values = iter(upper)
    for i in range(n):
        for j in range(i + 1, n):
            matrix[i][j] = matrix[j][i] = next(values)
    return matrix


@st.composite
def vector_triples(draw):
    """同一基上的三个精确系数向量"""
    basis = ("a", "b", "c", "d")
    coefficient = st.fractions(min_value=-3, max_value=3, max_denominator=4)
    vectors = []
    for _ in range(3):
        coeffs = draw(st.dictionaries(st.sampled_from(basis), coefficient, max_size=4))
        vectors.append(FreeVector.from_mapping(basis, coeffs))
    return tuple(vectors)


class TestPointedMetricSpace(unittest.TestCase):
    """有点度量空间测试类"""

    def setUp(self):
        self.half = Fraction(1, 2)
        self.space = PointedMetricSpace.from_matrix(
            ("*", "a", "b"),
            [[0, 1, 1], [1, 0, self.half], [1, self.half, 0]],
        )

    def test_valid_space(self):
        """测试两点相距0.5的合法空间"""
        report = validate_space(self.space)
        self.assertTrue(report.ok)
        self.assertEqual(self.space.labels, ("a", "b"))
        self.assertEqual(self.space.mode, ScalarMode.EXACT)
        self.assertEqual(self.space.distance("a", "b"), self.half)
        print("✓ 合法空间校验测试通过")

    def test_basepoint_must_be_first(self):
        """测试基点必须位于索引0"""
        with self.assertRaises(StructuralError):
            PointedMetricSpace(("a", "*"), [[0, 1], [1, 0]])
        print("✓ 基点位置测试通过")

    def test_dimension_mismatch_is_structural(self):
        """测试维度不符是结构错误而不是公理违规"""
        with self.assertRaises(StructuralError):
            PointedMetricSpace(("*", "a"), [[0, 1, 1], [1, 0, 1]])
        with self.assertRaises(StructuralError):
            validate_metric(("a", "b"), [[0, 1], [1]])
        print("✓ 维度不符测试通过")

    def test_positivity_violation(self):
        """测试不同点距离为0时报告正定性违规"""
        space = PointedMetricSpace(("*", "a", "b"), [[0, 1, 1], [1, 0, 0], [1, 0, 0]])
        report = validate_space(space)
        self.assertFalse(report.ok)
        witnesses = [v.witness for v in report.by_axiom(MetricConfig.AXIOM_POSITIVITY)]
        self.assertEqual(witnesses, [("a", "b"), ("b", "a")])
        print("✓ 正定性违规测试通过")

    def test_triangle_violation(self):
        """测试三角不等式违规的见证与幅度"""
        near = Fraction(3, 10)
        far = Fraction(9, 10)
        report = validate_metric(
            ("a", "b", "c"),
            [[0, near, far], [near, 0, near], [far, near, 0]],
        )
        violations = report.by_axiom(MetricConfig.AXIOM_TRIANGLE)
        self.assertIn(("a", "b", "c"), [v.witness for v in violations])
        self.assertEqual(violations[0].magnitude, Fraction(3, 10))
        self.assertEqual(report.axioms(), frozenset({MetricConfig.AXIOM_TRIANGLE}))
        print("✓ 三角不等式违规测试通过")

    def test_basepoint_distance_and_bound(self):
        """测试到基点的距离与上界检查"""
        space = PointedMetricSpace(("*", "a", "b"), [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
        axioms = validate_space(space).axioms()
        self.assertIn(MetricConfig.AXIOM_BASEPOINT, axioms)
        self.assertIn(MetricConfig.AXIOM_BOUND, axioms)
        print("✓ 基点距离与上界测试通过")

    def test_float_tolerance(self):
        """测试浮点模式在容差内视为对称"""
        space = PointedMetricSpace(("*", "a", "b"),
                                   [[0.0, 1.0, 1.0], [1.0, 0.0, 0.3], [1.0, 0.3 + 1e-12, 0.0]])
        self.assertEqual(space.mode, ScalarMode.FLOAT)
        self.assertTrue(validate_space(space).ok)
        print("✓ 浮点容差测试通过")

    def test_report_frame(self):
        """测试违规报告转换为DataFrame"""
        report = validate_metric(("a", "b"), [[0, 1], [2, 0]])
        df = report.to_frame()
        self.assertEqual(list(df.columns), ['公理', '见证', '幅度'])
        self.assertEqual(df.iloc[0]['公理'], MetricConfig.AXIOM_SYMMETRY)
        self.assertEqual(report.to_dict()['violations'][0]['witness'], ["a", "b"])
        print("✓ 违规报告转换测试通过")

    @given(symmetric_matrices())
    @settings(max_examples=60, deadline=None)
    def test_triangle_check_matches_bruteforce(self, matrix):
        """测试三角不等式校验与三重循环暴力扫描一致"""
        n = len(matrix)
        points = [f"p{i}" for i in range(n)]
        expected = {
            (points[a], points[b], points[c])
            for a in range(n) for b in range(n) for c in range(n)
            if len({a, b, c}) == 3 and matrix[a][c] > matrix[a][b] + matrix[b][c]
        }
        report = validate_metric(points, matrix)
        found = {v.witness for v in report.by_axiom(MetricConfig.AXIOM_TRIANGLE)}
        self.assertEqual(found, expected)
        self.assertEqual(report.ok, not expected)


class TestNormalizeAndAdjoin(unittest.TestCase):
    """归一化与添加基点测试类"""

    def test_normalize_values(self):
        """测试归一化的具体取值"""
        raw = [[0, 1, 3], [1, 0, 3], [3, 3, 0]]
        matrix = normalize_metric(raw)
        self.assertEqual(matrix[0][0], 0)
        self.assertEqual(matrix[0][1], Fraction(1, 2))
        self.assertEqual(matrix[0][2], Fraction(3, 4))
        print("✓ 归一化取值测试通过")

    def test_normalize_rejects_non_metric(self):
        """测试非度量输入被拒绝并携带报告"""
        with self.assertRaises(MetricValidationError) as ctx:
            normalize_metric([[0, 1, 5], [1, 0, 1], [5, 1, 0]], ["a", "b", "c"])
        self.assertIn(MetricConfig.AXIOM_TRIANGLE, ctx.exception.report.axioms())
        print("✓ 非度量归一化拒绝测试通过")

    def test_normalized_metric_adjoins(self):
        """测试归一化结果添加基点后通过全部公理"""
        raw = [[0, 2, 5, 3], [2, 0, 3, 1], [5, 3, 0, 2], [3, 1, 2, 0]]
        space = adjoin_basepoint(["a", "b", "c", "d"], normalize_metric(raw))
        self.assertTrue(validate_space(space).ok)
        self.assertEqual(space.distance("a", "c"), Fraction(5, 6))
        print("✓ 归一化后添加基点测试通过")

    def test_adjoin_examples(self):
        """测试空点集、单点与两点空间"""
        empty = adjoin_basepoint([], [])
        self.assertEqual(empty.points, ("*",))
        single = adjoin_basepoint(["p"], [[0]])
        self.assertEqual(single.distance("p", "*"), 1)
        pair = adjoin_basepoint(["p", "q"], [[0, Fraction(2, 5)], [Fraction(2, 5), 0]])
        self.assertEqual(pair.size, 3)
        self.assertTrue(validate_space(pair).ok)
        print("✓ 添加基点示例测试通过")

    def test_adjoin_rejects_large_entry(self):
        """测试大于1的元素被拒绝"""
        with self.assertRaises(MetricValidationError) as ctx:
            adjoin_basepoint(["p", "q"], [[0, 2], [2, 0]])
        self.assertIn(MetricConfig.AXIOM_BOUND, ctx.exception.report.axioms())
        with self.assertRaises(StructuralError):
            adjoin_basepoint(["*"], [[0]])
        print("✓ 添加基点拒绝测试通过")


class TestFreeVector(unittest.TestCase):
    """形式向量测试类"""

    def setUp(self):
        self.basis = ("a", "b", "c")
        self.a = FreeVector.from_mapping(self.basis, {"a": 1})
        self.b = FreeVector.from_mapping(self.basis, {"b": 1})

    def test_cancellation(self):
        """测试相反向量相加得到零向量"""
        self.assertTrue(vec_add(self.a, vec_neg(self.a)).is_zero())
        self.assertEqual(self.a - self.a, FreeVector(self.basis, ()))
        print("✓ 抵消测试通过")

    def test_scale_and_support(self):
        """测试标量乘法与支撑集"""
        doubled = vec_scale(2, self.a + self.b)
        self.assertEqual(doubled.coeffs, {"a": 2, "b": 2})
        self.assertEqual(vec_support(self.a - self.b), frozenset({"a", "b"}))
        self.assertTrue(vec_scale(0, self.a).is_zero())
        print("✓ 标量乘法与支撑测试通过")

    def test_mixed_basis(self):
        """测试不同环境空间上的向量不能运算"""
        other = FreeVector.from_mapping(("a", "b"), {"a": 1})
        with self.assertRaises(StructuralError):
            vec_add(self.a, other)
        print("✓ 混合环境空间测试通过")

    def test_basepoint_dropped(self):
        """测试基点上的系数被丢弃"""
        with self.assertLogs('free_banach_reduction.metric_core', level='WARNING'):
            v = FreeVector.from_mapping(self.basis, {"*": 3, "a": 1})
        self.assertEqual(v, self.a)
        with self.assertRaises(StructuralError):
            FreeVector.from_mapping(self.basis, {"z": 1})
        print("✓ 基点系数丢弃测试通过")

    def test_text_form(self):
        """测试向量的文本形式"""
        self.assertEqual(str(self.a - self.b), "1*a-1*b")
        self.assertEqual(str(FreeVector.from_mapping(self.basis, {"c": Fraction(3, 2)})), "3/2*c")
        self.assertEqual(str(FreeVector(self.basis, ())), "0")
        self.assertEqual((self.a + self.b + self.b).mass(), 3)
        print("✓ 文本形式测试通过")

    @given(vector_triples(), st.fractions(min_value=-3, max_value=3, max_denominator=4))
    @settings(max_examples=80, deadline=None)
    def test_module_laws(self, vectors, c):
        """测试阿贝尔群与标量模的运算律（精确相等）"""
        u, v, w = vectors
        zero = FreeVector(u.basis, ())
        self.assertEqual(u + v, v + u)
        self.assertEqual((u + v) + w, u + (v + w))
        self.assertEqual(u + zero, u)
        self.assertTrue((u + (-u)).is_zero())
        self.assertEqual(c * (u + v), c * u + c * v)
        self.assertEqual(vec_scale(c, vec_scale(2, u)), vec_scale(2 * c, u))
        self.assertTrue(all(coeff != 0 for _, coeff in (u + v).terms))


if __name__ == "__main__":
    unittest.main()
