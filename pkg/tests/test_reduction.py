#!/usr/bin/env python3
"""
约化测试
测试约化映射的像、平移作用、轨道等价判定、全对验证与故障注入
"""

import unittest
import sys
import os

from hypothesis import given, settings, strategies as st

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from free_banach_reduction.metric_core import FreeVector, StructuralError
from free_banach_reduction.edge_labeling import LabeledGraph, LabelingConfig, stretch_labeling
from free_banach_reduction.path_labels import assert_forest, path_label
from free_banach_reduction.reduction import (
    ReductionConfig,
    ReductionPoint,
    inject_fault,
    orbit_equivalent,
    reduce_all,
    reduce_point,
    translate,
    verify_reduction,
)
from free_banach_reduction.instance_io import attach_label_metric, random_forest, star_graph


class TestReducePoint(unittest.TestCase):
    """约化映射测试类"""

    def setUp(self):
        self.graph = LabeledGraph.build(["a", "b", "c", "x"], [("a", "b", "e1"), ("c", "b", "e2")])
        self.forest = assert_forest(self.graph)
        self.basis = self.graph.labels

    def test_isolated_vertex(self):
        """测试孤立顶点的像为 {(0, x)}"""
        point = reduce_point(self.forest, "x")
        self.assertEqual(point.entries, frozenset({(FreeVector(self.basis, ()), "x")}))
        self.assertEqual(point.base, "x")
        print("✓ 孤立顶点像测试通过")

    def test_edge_image(self):
        """测试像中每个分支顶点恰好一项，基顶点为零标签"""
        point = reduce_point(self.forest, "a")
        self.assertEqual(point.vertices, frozenset({"a", "b", "c"}))
        self.assertTrue(point.entry("a").is_zero())
        self.assertEqual(point.entry("b"), path_label(self.forest, "a", "b").vector)
        self.assertEqual(point.entry("c"), FreeVector.from_mapping(self.basis, {"e1": 1, "e2": -1}))
        with self.assertRaises(StructuralError):
            point.entry("x")
        rows = point.to_dict()['entries']
        self.assertEqual([row['vertex'] for row in rows], ["a", "b", "c"])
        print("✓ 边的像测试通过")

    def test_base_not_in_equality(self):
        """测试 base 元数据不参与相等比较"""
        point = reduce_point(self.forest, "a")
        self.assertEqual(point, ReductionPoint(point.entries, base=None))
        print("✓ base元数据测试通过")


class TestTranslation(unittest.TestCase):
    """平移作用与轨道等价测试类"""

    def setUp(self):
        self.graph = LabeledGraph.build(["a", "b", "c", "d", "x", "y"],
                                        [("a", "b", "e1"), ("c", "b", "e2"), ("c", "d", "e3"), ("y", "x", "e4")])
        self.forest = assert_forest(self.graph)
        self.images = reduce_all(self.forest)
        self.zero = FreeVector(self.graph.labels, ())

    def test_action_laws(self):
        """测试平移作用的单位元与可加性"""
        point = self.images["b"]
        g = path_label(self.forest, "a", "d").vector
        h = path_label(self.forest, "c", "b").vector
        self.assertEqual(translate(self.zero, point), point)
        self.assertEqual(translate(g, translate(h, point)), translate(g + h, point))
        print("✓ 平移作用律测试通过")

    def test_homomorphism(self):
        """测试 f(y) = p_{y,x} + f(x)"""
        for x in ("a", "b", "c", "d"):
            for y in ("a", "b", "c", "d"):
                moved = translate(path_label(self.forest, y, x), self.images[x])
                self.assertEqual(moved, self.images[y])
        print("✓ 同态性测试通过")

    def test_orbit_equivalent(self):
        """测试自身等价、跨分支不等价、同分支给出 p_{y,x}"""
        same = orbit_equivalent(self.images["a"], self.images["a"])
        self.assertTrue(same.equivalent)
        self.assertTrue(same.translator.is_zero())

        cross = orbit_equivalent(self.images["a"], self.images["x"])
        self.assertFalse(cross.equivalent)
        self.assertIsNone(cross.translator)

        witness = orbit_equivalent(self.images["a"], self.images["d"])
        self.assertTrue(witness.equivalent)
        self.assertEqual(witness.translator, path_label(self.forest, "d", "a").vector)
        self.assertEqual(witness.endpoints, ("d", "a"))
        self.assertEqual(witness.as_path_label(), path_label(self.forest, "d", "a"))
        self.assertEqual(translate(witness.translator, self.images["a"]), self.images["d"])
        print("✓ 轨道等价判定测试通过")

    def test_orbit_rejects_near_miss(self):
        """测试顶点集合相同但标签不同的像不等价"""
        point = self.images["a"]
        bumped = point.entry("b") + FreeVector.from_mapping(self.graph.labels, {"e3": 1})
        entries = {(v, y) for v, y in point.entries if y != "b"} | {(bumped, "b")}
        self.assertFalse(orbit_equivalent(point, ReductionPoint(frozenset(entries))).equivalent)
        other = FreeVector.from_mapping(("z",), {"z": 1})
        with self.assertRaises(StructuralError):
            orbit_equivalent(point, ReductionPoint(frozenset({(other, "a")})))
        print("✓ 近似像拒绝测试通过")

    def test_orbit_with_repeated_vertex(self):
        """测试同一顶点出现两次的像只与平移后的同形像等价"""
        e1 = FreeVector.from_mapping(self.graph.labels, {"e1": 1})
        e4 = FreeVector.from_mapping(self.graph.labels, {"e4": 1})
        doubled = ReductionPoint(frozenset({(self.zero, "a"), (e1, "a")}))
        single = ReductionPoint(frozenset({(self.zero, "a")}))
        self.assertFalse(orbit_equivalent(doubled, single).equivalent)
        self.assertFalse(orbit_equivalent(single, doubled).equivalent)

        # 与单项像的顶点和项数都一致，但两项不能由同一平移得到
        spread = ReductionPoint(frozenset({(self.zero, "a"), (e4, "a")}))
        self.assertFalse(orbit_equivalent(doubled, spread).equivalent)

        shifted = translate(e4, doubled)
        witness = orbit_equivalent(doubled, shifted)
        self.assertTrue(witness.equivalent)
        self.assertEqual(witness.translator, e4)
        self.assertEqual(translate(witness.translator, doubled), shifted)
        self.assertTrue(orbit_equivalent(doubled, doubled).translator.is_zero())
        print("✓ 重复顶点轨道判定测试通过")


class TestVerifyReduction(unittest.TestCase):
    """全对验证测试类"""

    def test_two_components(self):
        """测试两个分支的森林验证通过，跨分支顶点对全部不等价"""
        graph = LabeledGraph.build(["a", "b", "c", "x", "y"], [("a", "b", "e1"), ("b", "c", "e2"), ("x", "y", "e3")])
        forest = assert_forest(graph)
        sl = stretch_labeling(graph)
        self.assertTrue(verify_reduction(forest, sl).ok)
        images = reduce_all(forest)
        for first in ("a", "b", "c"):
            for second in ("x", "y"):
                self.assertFalse(orbit_equivalent(images[first], images[second]).equivalent)
        print("✓ 两分支森林验证测试通过")

    def test_fault_injection(self):
        """测试注入故障后报告同态性失败"""
        graph = star_graph(4)
        forest = assert_forest(graph)
        sl = stretch_labeling(graph)
        corrupted = inject_fault(reduce_all(forest), seed=3)
        report = verify_reduction(forest, sl, corrupted, max_workers=2)
        self.assertFalse(report.ok)
        self.assertIn(ReductionConfig.CHECK_HOMOMORPHISM, report.axioms())
        self.assertIn(ReductionConfig.CHECK_IFF, report.axioms())
        self.assertEqual(inject_fault(reduce_all(forest), seed=3), corrupted)
        print("✓ 故障注入测试通过")

    def test_fault_needs_edges(self):
        """测试没有边时无法注入故障"""
        forest = assert_forest(LabeledGraph.build(["a", "b"], []))
        with self.assertRaises(ValueError):
            inject_fault(reduce_all(forest))
        print("✓ 无边故障注入测试通过")

    def test_structure_check(self):
        """测试缺少顶点的像被结构检查发现"""
        graph = star_graph(2)
        forest = assert_forest(graph)
        sl = stretch_labeling(graph)
        images = reduce_all(forest)
        point = images["v0"]
        images["v0"] = ReductionPoint(frozenset((v, y) for v, y in point.entries if y != "v2"), base="v0")
        report = verify_reduction(forest, sl, images)
        self.assertIn(ReductionConfig.CHECK_STRUCTURE, report.axioms())
        print("✓ 结构检查测试通过")

    def test_mismatched_labeling(self):
        """测试标注与森林标签不一致时报错"""
        forest = assert_forest(star_graph(2))
        with self.assertRaises(StructuralError):
            verify_reduction(forest, stretch_labeling(star_graph(3)))
        print("✓ 标注不一致测试通过")

    @given(st.integers(min_value=0, max_value=30), st.integers(min_value=1, max_value=4),
           st.integers(min_value=0, max_value=2 ** 32 - 1))
    @settings(max_examples=15, deadline=None)
    def test_random_forests(self, n, degree, seed):
        """测试随机森林上约化验证通过，且并行结果与串行一致"""
        graph = random_forest(n, degree, seed)
        forest = assert_forest(graph)
        sl = stretch_labeling(graph)
        report = verify_reduction(forest, sl)
        self.assertTrue(report.ok, report.to_dict())
        self.assertEqual(verify_reduction(forest, sl, max_workers=3), report)

    @given(st.integers(min_value=2, max_value=25), st.integers(min_value=1, max_value=4),
           st.integers(min_value=0, max_value=2 ** 32 - 1))
    @settings(max_examples=8, deadline=None)
    def test_random_forests_small_base_metric(self, n, degree, seed):
        """测试基础度量只有千分之一量级时约化验证与分离度检查仍然通过"""
        graph = attach_label_metric(random_forest(n, degree, seed), seed=seed)
        forest = assert_forest(graph)
        sl = stretch_labeling(graph)
        self.assertGreaterEqual(sl.epsilon, LabelingConfig.STRETCH_FLOOR)
        report = verify_reduction(forest, sl)
        self.assertTrue(report.ok, report.to_dict())
        self.assertNotIn(ReductionConfig.CHECK_SEPARATION_CHAIN, report.axioms())


if __name__ == "__main__":
    unittest.main()
