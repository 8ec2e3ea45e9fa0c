#!/usr/bin/env python3
"""
高层接口测试
测试各验证套件、运行报告、随机种子解析与完整验证流程
"""

import json
import unittest
import sys
import os
import tempfile
import time
import shutil
from unittest import mock

# 添加项目根目录到路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from free_banach_reduction import api
from free_banach_reduction.api import OutputFormat, RunReport, SuiteConfig, SuiteOutcome
from free_banach_reduction.instance_io import attach_label_metric, path_graph, random_forest, serialize_instance
from free_banach_reduction.path_labels import assert_forest


class TestRandomizedSuites(unittest.TestCase):
    """随机化范数套件测试类"""

    def test_norm_suites_pass(self):
        """测试对偶、暴力对照、等距、支撑下界与范数公理套件在少量用例上通过"""
        outcomes = [
            api.duality_suite(6, seed=1),
            api.oracle_suite(6, seed=1),
            api.isometry_suite(3, seed=1),
            api.lower_bound_suite(10, seed=1),
            api.norm_axiom_suite(6, seed=1),
        ]
        for outcome in outcomes:
            self.assertTrue(outcome.ok, (outcome.name, outcome.witnesses))
            self.assertEqual(outcome.seed, 1)
        self.assertIsNotNone(outcomes[0].metrics["duality_gap"])
        print("✓ 随机化范数套件测试通过")

    def test_case_seeds_deterministic(self):
        """测试用例种子由主种子确定"""
        self.assertEqual(api.case_seeds(5, 4), api.case_seeds(5, 4))
        self.assertNotEqual(api.case_seeds(5, 4), api.case_seeds(6, 4))
        self.assertEqual(len(api.case_seeds(0, 0)), 0)
        print("✓ 用例种子确定性测试通过")

    def test_family_suites(self):
        """测试拉伸常数族与随机森林族在小规模上通过"""
        stretch = api.stretch_family_suite(count=3, max_edges=30, seed=2, family_sizes=(1, 2, 5))
        self.assertTrue(stretch.ok, stretch.witnesses)
        self.assertGreaterEqual(stretch.metrics['min_epsilon'], 0.25)
        self.assertEqual(stretch.cases, 3 + 3 * 3)
        forests = api.forest_family_suite(count=3, max_size=20, seed=2)
        self.assertTrue(forests.ok, forests.witnesses)
        print("✓ 实例族套件测试通过")

    def test_run_suites_sorted_and_isolated(self):
        """测试并发运行的结果按名称排序，单个套件异常不影响其他套件"""
        def broken():
            raise RuntimeError("boom")

        outcomes = api.run_suites({
            'zeta': lambda: SuiteOutcome('zeta', True),
            'alpha': broken,
            'mid': lambda: SuiteOutcome('mid', True),
        }, max_workers=3)
        self.assertEqual([o.name for o in outcomes], ['alpha', 'mid', 'zeta'])
        self.assertFalse(outcomes[0].ok)
        self.assertEqual(outcomes[0].witnesses, [{'error': 'boom'}])
        self.assertEqual(api.run_suites({}), [])
        print("✓ 并发套件运行测试通过")


class TestInstanceSuites(unittest.TestCase):
    """实例套件测试类"""

    def setUp(self):
        self.graph = random_forest(15, 3, seed=4)
        self.forest = assert_forest(self.graph)

    def test_instance_suites_pass(self):
        """测试实例上的公理、拉伸、分离度、余链、唯一性与约化套件"""
        stretch, sl = api.stretch_suite(self.graph)
        self.assertTrue(stretch.ok)
        self.assertEqual(stretch.metrics['epsilon'], sl.epsilon)
        for outcome in (api.axiom_suite(self.graph),
                        api.separation_suite(self.forest, sl),
                        api.cocycle_suite(self.forest),
                        api.uniqueness_suite(self.forest),
                        api.reduction_suite(self.forest, sl)):
            self.assertTrue(outcome.ok, (outcome.name, outcome.witnesses))
        print("✓ 实例套件测试通过")

    def test_separation_metric(self):
        """测试分离度套件报告最小分离度不小于 ε/2"""
        stretch, sl = api.stretch_suite(path_graph(6))
        outcome = api.separation_suite(assert_forest(path_graph(6)), sl)
        self.assertGreaterEqual(outcome.metrics['separation'], sl.epsilon / 2)
        print("✓ 分离度度量测试通过")

    def test_instance_suites_small_base_metric(self):
        """测试显式小基础度量的森林上拉伸、分离度与约化套件通过"""
        graph = attach_label_metric(random_forest(30, 3, seed=8), seed=8)
        forest = assert_forest(graph)
        stretch, sl = api.stretch_suite(graph)
        self.assertTrue(stretch.ok, stretch.witnesses)
        self.assertGreaterEqual(sl.epsilon, 0.25)
        separation = api.separation_suite(forest, sl)
        self.assertTrue(separation.ok, separation.witnesses)
        self.assertGreaterEqual(separation.metrics['separation'], sl.epsilon / 2)
        reduction = api.reduction_suite(forest, sl)
        self.assertTrue(reduction.ok, reduction.witnesses)
        print("✓ 小基础度量实例套件测试通过")


class TestFamilyRuntime(unittest.TestCase):
    """默认规模实例族的运行时间测试类"""

    def test_stretch_family_default_size(self):
        """测试默认规模的拉伸常数族在30秒内通过"""
        started = time.perf_counter()
        outcome = api.stretch_family_suite(SuiteConfig.STRETCH_GRAPHS, seed=0)
        elapsed = time.perf_counter() - started
        self.assertTrue(outcome.ok, outcome.witnesses)
        self.assertLess(elapsed, 30)
        print(f"✓ 拉伸常数族运行时间测试通过（{elapsed:.1f}秒）")

    def test_forest_family_default_size(self):
        """测试默认规模的随机森林族在60秒内通过"""
        started = time.perf_counter()
        outcome = api.forest_family_suite(SuiteConfig.FOREST_CASES, seed=0)
        elapsed = time.perf_counter() - started
        self.assertTrue(outcome.ok, outcome.witnesses)
        self.assertLess(elapsed, 60)
        print(f"✓ 随机森林族运行时间测试通过（{elapsed:.1f}秒）")


class TestRunReport(unittest.TestCase):
    """运行报告测试类"""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.report = RunReport("verify", digest="abc", seed=3, suites=[
            SuiteOutcome("duality", True, [], 10, 3),
            SuiteOutcome("reduction", False, [{'axiom': 'homomorphism', 'witness': ['a', 'b', 'c']}], 3),
        ])

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_report_fields(self):
        """测试报告的判定与机器可读字段"""
        self.assertFalse(self.report.ok)
        self.assertEqual(self.report.failing(), ["reduction"])
        data = json.loads(self.report.render(OutputFormat.JSON))
        self.assertEqual(data['command'], "verify")
        self.assertEqual(set(data['metrics']), {'epsilon', 'separation', 'duality_gap'})
        self.assertEqual([s['name'] for s in data['suites']], ["duality", "reduction"])
        self.assertIn('elapsed_ms', data)
        print("✓ 报告字段测试通过")

    def test_report_frame_and_text(self):
        """测试报告的DataFrame与文本渲染"""
        df = self.report.to_frame()
        self.assertEqual(list(df.columns), ['套件', '通过', '用例数', '见证数', '首个见证'])
        self.assertEqual(int(df.iloc[1]['见证数']), 1)
        text = self.report.render("text")
        self.assertIn("失败 reduction", text)
        with self.assertRaises(ValueError):
            self.report.render("yaml")
        print("✓ 报告渲染测试通过")

    def test_report_save(self):
        """测试报告保存为JSON文件"""
        path = os.path.join(self.temp_dir, "nested", "report.json")
        self.report.save(path)
        with open(path, 'r', encoding='utf-8') as f:
            self.assertEqual(json.load(f)['seed'], 3)
        print("✓ 报告保存测试通过")


class TestSeedAndCommands(unittest.TestCase):
    """随机种子与子命令接口测试类"""

    def test_resolve_seed(self):
        """测试环境变量 FBR_SEED 优先于参数"""
        with mock.patch.dict(os.environ, {SuiteConfig.SEED_ENV: "17"}):
            self.assertEqual(api.resolve_seed(3), 17)
        with mock.patch.dict(os.environ, {SuiteConfig.SEED_ENV: "abc"}):
            with self.assertRaises(ValueError):
                api.resolve_seed(3)
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(api.resolve_seed(3), 3)
            self.assertEqual(api.resolve_seed(), SuiteConfig.DEFAULT_SEED)
        print("✓ 随机种子解析测试通过")

    def test_verify_deterministic(self):
        """测试相同种子的完整验证报告除耗时外完全相同"""
        with mock.patch.dict(os.environ, {}, clear=True):
            first = api.verify_instance(seed=5, size=12, cases=2, max_workers=2).to_dict()
            second = api.verify_instance(seed=5, size=12, cases=2, max_workers=1).to_dict()
        first.pop('elapsed_ms')
        second.pop('elapsed_ms')
        self.assertEqual(first, second)
        self.assertTrue(first['ok'])
        self.assertEqual(first['metrics']['epsilon'], 1)
        print("✓ 完整验证确定性测试通过")

    def test_verify_fault(self):
        """测试注入故障的完整验证失败并指明约化套件"""
        data = serialize_instance(random_forest(10, 3, seed=8))
        report = api.verify_instance(data, seed=1, cases=1, fault=True)
        self.assertFalse(report.ok)
        self.assertIn("reduction", report.failing())
        self.assertTrue(report.suites[[s.name for s in report.suites].index("reduction")].witnesses)
        print("✓ 故障注入完整验证测试通过")

    def test_generate_instance(self):
        """测试生成实例与无效实例族"""
        with mock.patch.dict(os.environ, {}, clear=True):
            data, report = api.generate_instance(size=6, family="star", seed=2)
        self.assertEqual(report.result['vertices'], 7)
        self.assertEqual(report.digest, api.instance_digest(data))
        with self.assertRaises(ValueError):
            api.generate_instance(family="lattice")
        print("✓ 实例生成测试通过")


if __name__ == "__main__":
    unittest.main()
