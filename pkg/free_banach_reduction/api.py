"""
自由Banach空间约化验证API接口模块

本模块提供简洁易用的API接口，供命令行与外部程序调用全部验证功能。

主要功能包括:
- 范数相关的随机验证套件（对偶、暴力对照、等距、支撑下界、范数公理）
- 实例相关的验证套件（边标注公理、拉伸常数、分离度、余链恒等式、唯一性、约化）
- 批量实例族验证（随机连通图与经典图族的拉伸常数、随机森林上的约化）
- 各子命令对应的高层函数，统一返回 RunReport
"""

import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .edge_labeling import (
    GraphValidationError,
    LabeledGraph,
    LabelingConfig,
    StretchedLabeling,
    resolve_base_metric,
    stretch_labeling,
    stretch_violations,
    validate_graph,
)
from .free_norm import (
    NormConfig,
    check_certificates,
    compute_norm,
    free_distance,
    norm_bruteforce,
    norm_primal,
    support_lower_bound,
)
from .instance_io import (
    InstanceConfig,
    InstanceParseError,
    binary_tree,
    parse_instance_file,
    parse_vector,
    path_graph,
    random_forest,
    random_graph,
    random_space,
    random_vector,
    serialize_instance,
    star_graph,
)
from .metric_core import (
    MetricValidationError,
    PointedMetricSpace,
    Scalar,
    ScalarMode,
    StructuralError,
    ValidationReport,
    adjoin_basepoint,
    format_scalar,
    to_scalar,
)
from .path_labels import (
    CycleError,
    Forest,
    assert_forest,
    compose,
    enumerate_path_labels,
    is_path_label,
    path_label,
    path_labels_from,
    separation_details,
)
from .reduction import inject_fault, reduce_all, reduce_point, verify_reduction

# 获取日志记录器实例，使用模块名作为日志器名称
logger = logging.getLogger(__name__)


class OutputFormat(Enum):
    """
    报告输出格式枚举
    """
    JSON = "json"  # 机器可读的JSON
    TEXT = "text"  # DataFrame 渲染的表格文本


class SuiteConfig:
    """
    验证套件配置类
    """

    # 覆盖 --seed 的环境变量
    SEED_ENV = "FBR_SEED"
    DEFAULT_SEED = 0

    # 对偶套件：随机空间的点数与向量支撑上界
    DUALITY_CASES = 200
    DUALITY_MAX_POINTS = 12
    DUALITY_MAX_SUPPORT = 6

    # 暴力对照套件：须在暴力枚举的预算之内
    ORACLE_CASES = 120
    ORACLE_MAX_POINTS = 8

    # 等距套件的随机空间数
    ISOMETRY_SPACES = 50

    # 支撑下界与范数公理套件的用例数
    LOWER_BOUND_CASES = 500
    NORM_AXIOM_CASES = 500

    # 拉伸常数族：随机连通图数量与边数上界，以及经典图族的规模
    STRETCH_GRAPHS = 100
    STRETCH_MAX_EDGES = 200
    FAMILY_SIZES = (1, 2, 5, 17, 64, 129)

    # 随机森林族的数量与规模上界
    FOREST_CASES = 50
    FOREST_MAX_SIZE = 100

    # 余链恒等式与唯一性的穷举规模上界（按分支）
    COCYCLE_MAX_SIZE = 40
    UNIQUENESS_MAX_SIZE = 12

    # 每个套件报告中保留的见证数
    MAX_WITNESSES = 5

    # 随机套件的并发线程数
    DEFAULT_WORKERS = 4


@dataclass
class SuiteOutcome:
    """
    单个验证套件的结果

    Attributes:
        name (str): 套件名称
        ok (bool): 是否全部通过
        witnesses (List[Dict]): 失败见证（已截断）
        cases (int): 检查的用例数
        seed (Optional[int]): 随机套件使用的种子
        metrics (Dict): 套件产生的度量值
    """
    name: str
    ok: bool
    witnesses: List[Dict] = field(default_factory=list)
    cases: int = 0
    seed: Optional[int] = None
    metrics: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'ok': self.ok,
            'witnesses': self.witnesses,
            'cases': self.cases,
            'seed': self.seed,
        }


@dataclass
class RunReport:
    """
    一次命令运行的报告

    Attributes:
        command (str): 子命令名称
        digest (Optional[str]): 输入实例字节的SHA-256
        suites (List[SuiteOutcome]): 各套件结果
        metrics (Dict): epsilon、separation、duality_gap
        elapsed_ms (float): 运行耗时（毫秒）
        seed (Optional[int]): 本次运行的随机种子
        result (Dict): 子命令的输出内容
    """
    command: str
    digest: Optional[str] = None
    suites: List[SuiteOutcome] = field(default_factory=list)
    metrics: Dict = field(default_factory=lambda: {'epsilon': None, 'separation': None, 'duality_gap': None})
    elapsed_ms: float = 0.0
    seed: Optional[int] = None
    result: Dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(suite.ok for suite in self.suites)

    def failing(self) -> List[str]:
        return [suite.name for suite in self.suites if not suite.ok]

    def to_dict(self) -> Dict:
        return {
            'command': self.command,
            'digest': self.digest,
            'seed': self.seed,
            'ok': self.ok,
            'suites': [suite.to_dict() for suite in self.suites],
            'metrics': self.metrics,
            'result': self.result,
            'elapsed_ms': self.elapsed_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    def to_frame(self) -> pd.DataFrame:
        """
        将套件结果转换为DataFrame

        Returns:
            pd.DataFrame: 列为 套件、通过、用例数、见证数、首个见证
        """
        rows = [[s.name, s.ok, s.cases, len(s.witnesses),
                 json.dumps(s.witnesses[0], ensure_ascii=False) if s.witnesses else ""]
                for s in self.suites]
        return pd.DataFrame(rows, columns=['套件', '通过', '用例数', '见证数', '首个见证'])

    def to_text(self) -> str:
        lines = [f"命令: {self.command}", f"实例摘要: {self.digest}", f"随机种子: {self.seed}"]
        if self.suites:
            lines.append(self.to_frame().to_string(index=False))
        for key, value in self.metrics.items():
            lines.append(f"{key}: {value}")
        if self.result:
            lines.append(json.dumps(self.result, ensure_ascii=False, indent=2))
        lines.append(f"结果: {'通过' if self.ok else '失败 ' + ', '.join(self.failing())}")
        lines.append(f"耗时: {self.elapsed_ms:.1f} ms")
        return "\n".join(lines)

    def render(self, output_format: Union[str, OutputFormat] = OutputFormat.JSON) -> str:
        if isinstance(output_format, str):
            format_map = {f.value: f for f in OutputFormat}
            if output_format not in format_map:
                raise ValueError(f"无效的输出格式: {output_format}。有效值为: {list(format_map.keys())}")
            output_format = format_map[output_format]
        return self.to_json() if output_format is OutputFormat.JSON else self.to_text()

    def save(self, path: str) -> None:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, ensure_ascii=False, indent=2)
        logger.info(f"报告已保存到: {path}")


# ==================== 工具函数 ====================

def resolve_seed(seed: Optional[int] = None) -> int:
    """
    确定本次运行的随机种子：环境变量 FBR_SEED 优先，其次为参数，最后为默认值

    Raises:
        ValueError: 环境变量不是非负整数
    """
    env_value = os.environ.get(SuiteConfig.SEED_ENV)
    if env_value is not None and env_value.strip():
        try:
            resolved = int(env_value)
        except ValueError:
            raise ValueError(f"环境变量 {SuiteConfig.SEED_ENV} 必须是整数: {env_value!r}") from None
        if resolved < 0:
            raise ValueError(f"环境变量 {SuiteConfig.SEED_ENV} 不能为负: {resolved}")
        return resolved
    return SuiteConfig.DEFAULT_SEED if seed is None else seed


def instance_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def case_seeds(seed: int, count: int) -> List[int]:
    """由主种子派生各用例的种子"""
    rng = np.random.Generator(np.random.PCG64(seed))
    return [int(s) for s in rng.integers(0, 2 ** 32, size=count)]


def _jsonable(value):
    if isinstance(value, (Fraction, int, float)) and not isinstance(value, bool):
        if isinstance(value, float) and math.isinf(value):
            return None
        return format_scalar(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value, key=str) if isinstance(value, (set, frozenset)) else value
        return [_jsonable(v) for v in items]
    return value


def _outcome(name: str,
             witnesses: Sequence[Dict],
             cases: int,
             seed: Optional[int] = None,
             metrics: Optional[Dict] = None) -> SuiteOutcome:
    trimmed = [_jsonable(w) for w in list(witnesses)[:SuiteConfig.MAX_WITNESSES]]
    outcome = SuiteOutcome(name, not witnesses, trimmed, cases, seed, metrics or {})
    if outcome.ok:
        logger.info(f"套件 {name} 通过，共 {cases} 个用例")
    else:
        logger.error(f"套件 {name} 失败：{len(witnesses)} 个见证，首个见证 {trimmed[0]}")
    return outcome


def _report_outcome(name: str, report: ValidationReport, cases: int) -> SuiteOutcome:
    return _outcome(name, [v.to_dict() for v in report.violations], cases)


def _case_space(case_seed: int, max_points: int, min_points: int = 1) -> Tuple[np.random.Generator, int]:
    rng = np.random.Generator(np.random.PCG64(case_seed))
    return rng, int(rng.integers(min_points, max_points + 1))


# ==================== 范数验证套件 ====================

def duality_suite(cases: int = SuiteConfig.DUALITY_CASES,
                  seed: int = SuiteConfig.DEFAULT_SEED,
                  tolerance: float = NormConfig.TOLERANCE) -> SuiteOutcome:
    """
    对偶套件：精确模式下原始值与对偶值完全相等且证书复核通过，浮点模式下间隙不超过容差
    """
    logger.info(f"开始对偶套件：{cases} 个用例，种子 {seed}")
    witnesses = []
    worst_gap = 0.0
    for i, case_seed in enumerate(case_seeds(seed, cases)):
        try:
            rng, size = _case_space(case_seed, SuiteConfig.DUALITY_MAX_POINTS)
            support = int(rng.integers(1, min(SuiteConfig.DUALITY_MAX_SUPPORT, size) + 1))
            space = random_space(size, case_seed)
            v = random_vector(space, support, case_seed, rational=True)
            exact = compute_norm(space, v, ScalarMode.EXACT)
            certificates = check_certificates(exact)
            if exact.gap != 0 or not certificates.ok:
                witnesses.append({'case': i, 'seed': case_seed, 'vector': str(v), 'mode': 'exact',
                                  'gap': exact.gap, 'checks': sorted(certificates.axioms())})

            float_space = random_space(size, case_seed, ScalarMode.FLOAT)
            float_v = random_vector(float_space, support, case_seed, rational=True)
            approx = compute_norm(float_space, float_v, ScalarMode.FLOAT)
            worst_gap = max(worst_gap, float(approx.gap))
            if approx.gap > tolerance or abs(float(approx.value) - float(exact.value)) > tolerance:
                witnesses.append({'case': i, 'seed': case_seed, 'vector': str(float_v), 'mode': 'float',
                                  'gap': approx.gap, 'value': approx.value, 'exact': exact.value})
        except Exception as e:
            logger.error(f"对偶套件用例 {i}（种子 {case_seed}）出错: {e}")
            witnesses.append({'case': i, 'seed': case_seed, 'error': str(e)})
    return _outcome("duality", witnesses, cases, seed, {'duality_gap': worst_gap})


def oracle_suite(cases: int = SuiteConfig.ORACLE_CASES,
                 seed: int = SuiteConfig.DEFAULT_SEED) -> SuiteOutcome:
    """暴力对照套件：预算内的整数向量上，精确原始值与暴力枚举值完全相等"""
    logger.info(f"开始暴力对照套件：{cases} 个用例，种子 {seed}")
    witnesses = []
    for i, case_seed in enumerate(case_seeds(seed, cases)):
        try:
            rng, size = _case_space(case_seed, SuiteConfig.ORACLE_MAX_POINTS)
            support = int(rng.integers(1, min(NormConfig.ORACLE_MAX_SUPPORT, size) + 1))
            space = random_space(size, case_seed)
            v = random_vector(space, support, case_seed, max_mass=NormConfig.ORACLE_MAX_MASS)
            value, _ = norm_primal(space, v, ScalarMode.EXACT)
            oracle = norm_bruteforce(space, v)
            if value != oracle:
                witnesses.append({'case': i, 'seed': case_seed, 'vector': str(v), 'primal': value, 'oracle': oracle})
        except Exception as e:
            logger.error(f"暴力对照用例 {i}（种子 {case_seed}）出错: {e}")
            witnesses.append({'case': i, 'seed': case_seed, 'error': str(e)})
    return _outcome("oracle", witnesses, cases, seed)


def isometry_suite(spaces: int = SuiteConfig.ISOMETRY_SPACES,
                   seed: int = SuiteConfig.DEFAULT_SEED) -> SuiteOutcome:
    """等距套件：任意两点 p、q（含基点）有 ||1·p - 1·q|| = d(p, q)"""
    logger.info(f"开始等距套件：{spaces} 个空间，种子 {seed}")
    witnesses = []
    checked = 0
    for i, case_seed in enumerate(case_seeds(seed, spaces)):
        try:
            _, size = _case_space(case_seed, SuiteConfig.DUALITY_MAX_POINTS)
            space = random_space(size, case_seed)
            points = space.points
            for a, p in enumerate(points):
                for q in points[a + 1:]:
                    checked += 1
                    value = free_distance(space, p, q, ScalarMode.EXACT)
                    if value != space.distance(p, q):
                        witnesses.append({'case': i, 'seed': case_seed, 'pair': (p, q),
                                          'norm': value, 'distance': space.distance(p, q)})
        except Exception as e:
            logger.error(f"等距套件空间 {i}（种子 {case_seed}）出错: {e}")
            witnesses.append({'case': i, 'seed': case_seed, 'error': str(e)})
    return _outcome("isometry", witnesses, checked, seed)


def lower_bound_suite(cases: int = SuiteConfig.LOWER_BOUND_CASES,
                      seed: int = SuiteConfig.DEFAULT_SEED) -> SuiteOutcome:
    """支撑下界套件：支撑至少两点的向量满足 ||v|| >= ½·Σ|λ|·min d"""
    logger.info(f"开始支撑下界套件：{cases} 个用例，种子 {seed}")
    witnesses = []
    for i, case_seed in enumerate(case_seeds(seed, cases)):
        try:
            rng, size = _case_space(case_seed, SuiteConfig.DUALITY_MAX_POINTS, min_points=2)
            support = int(rng.integers(2, min(SuiteConfig.DUALITY_MAX_SUPPORT, size) + 1))
            space = random_space(size, case_seed)
            v = random_vector(space, support, case_seed, rational=True)
            value, _ = norm_primal(space, v)
            bound = support_lower_bound(space, v)
            if value < bound:
                witnesses.append({'case': i, 'seed': case_seed, 'vector': str(v), 'norm': value, 'bound': bound})
        except Exception as e:
            logger.error(f"支撑下界用例 {i}（种子 {case_seed}）出错: {e}")
            witnesses.append({'case': i, 'seed': case_seed, 'error': str(e)})
    return _outcome("lower_bound", witnesses, cases, seed)


def norm_axiom_suite(cases: int = SuiteConfig.NORM_AXIOM_CASES,
                     seed: int = SuiteConfig.DEFAULT_SEED,
                     tolerance: float = NormConfig.TOLERANCE) -> SuiteOutcome:
    """范数公理套件：齐次性精确成立，三角不等式在精确模式下精确、浮点模式下在容差内成立"""
    logger.info(f"开始范数公理套件：{cases} 个用例，种子 {seed}")
    witnesses = []
    for i, case_seed in enumerate(case_seeds(seed, cases)):
        try:
            rng, size = _case_space(case_seed, SuiteConfig.DUALITY_MAX_POINTS)
            space = random_space(size, case_seed)
            limit = min(SuiteConfig.DUALITY_MAX_SUPPORT, size)
            u = random_vector(space, int(rng.integers(1, limit + 1)), case_seed, rational=True)
            w = random_vector(space, int(rng.integers(1, limit + 1)), case_seed + 1, rational=True)
            scale = Fraction(int(rng.integers(-4, 5)) or 1, int(rng.integers(1, 4)))

            norm_u, _ = norm_primal(space, u)
            norm_w, _ = norm_primal(space, w)
            scaled, _ = norm_primal(space, scale * u)
            if scaled != abs(scale) * norm_u:
                witnesses.append({'case': i, 'seed': case_seed, 'axiom': 'homogeneity', 'scale': scale,
                                  'vector': str(u), 'lhs': scaled, 'rhs': abs(scale) * norm_u})
            total, _ = norm_primal(space, u + w)
            if total > norm_u + norm_w:
                witnesses.append({'case': i, 'seed': case_seed, 'axiom': 'triangle',
                                  'u': str(u), 'w': str(w), 'excess': total - norm_u - norm_w})

            float_space = random_space(size, case_seed, ScalarMode.FLOAT)
            fu = float_space.vector({p: float(c) for p, c in u.terms})
            fw = float_space.vector({p: float(c) for p, c in w.terms})
            excess = (norm_primal(float_space, fu + fw)[0]
                      - norm_primal(float_space, fu)[0] - norm_primal(float_space, fw)[0])
            if excess > tolerance:
                witnesses.append({'case': i, 'seed': case_seed, 'axiom': 'triangle_float',
                                  'u': str(fu), 'w': str(fw), 'excess': excess})
        except Exception as e:
            logger.error(f"范数公理用例 {i}（种子 {case_seed}）出错: {e}")
            witnesses.append({'case': i, 'seed': case_seed, 'error': str(e)})
    return _outcome("norm_axioms", witnesses, cases, seed)


# ==================== 实例验证套件 ====================

def axiom_suite(graph: LabeledGraph) -> SuiteOutcome:
    """边标注公理（及显式基础度量的度量公理）"""
    return _report_outcome("axioms", validate_graph(graph), len(graph.edges))


def stretch_suite(graph: LabeledGraph,
                  max_workers: int = LabelingConfig.VERIFY_WORKERS) -> Tuple[SuiteOutcome, StretchedLabeling]:
    """
    构造拉伸标注并检查拉伸常数不小于 1/4

    Returns:
        Tuple[SuiteOutcome, StretchedLabeling]: 套件结果与构造出的标注
    """
    sl = stretch_labeling(graph, max_workers=max_workers)
    report = stretch_violations(sl, LabelingConfig.STRETCH_FLOOR)
    outcome = _report_outcome("stretch", report, len(graph.edges))
    outcome.metrics['epsilon'] = sl.epsilon
    return outcome, sl


def separation_suite(forest: Forest, sl: StretchedLabeling) -> SuiteOutcome:
    """
    每个分支的分离度不小于 ε/2

    分离度与根的选择无关：从任意根出发，差集都是分支内全部非零路径标签 p_{y,y'}
    （由 p_{y,y'} = p_{x,y'} - p_{x,y} 得到），因此每个分支只取首个顶点为根。
    逐根一致性由 tests/test_path_labels.py 的 test_root_independence 覆盖。
    """
    threshold = sl.epsilon / 2
    witnesses = []
    smallest: Optional[Scalar] = None
    components = sorted(set(forest.components.values()))
    for component in components:
        members = forest.members(component)
        if len(members) < 2:
            continue
        result = separation_details(forest, sl, members[0])
        if smallest is None or result.value < smallest:
            smallest = result.value
        if result.value < threshold:
            witnesses.append({'root': members[0], 'pair': result.witness,
                              'separation': result.value, 'threshold': threshold})
        for pair in result.chain_failures:
            witnesses.append({'root': members[0], 'pair': pair, 'check': 'support_bound_chain'})
    return _outcome("separation", witnesses, len(components), metrics={'separation': smallest})


def cocycle_suite(forest: Forest, max_size: int = SuiteConfig.COCYCLE_MAX_SIZE) -> SuiteOutcome:
    """
    余链恒等式 p_{x,z} = p_{x,y} + p_{y,z} 与反对称性 p_{x,y} = -p_{y,x}

    每个分支取前 max_size 个顶点穷举所有三元组。
    """
    witnesses = []
    checked = 0
    for component in sorted(set(forest.components.values())):
        members = forest.members(component)[:max_size]
        truth = {x: path_labels_from(forest, x) for x in members}
        for x in members:
            for y in members:
                if truth[x][y].vector != -truth[y][x].vector:
                    witnesses.append({'check': 'antisymmetry', 'pair': (x, y)})
                for z in members:
                    checked += 1
                    combined = compose(truth[x][y], truth[y][z])
                    if combined.vector != truth[x][z].vector:
                        witnesses.append({'check': 'cocycle', 'triple': (x, y, z),
                                          'composed': str(combined.vector), 'direct': str(truth[x][z].vector)})
    return _outcome("cocycle", witnesses, checked)


def uniqueness_suite(forest: Forest, max_size: int = SuiteConfig.UNIQUENESS_MAX_SIZE) -> SuiteOutcome:
    """
    路径标签唯一性：不超过 max_size 个顶点的分支中，对每个有序顶点对枚举全部简单路径，
    得到的路径标签恰好一个且等于 path_label 的结果
    """
    witnesses = []
    checked = 0
    for component in sorted(set(forest.components.values())):
        members = forest.members(component)
        if len(members) > max_size:
            logger.debug(f"分支 {component} 有 {len(members)} 个顶点，超过唯一性穷举上界，跳过")
            continue
        for x in members:
            for y in members:
                checked += 1
                expected = path_label(forest, x, y).vector
                found = enumerate_path_labels(forest, x, y)
                if found != {expected} or not is_path_label(forest.graph, expected, x, y):
                    witnesses.append({'pair': (x, y), 'expected': str(expected),
                                      'found': sorted(str(v) for v in found)})
    return _outcome("uniqueness", witnesses, checked)


def reduction_suite(forest: Forest,
                    sl: StretchedLabeling,
                    images: Optional[Dict] = None,
                    max_workers: int = 1) -> SuiteOutcome:
    """约化性质的全对验证"""
    report = verify_reduction(forest, sl, images, max_workers=max_workers)
    n = len(forest.graph.vertices)
    return _report_outcome("reduction", report, n * (n - 1) // 2)


# ==================== 实例族验证 ====================

def stretch_family_suite(count: int = SuiteConfig.STRETCH_GRAPHS,
                         max_edges: int = SuiteConfig.STRETCH_MAX_EDGES,
                         seed: int = SuiteConfig.DEFAULT_SEED,
                         family_sizes: Sequence[int] = SuiteConfig.FAMILY_SIZES) -> SuiteOutcome:
    """
    随机连通图与路径、星、完全二叉树族上的拉伸常数不小于 1/4
    """
    logger.info(f"开始拉伸常数族验证：{count} 个随机连通图，种子 {seed}")
    graphs: List[Tuple[str, LabeledGraph]] = []
    for i, case_seed in enumerate(case_seeds(seed, count)):
        rng = np.random.Generator(np.random.PCG64(case_seed))
        n = int(rng.integers(2, max_edges + 2))
        extra = int(rng.integers(0, max_edges - (n - 1) + 1))
        graphs.append((f"random[{i}:{case_seed}]", random_graph(n, extra, case_seed)))
    for size in family_sizes:
        graphs.append((f"path[{size}]", path_graph(size)))
        graphs.append((f"star[{size}]", star_graph(size)))
        graphs.append((f"binary_tree[{size}]", binary_tree(size)))

    witnesses = []
    smallest: Optional[Scalar] = None
    for name, graph in graphs:
        try:
            sl = stretch_labeling(graph)
            if smallest is None or sl.epsilon < smallest:
                smallest = sl.epsilon
            if sl.epsilon < LabelingConfig.STRETCH_FLOOR:
                worst = stretch_violations(sl, LabelingConfig.STRETCH_FLOOR).violations
                witnesses.append({'graph': name, 'epsilon': sl.epsilon,
                                  'pair': worst[0].witness if worst else None})
        except Exception as e:
            logger.error(f"图 {name} 的拉伸标注出错: {e}")
            witnesses.append({'graph': name, 'error': str(e)})
    return _outcome("stretch_family", witnesses, len(graphs), seed, {'min_epsilon': smallest})


def forest_family_suite(count: int = SuiteConfig.FOREST_CASES,
                        max_size: int = SuiteConfig.FOREST_MAX_SIZE,
                        seed: int = SuiteConfig.DEFAULT_SEED) -> SuiteOutcome:
    """
    随机森林族：每个森林构造拉伸标注后做全对约化验证（含分离度下界）
    """
    logger.info(f"开始随机森林族验证：{count} 个森林，种子 {seed}")
    witnesses = []
    for i, case_seed in enumerate(case_seeds(seed, count)):
        try:
            rng = np.random.Generator(np.random.PCG64(case_seed))
            n = int(rng.integers(0, max_size + 1))
            degree = int(rng.integers(1, 5))
            graph = random_forest(n, degree, case_seed)
            forest = assert_forest(graph)
            sl = stretch_labeling(graph)
            report = verify_reduction(forest, sl)
            if not report.ok:
                first = report.violations[0]
                witnesses.append({'case': i, 'seed': case_seed, 'size': n, 'max_degree': degree,
                                  'checks': sorted(report.axioms()), 'first': first.to_dict()})
        except Exception as e:
            logger.error(f"随机森林 {i}（种子 {case_seed}）出错: {e}")
            witnesses.append({'case': i, 'seed': case_seed, 'error': str(e)})
    return _outcome("forest_family", witnesses, count, seed)


def run_suites(tasks: Dict[str, Callable[[], SuiteOutcome]],
               max_workers: int = SuiteConfig.DEFAULT_WORKERS) -> List[SuiteOutcome]:
    """
    并发运行相互独立的套件，结果按套件名排序，并行与否不影响输出

    单个套件抛出异常时记为失败并保留错误信息，不中断其他套件。
    """
    outcomes: Dict[str, SuiteOutcome] = {}
    if not tasks:
        return []
    with ThreadPoolExecutor(max_workers=max(1, min(max_workers, len(tasks)))) as executor:
        future_to_name = {executor.submit(task): name for name, task in tasks.items()}
        for future in as_completed(future_to_name):
            name = future_to_name[future]
            try:
                outcomes[name] = future.result()
            except Exception as e:
                logger.error(f"套件 {name} 运行出错: {e}")
                outcomes[name] = SuiteOutcome(name, False, [{'error': str(e)}])
    return [outcomes[name] for name in sorted(outcomes)]


# ==================== 子命令接口 ====================

def _load(data: bytes, report: RunReport, validate: bool = True):
    """解析实例；解析或语义错误记为失败套件并返回 None"""
    report.digest = instance_digest(data)
    try:
        return parse_instance_file(data, validate=validate)
    except InstanceParseError as e:
        report.suites.append(_outcome("parse", [{'position': e.position, 'error': str(e)}], 1))
    except (MetricValidationError, GraphValidationError) as e:
        report.suites.append(_report_outcome("axioms", e.report, 1))
    return None


def _certify_forest(graph: LabeledGraph, report: RunReport) -> Optional[Forest]:
    try:
        forest = assert_forest(graph)
    except CycleError as e:
        report.suites.append(_outcome("forest", [{'cycle': e.witness}], 1))
        return None
    report.suites.append(_outcome("forest", [], 1))
    return forest


def _finish(report: RunReport, started: float) -> RunReport:
    for suite in report.suites:
        for key, value in suite.metrics.items():
            if key in report.metrics:
                report.metrics[key] = _jsonable(value)
    report.elapsed_ms = round((time.perf_counter() - started) * 1000, 3)
    return report


def label_space_for(graph: LabeledGraph,
                    stretched: bool = False,
                    exact: bool = False) -> PointedMetricSpace:
    """
    命令行 norm 使用的环境空间：实例的基础标签度量（缺省离散度量），或构造出的拉伸标签空间

    Args:
        graph (LabeledGraph): 实例图
        stretched (bool): 是否使用拉伸标签空间
        exact (bool): 是否将距离转换为精确有理数
    """
    if stretched:
        space = stretch_labeling(graph).label_space
    else:
        space = adjoin_basepoint(graph.labels, resolve_base_metric(graph))
    if exact and space.mode is not ScalarMode.EXACT:
        space = PointedMetricSpace.from_matrix(space.points, [[to_scalar(v) for v in row] for row in space.dist],
                                               validate=False)
    return space


def validate_instance(data: bytes) -> RunReport:
    """
    校验实例文件的格式、边标注公理与显式标签度量

    Example:
        >>> report = validate_instance(open('t.json', 'rb').read())
        >>> print(report.ok)
    """
    started = time.perf_counter()
    report = RunReport("validate")
    loaded = _load(data, report, validate=False)
    if loaded is not None:
        report.suites.append(axiom_suite(loaded.graph))
    return _finish(report, started)


def norm_instance(data: bytes,
                  vector: str,
                  exact: bool = False,
                  stretched: bool = False,
                  tolerance: float = NormConfig.TOLERANCE) -> RunReport:
    """
    在实例的标签空间上计算向量范数，输出运输方案、势函数与证书复核

    Example:
        >>> report = norm_instance(data, "1*a-1*b")
        >>> print(report.result['value'])
    """
    started = time.perf_counter()
    report = RunReport("norm")
    loaded = _load(data, report)
    if loaded is None:
        return _finish(report, started)
    space = label_space_for(loaded.graph, stretched=stretched, exact=exact)
    try:
        v = parse_vector(vector, space.labels)
    except (InstanceParseError, StructuralError) as e:
        report.suites.append(_outcome("vector", [{'vector': vector, 'error': str(e)}], 1))
        return _finish(report, started)
    mode = ScalarMode.EXACT if exact else None
    result = compute_norm(space, v, mode)
    report.result = result.to_dict()
    outcome = _report_outcome("certificates", check_certificates(result, tolerance), 1)
    outcome.metrics['duality_gap'] = result.gap
    report.suites.append(outcome)
    return _finish(report, started)


def label_instance(data: bytes, max_workers: int = LabelingConfig.VERIFY_WORKERS) -> RunReport:
    """构造拉伸标注并报告拉伸常数"""
    started = time.perf_counter()
    report = RunReport("label")
    loaded = _load(data, report)
    if loaded is not None:
        outcome, sl = stretch_suite(loaded.graph, max_workers)
        report.suites.append(outcome)
        report.result = _jsonable(sl.to_dict())
    return _finish(report, started)


def paths_instance(data: bytes,
                   source: Optional[str] = None,
                   target: Optional[str] = None) -> RunReport:
    """
    路径标签查询：给定起点与终点时输出单条路径标签，只给起点时输出从起点出发的全部路径标签；
    同时做余链恒等式抽查
    """
    started = time.perf_counter()
    report = RunReport("paths")
    loaded = _load(data, report)
    if loaded is None:
        return _finish(report, started)
    forest = _certify_forest(loaded.graph, report)
    if forest is None:
        return _finish(report, started)
    vertices = forest.graph.vertices
    if source is None:
        source = vertices[0] if vertices else None
    try:
        if source is None:
            report.result = {'paths': []}
        elif target is not None:
            report.result = {'paths': [path_label(forest, source, target).to_dict()]}
        else:
            report.result = {'paths': [p.to_dict() for p in path_labels_from(forest, source).values()]}
    except ValueError as e:
        report.suites.append(_outcome("query", [{'from': source, 'to': target, 'error': str(e)}], 1))
    report.suites.append(cocycle_suite(forest))
    return _finish(report, started)


def reduce_instance(data: bytes, vertex: Optional[str] = None) -> RunReport:
    """输出 f(x)；未给定顶点时输出全部顶点的像"""
    started = time.perf_counter()
    report = RunReport("reduce")
    loaded = _load(data, report)
    if loaded is None:
        return _finish(report, started)
    forest = _certify_forest(loaded.graph, report)
    if forest is None:
        return _finish(report, started)
    try:
        if vertex is not None:
            images = {vertex: reduce_point(forest, vertex)}
        else:
            images = reduce_all(forest)
        report.result = {'images': [point.to_dict() for point in images.values()]}
    except StructuralError as e:
        report.suites.append(_outcome("query", [{'vertex': vertex, 'error': str(e)}], 1))
    return _finish(report, started)


def verify_instance(data: Optional[bytes] = None,
                    seed: Optional[int] = None,
                    size: int = InstanceConfig.DEFAULT_SIZE,
                    max_degree: int = InstanceConfig.DEFAULT_MAX_DEGREE,
                    cases: Optional[int] = None,
                    tolerance: float = NormConfig.TOLERANCE,
                    fault: bool = False,
                    families: bool = False,
                    max_workers: int = SuiteConfig.DEFAULT_WORKERS) -> RunReport:
    """
    完整验证：实例上的边标注公理、拉伸常数、分离度、余链恒等式、唯一性与约化，
    加上随机的对偶、暴力对照、等距、支撑下界与范数公理套件

    未给定实例时按 (size, max_degree, seed) 生成随机森林。

    Args:
        data (Optional[bytes]): 实例文件内容
        seed (Optional[int]): 随机种子，环境变量 FBR_SEED 优先
        size (int): 生成森林的顶点数
        max_degree (int): 生成森林的最大度数
        cases (Optional[int]): 覆盖各随机套件的用例数
        tolerance (float): 浮点比较容差
        fault (bool): 是否向约化像注入故障
        families (bool): 是否追加拉伸常数族与随机森林族验证
        max_workers (int): 随机套件的并发线程数

    Returns:
        RunReport: 全部套件都通过时 ok 为 True

    Example:
        >>> report = verify_instance(seed=7, size=30, cases=20)
        >>> print(report.ok, report.metrics)
    """
    started = time.perf_counter()
    seed = resolve_seed(seed)
    logger.info(f"开始完整验证，随机种子 {seed}")
    report = RunReport("verify", seed=seed)

    if data is None:
        graph = random_forest(size, max_degree, seed)
        data = serialize_instance(graph, seed, {'size': size, 'max_degree': max_degree})
    loaded = _load(data, report)

    if loaded is not None:
        graph = loaded.graph
        report.suites.append(axiom_suite(graph))
        stretch_outcome, sl = stretch_suite(graph)
        report.suites.append(stretch_outcome)
        forest = _certify_forest(graph, report)
        if forest is not None:
            images = reduce_all(forest)
            if fault:
                images = inject_fault(images, seed)
            report.suites.append(separation_suite(forest, sl))
            report.suites.append(cocycle_suite(forest))
            report.suites.append(uniqueness_suite(forest))
            report.suites.append(reduction_suite(forest, sl, images))

    def count(default: int) -> int:
        return default if cases is None else cases

    tasks: Dict[str, Callable[[], SuiteOutcome]] = {
        'duality': lambda: duality_suite(count(SuiteConfig.DUALITY_CASES), seed, tolerance),
        'oracle': lambda: oracle_suite(count(SuiteConfig.ORACLE_CASES), seed),
        'isometry': lambda: isometry_suite(count(SuiteConfig.ISOMETRY_SPACES), seed),
        'lower_bound': lambda: lower_bound_suite(count(SuiteConfig.LOWER_BOUND_CASES), seed),
        'norm_axioms': lambda: norm_axiom_suite(count(SuiteConfig.NORM_AXIOM_CASES), seed, tolerance),
    }
    if families:
        tasks['stretch_family'] = lambda: stretch_family_suite(count(SuiteConfig.STRETCH_GRAPHS), seed=seed)
        tasks['forest_family'] = lambda: forest_family_suite(count(SuiteConfig.FOREST_CASES), seed=seed)
    report.suites.extend(run_suites(tasks, max_workers))

    _finish(report, started)
    if report.ok:
        logger.info(f"完整验证通过，耗时 {report.elapsed_ms:.1f} ms")
    else:
        logger.error(f"完整验证失败: {report.failing()}")
    return report


def generate_instance(size: int = InstanceConfig.DEFAULT_SIZE,
                      max_degree: int = InstanceConfig.DEFAULT_MAX_DEGREE,
                      seed: Optional[int] = None,
                      family: str = "forest",
                      extra_edges: int = 0) -> Tuple[bytes, RunReport]:
    """
    生成随机实例

    Args:
        size (int): 顶点数（star 族为叶子数）
        max_degree (int): 森林的最大度数
        seed (Optional[int]): 随机种子，环境变量 FBR_SEED 优先
        family (str): 'forest'、'graph'、'path'、'star' 或 'binary_tree'
        extra_edges (int): graph 族在生成树之外追加的边数

    Returns:
        Tuple[bytes, RunReport]: 实例文件内容与报告

    Raises:
        ValueError: 无效的实例族
    """
    started = time.perf_counter()
    seed = resolve_seed(seed)
    builders = {
        'forest': lambda: random_forest(size, max_degree, seed),
        'graph': lambda: random_graph(size, extra_edges, seed),
        'path': lambda: path_graph(size),
        'star': lambda: star_graph(size),
        'binary_tree': lambda: binary_tree(size),
    }
    if family not in builders:
        raise ValueError(f"无效的实例族: {family}。有效值为: {list(builders.keys())}")
    graph = builders[family]()
    parameters = {'family': family, 'size': size, 'max_degree': max_degree, 'extra_edges': extra_edges}
    data = serialize_instance(graph, seed, parameters)
    report = RunReport("gen", digest=instance_digest(data), seed=seed,
                       result={'vertices': len(graph.vertices), 'edges': len(graph.edges), **parameters})
    logger.info(f"已生成实例：{family}，{len(graph.vertices)} 个顶点，{len(graph.edges)} 条边，种子 {seed}")
    return data, _finish(report, started)
