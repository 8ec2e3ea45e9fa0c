"""
约化映射模块
实现 x ↦ {(p_{x,y}, y) : y 与 x 同分支}、路径标签向量的平移作用、
轨道等价判定，以及在有限实例上对“约化”性质的穷举验证
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .edge_labeling import StretchedLabeling
from .metric_core import FreeVector, StructuralError, ValidationReport, Violation, format_scalar
from .path_labels import Forest, PathLabel, path_labels_from, separation_details

# 获取日志记录器实例
logger = logging.getLogger(__name__)


class ReductionConfig:
    """约化验证配置类"""

    # 验证项名称
    CHECK_STRUCTURE = "structure"
    CHECK_HOMOMORPHISM = "homomorphism"
    CHECK_IFF = "reduction_iff"
    CHECK_WITNESS = "witness_soundness"
    CHECK_SEPARATION = "separation"
    CHECK_SEPARATION_CHAIN = "separation_chain"

    # 全对验证的默认线程数
    DEFAULT_WORKERS = 1


@dataclass(frozen=True)
class ReductionPoint:
    """
    顶点 x 在约化映射下的像 f(x)

    Attributes:
        entries (FrozenSet[Tuple[FreeVector, str]]): (路径标签向量, 顶点) 对的集合
        base (str): 计算该像所用的顶点，不参与相等比较
    """
    entries: FrozenSet[Tuple[FreeVector, str]]
    base: Optional[str] = field(default=None, compare=False)
    _by_vertex: Dict[str, FreeVector] = field(init=False, repr=False, compare=False, hash=False)
    _vertices: FrozenSet[str] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, 'entries', frozenset(self.entries))
        object.__setattr__(self, '_by_vertex', {vertex: vector for vector, vertex in self.entries})
        object.__setattr__(self, '_vertices', frozenset(self._by_vertex))

    @property
    def vertices(self) -> FrozenSet[str]:
        return self._vertices

    @property
    def basis(self) -> Optional[Tuple[str, ...]]:
        for vector, _ in self.entries:
            return vector.basis
        return None

    def entry(self, vertex: str) -> FreeVector:
        try:
            return self._by_vertex[vertex]
        except KeyError:
            raise StructuralError(f"像中不存在顶点: {vertex!r}") from None

    def as_mapping(self) -> Dict[str, FreeVector]:
        return dict(self._by_vertex)

    def to_dict(self) -> Dict:
        rows = sorted(((vertex, str(vector)) for vector, vertex in self.entries))
        return {'base': self.base, 'entries': [{'vertex': v, 'label': text} for v, text in rows]}


@dataclass(frozen=True)
class OrbitWitness:
    """
    轨道等价判定结果

    Attributes:
        equivalent (bool): 是否存在平移 g 使 g + C1 = C2
        translator (Optional[FreeVector]): 等价时的平移向量
        endpoints (Optional[Tuple[str, str]]): 平移向量作为路径标签的 (起点, 终点)，
            即 C2 与 C1 中零标签所在的顶点
    """
    equivalent: bool
    translator: Optional[FreeVector] = None
    endpoints: Optional[Tuple[str, str]] = None

    def as_path_label(self) -> Optional[PathLabel]:
        if self.translator is None or self.endpoints is None:
            return None
        return PathLabel(self.translator, *self.endpoints)

    def to_dict(self) -> Dict:
        return {
            'equivalent': self.equivalent,
            'translator': None if self.translator is None else str(self.translator),
            'endpoints': None if self.endpoints is None else list(self.endpoints),
        }


def reduce_point(forest: Forest, x: str) -> ReductionPoint:
    """
    计算 f(x) = {(p_{x,y}, y) : y 与 x 同分支}

    Args:
        forest (Forest): 森林
        x (str): 顶点

    Returns:
        ReductionPoint: 分支内每个顶点恰好一项，x 自身对应零标签
    """
    labels = path_labels_from(forest, x)
    return ReductionPoint(frozenset((label.vector, y) for y, label in labels.items()), base=x)


def reduce_all(forest: Forest) -> Dict[str, ReductionPoint]:
    """所有顶点的像，按顶点声明顺序"""
    return {x: reduce_point(forest, x) for x in forest.graph.vertices}


def translate(g: Union[FreeVector, PathLabel], point: ReductionPoint) -> ReductionPoint:
    """
    平移作用 g · C = {(g + h, y) : (h, y) ∈ C}

    顶点分量保持不变，base 元数据被清空（平移后不再对应某个计算来源）。
    """
    if isinstance(g, PathLabel):
        g = g.vector
    return ReductionPoint(frozenset((g + h, y) for h, y in point.entries))


def _zero_vertex(point: ReductionPoint) -> Optional[str]:
    for vector, vertex in point.entries:
        if vector.is_zero():
            return vertex
    return None


def orbit_equivalent(first: ReductionPoint, second: ReductionPoint) -> OrbitWitness:
    """
    判定两个像是否属于同一平移轨道

    顶点集合与项数必须相同；取一个公共顶点 v，候选平移 g = h2 - h1 是唯一可能的平移
    （每个顶点在像中恰好出现一次时），再逐项检验 g + C1 = C2。
    某个顶点出现多次的像按集合整体比较，候选平移取遍 v 处的各项之差。

    Args:
        first (ReductionPoint): C1
        second (ReductionPoint): C2

    Returns:
        OrbitWitness: 判定结果与平移见证
    """
    if first.basis is not None and second.basis is not None and first.basis != second.basis:
        raise StructuralError("两个像不在同一标签空间上")
    if first.vertices != second.vertices or len(first.entries) != len(second.entries) or not first.entries:
        return OrbitWitness(False)

    pivot = min(first.vertices)
    if len(first.entries) == len(first.vertices):
        candidate = second.entry(pivot) - first.entry(pivot)
        for vertex, vector in first.as_mapping().items():
            if candidate + vector != second.entry(vertex):
                return OrbitWitness(False)
    else:
        # 同一顶点出现多次时按顶点取值会丢项，改为逐个候选平移比较整个集合
        anchor = next(h for h, y in first.entries if y == pivot)
        options = {h - anchor for h, y in second.entries if y == pivot}
        candidate = next((g for g in options if translate(g, first) == second), None)
        if candidate is None:
            return OrbitWitness(False)

    endpoints = None
    start, end = _zero_vertex(second), _zero_vertex(first)
    if start is not None and end is not None:
        endpoints = (start, end)
    return OrbitWitness(True, candidate, endpoints)


# ==================== 穷举验证 ====================

def _structure_violations(forest: Forest, images: Mapping[str, ReductionPoint]) -> List[Violation]:
    violations = []
    for x in forest.graph.vertices:
        point = images[x]
        members = frozenset(forest.component_members(x))
        if point.vertices != members:
            missing = sorted(members - point.vertices)
            extra = sorted(point.vertices - members)
            violations.append(Violation(ReductionConfig.CHECK_STRUCTURE, (x, tuple(missing), tuple(extra)), 1))
            continue
        if len(point.entries) != len(members):
            violations.append(Violation(ReductionConfig.CHECK_STRUCTURE, (x, "duplicate_vertex"), 1))
        if not point.entry(x).is_zero():
            violations.append(Violation(ReductionConfig.CHECK_STRUCTURE, (x, "base_not_zero"), 1))
    return violations


def _first_mismatch(translated: ReductionPoint, expected: ReductionPoint) -> Optional[str]:
    """平移结果与期望像第一个不一致的顶点"""
    expected_map = expected.as_mapping()
    for vertex, vector in sorted(translated.as_mapping().items()):
        if expected_map.get(vertex) != vector:
            return vertex
    missing = sorted(set(expected_map) - translated.vertices)
    return missing[0] if missing else None


def _scan_rows(forest: Forest,
               images: Mapping[str, ReductionPoint],
               truth: Mapping[str, Mapping[str, PathLabel]],
               rows: Sequence[int]) -> List[Violation]:
    """检查 rows 中每个 x 与其后所有 y 组成的顶点对"""
    vertices = forest.graph.vertices
    violations = []
    for i in rows:
        x = vertices[i]
        for y in vertices[i + 1:]:
            related = forest.same_component(x, y)
            witness = orbit_equivalent(images[x], images[y])

            if related != witness.equivalent:
                violations.append(Violation(ReductionConfig.CHECK_IFF, (x, y, related, witness.equivalent), 1))

            moved = None
            if witness.equivalent:
                moved = translate(witness.translator, images[x])
                if moved != images[y]:
                    violations.append(Violation(ReductionConfig.CHECK_WITNESS, (x, y, str(witness.translator)), 1))

            if related:
                # f(y) = p_{y,x} + f(x)，平移向量相同时沿用上面的平移结果
                if moved is None or witness.translator != truth[y][x].vector:
                    moved = translate(truth[y][x], images[x])
                if moved != images[y]:
                    violations.append(Violation(ReductionConfig.CHECK_HOMOMORPHISM,
                                                (x, y, _first_mismatch(moved, images[y])), 1))
    return violations


def _separation_violations(forest: Forest, sl: StretchedLabeling) -> List[Violation]:
    """
    按分支计算分离度；从分支内任一根出发得到的差集相同，取首个顶点为根

    差集 {p_{x,y} - p_{x,y'}} 等于 {p_{y',y}}，与 x 无关，见 test_root_independence。
    """
    violations = []
    threshold = sl.epsilon / 2
    for component in sorted(set(forest.components.values())):
        members = forest.members(component)
        if len(members) < 2:
            continue
        root = members[0]
        result = separation_details(forest, sl, root)
        if result.value < threshold:
            violations.append(Violation(ReductionConfig.CHECK_SEPARATION,
                                        (root,) + tuple(result.witness), threshold - result.value))
        for pair in result.chain_failures:
            violations.append(Violation(ReductionConfig.CHECK_SEPARATION_CHAIN, (root,) + pair, 1))
    return violations


def verify_reduction(forest: Forest,
                     sl: StretchedLabeling,
                     images: Optional[Mapping[str, ReductionPoint]] = None,
                     max_workers: int = ReductionConfig.DEFAULT_WORKERS) -> ValidationReport:
    """
    在有限实例上穷举验证 f 是从连通关系到平移轨道等价关系的约化

    对每个顶点对检查：x 与 y 同分支 ⟺ f(x) 与 f(y) 轨道等价；返回的平移见证可直接复验；
    同分支时 p_{y,x} + f(x) = f(y)。另外检查像的结构与分离度下界 ε/2。

    Args:
        forest (Forest): 森林
        sl (StretchedLabeling): 该森林的拉伸标注
        images (Optional[Mapping[str, ReductionPoint]]): 待验证的像，缺省时由 reduce_point 计算
        max_workers (int): 按行划分顶点对的线程数

    Returns:
        ValidationReport: 全部反例，检查失败不抛出异常
    """
    if sl.label_space.labels != forest.basis():
        raise StructuralError("拉伸标注的标签与森林的标签不一致")
    if images is None:
        images = reduce_all(forest)

    vertices = forest.graph.vertices
    logger.info(f"开始验证约化：{len(vertices)} 个顶点，{forest.component_count} 个分支")
    truth = {x: path_labels_from(forest, x) for x in vertices}

    violations = _structure_violations(forest, images)
    rows = list(range(len(vertices)))
    if max_workers <= 1 or len(rows) < 2:
        violations.extend(_scan_rows(forest, images, truth, rows))
    else:
        chunks = [rows[i::max_workers] for i in range(max_workers)]
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            futures = [executor.submit(_scan_rows, forest, images, truth, chunk) for chunk in chunks if chunk]
            for future in as_completed(futures):
                violations.extend(future.result())
    violations.extend(_separation_violations(forest, sl))

    violations.sort(key=lambda v: (v.axiom, tuple(str(w) for w in v.witness)))
    report = ValidationReport(tuple(violations))
    if report.ok:
        logger.info("约化验证通过")
    else:
        logger.error(f"约化验证失败：{len(violations)} 个反例，涉及 {sorted(report.axioms())}")
    return report


def inject_fault(images: Mapping[str, ReductionPoint],
                 seed: Optional[int] = None,
                 vertex: Optional[str] = None) -> Dict[str, ReductionPoint]:
    """
    故障注入：翻转某个像中一项非零标签的一个系数的符号

    Args:
        images (Mapping[str, ReductionPoint]): 正确的像
        seed (Optional[int]): 选择被破坏项的随机种子
        vertex (Optional[str]): 指定被破坏的像，缺省时随机选择

    Returns:
        Dict[str, ReductionPoint]: 被破坏的像的副本

    Raises:
        ValueError: 没有可破坏的非零项（森林中没有边）
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    candidates = [x for x, point in images.items()
                  if (vertex is None or x == vertex) and any(not v.is_zero() for v, _ in point.entries)]
    if not candidates:
        raise ValueError("无法注入故障：没有非零的路径标签项")
    target = sorted(candidates)[int(rng.integers(len(candidates)))]
    point = images[target]
    victims = sorted((y, vector) for vector, y in point.entries if not vector.is_zero())
    victim_vertex, victim = victims[int(rng.integers(len(victims)))]
    label, coefficient = victim.terms[0]
    mutated = FreeVector.from_mapping(victim.basis, {**victim.coeffs, label: -coefficient})

    entries = {(vector, y) for vector, y in point.entries if y != victim_vertex}
    entries.add((mutated, victim_vertex))
    corrupted = dict(images)
    corrupted[target] = ReductionPoint(frozenset(entries), base=point.base)
    logger.warning(f"已注入故障：f({target}) 在顶点 {victim_vertex} 处的系数 {label} 由 "
                   f"{format_scalar(coefficient)} 改为 {format_scalar(-coefficient)}")
    return corrupted
