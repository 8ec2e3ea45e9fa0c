"""
有向边标注与拉伸标注构造模块
提供带标签有限图的表示与校验、边图与幂图、固定顺序的贪心真着色，
以及带有可验证拉伸常数 ε 的组合标签度量构造
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

from .metric_core import (
    Matrix,
    PointedMetricSpace,
    Scalar,
    StructuralError,
    ValidationReport,
    Violation,
    adjoin_basepoint,
    format_scalar,
    is_exact,
    normalize_metric,
    validate_metric,
)

# 获取日志记录器实例
logger = logging.getLogger(__name__)


class MetricKind(Enum):
    """
    基础标签度量类型枚举
    """
    DISCRETE = "discrete"  # 离散度量：不同标签距离为1
    EXPLICIT = "explicit"  # 显式给出的度量矩阵


class LabelingConfig:
    """
    拉伸标注配置类
    """

    # 截断构造可保证的拉伸常数下界
    STRETCH_FLOOR = Fraction(1, 4)

    # 没有受约束标签对时约定的拉伸常数
    VACUOUS_EPSILON = Fraction(1)

    # 全对扫描的默认线程数
    VERIFY_WORKERS = 1


class GraphValidationError(ValueError):
    """边标注公理校验失败，携带完整的校验报告"""

    def __init__(self, message: str, report: ValidationReport):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Edge:
    """一条有向标注边：tail -> head，标签为 label"""
    tail: str
    head: str
    label: str


@dataclass(frozen=True)
class LabeledGraph:
    """
    带有向边标注的有限图

    Attributes:
        vertices (Tuple[str, ...]): 顶点标识
        edges (Tuple[Edge, ...]): 标注边，标签两两不同
        base_label_metric (Optional[Matrix]): 按边顺序排列的标签上的基础度量，None 表示离散度量
    """
    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    base_label_metric: Optional[Matrix] = None

    def __post_init__(self):
        object.__setattr__(self, 'vertices', tuple(str(v) for v in self.vertices))
        edges = tuple(e if isinstance(e, Edge) else Edge(*map(str, e)) for e in self.edges)
        object.__setattr__(self, 'edges', edges)
        if self.base_label_metric is not None:
            object.__setattr__(self, 'base_label_metric',
                               tuple(tuple(row) for row in self.base_label_metric))

    @classmethod
    def build(cls,
              vertices: Iterable[str],
              edges: Iterable[Union[Edge, Tuple[str, str, str]]],
              base_label_metric: Optional[Sequence[Sequence[Scalar]]] = None,
              validate: bool = True) -> "LabeledGraph":
        """
        构造并（可选）校验带标签图

        Raises:
            GraphValidationError: 边标注公理不成立
        """
        graph = cls(tuple(vertices), tuple(edges), base_label_metric)
        if validate:
            report = validate_graph(graph)
            if not report.ok:
                raise GraphValidationError(f"边标注校验失败: {sorted(report.axioms())}", report)
        return graph

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(e.label for e in self.edges)

    def edge(self, label: str) -> Edge:
        for e in self.edges:
            if e.label == label:
                return e
        raise StructuralError(f"图中不存在标签: {label!r}")

    def incidence(self) -> Dict[str, List[str]]:
        """顶点到关联标签列表的映射（按边顺序）"""
        incident: Dict[str, List[str]] = {v: [] for v in self.vertices}
        for e in self.edges:
            incident.setdefault(e.tail, []).append(e.label)
            incident.setdefault(e.head, []).append(e.label)
        return incident


def validate_graph(graph: LabeledGraph) -> ValidationReport:
    """
    校验边标注公理

    检查项：顶点不重复、边端点已声明、无自环、标签单射、
    每个无序顶点对至多被一个方向标注、基础标签度量是度量。

    Args:
        graph (LabeledGraph): 待校验的图

    Returns:
        ValidationReport: 校验报告
    """
    violations: List[Violation] = []
    declared = set()
    for v in graph.vertices:
        if v in declared:
            violations.append(Violation("duplicate_vertex", (v,)))
        declared.add(v)

    seen_labels = set()
    seen_pairs: Dict[frozenset, str] = {}
    for e in graph.edges:
        for endpoint in (e.tail, e.head):
            if endpoint not in declared:
                violations.append(Violation("undeclared_vertex", (endpoint, e.label)))
        if e.tail == e.head:
            violations.append(Violation("self_loop", (e.tail, e.label)))
        if e.label in seen_labels:
            violations.append(Violation("label_injective", (e.label,)))
        seen_labels.add(e.label)
        pair = frozenset((e.tail, e.head))
        if pair in seen_pairs and e.tail != e.head:
            violations.append(Violation("orientation", (e.tail, e.head, seen_pairs[pair], e.label)))
        seen_pairs.setdefault(pair, e.label)

    report = ValidationReport(tuple(violations))
    if graph.base_label_metric is not None:
        try:
            report = report.merge(validate_metric(graph.labels, graph.base_label_metric))
        except StructuralError as e:
            report = report.merge(ValidationReport((Violation("label_metric_shape", (str(e),)),)))
    return report


def oriented_edge(graph: LabeledGraph, u: str, v: str) -> Tuple[str, int]:
    """
    方向查找：返回从 u 走到 v 所经过边的带符号标签

    Returns:
        Tuple[str, int]: (标签, 符号)，沿标注方向行走为 +1，逆向为 -1

    Raises:
        StructuralError: u 与 v 之间没有边
    """
    for e in graph.edges:
        if e.tail == u and e.head == v:
            return e.label, 1
        if e.tail == v and e.head == u:
            return e.label, -1
    raise StructuralError(f"顶点 {u!r} 与 {v!r} 之间没有边")


# ==================== 边图、幂图与着色 ====================

def build_edge_graph(graph: LabeledGraph) -> nx.Graph:
    """
    构造边图：两个标签相邻当且仅当它们的边共享一个端点（不考虑方向）

    Args:
        graph (LabeledGraph): 带标签图

    Returns:
        nx.Graph: 以标签为节点的无向图
    """
    edge_graph = nx.Graph()
    edge_graph.add_nodes_from(graph.labels)
    for labels in graph.incidence().values():
        for i, first in enumerate(labels):
            for second in labels[i + 1:]:
                edge_graph.add_edge(first, second)
    return edge_graph


def edge_graph_distances(edge_graph: nx.Graph) -> Dict[str, Dict[str, int]]:
    """边图上的全对BFS路径距离，不同连通分支之间没有条目"""
    return {source: dict(lengths) for source, lengths in nx.all_pairs_shortest_path_length(edge_graph)}


def power_graph(adjacency: nx.Graph,
                n: int,
                distances: Optional[Mapping[str, Mapping[str, int]]] = None) -> nx.Graph:
    """
    第 n 个幂图：两个标签相邻当且仅当它们在边图中的路径距离不超过 2^n

    Args:
        adjacency (nx.Graph): 边图
        n (int): 非负整数
        distances (Optional[Mapping]): 预先计算的全对距离，可省略

    Returns:
        nx.Graph: 阈值图
    """
    if n < 0:
        raise ValueError(f"幂图的指数必须非负，实际为 {n}")
    radius = 2 ** n
    result = nx.Graph()
    result.add_nodes_from(adjacency.nodes)
    for source in adjacency.nodes:
        if distances is not None:
            lengths = distances.get(source, {})
        else:
            lengths = nx.single_source_shortest_path_length(adjacency, source, cutoff=radius)
        for target, k in lengths.items():
            if 1 <= k <= radius:
                result.add_edge(source, target)
    return result


def greedy_proper_coloring(adjacency: nx.Graph, order: Optional[Sequence[str]] = None) -> Dict[str, int]:
    """
    按给定顺序做贪心着色：每个标签取已着色邻居中未出现的最小颜色

    颜色数不超过最大度数加一。

    Args:
        adjacency (nx.Graph): 待着色的图
        order (Optional[Sequence[str]]): 着色顺序，默认按标识排序

    Returns:
        Dict[str, int]: 标签到颜色编号的映射
    """
    if order is None:
        order = sorted(adjacency.nodes)
    if set(order) != set(adjacency.nodes) or len(order) != adjacency.number_of_nodes():
        raise StructuralError("着色顺序必须恰好覆盖图中每个节点一次")
    return nx.greedy_color(adjacency, strategy=lambda graph, colors: iter(order))


def power_coloring(distances: Mapping[str, Mapping[str, int]], order: Sequence[str], n: int) -> Dict[str, int]:
    """
    直接由全对距离做第 n 个幂图的贪心着色，不显式构造幂图

    与 greedy_proper_coloring(power_graph(边图, n), order) 的结果相同。
    """
    if n < 0:
        raise ValueError(f"幂图的指数必须非负，实际为 {n}")
    radius = 2 ** n
    coloring: Dict[str, int] = {}
    for label in order:
        used = {coloring[other] for other, k in distances.get(label, {}).items()
                if 1 <= k <= radius and other in coloring}
        color = 0
        while color in used:
            color += 1
        coloring[label] = color
    return coloring


def is_proper_coloring(adjacency: nx.Graph, coloring: Mapping[str, int]) -> bool:
    return all(coloring[a] != coloring[b] for a, b in adjacency.edges)


# ==================== 拉伸标注 ====================

@dataclass(frozen=True)
class ColoringSequence:
    """
    着色序列 c(0), ..., c(N)，其中 c(n) 是第 n 个幂图的真着色
    """
    colorings: Tuple[Dict[str, int], ...]

    @property
    def depth(self) -> int:
        return len(self.colorings) - 1

    def signature(self, label: str) -> Tuple[int, ...]:
        """标签的颜色序列 (c(0)(l), ..., c(N)(l))"""
        return tuple(c[label] for c in self.colorings)

    def sequence_distance(self, first: str, second: str) -> Fraction:
        """颜色序列之间的截断距离 Σ{2^-n : c(n) 不同}"""
        return sum((Fraction(1, 2 ** n) for n, c in enumerate(self.colorings) if c[first] != c[second]),
                   Fraction(0))

    def to_dict(self) -> Dict[str, List[int]]:
        labels = self.colorings[0].keys() if self.colorings else []
        return {label: list(self.signature(label)) for label in labels}


@dataclass(frozen=True)
class StretchedLabeling:
    """
    拉伸标注：标签度量满足 d(l1, l2) >= ε/k，其中 k 为边图中的路径距离

    Attributes:
        graph (LabeledGraph): 原图
        colorings (ColoringSequence): 各幂图的着色
        label_space (PointedMetricSpace): 添加基点后的标签度量空间
        epsilon (Scalar): 全对扫描得到的拉伸常数
        edge_distances (Optional[Mapping]): 构造时算出的边图距离，供复核扫描复用
    """
    graph: LabeledGraph
    colorings: ColoringSequence
    label_space: PointedMetricSpace
    epsilon: Scalar
    edge_distances: Optional[Mapping[str, Mapping[str, int]]] = field(default=None, repr=False, compare=False)

    def label_distance(self, first: str, second: str) -> Scalar:
        return self.label_space.distance(first, second)

    def to_dict(self) -> Dict:
        labels = list(self.label_space.labels)
        return {
            'labels': labels,
            'depth': self.colorings.depth,
            'colorings': self.colorings.to_dict(),
            'metric': [[format_scalar(self.label_space.distance(a, b)) for b in labels] for a in labels],
            'epsilon': format_scalar(self.epsilon),
        }


def coloring_depth(distances: Mapping[str, Mapping[str, int]]) -> int:
    """截断深度 N = max(0, ceil(log2(边图各分支直径的最大值)))"""
    diameter = max((k for lengths in distances.values() for k in lengths.values()), default=0)
    if diameter <= 1:
        return 0
    return (diameter - 1).bit_length()


def resolve_base_metric(graph: LabeledGraph) -> Matrix:
    """基础度量：缺省为离散度量；给定但存在大于1的元素时先归一化"""
    labels = graph.labels
    if graph.base_label_metric is None:
        return tuple(tuple(0 if i == j else 1 for j in range(len(labels))) for i in range(len(labels)))
    matrix = graph.base_label_metric
    if any(v > 1 for row in matrix for v in row):
        logger.info("基础标签度量存在大于1的距离，执行 t/(t+1) 归一化")
        return normalize_metric(matrix, labels)
    return matrix


def _stretched_value(base: Scalar, weight: int, scale: int) -> Scalar:
    """min(1, (base + weight/scale) / 2)，有理输入一次构造出最简分数"""
    if isinstance(base, float):
        return min(1.0, (base + weight / scale) / 2)
    value = Fraction(base * scale + weight, 2 * scale)
    return 1 if value >= 1 else value


def stretch_labeling(graph: LabeledGraph, max_workers: int = LabelingConfig.VERIFY_WORKERS) -> StretchedLabeling:
    """
    构造拉伸标注

    对 n = 0..N 取第 n 个幂图的贪心真着色，标签距离取
    min(1, ½[d'(l1, l2) + Σ{2^-n : n <= N, c(n)(l1) != c(n)(l2)}])。
    对边图距离为 k 的标签对，取最小的 n 使 2^n >= k，则 2^n < 2k 且两标签颜色不同，
    故距离大于 1/(4k)，拉伸常数不小于 1/4。

    Args:
        graph (LabeledGraph): 带标签图
        max_workers (int): 验证扫描的线程数

    Returns:
        StretchedLabeling: 拉伸标注，epsilon 为 verify_stretched 的扫描结果
    """
    labels = graph.labels
    edge_graph = build_edge_graph(graph)
    distances = edge_graph_distances(edge_graph)
    depth = coloring_depth(distances)
    order = sorted(labels)
    logger.info(f"开始构造拉伸标注：{len(labels)} 个标签，着色深度 {depth}")

    colorings = ColoringSequence(tuple(power_coloring(distances, order, n) for n in range(depth + 1)))

    base = resolve_base_metric(graph)
    signatures = [colorings.signature(label) for label in labels]
    scale = 2 ** depth
    size = len(labels)
    matrix = [[0] * size for _ in range(size)]
    cache: Dict[Tuple[Scalar, int], Scalar] = {}
    for i in range(size):
        for j in range(i + 1, size):
            # Σ 2^-n 以 2^N 为公分母做整数累加
            weight = sum(1 << (depth - n) for n in range(depth + 1) if signatures[i][n] != signatures[j][n])
            key = (base[i][j], weight)
            if key not in cache:
                cache[key] = _stretched_value(base[i][j], weight, scale)
            matrix[i][j] = matrix[j][i] = cache[key]

    # 各项都是伪度量且 d' 是度量，截断到1后仍是度量，这里只检查维度与上界
    label_space = adjoin_basepoint(labels, matrix, validate=False)
    provisional = StretchedLabeling(graph, colorings, label_space, LabelingConfig.VACUOUS_EPSILON, distances)
    epsilon = verify_stretched(provisional, max_workers=max_workers, distances=distances)
    if epsilon < LabelingConfig.STRETCH_FLOOR:
        logger.error(f"拉伸常数 {format_scalar(epsilon)} 低于下界 {LabelingConfig.STRETCH_FLOOR}")
    else:
        logger.info(f"拉伸标注构造完成，拉伸常数 ε = {format_scalar(epsilon)}")
    return replace(provisional, epsilon=epsilon)


def _scan_rows(sl: StretchedLabeling,
               sources: Sequence[str],
               distances: Mapping[str, Mapping[str, int]]) -> Optional[Scalar]:
    """每个无序标签对只看一次，按边图距离 k 分组取最小标签距离，每组只做一次乘法"""
    space = sl.label_space
    closest: Dict[int, Scalar] = {}
    for first in sources:
        i = space.index(first)
        row = space.dist[i]
        for second, k in distances.get(first, {}).items():
            j = space.index(second)
            if k < 1 or j < i:
                continue
            d = row[j]
            if k not in closest or d < closest[k]:
                closest[k] = d
    if not closest:
        return None
    return min(k * d for k, d in closest.items())


def verify_stretched(sl: StretchedLabeling,
                     max_workers: int = LabelingConfig.VERIFY_WORKERS,
                     distances: Optional[Mapping[str, Mapping[str, int]]] = None) -> Scalar:
    """
    全对扫描，返回最大的有效拉伸常数 min{k·d(l1, l2)}

    不同分支中的标签对不构成约束；没有受约束标签对时返回1。

    Args:
        sl (StretchedLabeling): 待验证的标注
        max_workers (int): 并行扫描的线程数，按源标签划分
        distances (Optional[Mapping]): 预先计算的边图距离

    Returns:
        Scalar: 拉伸常数
    """
    if distances is None:
        distances = _distances_for(sl)
    labels = list(sl.label_space.labels)
    if max_workers <= 1 or len(labels) < 2:
        best = _scan_rows(sl, labels, distances)
    else:
        chunks = [labels[i::max_workers] for i in range(max_workers)]
        partial = []
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            futures = [executor.submit(_scan_rows, sl, chunk, distances) for chunk in chunks if chunk]
            for future in as_completed(futures):
                partial.append(future.result())
        found = [value for value in partial if value is not None]
        best = min(found) if found else None
    if best is None:
        return LabelingConfig.VACUOUS_EPSILON
    return best


def _distances_for(sl: StretchedLabeling) -> Mapping[str, Mapping[str, int]]:
    if sl.edge_distances is not None:
        return sl.edge_distances
    return edge_graph_distances(build_edge_graph(sl.graph))


def stretch_violations(sl: StretchedLabeling, epsilon: Scalar) -> ValidationReport:
    """
    列出不满足 d(l1, l2) >= ε/k 的标签对

    Returns:
        ValidationReport: 每条违规的见证为 (l1, l2, k)，幅度为 ε - k·d
    """
    distances = _distances_for(sl)
    space = sl.label_space
    exact = is_exact(epsilon)
    thresholds: Dict[int, Scalar] = {}
    violations = []
    labels = list(space.labels)
    for i, first in enumerate(labels):
        row = space.dist[i + 1]
        lengths = distances.get(first, {})
        for j, second in enumerate(labels[i + 1:], start=i + 2):
            k = lengths.get(second)
            if k is None:
                continue
            if k not in thresholds:
                thresholds[k] = Fraction(epsilon) / k if exact else epsilon / k
            if row[j] < thresholds[k]:
                violations.append(Violation("stretch", (first, second, k), epsilon - k * row[j]))
    return ValidationReport(tuple(violations))
