"""
森林与路径标签模块
提供无圈性认证（并查集）、唯一路径标签的计算与组合、
路径标签判定与简单路径枚举，以及路径标签集合的一致离散性（分离度）计算
"""

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple, Union

import networkx as nx

from .edge_labeling import GraphValidationError, LabeledGraph, StretchedLabeling, validate_graph
from .free_norm import norm_primal, support_lower_bound
from .metric_core import FreeVector, Scalar, StructuralError

# 获取日志记录器实例
logger = logging.getLogger(__name__)


class CycleError(ValueError):
    """图中存在圈，携带见证圈的顶点序列"""

    def __init__(self, message: str, witness: Tuple[str, ...]):
        super().__init__(message)
        self.witness = witness


class DisconnectedVerticesError(ValueError):
    """两个顶点不在同一连通分支中，路径标签没有定义"""


class UnionFind:
    """按秩合并、路径压缩的并查集，元素为顶点标识"""

    def __init__(self, elements):
        self.parent = {e: e for e in elements}
        self.rank = {e: 0 for e in elements}

    def find(self, element: str) -> str:
        root = element
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[element] != root:
            self.parent[element], element = root, self.parent[element]
        return root

    def unite(self, first: str, second: str) -> bool:
        """
        合并两个元素所在的集合

        Returns:
            bool: 两个元素原本已在同一集合时返回False
        """
        rep_first, rep_second = self.find(first), self.find(second)
        if rep_first == rep_second:
            return False
        if self.rank[rep_first] < self.rank[rep_second]:
            rep_first, rep_second = rep_second, rep_first
        self.parent[rep_second] = rep_first
        if self.rank[rep_first] == self.rank[rep_second]:
            self.rank[rep_first] += 1
        return True


@dataclass(frozen=True)
class Forest:
    """
    经过无圈认证的带标签图

    Attributes:
        graph (LabeledGraph): 原图
        components (Dict[str, int]): 顶点到连通分支编号的映射，编号按顶点首次出现的顺序分配
        adjacency (Dict[str, Tuple[Tuple[str, str, int], ...]]): 顶点到 (邻居, 标签, 符号) 的映射
    """
    graph: LabeledGraph
    components: Dict[str, int]
    adjacency: Dict[str, Tuple[Tuple[str, str, int], ...]]

    @property
    def component_count(self) -> int:
        return len(set(self.components.values()))

    def component_of(self, vertex: str) -> int:
        try:
            return self.components[vertex]
        except KeyError:
            raise StructuralError(f"森林中不存在顶点: {vertex!r}") from None

    def same_component(self, x: str, y: str) -> bool:
        return self.component_of(x) == self.component_of(y)

    def members(self, component: int) -> List[str]:
        """某分支的顶点，按声明顺序"""
        return [v for v in self.graph.vertices if self.components[v] == component]

    def component_members(self, vertex: str) -> List[str]:
        return self.members(self.component_of(vertex))

    def basis(self) -> Tuple[str, ...]:
        return self.graph.labels


@dataclass(frozen=True)
class PathLabel:
    """
    路径标签：标签上系数为 ±1 的向量，以及路径的起点与终点

    +1 表示沿标注方向经过该边，-1 表示逆向经过。
    """
    vector: FreeVector
    start: str
    end: str

    @property
    def length(self) -> int:
        return len(self.vector.terms)

    def to_dict(self) -> Dict:
        return {'start': self.start, 'end': self.end, 'vector': str(self.vector)}


def assert_forest(graph: LabeledGraph) -> Forest:
    """
    认证图无圈，返回森林

    Args:
        graph (LabeledGraph): 带标签图

    Returns:
        Forest: 认证后的森林

    Raises:
        GraphValidationError: 图不满足边标注公理
        CycleError: 图中有圈，见证为圈上的顶点序列
    """
    report = validate_graph(graph)
    if not report.ok:
        raise GraphValidationError(f"边标注校验失败: {sorted(report.axioms())}", report)

    union_find = UnionFind(graph.vertices)
    partial = nx.Graph()
    partial.add_nodes_from(graph.vertices)
    adjacency: Dict[str, List[Tuple[str, str, int]]] = {v: [] for v in graph.vertices}
    for e in graph.edges:
        if not union_find.unite(e.tail, e.head):
            witness = tuple(nx.shortest_path(partial, e.head, e.tail))
            logger.warning(f"检测到圈，见证: {' -> '.join(witness)}")
            raise CycleError(f"图中存在圈: {witness}", witness)
        partial.add_edge(e.tail, e.head)
        adjacency[e.tail].append((e.head, e.label, 1))
        adjacency[e.head].append((e.tail, e.label, -1))

    components: Dict[str, int] = {}
    root_ids: Dict[str, int] = {}
    for v in graph.vertices:
        root = union_find.find(v)
        if root not in root_ids:
            root_ids[root] = len(root_ids)
        components[v] = root_ids[root]

    forest = Forest(graph, components, {v: tuple(items) for v, items in adjacency.items()})
    logger.debug(f"无圈认证通过：{len(graph.vertices)} 个顶点，{forest.component_count} 个分支")
    return forest


def _bfs_parents(forest: Forest, x: str, target: Optional[str] = None) -> Dict[str, Tuple[str, str, int]]:
    """从 x 出发的BFS，记录每个顶点的 (父顶点, 标签, 从父到子的符号)"""
    parents: Dict[str, Tuple[str, str, int]] = {}
    seen = {x}
    queue = deque([x])
    while queue:
        u = queue.popleft()
        if u == target:
            break
        for w, label, sign in forest.adjacency[u]:
            if w not in seen:
                seen.add(w)
                parents[w] = (u, label, sign)
                queue.append(w)
    return parents


def path_label(forest: Forest, x: str, y: str) -> PathLabel:
    """
    计算从 x 到 y 的唯一路径标签

    Args:
        forest (Forest): 森林
        x (str): 起点
        y (str): 终点

    Returns:
        PathLabel: 唯一简单路径的带符号指示向量

    Raises:
        DisconnectedVerticesError: x 与 y 不在同一分支
    """
    if not forest.same_component(x, y):
        raise DisconnectedVerticesError(f"顶点 {x!r} 与 {y!r} 不在同一连通分支")
    parents = _bfs_parents(forest, x, target=y)
    coeffs: Dict[str, int] = {}
    node = y
    while node != x:
        parent, label, sign = parents[node]
        coeffs[label] = sign
        node = parent
    return PathLabel(FreeVector.from_mapping(forest.basis(), coeffs), x, y)


def path_labels_from(forest: Forest, x: str) -> Dict[str, PathLabel]:
    """
    一次遍历求出从 x 到其分支内每个顶点的路径标签

    Returns:
        Dict[str, PathLabel]: 终点到路径标签的映射，按BFS顺序
    """
    forest.component_of(x)
    basis = forest.basis()
    coeff_maps: Dict[str, Dict[str, int]] = {x: {}}
    order = [x]
    for child, (parent, label, sign) in _bfs_parents(forest, x).items():
        coeffs = dict(coeff_maps[parent])
        coeffs[label] = sign
        coeff_maps[child] = coeffs
        order.append(child)
    return {y: PathLabel(FreeVector.from_mapping(basis, coeff_maps[y]), x, y) for y in order}


def compose(p: PathLabel, q: PathLabel) -> PathLabel:
    """
    路径标签的组合：p 从 x 到 y，q 从 y 到 z，则 p + q 是从 x 到 z 的路径标签

    森林中共享的边相互抵消，零系数被剪除。

    Raises:
        StructuralError: p 的终点不是 q 的起点
    """
    if p.end != q.start:
        raise StructuralError(f"端点不匹配：{p.end!r} != {q.start!r}")
    return PathLabel(p.vector + q.vector, p.start, q.end)


def is_path_label(graph: LabeledGraph, vector: FreeVector, start: str, end: str) -> bool:
    """
    判定向量是否为从 start 到 end 的路径标签（适用于一般图）

    系数必须全为 ±1，且对应的有向步可以重新排序成一条从 start 到 end 的路径，
    每条边至多经过一次。等价于有向欧拉迹的存在性：度数平衡条件加弱连通性。
    """
    if vector.basis != graph.labels:
        raise StructuralError("向量不在图的标签空间上")
    if any(c not in (1, -1) for _, c in vector.terms):
        return False
    if vector.is_zero():
        return start == end

    steps = nx.MultiDiGraph()
    for label, sign in vector.terms:
        e = graph.edge(label)
        u, v = (e.tail, e.head) if sign == 1 else (e.head, e.tail)
        steps.add_edge(u, v)
    if start not in steps or end not in steps:
        return False
    for node in steps.nodes:
        balance = steps.out_degree(node) - steps.in_degree(node)
        expected = 0
        if start != end:
            expected = 1 if node == start else (-1 if node == end else 0)
        if balance != expected:
            return False
    return nx.is_weakly_connected(steps)


def enumerate_path_labels(graph: Union[LabeledGraph, Forest], x: str, y: str) -> Set[FreeVector]:
    """
    枚举由 x 到 y 的全部简单路径得到的路径标签

    在森林中结果恰好只有一个元素；在有圈图中一般不唯一。
    """
    if isinstance(graph, Forest):
        graph = graph.graph
    basis = graph.labels
    if x == y:
        return {FreeVector(basis, ())}
    undirected = nx.Graph()
    undirected.add_nodes_from(graph.vertices)
    orientation: Dict[Tuple[str, str], Tuple[str, int]] = {}
    for e in graph.edges:
        undirected.add_edge(e.tail, e.head)
        orientation[(e.tail, e.head)] = (e.label, 1)
        orientation[(e.head, e.tail)] = (e.label, -1)
    found = set()
    for path in nx.all_simple_paths(undirected, x, y):
        coeffs = dict(orientation[(a, b)] for a, b in zip(path, path[1:]))
        found.add(FreeVector.from_mapping(basis, coeffs))
    return found


# ==================== 一致离散性 ====================

@dataclass(frozen=True)
class SeparationResult:
    """
    分离度计算结果

    Attributes:
        value (Scalar): 最小的 ||p_{x,y'} - p_{x,y}||，单点分支为 math.inf
        witness (Optional[Tuple[str, str]]): 达到最小值的 (y, y')
        evaluated (int): 实际求解范数的标签对数
        pruned (int): 被支撑下界剪枝的标签对数
        chain_failures (Tuple): 精确范数低于支撑下界的标签对，正常应为空
    """
    value: Scalar
    witness: Optional[Tuple[str, str]]
    evaluated: int
    pruned: int
    chain_failures: Tuple[Tuple[str, str], ...] = ()


def separation_details(forest: Forest, sl: StretchedLabeling, x: str) -> SeparationResult:
    """
    计算从 x 出发的路径标签之间的最小范数距离，并给出见证

    先为每个标签对计算支撑下界 ½·n·min d，按下界升序求解精确范数；
    一旦下界不小于当前最小值即可停止，结果仍是精确最小值。
    """
    if sl.label_space.labels != forest.basis():
        raise StructuralError("拉伸标注的标签与森林的标签不一致")
    labels = list(path_labels_from(forest, x).values())
    if len(labels) < 2:
        return SeparationResult(math.inf, None, 0, 0)

    candidates = []
    for i, first in enumerate(labels):
        for second in labels[i + 1:]:
            diff = second.vector - first.vector
            bound = support_lower_bound(sl.label_space, diff) if len(diff.terms) >= 2 else 0
            candidates.append((bound, i, first.end, second.end, diff))
    candidates.sort(key=lambda item: (item[0], item[1]))

    best, witness, evaluated = None, None, 0
    chain_failures = []
    for bound, _, y, y_prime, diff in candidates:
        if best is not None and bound >= best:
            break
        value, _ = norm_primal(sl.label_space, diff)
        evaluated += 1
        if value < bound:
            chain_failures.append((y, y_prime))
        if best is None or value < best:
            best, witness = value, (y, y_prime)

    pruned = len(candidates) - evaluated
    logger.debug(f"顶点 {x} 的分离度 = {best}，求解 {evaluated} 对，剪枝 {pruned} 对")
    return SeparationResult(best, witness, evaluated, pruned, tuple(chain_failures))


def separation(forest: Forest, sl: StretchedLabeling, x: str) -> Scalar:
    """
    从 x 出发的路径标签集合的分离度

    对分支内互不相同的 y, y'，取 ||p_{x,y'} - p_{x,y}|| 的最小值；应不小于 ε/2。
    单点分支没有约束，返回 math.inf。

    Args:
        forest (Forest): 森林
        sl (StretchedLabeling): 该森林的拉伸标注
        x (str): 根顶点

    Returns:
        Scalar: 分离度
    """
    return separation_details(forest, sl, x).value
