"""
实例读写与随机生成模块
负责实例文件（JSON）的解析与序列化、向量文本格式，以及确定性的随机实例生成器
"""

import json
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .edge_labeling import Edge, LabeledGraph, MetricKind
from .metric_core import (
    FreeVector,
    MetricValidationError,
    PointedMetricSpace,
    ScalarMode,
    Scalar,
    adjoin_basepoint,
    format_scalar,
    normalize_metric,
    validate_metric,
)

# 获取日志记录器实例
logger = logging.getLogger(__name__)


class InstanceConfig:
    """实例文件与生成器配置类"""

    # 实例文件的键名
    KEY_VERTICES = "vertices"
    KEY_EDGES = "edges"
    KEY_LABEL_METRIC = "label_metric"
    KEY_SEED = "seed"
    KEY_GENERATOR = "generator"
    EDGE_KEYS = ("tail", "head", "label")

    # 自动命名前缀
    VERTEX_PREFIX = "v"
    LABEL_PREFIX = "e"
    POINT_PREFIX = "p"

    # 生成器默认参数
    DEFAULT_SIZE = 40
    DEFAULT_MAX_DEGREE = 3
    DEFAULT_DETACH_PROBABILITY = 0.1
    DEFAULT_GRID = 5
    DEFAULT_MAX_COEFFICIENT = 3

    # 向量文本格式：[符号][系数*]点，系数可以是整数、p/q 或小数；点按基中的标识做最长匹配
    VECTOR_COEFFICIENT = re.compile(r"(\d+/\d+|\d+\.\d*|\.\d+|\d+)\s*\*\s*")
    # 不在基中的点名，只用于报告未知点
    VECTOR_UNKNOWN_POINT = re.compile(r"[^\s+\-*]+")
    VECTOR_SPACE = re.compile(r"\s*")


class InstanceParseError(ValueError):
    """实例或向量文本不符合格式，position 指出出错位置"""

    def __init__(self, message: str, position: str):
        super().__init__(f"{message}（位置: {position}）")
        self.position = position


@dataclass(frozen=True)
class InstanceFile:
    """
    实例文件内容

    Attributes:
        graph (LabeledGraph): 带标签图
        seed (Optional[int]): 生成该实例的随机种子
        generator (Dict): 生成器参数
    """
    graph: LabeledGraph
    seed: Optional[int] = None
    generator: Dict = field(default_factory=dict)


# ==================== 解析 ====================

def _require(condition: bool, message: str, position: str) -> None:
    if not condition:
        raise InstanceParseError(message, position)


def _parse_number(value, position: str) -> Scalar:
    """矩阵元素：整数、浮点数或 "p/q" 字符串"""
    if isinstance(value, bool):
        raise InstanceParseError("距离必须是数值", position)
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise InstanceParseError(f"无法解析的有理数: {value!r}", position) from None
    raise InstanceParseError("距离必须是数值", position)


def _parse_label_metric(raw, labels: Tuple[str, ...]) -> Optional[Tuple[Tuple[Scalar, ...], ...]]:
    position = f"$.{InstanceConfig.KEY_LABEL_METRIC}"
    _require(isinstance(raw, dict), "label_metric 必须是对象", position)
    kind_value = raw.get("type")
    try:
        kind = MetricKind(kind_value)
    except ValueError:
        raise InstanceParseError(
            f"无效的度量类型: {kind_value!r}。有效值为: {[k.value for k in MetricKind]}", f"{position}.type"
        ) from None
    if kind is MetricKind.DISCRETE:
        return None

    declared = raw.get("labels")
    _require(isinstance(declared, list) and all(isinstance(item, str) for item in declared),
             "labels 必须是字符串数组", f"{position}.labels")
    _require(len(set(declared)) == len(declared), "labels 中有重复标签", f"{position}.labels")
    _require(set(declared) == set(labels), "labels 必须与边标签一致", f"{position}.labels")
    matrix = raw.get("matrix")
    _require(isinstance(matrix, list) and len(matrix) == len(declared),
             "matrix 必须是与 labels 等长的数组", f"{position}.matrix")
    rows = []
    for i, row in enumerate(matrix):
        _require(isinstance(row, list) and len(row) == len(declared),
                 "matrix 必须是方阵", f"{position}.matrix[{i}]")
        rows.append([_parse_number(v, f"{position}.matrix[{i}][{j}]") for j, v in enumerate(row)])

    report = validate_metric(declared, rows)
    if not report.ok:
        raise MetricValidationError(f"标签度量不满足度量公理: {sorted(report.axioms())}", report)

    # 重排为边的顺序
    index = {label: i for i, label in enumerate(declared)}
    return tuple(tuple(rows[index[a]][index[b]] for b in labels) for a in labels)


def parse_instance_file(data: Union[bytes, str], validate: bool = True) -> InstanceFile:
    """
    解析实例文件

    Args:
        data (Union[bytes, str]): UTF-8 编码的 JSON
        validate (bool): 是否校验边标注公理

    Returns:
        InstanceFile: 实例内容

    Raises:
        InstanceParseError: 不符合实例格式，附带行列号或 JSON 路径
        MetricValidationError: 显式标签度量不是度量
        GraphValidationError: 违反边标注公理（重复标签、双向边、自环、未声明顶点）
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise InstanceParseError("不是合法的UTF-8编码", f"byte {e.start}") from None
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"JSON解析失败: {e.msg}", f"line {e.lineno}, column {e.colno}") from None

    _require(isinstance(raw, dict), "顶层必须是对象", "$")
    vertices = raw.get(InstanceConfig.KEY_VERTICES)
    _require(isinstance(vertices, list), "缺少 vertices 数组", f"$.{InstanceConfig.KEY_VERTICES}")
    for i, v in enumerate(vertices):
        _require(isinstance(v, str), "顶点必须是字符串", f"$.vertices[{i}]")

    edges_raw = raw.get(InstanceConfig.KEY_EDGES)
    _require(isinstance(edges_raw, list), "缺少 edges 数组", f"$.{InstanceConfig.KEY_EDGES}")
    edges: List[Edge] = []
    for i, item in enumerate(edges_raw):
        _require(isinstance(item, dict), "边必须是对象", f"$.edges[{i}]")
        for key in InstanceConfig.EDGE_KEYS:
            _require(isinstance(item.get(key), str), f"边缺少字符串字段 {key}", f"$.edges[{i}].{key}")
        edges.append(Edge(item["tail"], item["head"], item["label"]))

    labels = tuple(e.label for e in edges)
    metric = None
    if InstanceConfig.KEY_LABEL_METRIC in raw:
        metric = _parse_label_metric(raw[InstanceConfig.KEY_LABEL_METRIC], labels)

    seed = raw.get(InstanceConfig.KEY_SEED)
    _require(seed is None or (isinstance(seed, int) and not isinstance(seed, bool)),
             "seed 必须是整数", f"$.{InstanceConfig.KEY_SEED}")
    generator = raw.get(InstanceConfig.KEY_GENERATOR, {})
    _require(isinstance(generator, dict), "generator 必须是对象", f"$.{InstanceConfig.KEY_GENERATOR}")

    graph = LabeledGraph.build(vertices, edges, metric, validate=validate)
    logger.debug(f"实例解析完成：{len(graph.vertices)} 个顶点，{len(graph.edges)} 条边")
    return InstanceFile(graph, seed, generator)


def parse_instance(data: Union[bytes, str]) -> LabeledGraph:
    """解析实例文件并返回校验后的带标签图"""
    return parse_instance_file(data).graph


def serialize_instance(graph: LabeledGraph,
                       seed: Optional[int] = None,
                       generator: Optional[Dict] = None) -> bytes:
    """
    序列化为实例文件

    键的顺序与缩进固定，相同的图得到逐字节相同的输出。
    """
    payload: Dict = {
        InstanceConfig.KEY_VERTICES: list(graph.vertices),
        InstanceConfig.KEY_EDGES: [{"tail": e.tail, "head": e.head, "label": e.label} for e in graph.edges],
    }
    if graph.base_label_metric is not None:
        payload[InstanceConfig.KEY_LABEL_METRIC] = {
            "type": MetricKind.EXPLICIT.value,
            "labels": list(graph.labels),
            "matrix": [[format_scalar(v) for v in row] for row in graph.base_label_metric],
        }
    if seed is not None:
        payload[InstanceConfig.KEY_SEED] = seed
    if generator:
        payload[InstanceConfig.KEY_GENERATOR] = generator
    return (json.dumps(payload, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


# ==================== 向量文本 ====================

def _match_point(text: str, position: int, candidates: Sequence[str]) -> Tuple[Optional[str], int]:
    """在 position 处取最长的、后接空白、符号或结尾的基标识；都不匹配时取出未知点名"""
    for label in candidates:
        if text.startswith(label, position):
            end = position + len(label)
            if end == len(text) or text[end].isspace() or text[end] in "+-":
                return label, end
    match = InstanceConfig.VECTOR_UNKNOWN_POINT.match(text, position)
    if match is None:
        return None, position
    return match.group(0), match.end()


def parse_vector(text: str, basis: Sequence[str]) -> FreeVector:
    """
    解析向量文本，如 "1*a-1*b"、"3/2*a"、"-a+0.5*b"；"0" 或空串为零向量

    点名按基中的标识做最长匹配，因此中文、纯数字或含连字符的标签（如 "边1"、"2"、"e-1"）
    都可以直接书写。

    Args:
        text (str): 向量文本
        basis (Sequence[str]): 环境空间的非基点标识

    Returns:
        FreeVector: 解析结果，小数按十进制精确解释

    Raises:
        InstanceParseError: 文本不符合格式
        StructuralError: 引用了环境空间之外的点
    """
    stripped = text.strip()
    if stripped == "" or (stripped == "0" and "0" not in basis):
        return FreeVector(tuple(basis), ())
    candidates = sorted((label for label in set(basis) if label), key=len, reverse=True)
    coeffs: Dict[str, Scalar] = {}
    skip = InstanceConfig.VECTOR_SPACE
    position = skip.match(text, 0).end()
    first = True
    while position < len(text):
        sign = None
        if text[position] in "+-":
            sign = text[position]
            position = skip.match(text, position + 1).end()
        elif not first:
            raise InstanceParseError("向量项之间缺少符号", f"char {position}")

        value = Fraction(1)
        match = InstanceConfig.VECTOR_COEFFICIENT.match(text, position)
        if match is not None:
            value = Fraction(match.group(1))
            position = match.end()

        point, end = _match_point(text, position, candidates)
        if point is None:
            raise InstanceParseError(f"无法解析的向量项: {text[position:]!r}", f"char {position}")
        if sign == "-":
            value = -value
        coeffs[point] = coeffs.get(point, 0) + value
        first = False
        position = skip.match(text, end).end()
    return FreeVector.from_mapping(basis, coeffs)


def format_vector(v: FreeVector) -> str:
    """向量的文本形式，与 parse_vector 互逆"""
    return str(v)


# ==================== 随机生成器 ====================

def _rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _vertex_names(n: int) -> List[str]:
    return [f"{InstanceConfig.VERTEX_PREFIX}{i}" for i in range(n)]


def _oriented(rng: np.random.Generator, u: str, v: str, label: str) -> Edge:
    return Edge(u, v, label) if rng.random() < 0.5 else Edge(v, u, label)


def random_forest(n: int,
                  max_degree: int = InstanceConfig.DEFAULT_MAX_DEGREE,
                  seed: Optional[int] = None,
                  detach_probability: float = InstanceConfig.DEFAULT_DETACH_PROBABILITY) -> LabeledGraph:
    """
    生成随机森林

    顶点按编号依次加入：以 detach_probability 的概率成为新分支的根，
    否则连接到一个度数未满的已有顶点，边的方向随机。结果只依赖于参数与种子。

    Args:
        n (int): 顶点数
        max_degree (int): 最大度数
        seed (Optional[int]): 随机种子
        detach_probability (float): 新顶点不连边的概率

    Returns:
        LabeledGraph: 无圈的带标签图，标签按加入顺序命名为 e0, e1, ...

    Raises:
        ValueError: n 为负或 max_degree 小于1
    """
    if n < 0:
        raise ValueError(f"顶点数不能为负: {n}")
    if max_degree < 1:
        raise ValueError(f"最大度数至少为1: {max_degree}")
    rng = _rng(seed)
    vertices = _vertex_names(n)
    degree = [0] * n
    edges: List[Edge] = []
    for i in range(1, n):
        if rng.random() < detach_probability:
            continue
        open_slots = [j for j in range(i) if degree[j] < max_degree]
        if not open_slots:
            continue
        parent = open_slots[int(rng.integers(len(open_slots)))]
        degree[parent] += 1
        degree[i] += 1
        edges.append(_oriented(rng, vertices[parent], vertices[i], f"{InstanceConfig.LABEL_PREFIX}{len(edges)}"))
    logger.debug(f"生成随机森林：n={n}, max_degree={max_degree}, seed={seed}, 边数={len(edges)}")
    return LabeledGraph.build(vertices, edges)


def random_graph(n: int, extra_edges: int = 0, seed: Optional[int] = None) -> LabeledGraph:
    """
    生成连通的随机图：随机生成树加上 extra_edges 条额外边（可能成圈）

    额外边数超过可用的顶点对时取尽为止。
    """
    if n < 0:
        raise ValueError(f"顶点数不能为负: {n}")
    rng = _rng(seed)
    vertices = _vertex_names(n)
    edges: List[Edge] = []
    used = set()
    for i in range(1, n):
        parent = int(rng.integers(i))
        used.add((parent, i))
        edges.append(_oriented(rng, vertices[parent], vertices[i], f"{InstanceConfig.LABEL_PREFIX}{len(edges)}"))
    free_pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in used]
    count = min(extra_edges, len(free_pairs))
    if count:
        for k in sorted(rng.choice(len(free_pairs), size=count, replace=False).tolist()):
            i, j = free_pairs[k]
            edges.append(_oriented(rng, vertices[i], vertices[j], f"{InstanceConfig.LABEL_PREFIX}{len(edges)}"))
    return LabeledGraph.build(vertices, edges)


def path_graph(n: int) -> LabeledGraph:
    """路径 v0 -> v1 -> ... -> v{n-1}"""
    vertices = _vertex_names(n)
    edges = [Edge(vertices[i], vertices[i + 1], f"{InstanceConfig.LABEL_PREFIX}{i}") for i in range(n - 1)]
    return LabeledGraph.build(vertices, edges)


def star_graph(leaves: int) -> LabeledGraph:
    """中心 v0，叶子 v1..v{leaves}，边由中心指向叶子"""
    vertices = _vertex_names(leaves + 1)
    edges = [Edge(vertices[0], vertices[i], f"{InstanceConfig.LABEL_PREFIX}{i - 1}") for i in range(1, leaves + 1)]
    return LabeledGraph.build(vertices, edges)


def binary_tree(n: int) -> LabeledGraph:
    """n 个顶点的完全二叉树，v{i} 的父顶点为 v{(i-1)//2}"""
    vertices = _vertex_names(n)
    edges = [Edge(vertices[(i - 1) // 2], vertices[i], f"{InstanceConfig.LABEL_PREFIX}{i - 1}") for i in range(1, n)]
    return LabeledGraph.build(vertices, edges)


def attach_label_metric(graph: LabeledGraph,
                        scale: Union[Fraction, int, str] = Fraction(1, 1000),
                        seed: Optional[int] = None) -> LabeledGraph:
    """
    给图配上随机的显式基础标签度量，不同标签之间的距离取 [scale, 2·scale] 内的有理数

    最大距离不超过最小距离的两倍，三角不等式自动成立。scale 很小时基础度量几乎不提供分离，
    拉伸常数完全依赖着色项。

    Args:
        graph (LabeledGraph): 原图，已有的基础度量被替换
        scale (Union[Fraction, int, str]): 最小距离，须在 (0, 1/2] 内
        seed (Optional[int]): 随机种子

    Returns:
        LabeledGraph: 边与顶点不变、带显式基础度量的图
    """
    scale = Fraction(scale)
    if not 0 < scale <= Fraction(1, 2):
        raise ValueError(f"最小距离必须在 (0, 1/2] 内: {scale}")
    size = len(graph.labels)
    if size == 0:
        return LabeledGraph.build(graph.vertices, graph.edges)
    rng = _rng(seed)
    matrix = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        for j in range(i + 1, size):
            matrix[i][j] = matrix[j][i] = scale * (1 + Fraction(int(rng.integers(0, 1001)), 1000))
    return LabeledGraph.build(graph.vertices, graph.edges, matrix)


def random_space(size: int,
                 seed: Optional[int] = None,
                 mode: Union[str, ScalarMode] = ScalarMode.EXACT,
                 grid: int = InstanceConfig.DEFAULT_GRID) -> PointedMetricSpace:
    """
    生成随机有点度量空间

    在 grid×grid 整数格点中不放回地取 size 个点，取L1距离，
    经 t/(t+1) 归一化后添加基点。精确模式下所有距离为有理数。

    Args:
        size (int): 非基点的点数，不超过 grid*grid
        seed (Optional[int]): 随机种子
        mode (Union[str, ScalarMode]): 标量后端
        grid (int): 格点边长

    Returns:
        PointedMetricSpace: 满足全部公理的空间
    """
    if isinstance(mode, str):
        try:
            mode = ScalarMode(mode)
        except ValueError:
            raise ValueError(f"无效的标量模式: {mode}。有效值为: {[m.value for m in ScalarMode]}") from None
    if not 0 <= size <= grid * grid:
        raise ValueError(f"点数必须在 0 到 {grid * grid} 之间: {size}")
    rng = _rng(seed)
    cells = sorted(rng.choice(grid * grid, size=size, replace=False).tolist()) if size else []
    coords = [(c // grid, c % grid) for c in cells]
    raw = [[abs(a[0] - b[0]) + abs(a[1] - b[1]) for b in coords] for a in coords]
    labels = [f"{InstanceConfig.POINT_PREFIX}{i}" for i in range(size)]
    matrix = normalize_metric(raw, labels)
    if mode is ScalarMode.FLOAT:
        matrix = tuple(tuple(float(v) for v in row) for row in matrix)
    return adjoin_basepoint(labels, matrix, validate=False)


def random_vector(space: PointedMetricSpace,
                  support_size: int,
                  seed: Optional[int] = None,
                  max_coefficient: int = InstanceConfig.DEFAULT_MAX_COEFFICIENT,
                  max_mass: Optional[int] = None,
                  rational: bool = False) -> FreeVector:
    """
    生成随机向量

    Args:
        space (PointedMetricSpace): 环境空间
        support_size (int): 支撑大小，不超过非基点数
        seed (Optional[int]): 随机种子
        max_coefficient (int): 系数绝对值上界
        max_mass (Optional[int]): 系数绝对值之和的上界（整数系数时生效）
        rational (bool): 是否生成分母不超过4的有理系数

    Returns:
        FreeVector: 支撑大小恰为 support_size 的向量
    """
    labels = space.labels
    if not 0 <= support_size <= len(labels):
        raise ValueError(f"支撑大小必须在 0 到 {len(labels)} 之间: {support_size}")
    if max_mass is not None and support_size > max_mass:
        raise ValueError(f"支撑大小 {support_size} 超过质量上界 {max_mass}")
    rng = _rng(seed)
    chosen = sorted(rng.choice(len(labels), size=support_size, replace=False).tolist()) if support_size else []
    magnitudes = [int(rng.integers(1, max_coefficient + 1)) for _ in chosen]
    if max_mass is not None:
        while sum(magnitudes) > max_mass:
            magnitudes[magnitudes.index(max(magnitudes))] -= 1
    coeffs: Dict[str, Scalar] = {}
    for index, magnitude in zip(chosen, magnitudes):
        value: Scalar = magnitude
        if rational:
            value = Fraction(magnitude, int(rng.integers(1, 5)))
        if rng.random() < 0.5:
            value = -value
        coeffs[labels[index]] = value
    if space.mode is ScalarMode.FLOAT:
        coeffs = {p: float(c) for p, c in coeffs.items()}
    return space.vector(coeffs)
