"""
有点度量空间与形式向量空间核心模块
提供有限有点度量空间的构造与公理校验、度量归一化、基点添加，
以及以空间点为Hamel基的有限支撑形式向量 L(X) 的线性运算
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

# 获取日志记录器实例
logger = logging.getLogger(__name__)

# 标量类型：精确模式下为有理数（int / Fraction），浮点模式下为float
Scalar = Union[int, Fraction, float]
Matrix = Tuple[Tuple[Scalar, ...], ...]


class ScalarMode(Enum):
    """
    标量后端枚举
    """
    EXACT = "exact"  # 精确有理数
    FLOAT = "float"  # 二进制浮点数


class MetricConfig:
    """
    度量空间配置类
    存储基点标识、浮点比较容差与公理名称等常量信息
    """

    # 基点标识，内部索引固定为0
    BASEPOINT = "*"

    # 浮点模式下的比较容差
    FLOAT_TOLERANCE = 1e-9

    # 公理名称
    AXIOM_DIAGONAL = "diagonal"
    AXIOM_SYMMETRY = "symmetry"
    AXIOM_POSITIVITY = "positivity"
    AXIOM_TRIANGLE = "triangle"
    AXIOM_BASEPOINT = "basepoint"
    AXIOM_BOUND = "bound"


class StructuralError(ValueError):
    """结构性错误：维度不匹配、环境空间不一致、未知的点等"""


class MetricValidationError(ValueError):
    """度量公理校验失败，携带完整的校验报告"""

    def __init__(self, message: str, report: "ValidationReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Violation:
    """
    单条违规记录

    Attributes:
        axiom (str): 违反的公理或检查项名称
        witness (Tuple): 具体的见证元组（点、顶点或标签）
        magnitude (Scalar): 违规幅度
    """
    axiom: str
    witness: Tuple
    magnitude: Scalar = 0

    def to_dict(self) -> Dict:
        return {
            'axiom': self.axiom,
            'witness': [str(w) for w in self.witness],
            'magnitude': format_scalar(self.magnitude),
        }


@dataclass(frozen=True)
class ValidationReport:
    """
    校验报告，ok 当且仅当违规列表为空
    """
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def axioms(self) -> FrozenSet[str]:
        """返回出现过的违规公理名称集合"""
        return frozenset(v.axiom for v in self.violations)

    def by_axiom(self, axiom: str) -> List[Violation]:
        return [v for v in self.violations if v.axiom == axiom]

    def merge(self, *others: "ValidationReport") -> "ValidationReport":
        merged = list(self.violations)
        for other in others:
            merged.extend(other.violations)
        return ValidationReport(tuple(merged))

    def to_dict(self) -> Dict:
        return {'ok': self.ok, 'violations': [v.to_dict() for v in self.violations]}

    def to_frame(self) -> pd.DataFrame:
        """
        将违规记录转换为DataFrame

        Returns:
            pd.DataFrame: 列为 公理、见证、幅度
        """
        rows = [
            {'公理': v.axiom, '见证': ', '.join(str(w) for w in v.witness), '幅度': format_scalar(v.magnitude)}
            for v in self.violations
        ]
        return pd.DataFrame(rows, columns=['公理', '见证', '幅度'])


# ==================== 标量工具函数 ====================

def is_exact(value) -> bool:
    """判断标量是否为精确有理数（bool 不计入）"""
    return isinstance(value, Rational) and not isinstance(value, bool)


def infer_mode(values: Iterable[Scalar]) -> ScalarMode:
    """所有值均为精确有理数时返回精确模式，否则返回浮点模式"""
    for value in values:
        if not is_exact(value):
            return ScalarMode.FLOAT
    return ScalarMode.EXACT


def to_scalar(value, mode: ScalarMode = ScalarMode.EXACT) -> Scalar:
    """
    将输入值转换为指定后端的标量

    Args:
        value: int、Fraction、float 或形如 "3/2"、"0.3" 的字符串
        mode (ScalarMode): 目标标量后端

    Returns:
        Scalar: 精确模式下为Fraction，浮点模式下为float
    """
    if mode is ScalarMode.FLOAT:
        return float(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # 按十进制字面量解释，0.3 -> 3/10
        return Fraction(repr(value))
    return Fraction(value)


def tolerance_for(mode: ScalarMode, tolerance: Optional[float] = None) -> Scalar:
    """精确模式下容差为0，浮点模式下为给定容差或默认容差"""
    if mode is ScalarMode.EXACT:
        return 0
    return MetricConfig.FLOAT_TOLERANCE if tolerance is None else tolerance


def format_scalar(value: Scalar) -> Union[str, float, int]:
    """报告中使用的标量表示：整数原样，分数输出为 'p/q' 字符串，浮点原样"""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return value


# ==================== 有点度量空间 ====================

@dataclass(frozen=True)
class PointedMetricSpace:
    """
    有限有点度量空间

    points[0] 固定为基点 "*"，其余点按输入顺序分配内部稠密索引。
    构造时只做结构检查（方阵、维度、标识唯一），公理检查由 validate_space 完成。

    Attributes:
        points (Tuple[str, ...]): 点标识，含基点
        dist (Matrix): 对称距离矩阵
    """
    points: Tuple[str, ...]
    dist: Matrix
    _index: Dict[str, int] = field(init=False, repr=False, compare=False, hash=False)
    _mode: ScalarMode = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        points = tuple(str(p) for p in self.points)
        if not points or points[0] != MetricConfig.BASEPOINT:
            raise StructuralError(f"基点 {MetricConfig.BASEPOINT!r} 必须位于索引0")
        if len(set(points)) != len(points):
            raise StructuralError(f"点标识重复: {points}")
        matrix = _as_matrix(self.dist)
        _check_square(matrix, len(points))
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'dist', matrix)
        object.__setattr__(self, '_index', {p: i for i, p in enumerate(points)})
        object.__setattr__(self, '_mode', infer_mode(v for row in matrix for v in row))

    @classmethod
    def from_matrix(cls,
                    points: Sequence[str],
                    matrix: Sequence[Sequence[Scalar]],
                    validate: bool = True) -> "PointedMetricSpace":
        """
        由点列表（须以基点开头）和距离矩阵构造空间

        Args:
            points (Sequence[str]): 点标识，第一个为 "*"
            matrix (Sequence[Sequence[Scalar]]): 距离矩阵
            validate (bool): 是否执行公理校验，失败时抛出 MetricValidationError

        Returns:
            PointedMetricSpace: 构造好的空间
        """
        space = cls(tuple(points), _as_matrix(matrix))
        if validate:
            report = validate_space(space)
            if not report.ok:
                raise MetricValidationError(f"度量空间校验失败，共 {len(report.violations)} 项违规", report)
        return space

    @property
    def labels(self) -> Tuple[str, ...]:
        """非基点的点标识，即 L(X) 的基（基点被商掉）"""
        return self.points[1:]

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def mode(self) -> ScalarMode:
        return self._mode

    def index(self, point: str) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise StructuralError(f"空间中不存在点: {point!r}") from None

    def __contains__(self, point: str) -> bool:
        return point in self._index

    def distance(self, p: str, q: str) -> Scalar:
        return self.dist[self.index(p)][self.index(q)]

    def as_array(self) -> np.ndarray:
        """返回浮点距离矩阵"""
        return np.array([[float(v) for v in row] for row in self.dist], dtype=float)

    def zero(self) -> "FreeVector":
        return FreeVector(self.labels, ())

    def vector(self, coeffs: Mapping[str, Scalar]) -> "FreeVector":
        """在本空间上构造形式向量，基点上的系数被丢弃"""
        return FreeVector.from_mapping(self.labels, coeffs)

    def point(self, p: str) -> "FreeVector":
        """点 p 在 L(X) 中的副本 1·p"""
        return self.vector({p: 1})


def _as_matrix(raw: Sequence[Sequence[Scalar]]) -> Matrix:
    if isinstance(raw, np.ndarray):
        raw = raw.tolist()
    try:
        return tuple(tuple(row) for row in raw)
    except TypeError:
        raise StructuralError("距离矩阵必须是二维序列") from None


def _check_square(matrix: Matrix, n: int) -> None:
    if len(matrix) != n:
        raise StructuralError(f"距离矩阵行数 {len(matrix)} 与点数 {n} 不一致")
    for i, row in enumerate(matrix):
        if len(row) != n:
            raise StructuralError(f"距离矩阵第 {i} 行长度 {len(row)} 与点数 {n} 不一致")


def _object_array(matrix: Matrix) -> np.ndarray:
    """精确模式下使用object数组保留Fraction，浮点模式下使用float数组"""
    if infer_mode(v for row in matrix for v in row) is ScalarMode.EXACT:
        array = np.empty((len(matrix), len(matrix)), dtype=object)
        for i, row in enumerate(matrix):
            for j, value in enumerate(row):
                array[i, j] = value
        return array
    return np.array(matrix, dtype=float).reshape(len(matrix), len(matrix))


def validate_metric(points: Sequence[str],
                    matrix: Sequence[Sequence[Scalar]],
                    tolerance: Optional[float] = None) -> ValidationReport:
    """
    校验一般度量公理（对角线为零、对称、正定、三角不等式）

    Args:
        points (Sequence[str]): 点标识
        matrix (Sequence[Sequence[Scalar]]): 距离矩阵
        tolerance (Optional[float]): 浮点模式下的比较容差

    Returns:
        ValidationReport: 每条违规附带具体见证

    Raises:
        StructuralError: 矩阵不是方阵或与点数不一致
    """
    points = tuple(points)
    matrix = _as_matrix(matrix)
    _check_square(matrix, len(points))
    mode = infer_mode(v for row in matrix for v in row)
    tol = tolerance_for(mode, tolerance)
    n = len(points)
    violations: List[Violation] = []

    for i in range(n):
        if abs(matrix[i][i]) > tol:
            violations.append(Violation(MetricConfig.AXIOM_DIAGONAL, (points[i],), abs(matrix[i][i])))

    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(matrix[i][j] - matrix[j][i])
            if gap > tol:
                violations.append(Violation(MetricConfig.AXIOM_SYMMETRY, (points[i], points[j]), gap))
            for a, b in ((i, j), (j, i)):
                if matrix[a][b] <= tol:
                    violations.append(Violation(MetricConfig.AXIOM_POSITIVITY, (points[a], points[b]), matrix[a][b]))

    # 三角不等式：对每个中间点做一次广播比较
    array = _object_array(matrix)
    for b in range(n):
        excess = array - (array[:, b][:, None] + array[b, :][None, :])
        for a, c in zip(*np.nonzero(excess > tol)):
            if a != b and c != b and a != c:
                violations.append(Violation(MetricConfig.AXIOM_TRIANGLE,
                                            (points[a], points[b], points[c]),
                                            excess[a, c]))

    return ValidationReport(tuple(violations))


def validate_space(space: PointedMetricSpace, tolerance: Optional[float] = None) -> ValidationReport:
    """
    校验有点度量空间的全部公理

    除一般度量公理外，还检查所有距离不超过1、每个非基点到基点的距离恰为1。

    Args:
        space (PointedMetricSpace): 待校验空间
        tolerance (Optional[float]): 浮点模式下的比较容差

    Returns:
        ValidationReport: 校验报告
    """
    report = validate_metric(space.points, space.dist, tolerance)
    tol = tolerance_for(space.mode, tolerance)
    extra: List[Violation] = []
    n = space.size
    for i in range(1, n):
        gap = abs(space.dist[i][0] - 1)
        if gap > tol:
            extra.append(Violation(MetricConfig.AXIOM_BASEPOINT, (space.points[i], MetricConfig.BASEPOINT), gap))
    for i in range(n):
        for j in range(n):
            if space.dist[i][j] - 1 > tol:
                extra.append(Violation(MetricConfig.AXIOM_BOUND, (space.points[i], space.points[j]),
                                       space.dist[i][j] - 1))
    report = report.merge(ValidationReport(tuple(extra)))
    if report.ok:
        logger.debug(f"度量空间校验通过，共 {n} 个点")
    else:
        logger.warning(f"度量空间校验失败，共 {len(report.violations)} 项违规: {sorted(report.axioms())}")
    return report


def normalize_metric(raw: Sequence[Sequence[Scalar]],
                     points: Optional[Sequence[str]] = None) -> Matrix:
    """
    度量归一化：逐项 t -> t/(t+1)

    变换后仍是度量，所有距离严格小于1，且距离的大小顺序保持不变。

    Args:
        raw (Sequence[Sequence[Scalar]]): 原始度量矩阵
        points (Optional[Sequence[str]]): 点标识，仅用于报告中的见证

    Returns:
        Matrix: 归一化后的矩阵

    Raises:
        MetricValidationError: 输入不是度量
    """
    matrix = _as_matrix(raw)
    if points is None:
        points = [str(i) for i in range(len(matrix))]
    report = validate_metric(points, matrix)
    if not report.ok:
        raise MetricValidationError("归一化的输入必须是度量", report)
    return tuple(tuple(_squash(t) for t in row) for row in matrix)


def _squash(t: Scalar) -> Scalar:
    if is_exact(t):
        t = Fraction(t)
    return t / (t + 1)


def adjoin_basepoint(labels: Sequence[str],
                     matrix: Sequence[Sequence[Scalar]],
                     validate: bool = True) -> PointedMetricSpace:
    """
    在度量空间上添加基点 "*"，所有点到基点的距离设为1

    由于原始距离不超过1，经过基点的三角不等式自动成立。

    Args:
        labels (Sequence[str]): 原始点标识（不含基点）
        matrix (Sequence[Sequence[Scalar]]): 原始度量矩阵，所有元素不超过1
        validate (bool): 是否执行完整的度量公理扫描；为False时只检查维度与上界，
            供构造上已保证是度量的调用方使用

    Returns:
        PointedMetricSpace: 添加基点后的空间

    Raises:
        MetricValidationError: 原始矩阵不是度量，或存在大于1的元素
    """
    labels = tuple(str(label) for label in labels)
    if MetricConfig.BASEPOINT in labels:
        raise StructuralError(f"原始点集中不能包含基点标识 {MetricConfig.BASEPOINT!r}")
    matrix = _as_matrix(matrix)
    if validate:
        report = validate_metric(labels, matrix)
    else:
        _check_square(matrix, len(labels))
        report = ValidationReport()
    mode = infer_mode(v for row in matrix for v in row)
    tol = tolerance_for(mode)
    over = [Violation(MetricConfig.AXIOM_BOUND, (labels[i], labels[j]), matrix[i][j] - 1)
            for i in range(len(labels)) for j in range(len(labels)) if matrix[i][j] > 1 + tol]
    report = report.merge(ValidationReport(tuple(over)))
    if not report.ok:
        raise MetricValidationError(f"无法添加基点：原始度量校验失败 {sorted(report.axioms())}", report)

    one = 1 if mode is ScalarMode.EXACT else 1.0
    zero = 0 if mode is ScalarMode.EXACT else 0.0
    rows = [tuple([zero] + [one] * len(labels))]
    for i, row in enumerate(matrix):
        rows.append(tuple([one] + list(row)))
    logger.debug(f"已添加基点，空间共 {len(labels) + 1} 个点")
    return PointedMetricSpace((MetricConfig.BASEPOINT,) + labels, tuple(rows))


# ==================== 形式向量 L(X) ====================

@dataclass(frozen=True)
class FreeVector:
    """
    有限支撑的带符号系数向量

    以规范稀疏形式存储：系数按基中的顺序排列且不含零系数。
    基点上的系数不存储（范数对 Span{*} 取商）。

    Attributes:
        basis (Tuple[str, ...]): 环境空间的非基点标识
        terms (Tuple[Tuple[str, Scalar], ...]): 非零系数项
    """
    basis: Tuple[str, ...]
    terms: Tuple[Tuple[str, Scalar], ...] = ()

    @classmethod
    def from_mapping(cls, basis: Sequence[str], coeffs: Mapping[str, Scalar]) -> "FreeVector":
        """
        由系数字典构造向量

        Args:
            basis (Sequence[str]): 环境空间的非基点标识
            coeffs (Mapping[str, Scalar]): 点到系数的映射

        Returns:
            FreeVector: 规范形式的向量

        Raises:
            StructuralError: 系数字典中含有环境空间之外的点
        """
        basis = tuple(basis)
        known = set(basis)
        cleaned: Dict[str, Scalar] = {}
        for point, value in coeffs.items():
            if point == MetricConfig.BASEPOINT:
                if value != 0:
                    logger.warning(f"基点上的系数 {value} 已被丢弃（范数对 Span{{*}} 取商）")
                continue
            if point not in known:
                raise StructuralError(f"点 {point!r} 不属于环境空间")
            cleaned[point] = cleaned.get(point, 0) + value
        return cls(basis, _canonical(basis, cleaned))

    @property
    def coeffs(self) -> Dict[str, Scalar]:
        return dict(self.terms)

    @property
    def mode(self) -> ScalarMode:
        return infer_mode(c for _, c in self.terms)

    def coefficient(self, point: str) -> Scalar:
        return self.coeffs.get(point, 0)

    def support(self) -> FrozenSet[str]:
        return frozenset(p for p, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def mass(self) -> Scalar:
        """系数绝对值之和 Σ|λ|"""
        return sum((abs(c) for _, c in self.terms), 0)

    def _require_same_basis(self, other: "FreeVector") -> None:
        if self.basis != other.basis:
            raise StructuralError("不能对不同环境空间上的向量做运算")

    def __add__(self, other: "FreeVector") -> "FreeVector":
        return vec_add(self, other)

    def __sub__(self, other: "FreeVector") -> "FreeVector":
        return vec_add(self, vec_neg(other))

    def __neg__(self) -> "FreeVector":
        return vec_neg(self)

    def __rmul__(self, scalar: Scalar) -> "FreeVector":
        return vec_scale(scalar, self)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for point, value in self.terms:
            sign = '-' if value < 0 else '+'
            magnitude = format_scalar(abs(value))
            parts.append(f"{sign}{magnitude}*{point}")
        text = ''.join(parts)
        return text[1:] if text.startswith('+') else text


def _canonical(basis: Tuple[str, ...], coeffs: Mapping[str, Scalar]) -> Tuple[Tuple[str, Scalar], ...]:
    order = {p: i for i, p in enumerate(basis)}
    return tuple(sorted(((p, c) for p, c in coeffs.items() if c != 0), key=lambda item: order[item[0]]))


def vec_add(u: FreeVector, v: FreeVector) -> FreeVector:
    """逐系数相加，并剪除零系数"""
    u._require_same_basis(v)
    total: Dict[str, Scalar] = dict(u.terms)
    for point, value in v.terms:
        total[point] = total.get(point, 0) + value
    return FreeVector(u.basis, _canonical(u.basis, total))


def vec_scale(c: Scalar, v: FreeVector) -> FreeVector:
    """标量乘法"""
    return FreeVector(v.basis, _canonical(v.basis, {p: c * value for p, value in v.terms}))


def vec_neg(v: FreeVector) -> FreeVector:
    return FreeVector(v.basis, tuple((p, -value) for p, value in v.terms))


def vec_support(v: FreeVector) -> FrozenSet[str]:
    return v.support()
