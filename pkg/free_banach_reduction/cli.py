"""
命令行入口

子命令：validate、norm、label、paths、reduce、verify、gen。
全部检查通过时退出码为0，检查失败为1，参数或用法错误为2。
"""

import argparse
import logging
import os
import sys
from typing import List, Optional, Tuple

from . import api
from .free_norm import NormConfig
from .instance_io import InstanceConfig
from .version import __version__

# 获取日志记录器实例
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# 必须提供 --input 的子命令
INPUT_COMMANDS = ("validate", "norm", "label", "paths", "reduce")


def build_parser() -> argparse.ArgumentParser:
    """构造命令行解析器，公共参数对所有子命令可用"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="实例文件路径（JSON）")
    common.add_argument("--format", choices=[f.value for f in api.OutputFormat], default=api.OutputFormat.JSON.value,
                        help="报告格式")
    common.add_argument("--exact", action="store_true", help="使用有理数后端")
    common.add_argument("--seed", type=int, default=None, help="随机种子，环境变量 FBR_SEED 优先")
    common.add_argument("--size", type=int, default=InstanceConfig.DEFAULT_SIZE, help="生成实例的顶点数")
    common.add_argument("--max-degree", type=int, default=InstanceConfig.DEFAULT_MAX_DEGREE, help="生成森林的最大度数")
    common.add_argument("--tolerance", type=float, default=NormConfig.TOLERANCE, help="浮点比较容差")
    common.add_argument("--output", help="输出文件路径，缺省输出到标准输出")
    common.add_argument("-v", "--verbose", action="store_true", help="输出INFO级别日志")

    parser = argparse.ArgumentParser(prog="fbr", description="自由Banach空间范数与森林约化的有限规模验证工具")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    subparsers.add_parser("validate", parents=[common], help="校验边标注公理与标签度量")

    norm = subparsers.add_parser("norm", parents=[common], help="计算向量范数并复核证书")
    norm.add_argument("--vector", required=True, help='向量文本，如 "1*a-1*b"、"3/2*a"')
    norm.add_argument("--stretched", action="store_true", help="在构造出的拉伸标签空间上计算")

    label = subparsers.add_parser("label", parents=[common], help="构造拉伸标注并报告拉伸常数")
    label.add_argument("--workers", type=int, default=1, help="拉伸常数扫描的线程数")

    paths = subparsers.add_parser("paths", parents=[common], help="路径标签查询与余链恒等式抽查")
    paths.add_argument("--from", dest="source", help="起点，缺省为第一个顶点")
    paths.add_argument("--to", dest="target", help="终点，缺省输出从起点出发的全部路径标签")

    reduce = subparsers.add_parser("reduce", parents=[common], help="输出顶点在约化映射下的像")
    reduce.add_argument("--vertex", help="顶点，缺省输出全部顶点")

    verify = subparsers.add_parser("verify", parents=[common], help="完整验证")
    verify.add_argument("--cases", type=int, default=None, help="覆盖各随机套件的用例数")
    verify.add_argument("--inject-fault", action="store_true", help="向约化像注入故障")
    verify.add_argument("--families", action="store_true", help="追加拉伸常数族与随机森林族验证")
    verify.add_argument("--workers", type=int, default=api.SuiteConfig.DEFAULT_WORKERS, help="随机套件的并发线程数")

    gen = subparsers.add_parser("gen", parents=[common], help="生成随机实例")
    gen.add_argument("--family", default="forest", choices=["forest", "graph", "path", "star", "binary_tree"],
                     help="实例族")
    gen.add_argument("--extra-edges", type=int, default=0, help="graph 族在生成树之外追加的边数")
    return parser


def _read_input(path: str) -> bytes:
    with open(path, 'rb') as f:
        return f.read()


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        directory = os.path.dirname(output)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(output, 'w', encoding='utf-8') as f:
            f.write(text + "\n")
        logger.info(f"报告已写入: {output}")
    else:
        print(text)


def run_command(argv: Optional[List[str]] = None) -> Tuple[int, Optional[api.RunReport]]:
    """
    解析参数并执行子命令

    Args:
        argv (Optional[List[str]]): 命令行参数，缺省取 sys.argv[1:]

    Returns:
        Tuple[int, Optional[api.RunReport]]: 退出码与报告；用法错误时报告为 None
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        code = e.code if isinstance(e.code, int) else EXIT_USAGE
        return code, None

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format=LOG_FORMAT)

    if args.command in INPUT_COMMANDS and not args.input:
        parser.print_usage(sys.stderr)
        print(f"fbr {args.command}: 需要 --input", file=sys.stderr)
        return EXIT_USAGE, None

    try:
        data = _read_input(args.input) if args.input else None
        if args.command == "validate":
            report = api.validate_instance(data)
        elif args.command == "norm":
            report = api.norm_instance(data, args.vector, exact=args.exact, stretched=args.stretched,
                                       tolerance=args.tolerance)
        elif args.command == "label":
            report = api.label_instance(data, max_workers=args.workers)
        elif args.command == "paths":
            report = api.paths_instance(data, args.source, args.target)
        elif args.command == "reduce":
            report = api.reduce_instance(data, args.vertex)
        elif args.command == "verify":
            report = api.verify_instance(data, seed=args.seed, size=args.size, max_degree=args.max_degree,
                                         cases=args.cases, tolerance=args.tolerance, fault=args.inject_fault,
                                         families=args.families, max_workers=args.workers)
        else:
            instance, report = api.generate_instance(args.size, args.max_degree, args.seed,
                                                     args.family, args.extra_edges)
            if not args.output:
                sys.stdout.write(instance.decode('utf-8'))
                return EXIT_OK, report
            with open(args.output, 'wb') as f:
                f.write(instance)
            report.result['path'] = args.output
            print(report.render(args.format))
            return EXIT_OK, report
    except OSError as e:
        print(f"fbr {args.command}: 无法读写文件: {e}", file=sys.stderr)
        return EXIT_USAGE, None
    except ValueError as e:
        print(f"fbr {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE, None

    _emit(report.render(args.format), args.output)
    return (EXIT_OK if report.ok else EXIT_FAILED), report


def main(argv: Optional[List[str]] = None) -> int:
    code, _ = run_command(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
