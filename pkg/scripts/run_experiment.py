"""
Main Experiment Runner - sqfn-lab 命令行入口
"""
import sys
from pathlib import Path

# 添加src到路径
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from harness.config import EXPERIMENT_NAMES, DEFAULT_CONFIG_PATH
from harness.experiments import EXPERIMENTS
from harness.runner import ExperimentRunner, EXIT_OK


def build_parser():
    import argparse

    parser = argparse.ArgumentParser(prog="sqfn-lab", description="内蕴平方函数数值实验")
    parser.add_argument("--defaults", default=str(DEFAULT_CONFIG_PATH), help="默认参数文件")
    parser.add_argument("--log-level", default=None, help="日志级别（覆盖默认参数文件）")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="运行实验文件中的实验")
    run.add_argument("config", help="实验文件（experiment 或 experiments 列表）")
    run.add_argument("--output", default=None, help="输出目录")
    run.add_argument("--only", action="append", default=None, help="只运行指定实验（可重复）")

    sub.add_parser("list", help="列出可用实验")

    validate = sub.add_parser("validate", help="只检查实验文件")
    validate.add_argument("config", help="实验文件")
    return parser


def main(argv=None) -> int:
    """主函数"""
    args = build_parser().parse_args(argv)

    if args.command == "list":
        for name in EXPERIMENT_NAMES:
            doc = (EXPERIMENTS[name].__doc__ or "").strip().splitlines()
            print(f"{name:28s} {doc[0] if doc else ''}")
        return EXIT_OK

    runner = ExperimentRunner(
        output_dir=getattr(args, "output", None),
        defaults_path=args.defaults,
        log_level=args.log_level,
    )
    if args.command == "validate":
        return runner.validate(args.config)
    return runner.run(args.config, only=args.only)


if __name__ == "__main__":
    sys.exit(main())
