"""
Experiment Runner - 逐个运行实验、保存结果并汇总退出码
"""
import json
import time
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd

from harness.config import (
    DEFAULT_CONFIG_PATH,
    ExperimentConfig,
    load_suite,
    load_yaml,
    resolve_path,
)
from harness.experiments import EXPERIMENTS
from harness.report import ExperimentReport
from utils.data_loader import CorpusLoader
from utils.serialize import json_safe
from utils.errors import LabError, ParameterError
from utils.logger import ExperimentLogger, MetricsCollector


EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


class ExperimentRunner:
    """实验运行器"""

    def __init__(
        self,
        output_dir: Optional[str] = None,
        defaults_path: Union[str, Path] = DEFAULT_CONFIG_PATH,
        log_level: Optional[str] = None,
    ):
        self.defaults = load_yaml(defaults_path)
        self.output_dir = resolve_path(output_dir or self.defaults.get("output", {}).get("dir", "results"))

        log_cfg = self.defaults.get("logging", {})
        log_dir = resolve_path(log_cfg.get("log_dir", "results/logs"))
        self.logger = ExperimentLogger(log_dir=str(log_dir), level=log_level or log_cfg.get("level", "INFO"))
        self.metrics_collector = MetricsCollector()
        self.loader = CorpusLoader(output_dir=str(self.output_dir))

    def load(self, config_path: Union[str, Path]) -> List[ExperimentConfig]:
        configs = load_suite(config_path, self.defaults)
        for cfg in configs:
            cfg.data.setdefault("output", {})["dir"] = str(self.output_dir)
        return configs

    def run_experiment(self, cfg: ExperimentConfig) -> ExperimentReport:
        """
        运行单个实验并保存 report.json、CSV 表与 timing.json

        Raises:
            ParameterError: 配置无效
            LabError: 数值计算失败
        """
        cfg.require_valid()
        fn = EXPERIMENTS[cfg.name]
        self.logger.log_experiment_start(cfg.label, cfg.data)

        start = time.perf_counter()
        report = fn(cfg)
        duration = time.perf_counter() - start

        for check in report.checks:
            self.logger.log_check(check.name, check.lhs, check.rhs, check.verdict)
        for name, entry in report.refinement.items():
            self.logger.log_refinement(name, entry["coarse"], entry["fine"])

        report_dict = report.to_dict()
        tables = {name: pd.DataFrame(rows) for name, rows in report.tables.items() if rows}
        self.loader.save_results(cfg.label, report_dict, tables, timing={"wall_seconds": duration})

        self.logger.log_experiment_end(cfg.label, report_dict)
        self.metrics_collector.record_experiment(cfg.label, report_dict, duration)
        return report

    def run(self, config_path: Union[str, Path], only: Optional[List[str]] = None) -> int:
        """
        运行实验文件中的全部（或 only 指定的）实验

        Returns:
            退出码：0 全部通过，1 有检查失败或运行期错误，2 配置错误
        """
        try:
            configs = self.load(config_path)
        except ParameterError as e:
            self.logger.logger.error(f"配置错误: {e}")
            return EXIT_CONFIG

        if only:
            unknown = [name for name in only if name not in {c.label for c in configs} | {c.name for c in configs}]
            if unknown:
                self.logger.logger.error(f"实验文件中没有这些实验: {unknown}")
                return EXIT_CONFIG
            configs = [c for c in configs if c.label in only or c.name in only]

        for cfg in configs:
            ok, errors = cfg.validate()
            if not ok:
                for error in errors:
                    self.logger.logger.error(f"[{cfg.label}] {error}")
                return EXIT_CONFIG

        results: Dict[str, Dict] = {}
        exit_code = EXIT_OK
        for cfg in configs:
            try:
                report = self.run_experiment(cfg)
            except ParameterError as e:
                self.logger.logger.error(f"[{cfg.label}] 参数错误: {e}")
                return EXIT_CONFIG
            except LabError as e:
                self.logger.logger.error(f"[{cfg.label}] 运行失败: {e}", exc_info=True)
                results[cfg.label] = {"experiment": cfg.name, "passed": False, "error": str(e)}
                exit_code = EXIT_FAILED
                continue
            results[cfg.label] = dict(report.summary, experiment=cfg.name)
            if not report.passed:
                exit_code = EXIT_FAILED

        self._save_suite(results)
        self.metrics_collector.save_metrics(str(self.output_dir / "performance" / "metrics.json"))
        self.logger.log_summary(self.metrics_collector.get_summary())
        return exit_code

    def _save_suite(self, results: Dict[str, Dict]) -> None:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        suite = {
            "experiments": results,
            "passed": all(r.get("passed", False) for r in results.values()),
            "num_experiments": len(results),
        }
        with open(self.output_dir / "suite_report.json", 'w', encoding='utf-8') as f:
            json.dump(json_safe(suite), f, indent=2, ensure_ascii=False, sort_keys=True, allow_nan=False)
            f.write("\n")

    def validate(self, config_path: Union[str, Path]) -> int:
        """只检查配置，不运行"""
        try:
            configs = self.load(config_path)
        except ParameterError as e:
            self.logger.logger.error(f"配置错误: {e}")
            return EXIT_CONFIG
        exit_code = EXIT_OK
        for cfg in configs:
            ok, errors = cfg.validate()
            if ok:
                self.logger.logger.info(f"[{cfg.label}] 配置有效")
            else:
                exit_code = EXIT_CONFIG
                for error in errors:
                    self.logger.logger.error(f"[{cfg.label}] {error}")
        return exit_code
