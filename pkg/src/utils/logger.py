"""
Logger - 日志工具
"""
import logging
import json
import os
from datetime import datetime
from pathlib import Path
from typing import Dict, Any, Optional

from utils.serialize import json_safe


LOGGER_NAME = "SquareFunctionLab"
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_FILE = "lab.log"


def get_logger(module: str) -> logging.Logger:
    """库模块的子日志器 SquareFunctionLab.<module>，消息传到根日志器的处理器"""
    return logging.getLogger(f"{LOGGER_NAME}.{module}")


class ExperimentLogger:
    """实验日志记录器"""

    def __init__(self, log_dir: Optional[str] = None, level: str = "INFO"):
        self.log_dir = Path(log_dir) if log_dir else None
        if self.log_dir:
            self.log_dir.mkdir(parents=True, exist_ok=True)

        # 配置日志
        self.logger = logging.getLogger(LOGGER_NAME)
        self.logger.setLevel(getattr(logging, level.upper(), logging.INFO))
        formatter = logging.Formatter(LOG_FORMAT)

        # 控制台处理器只挂一次
        if not any(type(h) is logging.StreamHandler for h in self.logger.handlers):
            console_handler = logging.StreamHandler()
            console_handler.setFormatter(formatter)
            self.logger.addHandler(console_handler)

        # 文件处理器：只保留当前日志目录的一个
        if self.log_dir:
            log_file = os.path.abspath(self.log_dir / LOG_FILE)
            for handler in list(self.logger.handlers):
                if isinstance(handler, logging.FileHandler) and handler.baseFilename != log_file:
                    self.logger.removeHandler(handler)
                    handler.close()
            if not any(isinstance(h, logging.FileHandler) for h in self.logger.handlers):
                file_handler = logging.FileHandler(log_file, encoding="utf-8")
                file_handler.setFormatter(formatter)
                self.logger.addHandler(file_handler)

    def log_experiment_start(self, name: str, config: Dict[str, Any]) -> None:
        """记录实验开始"""
        grid = config.get("grid", {})
        self.logger.info(f"实验开始: {name}")
        self.logger.info(
            f"网格: n={grid.get('dim')}, L={grid.get('half_width')}, m={grid.get('points')}"
        )

    def log_experiment_end(self, name: str, report: Dict[str, Any]) -> Optional[Path]:
        """记录实验结束并把报告存入日志目录"""
        summary = report.get("summary", {})
        status = "通过" if summary.get("passed", False) else "未通过"
        self.logger.info(
            f"实验结束: {name} - {status} "
            f"({summary.get('num_passed', 0)}/{summary.get('num_checks', 0)} 项检查通过)"
        )

        # 保存详细结果到文件
        return self._save_experiment_result(name, report)

    def log_check(self, name: str, lhs: float, rhs: float, verdict: str) -> None:
        """记录单项检查"""
        log = self.logger.info if verdict == "pass" else self.logger.warning
        log(f"检查 {name}: lhs={lhs:.6g}, rhs={rhs:.6g} -> {verdict}")

    def log_refinement(self, name: str, coarse: float, fine: float) -> None:
        """记录加密对比"""
        self.logger.info(f"加密对比 {name}: coarse={coarse:.6g}, fine={fine:.6g}")

    def log_summary(self, stats: Dict[str, Any]) -> None:
        """记录汇总统计"""
        self.logger.info(f"汇总统计: {json.dumps(json_safe(stats), indent=2, ensure_ascii=False)}")

    def _save_experiment_result(self, name: str, report: Dict[str, Any]) -> Optional[Path]:
        """保存实验报告到日志目录（文件名带时间戳，不覆盖历史运行）"""
        if not self.log_dir:
            return None
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S_%f")
        filename = self.log_dir / f"{name}_{timestamp}.json"

        with open(filename, 'w', encoding='utf-8') as f:
            json.dump(json_safe(report), f, indent=2, ensure_ascii=False, sort_keys=True, allow_nan=False)

        self.logger.info(f"结果已保存: {filename}")
        return filename


class MetricsCollector:
    """指标收集器"""

    def __init__(self):
        self.metrics = {
            "pass_count": 0,
            "fail_count": 0,
            "total_checks": 0,
            "total_duration": 0.0,
            "worst_ratios": {},
            "fitted_constants": {},
            "experiments": []
        }

    def record_experiment(self, name: str, report: Dict[str, Any], duration: float) -> None:
        """记录实验结果"""
        summary = report.get("summary", {})
        if summary.get("passed"):
            self.metrics["pass_count"] += 1
        else:
            self.metrics["fail_count"] += 1

        self.metrics["total_checks"] += summary.get("num_checks", 0)
        self.metrics["total_duration"] += duration

        worst = 0.0
        for check in report.get("checks", []):
            ratio = check.get("ratio")
            if ratio is not None and ratio > worst:
                worst = ratio
        self.metrics["worst_ratios"][name] = worst
        self.metrics["fitted_constants"][name] = report.get("fitted_constants", {})

        self.metrics["experiments"].append({
            "experiment": name,
            "passed": summary.get("passed"),
            "num_checks": summary.get("num_checks"),
            "duration": duration
        })

    def get_summary(self) -> Dict[str, Any]:
        """获取汇总统计"""
        total = self.metrics["pass_count"] + self.metrics["fail_count"]

        summary = {
            "total_experiments": total,
            "pass_rate": (
                self.metrics["pass_count"] / total
                if total > 0 else 0
            ),
            "total_checks": self.metrics["total_checks"],
            "avg_duration": (
                self.metrics["total_duration"] / total
                if total > 0 else 0
            ),
            "worst_ratios": self.metrics["worst_ratios"],
        }

        return summary

    def save_metrics(self, filepath: str) -> None:
        """保存指标到文件"""
        summary = self.get_summary()
        summary["raw_metrics"] = self.metrics

        Path(filepath).parent.mkdir(parents=True, exist_ok=True)
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(json_safe(summary), f, indent=2, ensure_ascii=False, default=str)
