"""
Experiment Report - 检查记录与实验报告
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from utils.data_loader import CORPUS_LABEL


REPORT_SCHEMA = "sqfn-report/1"


@dataclass
class CheckRecord:
    """
    一项检查：lhs ≤ rhs·(1 + tolerance)

    verdict 只依赖 lhs、rhs、tolerance；0 ≤ 0 视为平凡通过。
    """
    name: str
    lhs: float
    rhs: float
    tolerance: float = 0.0
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        self.tolerance = float(self.tolerance)

    @property
    def vacuous(self) -> bool:
        return self.lhs == 0.0 and self.rhs == 0.0

    @property
    def ratio(self) -> Optional[float]:
        if self.vacuous:
            return None
        if self.rhs == 0.0:
            return math.inf
        return self.lhs / self.rhs

    @property
    def verdict(self) -> str:
        if self.vacuous:
            return "pass"
        return "pass" if self.lhs <= self.rhs * (1.0 + self.tolerance) else "fail"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "vacuous": self.vacuous,
            "details": self.details,
        }


@dataclass
class ExperimentReport:
    """实验报告：配置回显、检查记录、拟合常数、加密对比与诊断"""
    experiment: str
    label: str
    config: Dict
    checks: List[CheckRecord] = field(default_factory=list)
    fitted_constants: Dict[str, Any] = field(default_factory=dict)
    refinement: Dict[str, Any] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    tables: Dict[str, List[Dict]] = field(default_factory=dict)

    def add_check(self, name: str, lhs: float, rhs: float, tolerance: float = 0.0, **details) -> CheckRecord:
        record = CheckRecord(name, lhs, rhs, tolerance, details)
        self.checks.append(record)
        return record

    def fit(self, name: str, value: Any) -> None:
        self.fitted_constants[name] = value

    def add_rows(self, table: str, rows: List[Dict]) -> None:
        self.tables.setdefault(table, []).extend(rows)

    def add_refinement(self, name: str, coarse: float, fine: float, **extra) -> Dict:
        entry = {"coarse": float(coarse), "fine": float(fine)}
        entry.update(extra)
        self.refinement[name] = entry
        return entry

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed_checks(self) -> List[CheckRecord]:
        return [c for c in self.checks if not c.passed]

    @property
    def summary(self) -> Dict:
        num_passed = sum(1 for c in self.checks if c.passed)
        return {
            "passed": self.passed,
            "num_checks": len(self.checks),
            "num_passed": num_passed,
            "failed": [c.name for c in self.failed_checks],
        }

    def to_dict(self) -> Dict:
        """不含墙钟时间：同配置同种子的报告逐字节一致"""
        return {
            "schema": REPORT_SCHEMA,
            "experiment": self.experiment,
            "label": self.label,
            "corpus": CORPUS_LABEL,
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks],
            "fitted_constants": self.fitted_constants,
            "refinement": self.refinement,
            "diagnostics": self.diagnostics,
            "notes": self.notes,
            "summary": self.summary,
        }
