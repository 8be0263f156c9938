"""
Analyze Results - 分析实验结果（比值随半径曲线、孔径比值分布、检查汇总）
"""
import json
from pathlib import Path
from typing import Dict, List

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

# 设置中文字体
plt.rcParams['font.sans-serif'] = ['SimHei', 'Microsoft YaHei', 'DejaVu Sans']
plt.rcParams['axes.unicode_minus'] = False


def _number(value):
    # report.json 把非有限值记为 "inf"/"-inf"/"nan"
    return None if value is None else float(value)


class ResultAnalyzer:
    """结果分析器"""

    def __init__(self, results_dir: str = "results"):
        self.results_dir = Path(results_dir)
        self.reports: Dict[str, Dict] = {}

    def load_results(self) -> None:
        """加载各实验子目录下的 report.json"""
        for path in sorted(self.results_dir.glob("*/report.json")):
            with open(path, 'r', encoding='utf-8') as f:
                self.reports[path.parent.name] = json.load(f)
        print(f"找到 {len(self.reports)} 个实验报告")

    def check_table(self) -> pd.DataFrame:
        """所有检查记录展开成一张表"""
        rows = []
        for label, report in self.reports.items():
            for check in report.get("checks", []):
                rows.append({
                    "experiment": label,
                    "check": check["name"],
                    "lhs": _number(check["lhs"]),
                    "rhs": _number(check["rhs"]),
                    "ratio": _number(check["ratio"]),
                    "verdict": check["verdict"],
                })
        return pd.DataFrame(rows)

    def plot_ratio_vs_r(self, label: str) -> List[Path]:
        """球估计实验：各测试场的 lhs/rhs 随半径变化"""
        saved = []
        for csv in sorted((self.results_dir / label).glob("*ratio_vs_r.csv")):
            frame = pd.read_csv(csv)
            plt.figure(figsize=(8, 5))
            for field_name, group in frame.groupby("field"):
                curve = group.groupby("r")["ratio"].max()
                plt.plot(curve.index, curve.values, marker="o", label=field_name)
            plt.xscale("log")
            plt.xlabel("r")
            plt.ylabel("lhs / rhs")
            plt.title(f"{label}: {csv.stem}")
            plt.legend()
            plt.grid(alpha=0.3)
            out = csv.with_suffix(".png")
            plt.savefig(out, dpi=150, bbox_inches='tight')
            plt.close()
            saved.append(out)
        return saved

    def plot_domination(self, label: str) -> List[Path]:
        """孔径控制实验：G_{α,β}/G_α 的逐节点分布"""
        csv = self.results_dir / label / "domination_ratios.csv"
        if not csv.exists():
            return []
        frame = pd.read_csv(csv)
        plt.figure(figsize=(8, 5))
        for beta, group in frame.groupby("beta"):
            plt.hist(group["ratio"], bins=40, alpha=0.5, label=f"β={beta:g}")
        plt.xlabel("G_β / G")
        plt.ylabel("节点数")
        plt.title(label)
        plt.legend()
        out = csv.with_suffix(".png")
        plt.savefig(out, dpi=150, bbox_inches='tight')
        plt.close()
        return [out]

    def generate_report(self, output_path: Path = None) -> str:
        """生成文本汇总"""
        lines = ["=" * 80, "实验结果分析报告", "=" * 80]
        for label, report in self.reports.items():
            summary = report.get("summary", {})
            status = "通过" if summary.get("passed") else "未通过"
            lines.append(f"\n{label} ({report.get('experiment')}): {status} "
                         f"{summary.get('num_passed', 0)}/{summary.get('num_checks', 0)}")
            for name in summary.get("failed", []):
                lines.append(f"  - 失败: {name}")
            for name, value in sorted(report.get("fitted_constants", {}).items()):
                if isinstance(value, (int, float)):
                    lines.append(f"  {name} = {value:.6g}")
        lines.append("\n" + "=" * 80)
        text = "\n".join(lines)
        output_path = output_path or self.results_dir / "analysis_report.txt"
        output_path.write_text(text, encoding='utf-8')
        print(f"分析报告已保存: {output_path}")
        return text


def main():
    """主函数"""
    import argparse

    parser = argparse.ArgumentParser(description="分析实验结果")
    parser.add_argument("--results-dir", default="results", help="结果目录")
    args = parser.parse_args()

    analyzer = ResultAnalyzer(results_dir=args.results_dir)
    analyzer.load_results()
    if not analyzer.reports:
        print("未找到结果文件")
        return

    analyzer.generate_report()
    analyzer.check_table().to_csv(analyzer.results_dir / "checks.csv", index=False)
    for label in analyzer.reports:
        for path in analyzer.plot_ratio_vs_r(label) + analyzer.plot_domination(label):
            print(f"图已保存: {path}")


if __name__ == "__main__":
    main()
