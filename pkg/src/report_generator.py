"""
报告生成模块
把扫描结果整理成相图报告（Markdown + JSON）
"""
import os
import json
import logging
from typing import List, Dict, Any, Optional
from datetime import datetime

from jinja2 import Environment, FileSystemLoader

from src.config import Config
from src.data_models import GridSpec, SweepRow, PhaseLabel, RowStatus, format_real
from src.analysis import bessel_j0_zeros

# 配置日志
logging.basicConfig(
    level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
    format=Config.LOG_FORMAT,
    handlers=[
        logging.FileHandler(f'{Config.LOG_DIR}/report_generator.log', encoding='utf-8'),
        logging.StreamHandler()
    ]
)
logger = logging.getLogger(__name__)

PHASE_SYMBOLS = {
    PhaseLabel.REGULAR_OSCILLATING: ".",
    PhaseLabel.ORDERED: "o",
    PhaseLabel.NON_PERIODIC: "x",
}
FAILURE_SYMBOL = "!"
MISSING_SYMBOL = " "

PHASE_NAMES = {
    PhaseLabel.REGULAR_OSCILLATING.value: "规则振荡",
    PhaseLabel.ORDERED.value: "有序",
    PhaseLabel.NON_PERIODIC.value: "非周期",
}


class ReportGenerator:
    """相图报告生成器"""

    def __init__(self, template_dir: Optional[str] = None):
        """初始化报告生成器"""
        self.template_env = Environment(
            loader=FileSystemLoader(template_dir or Config.TEMPLATE_DIR),
            keep_trailing_newline=True,
            trim_blocks=True,
            lstrip_blocks=True,
        )

    @staticmethod
    def symbol_for(row: SweepRow) -> str:
        if row.status is RowStatus.NUMERICAL_FAILURE:
            return FAILURE_SYMBOL
        return PHASE_SYMBOLS[row.phase]

    def build_phase_map(self, rows: List[SweepRow], grid: GridSpec) -> List[Dict[str, str]]:
        """
        字符相图：每行一个 ξ（自上而下递减），每列一个 g（自左向右递增）

        Returns:
            List[Dict[str, str]]: [{"xi": 标签, "cells": 字符串}]
        """
        lookup = {row.key(): self.symbol_for(row) for row in rows}
        lines = []
        for xi in grid.xi_values()[::-1]:
            cells = "".join(
                lookup.get((format_real(g), format_real(xi)), MISSING_SYMBOL)
                for g in grid.g_values()
            )
            lines.append({"xi": f"{xi:8.4f}", "cells": cells})
        return lines

    def cdt_columns(self, grid: GridSpec) -> List[Dict[str, Any]]:
        """每个 g 列落在 ξ 范围内的 CDT 振幅"""
        params = grid.template
        if params.kappa <= 0:
            return []
        columns = []
        for g in grid.g_values():
            if g <= 0:
                continue
            scale = params.kappa * params.omega_e / (4.0 * g)
            count = int(grid.xi_max / scale / 3.0) + 2
            amplitudes = [j * scale for j in bessel_j0_zeros(count)]
            inside = [xi for xi in amplitudes if grid.xi_min <= xi <= grid.xi_max]
            if inside:
                columns.append({"g": float(g), "amplitudes": inside})
        return columns

    def _context(self, rows: List[SweepRow], grid: GridSpec) -> Dict[str, Any]:
        counts = {label.value: 0 for label in PhaseLabel}
        failures = 0
        for row in rows:
            counts[row.phase.value] += 1
            if row.status is RowStatus.NUMERICAL_FAILURE:
                failures += 1
        return {
            "title": f"{grid.model.value.upper()} 模型驱动相图",
            "generated_at": datetime.now().strftime('%Y-%m-%d %H:%M:%S'),
            "grid": grid,
            "params": grid.template,
            "total": len(rows),
            "counts": counts,
            "phase_names": PHASE_NAMES,
            "failures": failures,
            "phase_map": self.build_phase_map(rows, grid),
            "cdt": self.cdt_columns(grid),
        }

    def generate_phase_diagram(self, rows: List[SweepRow], grid: GridSpec) -> str:
        """
        生成 Markdown 相图报告

        Args:
            rows: 扫描结果
            grid: 网格定义

        Returns:
            str: Markdown 内容
        """
        context = self._context(rows, grid)
        try:
            template = self.template_env.get_template('phase_diagram.md.j2')
            return template.render(context)
        except Exception as e:
            logger.error(f"生成相图报告失败: {e}")
            return self._generate_fallback_markdown(context)

    def save_report(self, rows: List[SweepRow], grid: GridSpec, path: str) -> Dict[str, str]:
        """
        保存报告：path 写 Markdown，同名 .json 写结构化数据

        Returns:
            Dict[str, str]: 文件路径字典
        """
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)

        files = {}
        with open(path, 'w', encoding='utf-8') as f:
            f.write(self.generate_phase_diagram(rows, grid))
        files['markdown'] = path

        json_path = os.path.splitext(path)[0] + '.json'
        context = self._context(rows, grid)
        payload = {
            "model": grid.model.value,
            "mode": grid.mode.value,
            "params": grid.template.to_dict(),
            "counts": context["counts"],
            "failures": context["failures"],
            "cdt": context["cdt"],
            "rows": [row.to_dict() for row in rows],
        }
        with open(json_path, 'w', encoding='utf-8') as f:
            json.dump(payload, f, ensure_ascii=False, indent=2, allow_nan=True)
        files['json'] = json_path

        logger.info(f"生成文件: {list(files.values())}")
        return files

    def _generate_fallback_markdown(self, context: Dict[str, Any]) -> str:
        """生成备用Markdown报告"""
        content = f"# {context['title']}\n\n"
        content += f"网格点数: {context['total']}\n\n"
        for phase, count in context["counts"].items():
            content += f"- {phase}: {count}\n"
        content += "\n```\n"
        for line in context["phase_map"]:
            content += f"{line['xi']} |{line['cells']}\n"
        content += "```\n"
        return content
