#!/usr/bin/env python3
"""
Driven Dicke / Tavis–Cummings Phase Simulator
驱动耗散 Dicke 与 Tavis–Cummings 模型的平均场模拟与相图扫描
"""

import sys
import json
import argparse
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional
from dotenv import load_dotenv

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

# 加载环境变量
load_dotenv()

# 导入自定义模块（从src目录）
from src.config import Config, RunConfig
from src.errors import ConfigError, NumericalFailure, ParameterError, SimulationError, TrajectoryTooShort
from src.model_core import ground_state, critical_coupling
from src.dynamics import integrate
from src.analysis import analyze, cdt_amplitudes
from src.sweep import run_sweep, load_rows, rows_from_frame
from src.report_generator import ReportGenerator

# 配置日志
logging.basicConfig(
    level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
    format=Config.LOG_FORMAT,
    handlers=[
        logging.FileHandler(f'{Config.LOG_DIR}/main.log', encoding='utf-8'),
        logging.StreamHandler()
    ]
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

# 命令行参数 → 配置段
PARAM_FLAGS = ["omega_p", "omega_a", "omega_e", "g", "xi", "kappa", "gamma_l", "gamma_g"]
INTEGRATION_FLAGS = {
    "dt": "dt",
    "t_end": "t_end",
    "stride": "sample_stride",
    "discard": "discard_fraction",
    "perturbation": "perturbation",
}
THRESHOLD_FLAGS = ["eps_order", "eps_sigma"]
GRID_FLAGS = ["g_min", "g_max", "g_steps", "xi_min", "xi_max", "xi_steps"]


class CavityPhaseSystem:
    """腔 QED 驱动相图模拟系统"""

    def __init__(self, config: Optional[RunConfig] = None):
        """初始化系统"""
        Config.load_from_env()
        self.config = config or RunConfig()
        self.report_generator = ReportGenerator()
        logger.info(f"系统初始化完成: model={self.config.model.value}, mode={self.config.mode.value}")

    def ground_state(self) -> Dict[str, Any]:
        """ξ=0 平均场基态"""
        config = self.config
        params = config.params.with_changes(xi=0.0)
        state = ground_state(config.model, params, config.branch)
        g_c = critical_coupling(config.model, params)
        result = state.to_dict()
        result.pop("t")
        result["phase"] = "superradiant" if params.g > g_c else "normal"
        result["g_c"] = g_c
        return result

    def simulate(self, output: Optional[str] = None) -> Dict[str, Any]:
        """
        单次模拟：写出轨迹 CSV，返回序参量摘要

        数值失败时先写出已记录的部分轨迹再抛出
        """
        config = self.config
        config.check_averaging_window()
        output = output or config.output.trajectory
        params = config.params
        initial = ground_state(config.model, params.with_changes(xi=0.0), config.branch)

        try:
            trajectory = integrate(config.model, config.mode, params, initial, config.integration)
        except NumericalFailure as e:
            if e.partial is not None:
                self._write_trajectory(e.partial, output)
                logger.error(f"部分轨迹已写入: {output}")
            raise

        self._write_trajectory(trajectory, output)
        pa, op, label = analyze(trajectory, config.integration.discard_fraction,
                                config.thresholds.eps_order, config.thresholds.eps_sigma)
        summary = {
            "model": config.model.value,
            "mode": config.mode.value,
            "g": params.g,
            "xi": params.xi,
            **op.to_dict(),
            "phase": label.value,
            "periods": len(pa),
            "max_renorm_correction": trajectory.max_renorm_correction,
            "min_eigenvalue": trajectory.min_eigenvalue,
            "trajectory": output,
        }
        return summary

    @staticmethod
    def _write_trajectory(trajectory, output: str):
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        trajectory.to_dataframe().to_csv(path, index=False, float_format="%.12g", lineterminator="\n")

    def sweep(self, output: Optional[str] = None, resume: bool = False,
              workers: Optional[int] = None, report: Optional[str] = None) -> Dict[str, Any]:
        """相图扫描，可选生成报告"""
        config = self.config
        spec = config.to_grid_spec()
        output = output or config.output.sweep
        summary = run_sweep(spec, output, resume=resume, workers=workers)

        result = summary.to_dict()
        result["output"] = output
        report = report or config.output.report
        if report:
            rows = rows_from_frame(load_rows(output))
            result["report"] = self.report_generator.save_report(rows, spec, report)
        return result

    def cdt(self, n: int) -> List[float]:
        """前 n 个 CDT 驱动振幅"""
        return cdt_amplitudes(self.config.params, n)


def _add_common_arguments(parser: argparse.ArgumentParser):
    # 默认值一律 SUPPRESS，未给出的参数不覆盖配置文件
    suppress = argparse.SUPPRESS
    parser.add_argument('--config', default=suppress, help='JSON 配置文件路径')
    parser.add_argument('--dump-config', action='store_true', default=suppress, help='打印生效配置后退出')
    parser.add_argument('--model', default=suppress, choices=['dicke', 'tc'], help='模型类型')
    parser.add_argument('--mode', default=suppress, choices=['dressed', 'bare', 'effective'], help='耗散形式')
    parser.add_argument('--branch', type=int, default=suppress, choices=[1, -1], help='超辐射分支')
    for name in PARAM_FLAGS:
        parser.add_argument('--' + name.replace('_', '-'), dest=name, type=float, default=suppress)
    parser.add_argument('--dt', type=float, default=suppress, help='RK4 步长')
    parser.add_argument('--t-end', dest='t_end', type=float, default=suppress, help='积分终止时间')
    parser.add_argument('--stride', type=int, default=suppress, help='每隔多少步记录一次')
    parser.add_argument('--discard', type=float, default=suppress, help='视为暂态的比例')
    parser.add_argument('--perturbation', type=float, default=suppress, help='初态 m^x 的扰动')
    parser.add_argument('--eps-order', dest='eps_order', type=float, default=suppress)
    parser.add_argument('--eps-sigma', dest='eps_sigma', type=float, default=suppress)


def build_parser() -> argparse.ArgumentParser:
    """构造命令行解析器"""
    parser = argparse.ArgumentParser(description='驱动耗散 Dicke / Tavis–Cummings 平均场相图模拟')
    _add_common_arguments(parser)
    subparsers = parser.add_subparsers(dest='command')

    ground = subparsers.add_parser('ground-state', help='输出 ξ=0 平均场基态')
    _add_common_arguments(ground)

    simulate = subparsers.add_parser('simulate', help='单次积分，输出轨迹 CSV')
    _add_common_arguments(simulate)
    simulate.add_argument('--output', default=None, help='轨迹 CSV 路径')

    sweep = subparsers.add_parser('sweep', help='(g, ξ) 网格扫描')
    _add_common_arguments(sweep)
    for name in GRID_FLAGS:
        kind = int if name.endswith('steps') else float
        sweep.add_argument('--' + name.replace('_', '-'), dest=name, type=kind, default=argparse.SUPPRESS)
    sweep.add_argument('--output', default=None, help='扫描 CSV 路径')
    sweep.add_argument('--workers', type=int, default=None, help='并行进程数（默认取 SWEEP_WORKERS）')
    sweep.add_argument('--resume', action='store_true', help='跳过已完成的网格点')
    sweep.add_argument('--report', default=None, help='相图报告 Markdown 路径')

    cdt = subparsers.add_parser('cdt', help='CDT 驱动振幅')
    _add_common_arguments(cdt)
    cdt.add_argument('--n', type=int, default=3, help='振幅个数')

    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """配置文件 + 命令行覆盖 → RunConfig"""
    values = vars(args)
    data: Dict[str, Any] = {}
    if values.get('config'):
        data = RunConfig.read_document(values['config'])

    def section(name: str) -> Dict[str, Any]:
        current = data.get(name, {})
        if not isinstance(current, dict):
            raise ConfigError(f"配置段 {name} 必须是 JSON 对象")
        data[name] = current
        return current

    for key in ('model', 'mode', 'branch'):
        if key in values:
            data[key] = values[key]
    for name in PARAM_FLAGS:
        if name in values:
            section('params')[name] = values[name]
    for flag, name in INTEGRATION_FLAGS.items():
        if flag in values:
            section('integration')[name] = values[flag]
    for name in THRESHOLD_FLAGS:
        if name in values:
            section('thresholds')[name] = values[name]
    for name in GRID_FLAGS:
        if name in values:
            section('grid')[name] = values[name]
    return RunConfig.from_dict(data)


def _print_json(payload: Any):
    print(json.dumps(payload, ensure_ascii=False, indent=2))


def main(argv: Optional[List[str]] = None) -> int:
    """主函数，返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if not e.code else EXIT_CONFIG

    try:
        Config.load_from_env()
        config = build_config(args)
        if getattr(args, 'dump_config', False):
            print(config.dump())
            return EXIT_OK
        if not args.command:
            parser.print_help(sys.stderr)
            return EXIT_CONFIG

        system = CavityPhaseSystem(config)
        if args.command == 'ground-state':
            _print_json(system.ground_state())
        elif args.command == 'simulate':
            _print_json(system.simulate(args.output))
        elif args.command == 'sweep':
            _print_json(system.sweep(args.output, args.resume, args.workers, args.report))
        elif args.command == 'cdt':
            _print_json(system.cdt(args.n))
        return EXIT_OK
    except (ConfigError, ParameterError, TrajectoryTooShort, OSError) as e:
        logger.error(f"配置错误: {e}")
        return EXIT_CONFIG
    except NumericalFailure as e:
        logger.error(f"数值失败: {e}")
        return EXIT_NUMERICAL
    except SimulationError as e:
        logger.error(f"模拟失败: {e}")
        return EXIT_NUMERICAL
    except Exception as e:
        logger.exception(f"未预期的错误: {e}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
