"""
相图扫描模块
并行计算 (g, ξ) 网格上的序参量与相标签，逐行落盘并支持断点续算
"""
import os
import logging
from multiprocessing import Pool
from pathlib import Path
from typing import Iterable, List, Optional, Set, Tuple, Union

import numpy as np
import pandas as pd

from src.config import Config
from src.data_models import (
    GridSpec, SweepRow, SweepSummary, PhaseLabel, RowStatus,
    SWEEP_CSV_HEADER, format_real,
)
from src.errors import ConfigError, NumericalFailure
from src.model_core import ground_state
from src.dynamics import integrate
from src.analysis import analyze

# 配置日志
logging.basicConfig(
    level=getattr(logging, Config.LOG_LEVEL, logging.INFO),
    format=Config.LOG_FORMAT,
    handlers=[
        logging.FileHandler(f'{Config.LOG_DIR}/sweep.log', encoding='utf-8'),
        logging.StreamHandler()
    ]
)
logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def run_point(spec: GridSpec, g: float, xi: float) -> SweepRow:
    """
    计算一个网格点

    初态取同一 g、ξ=0 的平均场基态，然后打开驱动积分并分析。
    数值失败只记录在 status 中，不中断扫描。
    """
    params = spec.params_at(g, xi)
    initial = ground_state(spec.model, params.with_changes(xi=0.0), spec.branch)
    try:
        trajectory = integrate(spec.model, spec.mode, params, initial, spec.integration)
        _, op, label = analyze(trajectory, spec.integration.discard_fraction,
                               spec.eps_order, spec.eps_sigma)
    except NumericalFailure as e:
        logger.error(f"网格点 g={g:.6g}, xi={xi:.6g} 数值失败: {e}")
        return SweepRow(
            g=g, xi=xi,
            alpha_order=complex(np.nan, np.nan),
            sigma_alpha=float("nan"),
            phase=PhaseLabel.NON_PERIODIC,
            status=RowStatus.NUMERICAL_FAILURE,
        )
    return SweepRow(g=g, xi=xi, alpha_order=op.alpha_order, sigma_alpha=op.sigma_alpha, phase=label)


def _run_point_job(job: Tuple[GridSpec, float, float]) -> SweepRow:
    # Pool 只能调度模块级函数
    spec, g, xi = job
    return run_point(spec, g, xi)


def _point_key(g: float, xi: float) -> Tuple[str, str]:
    return format_real(g), format_real(xi)


def _line_key(line: str) -> Tuple[str, str]:
    g, xi = line.split(",", 2)[:2]
    return g, xi


def _prepare_sink(path: Path, resume: bool) -> Set[Tuple[str, str]]:
    """
    准备输出文件，返回已完成点的键集合

    续算时丢弃末尾不完整的一行；非续算或文件不存在时重写表头。
    """
    if not resume or not path.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(SWEEP_CSV_HEADER + "\n")
        return set()

    with open(path, 'r', encoding='utf-8', newline='') as f:
        text = f.read()
    if text and not text.endswith("\n"):
        cut = text.rfind("\n") + 1
        logger.warning(f"丢弃 {path} 末尾不完整的一行")
        text = text[:cut]
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)

    lines = text.splitlines()
    if not lines:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(SWEEP_CSV_HEADER + "\n")
        return set()
    if lines[0] != SWEEP_CSV_HEADER:
        raise ConfigError(f"{path} 的表头与扫描格式不符: {lines[0]}")
    return {_line_key(line) for line in lines[1:] if line}


def _rewrite_sorted(path: Path):
    """按 (g, ξ) 排序去重后经临时文件原子替换"""
    with open(path, 'r', encoding='utf-8', newline='') as f:
        lines = f.read().splitlines()
    rows = {}
    for line in lines[1:]:
        if line:
            rows.setdefault(_line_key(line), line)
    ordered = sorted(rows.items(), key=lambda item: (float(item[0][0]), float(item[0][1])))

    tmp_path = path.with_name(path.name + ".tmp")
    with open(tmp_path, 'w', encoding='utf-8', newline='') as f:
        f.write(SWEEP_CSV_HEADER + "\n")
        for _, line in ordered:
            f.write(line + "\n")
    os.replace(tmp_path, path)


def load_rows(path: PathLike) -> pd.DataFrame:
    """读取扫描 CSV"""
    return pd.read_csv(path, dtype={"phase": str, "status": str})


def rows_from_frame(frame: pd.DataFrame) -> List[SweepRow]:
    """DataFrame → SweepRow 列表"""
    return [SweepRow.from_dict(record) for record in frame.to_dict(orient="records")]


def _iter_rows(jobs: List[Tuple[GridSpec, float, float]], workers: int) -> Iterable[SweepRow]:
    if workers <= 1 or len(jobs) <= 1:
        for job in jobs:
            yield _run_point_job(job)
        return
    with Pool(processes=workers) as pool:
        for row in pool.imap_unordered(_run_point_job, jobs, chunksize=1):
            yield row


def summarize(frame: pd.DataFrame, new_rows: int = 0) -> SweepSummary:
    """按相标签统计"""
    counts = {label.value: 0 for label in PhaseLabel}
    for phase, count in frame["phase"].value_counts().items():
        counts[str(phase)] = int(count)
    failures = int((frame["status"] == RowStatus.NUMERICAL_FAILURE.value).sum())
    return SweepSummary(new_rows=new_rows, total_rows=len(frame), counts=counts, failures=failures)


def run_sweep(spec: GridSpec, sink: PathLike, resume: bool = False,
              workers: Optional[int] = None) -> SweepSummary:
    """
    扫描整个网格

    每完成一个点就把完整一行写入 sink 并 flush；结束后按 (g, ξ) 排序重写。
    行内容与执行顺序、进程数无关。

    Args:
        spec: 网格定义
        sink: 输出 CSV 路径
        resume: 跳过 sink 中已有的点
        workers: 进程数，默认 Config.SWEEP_WORKERS

    Returns:
        SweepSummary: 汇总
    """
    path = Path(sink)
    workers = Config.SWEEP_WORKERS if workers is None else max(1, int(workers))
    done = _prepare_sink(path, resume)

    jobs = [(spec, g, xi) for g, xi in spec.points() if _point_key(g, xi) not in done]
    total = len(jobs)
    logger.info(
        f"开始扫描: 网格 {spec.g_steps}×{spec.xi_steps}, 已完成 {len(done)}, "
        f"待计算 {total}, 进程数 {workers}"
    )

    with open(path, 'a', encoding='utf-8', newline='') as f:
        for finished, row in enumerate(_iter_rows(jobs, workers), start=1):
            f.write(row.to_csv_line())
            f.flush()
            logger.info(f"[{finished}/{total}] g={row.g:.6g}, xi={row.xi:.6g} → {row.phase.value}")

    _rewrite_sorted(path)
    summary = summarize(load_rows(path), new_rows=total)
    logger.info(f"扫描完成: {summary.to_dict()}")
    return summary
