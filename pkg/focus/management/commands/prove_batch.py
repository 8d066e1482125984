"""
批量判定相继式
文件中每行一个相继式，公式之间用逗号分隔；空行与 # 开头的行跳过
用法: python manage.py prove_batch sequents.txt [--jobs 4]
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from django.core.management.base import CommandError

from mucalc.conf import focus_setting
from mucalc.formula import MuCalcError, clear_caches, guard, parse, require_fragment

from focus.cli import EXIT_INPUT, FormulaCommand
from focus.proofs import proof_size
from focus.prover import decide
from focus.tableaux import SCHEDULES

logger = logging.getLogger(__name__)


def decide_line(line, auto_guard=False, schedule=None):
    """判定一行相继式，返回可序列化的结果；输入错误记在 error 字段"""
    try:
        formulas = [parse(text) for text in line.split(',')]
        if auto_guard:
            formulas = [guard(formula) for formula in formulas]
        require_fragment(formulas)
        result = decide(formulas, schedule)
    except MuCalcError as exc:
        return {'sequent': line, 'error': str(exc)}
    finally:
        clear_caches()
    if result.valid:
        return {'sequent': line, 'verdict': 'VALID', 'proof_size': proof_size(result.proof)}
    return {'sequent': line, 'verdict': 'INVALID', 'world_count': len(result.model.worlds)}


class Command(FormulaCommand):
    help = '批量判定文件中的相继式，输出 JSON 结果列表'

    def add_arguments(self, parser):
        parser.add_argument('file', help='每行一个相继式的文本文件')
        parser.add_argument('--jobs', type=int, help='并行进程数，默认取 BATCH_JOBS 配置')
        parser.add_argument('--schedule', choices=SCHEDULES, help='表列主公式的选择顺序')
        super().add_arguments(parser)

    def handle(self, *args, **options):
        try:
            text = Path(options['file']).read_text(encoding='utf-8')
        except OSError as exc:
            raise CommandError(f'无法读取文件 {options["file"]}: {exc}', returncode=EXIT_INPUT) from exc
        lines = [line.strip() for line in text.splitlines()]
        lines = [line for line in lines if line and not line.startswith('#')]

        jobs = options.get('jobs') or focus_setting('BATCH_JOBS')
        worker = partial(decide_line, auto_guard=bool(self.auto_guard(options)), schedule=options.get('schedule'))
        if jobs > 1 and len(lines) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(worker, lines))
        else:
            results = [worker(line) for line in lines]

        self.emit({'results': results})
        errors = sum(1 for r in results if 'error' in r)
        invalid = sum(1 for r in results if r.get('verdict') == 'INVALID')
        self.summary(f'共 {len(results)} 个相继式: {invalid} 个不可证, {errors} 个输入错误', ok=not (errors or invalid))
        if errors:
            raise CommandError(f'{errors} 个相继式输入错误', returncode=EXIT_INPUT)
        if invalid:
            self.negative(f'{invalid} 个相继式不可证')
