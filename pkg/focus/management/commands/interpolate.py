"""
计算 φ → ψ 的 Craig 插值
用法: python manage.py interpolate "p & q" "p | r" [--raw]
"""
import logging

from mucalc.formula import MuCalcError, to_text
from mucalc.semantics import model_to_json

from focus.cli import FormulaCommand
from focus.interpolation import InterpolationError, interpolate
from focus.tableaux import SCHEDULES

logger = logging.getLogger(__name__)


class Command(FormulaCommand):
    help = '计算交替自由插值，输出插值公式、着色统计与复核结论'

    def add_arguments(self, parser):
        parser.add_argument('phi', help='蕴涵前件 φ')
        parser.add_argument('psi', help='蕴涵后件 ψ')
        parser.add_argument('--raw', action='store_true', help='输出未化简的插值作为主结果')
        parser.add_argument('--schedule', choices=SCHEDULES, help='表列主公式的选择顺序')
        super().add_arguments(parser)

    def handle(self, *args, **options):
        phi = self.read_formula(options['phi'], options)
        psi = self.read_formula(options['psi'], options)
        try:
            result = interpolate(phi, psi, options.get('schedule'))
        except InterpolationError as exc:
            if exc.model is None:
                self.input_error('插值失败', exc)
            self.emit({'verdict': 'INVALID', 'model': model_to_json(exc.model), 'world': exc.world})
            self.summary('蕴涵不成立，已输出反模型', ok=False)
            self.negative(str(exc))
        except MuCalcError as exc:
            self.input_error('插值失败', exc)

        data = result.to_json()
        data['interpolant'] = to_text(result.raw if options['raw'] else result.simplified)
        self.emit(data)
        self.summary(f'插值: {data["interpolant"]}')
