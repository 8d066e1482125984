"""
检查公式的基本性质
用法: python manage.py check_formula "mu x. p | <>x"
"""
import logging

from mucalc.formula import closure, is_alternation_free, is_guarded, to_text

from focus.cli import FormulaCommand

logger = logging.getLogger(__name__)


class Command(FormulaCommand):
    help = '解析公式并输出守卫性、交替自由性、闭包大小与自由/约束变量'

    def add_arguments(self, parser):
        parser.add_argument('expr', help='公式文本')
        super().add_arguments(parser)

    def handle(self, *args, **options):
        formula = self.read_formula(options['expr'], options, fragment=False)
        data = {
            'formula': to_text(formula),
            'guarded': is_guarded(formula),
            'alternation_free': is_alternation_free(formula),
            'closure_size': len(closure(formula)),
            'fv': sorted(formula.free),
            'bv': sorted(formula.bound),
        }
        self.emit(data)
        self.summary(f'闭包大小 {data["closure_size"]}，守卫: {data["guarded"]}，交替自由: {data["alternation_free"]}')
