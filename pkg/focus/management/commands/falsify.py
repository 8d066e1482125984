"""
在小模型中搜索反例
用法: python manage.py falsify "p | <>q" [--worlds 3]
"""
import logging

from django.core.management.base import CommandError

from mucalc.semantics import find_countermodel, model_to_json

from focus.cli import EXIT_INPUT, FormulaCommand

logger = logging.getLogger(__name__)


class Command(FormulaCommand):
    help = '穷举不超过给定世界数的点模型，寻找使所有公式同时为假的点'

    def add_arguments(self, parser):
        parser.add_argument('expr', nargs='+', help='公式文本')
        parser.add_argument('--worlds', type=int, default=2, help='模型的最大世界数，默认 2')
        super().add_arguments(parser)

    def handle(self, *args, **options):
        formulas = self.read_formulas(options['expr'], options, fragment=False)
        if options['worlds'] < 1:
            raise CommandError('--worlds 必须为正整数', returncode=EXIT_INPUT)
        found = find_countermodel(formulas, max_worlds=options['worlds'])
        if found is None:
            self.emit({'countermodel': None})
            self.summary(f'不超过 {options["worlds"]} 个世界的模型中没有反例')
            return
        model, world = found
        self.emit({'countermodel': {'model': model_to_json(model), 'world': world}})
        self.summary(f'找到反例: {len(model.worlds)} 个世界, 点 {world}', ok=False)
        self.negative('找到反例')
