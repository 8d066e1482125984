"""
在点模型上检测公式
用法: python manage.py model_check model.json s0 "mu x. p | <>x"
"""
import logging

from mucalc.formula import MuCalcError, to_text
from mucalc.semantics import model_check, model_from_json

from focus.cli import FormulaCommand, read_json_file

logger = logging.getLogger(__name__)


class Command(FormulaCommand):
    help = '读取 Kripke 模型 JSON，判断公式是否在指定世界为真'

    def add_arguments(self, parser):
        parser.add_argument('model', help='模型 JSON 文件: {worlds, rel, val}')
        parser.add_argument('world', help='世界名')
        parser.add_argument('expr', help='公式文本')
        super().add_arguments(parser)

    def handle(self, *args, **options):
        formula = self.read_formula(options['expr'], options)
        data = read_json_file(options['model'])
        if isinstance(data, dict) and 'model' in data:
            # prove --countermodel 的输出文件
            data = data['model']
        try:
            model = model_from_json(data)
            holds = model_check(formula, model, options['world'])
        except MuCalcError as exc:
            self.input_error('模型检测失败', exc)

        self.emit({'formula': to_text(formula), 'world': options['world'], 'holds': holds})
        if not holds:
            self.summary(f'{to_text(formula)} 在 {options["world"]} 处为假', ok=False)
            self.negative('公式不成立')
        self.summary(f'{to_text(formula)} 在 {options["world"]} 处为真')
