"""
判定相继式并输出证明或反模型
用法: python manage.py prove "p | ~p" [--proof out.json] [--latex out.tex] [--countermodel model.json]
"""
import logging

from mucalc.formula import MuCalcError
from mucalc.semantics import model_to_json

from focus.cli import FormulaCommand, write_json_file, write_text_file
from focus.proofs import proof_size, proof_to_json, to_latex
from focus.prover import decide
from focus.tableaux import SCHEDULES

logger = logging.getLogger(__name__)


class Command(FormulaCommand):
    help = '判定由给定公式组成的相继式：可证时输出 Focus 证明，否则输出反模型'

    def add_arguments(self, parser):
        parser.add_argument('expr', nargs='+', help='相继式中的公式')
        parser.add_argument('--proof', help='把证明 JSON 写入该文件')
        parser.add_argument('--latex', help='把证明的 LaTeX (bussproofs) 写入该文件')
        parser.add_argument('--countermodel', help='把反模型 JSON 写入该文件')
        parser.add_argument('--schedule', choices=SCHEDULES, help='表列主公式的选择顺序')
        super().add_arguments(parser)

    def handle(self, *args, **options):
        formulas = self.read_formulas(options['expr'], options)
        try:
            result = decide(formulas, options.get('schedule'))
        except MuCalcError as exc:
            self.input_error('判定失败', exc)

        if result.valid:
            proof = result.proof
            if options.get('proof'):
                write_json_file(options['proof'], proof_to_json(proof))
            if options.get('latex'):
                write_text_file(options['latex'], to_latex(proof) + '\n')
            self.emit({'verdict': 'VALID', 'proof_size': proof_size(proof)})
            self.summary(f'VALID: 证明共 {proof_size(proof)} 个节点')
            return

        model = model_to_json(result.model)
        if options.get('countermodel'):
            write_json_file(options['countermodel'], {'model': model, 'world': result.world})
        self.emit({'verdict': 'INVALID', 'model': model, 'world': result.world})
        self.summary(f'INVALID: 反模型有 {len(result.model.worlds)} 个世界', ok=False)
        self.negative('相继式不可证')
