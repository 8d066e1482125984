"""
构造表列并求解乘积博弈
用法: python manage.py tableau "mu x. <>x" [--dump tableau.json]
"""
import logging

from mucalc.formula import MuCalcError

from focus.cli import FormulaCommand, write_json_file
from focus.tableaux import SCHEDULES, build_tableau, product_to_json, solve_tableau_game, tableau_to_json

logger = logging.getLogger(__name__)


class Command(FormulaCommand):
    help = '构造表列与带焦点跟踪的乘积博弈，输出胜者'

    def add_arguments(self, parser):
        parser.add_argument('expr', nargs='+', help='根相继式中的公式')
        parser.add_argument('--dump', help='把表列与乘积博弈的 JSON 写入该文件')
        parser.add_argument('--schedule', choices=SCHEDULES, help='表列主公式的选择顺序')
        super().add_arguments(parser)

    def handle(self, *args, **options):
        formulas = self.read_formulas(options['expr'], options)
        try:
            tableau = build_tableau(formulas, options.get('schedule'))
            game = solve_tableau_game(tableau)
        except MuCalcError as exc:
            self.input_error('表列构造失败', exc)

        product = product_to_json(game)
        if options.get('dump'):
            write_json_file(options['dump'], {'tableau': tableau_to_json(tableau), 'product': product})
        self.emit({
            'winner': product['winner'],
            'tableau_nodes': len(tableau),
            'positions': len(game.arena.positions),
        })
        if not game.prover_wins:
            self.summary('Refuter 获胜', ok=False)
            self.negative('Refuter 获胜')
        self.summary(f'Prover 获胜: 表列 {len(tableau)} 个节点, 乘积 {len(game.arena.positions)} 个位置')
