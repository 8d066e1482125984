"""
表列与表列博弈
图表列的构造、表列迹与收紧、带焦点跟踪的乘积博弈及其求解，
以及由 Refuter 胜策略提取反模型
"""
import enum
import logging
from collections import deque
from dataclasses import dataclass

from mucalc.conf import focus_setting
from mucalc.formula import (
    And, Box, Dia, Fixpoint, MuCalcError, NegProp, Or, Prop, TOP, TraceError, TraceLasso,
    classify_trace, is_atomic, is_fixpoint, is_modal, order_key, require_fragment, sort_formulas,
    to_text, unfold,
)
from mucalc.games import CoBuchi, GameArena, Player, solve
from mucalc.semantics import KripkeModel

from .proofs import ACTIVE, PASSIVE

logger = logging.getLogger(__name__)


class TableauError(MuCalcError):
    """表列构造或求解失败"""
    pass


class TableauRule(enum.Enum):
    AX1 = 'Ax1'
    AX2 = 'Ax2'
    OR = 'ROr'
    AND = 'RAnd'
    MU = 'RMu'
    NU = 'RNu'
    MODAL = 'M'


SCHEDULES = ('least', 'greatest')


# ==================== 表列 ====================

@dataclass
class Tableau:
    """
    图表列

    Attributes:
        sequents: 节点 -> 公式集合，节点编号即下标，0 为根
        rules: 节点 -> TableauRule
        principals: 节点 -> 主公式（M 节点为 None）
        premises: 节点 -> 前提节点元组，顺序即规则前提的顺序
    """
    sequents: list
    rules: list
    principals: list
    premises: list
    schedule: str = 'least'

    initial = 0

    def __len__(self):
        return len(self.sequents)

    def edges(self):
        return [(u, v) for u, targets in enumerate(self.premises) for v in targets]


def choose_rule(sequent, schedule='least'):
    """
    按规则选择策略确定节点的规则

    轴公理优先，其次按调度顺序选取非原子非模态的主公式，最后是 M。

    Returns:
        (TableauRule, principal, premises): premises 为公式集合列表
    """
    if TOP in sequent:
        return TableauRule.AX2, TOP, []
    for formula in sort_formulas(sequent):
        if isinstance(formula, Prop) and NegProp(formula.name) in sequent:
            return TableauRule.AX1, formula, []
    candidates = [f for f in sequent if not is_atomic(f) and not is_modal(f)]
    if candidates:
        pick = min if schedule == 'least' else max
        principal = pick(candidates, key=order_key)
        context = sequent - {principal}
        if isinstance(principal, Or):
            return TableauRule.OR, principal, [context | {principal.left, principal.right}]
        if isinstance(principal, And):
            return TableauRule.AND, principal, [context | {principal.left}, context | {principal.right}]
        rule = TableauRule.MU if principal.fixpoint is Fixpoint.MU else TableauRule.NU
        return rule, principal, [context | {unfold(principal)}]
    diamonds = frozenset(f.body for f in sequent if isinstance(f, Dia))
    boxes = sort_formulas(f for f in sequent if isinstance(f, Box))
    return TableauRule.MODAL, None, [diamonds | {box.body} for box in boxes]


def build_tableau(formulas, schedule=None):
    """
    构造图表列

    相同的公式集合共享一个节点；规则选择只依赖公式集合与调度顺序。

    Args:
        formulas: 根相继式，须为有守卫的交替自由公式
        schedule: 'least' 或 'greatest'，默认取配置 TABLEAU_SCHEDULE

    Returns:
        Tableau
    """
    root = frozenset(formulas)
    if not root:
        raise TableauError('根相继式不能为空')
    require_fragment(root)
    schedule = schedule or focus_setting('TABLEAU_SCHEDULE')
    if schedule not in SCHEDULES:
        raise TableauError(f'未知的调度顺序: {schedule}')
    limit = focus_setting('MAX_PRODUCT_POSITIONS')

    index = {root: 0}
    tableau = Tableau([root], [], [], [], schedule)
    pending = deque([root])
    while pending:
        sequent = pending.popleft()
        rule, principal, premise_sets = choose_rule(sequent, schedule)
        targets = []
        for premise in premise_sets:
            premise = frozenset(premise)
            if premise not in index:
                if len(index) >= limit:
                    raise TableauError(f'表列节点数超过上限 {limit}')
                index[premise] = len(tableau.sequents)
                tableau.sequents.append(premise)
                pending.append(premise)
            targets.append(index[premise])
        tableau.rules.append(rule)
        tableau.principals.append(principal)
        tableau.premises.append(tuple(targets))
    logger.info(f'表列构造完成: {len(tableau)} 个节点, 调度 {schedule}')
    return tableau


def tableau_to_json(tableau):
    """表列 JSON: 节点、规则、主公式与按前提顺序排列的边"""
    return {
        'initial': tableau.initial,
        'schedule': tableau.schedule,
        'nodes': [
            {
                'id': node,
                'seq': [to_text(f) for f in sort_formulas(sequent)],
                'rule': tableau.rules[node].value,
                'principal': None if tableau.principals[node] is None else to_text(tableau.principals[node]),
            }
            for node, sequent in enumerate(tableau.sequents)
        ],
        'edges': [[u, v] for u, v in tableau.edges()],
    }


# ==================== 表列迹 ====================

def premise_trail(tableau, node, position):
    """
    第 position 个前提边上的迹关系

    Returns:
        frozenset: (φ, ψ, tag) 三元组，tag 为 'active' 或 'passive'
    """
    rule = tableau.rules[node]
    sequent = tableau.sequents[node]
    principal = tableau.principals[node]
    if rule in (TableauRule.AX1, TableauRule.AX2):
        return frozenset()
    if rule is TableauRule.MODAL:
        boxes = sort_formulas(f for f in sequent if isinstance(f, Box))
        steps = {(boxes[position], boxes[position].body, ACTIVE)}
        steps.update((f, f.body, ACTIVE) for f in sequent if isinstance(f, Dia))
        return frozenset(steps)
    steps = {(f, f, PASSIVE) for f in sequent if f is not principal}
    if rule is TableauRule.OR:
        steps.update(((principal, principal.left, ACTIVE), (principal, principal.right, ACTIVE)))
    elif rule is TableauRule.AND:
        side = principal.left if position == 0 else principal.right
        steps.add((principal, side, ACTIVE))
    else:
        steps.add((principal, unfold(principal), ACTIVE))
    return frozenset(steps)


def tableau_trail_step(tableau, node, target):
    """边 node → target 上的迹关系（同一目标的多个前提取并集）"""
    steps = set()
    for position, successor in enumerate(tableau.premises[node]):
        if successor == target:
            steps |= premise_trail(tableau, node, position)
    return frozenset(steps)


@dataclass(frozen=True)
class TightTrail:
    """收紧后的迹：只保留作为主动步目标的公式"""
    prefix: tuple
    loop: tuple

    def lasso(self):
        return TraceLasso(self.prefix, self.loop)


def tighten(prefix, loop):
    """
    收紧套索形的迹

    Args:
        prefix: (公式, 进入该公式的步类型) 序列，首项的步类型忽略
        loop: 同上，循环首项的步类型指从循环末项回到首项的那一步

    Raises:
        TraceError: 循环上没有主动步，收紧后不是无穷迹
    """
    items = list(prefix)
    tight_prefix = [formula for i, (formula, tag) in enumerate(items) if i == 0 or tag == ACTIVE]
    tight_loop = [formula for formula, tag in loop if tag == ACTIVE]
    if not tight_loop:
        raise TraceError('循环上没有主动步，收紧后的迹是有穷的')
    return TightTrail(tuple(tight_prefix), tuple(tight_loop))


def is_nu_trail(prefix, loop):
    """收紧后的循环是否为 ν-迹"""
    return classify_trace(tighten(prefix, loop).lasso()) is Fixpoint.NU


# ==================== 乘积博弈 ====================

_OWNERS = {
    TableauRule.AX1: Player.FORALL,
    TableauRule.AX2: Player.FORALL,
    TableauRule.AND: Player.FORALL,
    TableauRule.MODAL: Player.EXISTS,
}


def advance(tableau, position, index):
    """
    乘积位置沿第 index 个前提前进一步

    焦点集合沿迹关系传递，μ 公式的主动步不传递焦点；
    焦点集合变空时重置为整个前提并记一次重置。
    """
    node, focus, _ = position
    target = tableau.premises[node][index]
    following = frozenset(
        target_formula
        for source, target_formula, tag in premise_trail(tableau, node, index)
        if source in focus and not (tag == ACTIVE and is_fixpoint(source) and source.fixpoint is Fixpoint.MU)
    )
    if not following:
        return (target, tableau.sequents[target], True)
    return (target, following, False)


def tableau_game(tableau):
    """
    表列与焦点跟踪器的乘积博弈

    位置为 (节点, 焦点集合, 是否重置)。Prover 作为 Exists 拥有 M 节点，
    Refuter 作为 Forall 拥有 Ax1/Ax2/RAnd 节点；Prover 的条件是只重置有限次。

    Returns:
        GameArena
    """
    limit = focus_setting('MAX_PRODUCT_POSITIONS')
    initial = (tableau.initial, tableau.sequents[tableau.initial], False)
    positions = [initial]
    seen = {initial}
    moves = {}
    owner = {}
    pending = deque([initial])
    while pending:
        position = pending.popleft()
        rule = tableau.rules[position[0]]
        if rule in _OWNERS:
            owner[position] = _OWNERS[rule]
        successors = []
        for index in range(len(tableau.premises[position[0]])):
            successor = advance(tableau, position, index)
            successors.append(successor)
            if successor not in seen:
                if len(seen) >= limit:
                    raise TableauError(f'乘积博弈位置数超过上限 {limit}')
                seen.add(successor)
                positions.append(successor)
                pending.append(successor)
        moves[position] = successors
    resets = frozenset(p for p in positions if p[2])
    return GameArena(positions, moves, owner, initial, CoBuchi(resets))


@dataclass
class TableauGame:
    """乘积博弈的求解结果"""
    tableau: Tableau
    arena: GameArena
    solution: object

    @property
    def winner(self):
        return self.solution.winner()

    @property
    def prover_wins(self):
        return self.winner is Player.EXISTS

    def strategy(self, player):
        return self.solution.strategies[player]


def solve_tableau_game(tableau):
    """求解乘积博弈，返回根处的胜者与双方位置策略"""
    arena = tableau_game(tableau)
    solution = solve(arena)
    logger.info(
        f'表列博弈求解完成: {len(arena.positions)} 个乘积位置, '
        f'胜者 {"Prover" if solution.winner() is Player.EXISTS else "Refuter"}'
    )
    return TableauGame(tableau, arena, solution)


def _position_name(position):
    node, focus, reset = position
    text = ','.join(sorted(to_text(f) for f in focus))
    return f'{node}|{text}|{"reset" if reset else "-"}'


def product_to_json(game):
    """乘积博弈场地的 JSON 导出"""
    data = game.arena.to_json(_position_name)
    data['winner'] = 'prover' if game.prover_wins else 'refuter'
    return data


# ==================== 反模型 ====================

def _forced_move(arena, strategy, position):
    moves = arena.moves[position]
    if len(moves) == 1:
        return moves[0]
    return strategy.move(position)


def extract_countermodel(game):
    """
    由 Refuter 的位置胜策略构造反模型

    每个状态是初始位置或某个 M 位置的后继；从状态出发沿强制步与 Refuter 的选择
    走到 M 位置，该 M 位置的全部后继即状态的后继。
    命题字母 p 在状态上为真当且仅当 p 不在所到 M 节点的相继式中。

    Returns:
        (KripkeModel, world): 指定世界为 s0
    """
    arena = game.arena
    if game.prover_wins:
        raise TableauError('Prover 获胜，不存在反模型')
    strategy = game.strategy(Player.FORALL)
    region = game.solution.regions[Player.FORALL]
    letters = set()
    for formula in game.tableau.sequents[game.tableau.initial]:
        letters |= formula.free

    states = [arena.initial]
    state_index = {arena.initial: 0}
    modal = []
    pending = deque([arena.initial])
    while pending:
        position = pending.popleft()
        visited = set()
        while game.tableau.rules[position[0]] is not TableauRule.MODAL:
            if position in visited or position not in region:
                raise TableauError('Refuter 策略没有到达模态节点')
            visited.add(position)
            position = _forced_move(arena, strategy, position)
            if position is None:
                raise TableauError('Refuter 策略在其胜区内没有给出走法')
        modal.append(position)
        for successor in arena.moves[position]:
            if successor not in region:
                raise TableauError('Refuter 策略不是必胜的')
            if successor not in state_index:
                state_index[successor] = len(states)
                states.append(successor)
                pending.append(successor)

    worlds = [f's{i}' for i in range(len(states))]
    rel = []
    val = {letter: [] for letter in sorted(letters)}
    for i, position in enumerate(modal):
        for successor in arena.moves[position]:
            rel.append((worlds[i], worlds[state_index[successor]]))
        sequent = game.tableau.sequents[position[0]]
        for letter in letters:
            if Prop(letter) not in sequent:
                val[letter].append(worlds[i])
    model = KripkeModel(worlds, rel, val)
    logger.info(f'反模型提取完成: {len(worlds)} 个世界')
    return model, worlds[0]
