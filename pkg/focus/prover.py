"""
判定过程
求解带焦点跟踪的表列博弈；Prover 获胜时按其策略构造有限循环 Focus 证明，
Refuter 获胜时给出反模型。两种结论都在返回前独立复核。
"""
import logging
from dataclasses import dataclass

from mucalc.formula import Box, Dia, MuCalcError, NegProp, TOP, to_text
from mucalc.games import Player
from mucalc.semantics import denote, model_to_json

from .proofs import (
    FOCUSED, UNFOCUSED, Annotated, Proof, ProofTree, Rule, check_proof, is_focused,
    proof_to_json, sorted_entries, thinning_steps,
)
from .tableaux import TableauRule, advance, build_tableau, extract_countermodel, solve_tableau_game

logger = logging.getLogger(__name__)


class ProverError(MuCalcError):
    """证明构造或结论复核失败"""
    pass


@dataclass
class Valid:
    """相继式可证，附 Focus 证明"""
    proof: Proof

    valid = True

    def to_json(self):
        return {'verdict': 'VALID', 'proof': proof_to_json(self.proof)}


@dataclass
class Invalid:
    """相继式不可证，附使所有公式为假的点模型"""
    model: object
    world: str

    valid = False

    def to_json(self):
        return {'verdict': 'INVALID', 'model': model_to_json(self.model), 'world': self.world}


_PROOF_RULES = {
    TableauRule.OR: Rule.OR,
    TableauRule.AND: Rule.AND,
    TableauRule.MU: Rule.MU,
    TableauRule.NU: Rule.NU,
}


def annotated_sequent(tableau, position):
    """乘积位置对应的标注相继式：焦点集合中的公式标 f，其余标 u"""
    node, focus, _ = position
    return frozenset(
        Annotated(formula, FOCUSED if formula in focus else UNFOCUSED)
        for formula in tableau.sequents[node]
    )


@dataclass
class _Segment:
    """两个主节点之间的一段路径的性质"""
    uses_focus_rule: bool
    has_box: bool
    focused: bool


class _Branch:
    """一条分支上的主节点：(标注相继式, 树节点, 到下一主节点的路段)"""

    def __init__(self, entries=()):
        self.entries = list(entries)

    def extend(self, sequent, tree, segment):
        return _Branch(self.entries + [(sequent, tree, segment)])

    def companion_for(self, sequent):
        """离根最近的、到当前节点的路径满足回边条件的同相继式祖先"""
        uses_focus_rule, has_box, focused = False, False, True
        found = None
        for ancestor, tree, segment in reversed(self.entries):
            uses_focus_rule |= segment.uses_focus_rule
            has_box |= segment.has_box
            focused &= segment.focused
            if ancestor == sequent and not uses_focus_rule and has_box and focused:
                found = tree
        return found


class _ProofBuilder:
    """沿 Prover 策略构造证明树"""

    def __init__(self, game, strategy):
        self.game = game
        self.tableau = game.tableau
        self.arena = game.arena
        self.strategy = strategy
        self.tokens = 0
        self.bound = len(self.arena.positions) + 1

    def _weaken(self, tree, keep, trail):
        for entry in sorted_entries(tree.sequent - keep):
            trail.append(tree)
            (tree,) = tree.expand(Rule.W, entry)
        return tree

    def _normalise(self, tree, position, trail):
        """细化，若后继是重置位置再用 F 全部聚焦；返回下一个主节点"""
        for entry in thinning_steps(tree.sequent):
            trail.append(tree)
            (tree,) = tree.expand(Rule.W, entry)
        if position[2]:
            for entry in sorted_entries(tree.sequent):
                if entry.ann == UNFOCUSED:
                    trail.append(tree)
                    (tree,) = tree.expand(Rule.F, entry)
        if tree.sequent != annotated_sequent(self.tableau, position):
            raise ProverError('构造出的相继式与乘积位置不一致')
        return tree

    def _close_axiom(self, tree, node):
        rule = self.tableau.rules[node]
        principal = self.tableau.principals[node]
        if rule is TableauRule.AX2:
            formulas = {TOP}
        else:
            formulas = {principal, NegProp(principal.name)}
        keep = frozenset(entry for entry in tree.sequent if entry.formula in formulas)
        top = self._weaken(tree, keep, [])
        top.expand(Rule.AX1 if rule is TableauRule.AX1 else Rule.AX2)

    def _chosen_premise(self, position):
        moves = self.arena.moves[position]
        if not moves:
            raise ProverError('Prover 在没有 □ 公式的模态节点上无路可走')
        choice = moves[0] if len(moves) == 1 else self.strategy.move(position)
        for index in range(len(self.tableau.premises[position[0]])):
            if advance(self.tableau, position, index) == choice:
                return index
        raise ProverError('策略给出的走法不是合法的后继')

    def _expand(self, position, tree):
        """
        在主节点上模拟表列规则

        Returns:
            list: (后继位置, 上一路段经过的节点, 是否经过 RBox, 下一主节点)
        """
        node = position[0]
        rule = self.tableau.rules[node]
        sequent = tree.sequent
        if rule in (TableauRule.AX1, TableauRule.AX2):
            self._close_axiom(tree, node)
            return []
        if rule is TableauRule.MODAL:
            index = self._chosen_premise(position)
            boxes = sorted(
                (e for e in sequent if isinstance(e.formula, Box)), key=lambda e: e.formula.order_key
            )
            box = boxes[index]
            keep = frozenset({box} | {e for e in sequent if isinstance(e.formula, Dia)})
            trail = []
            top = self._weaken(tree, keep, trail)
            trail.append(top)
            (premise,) = top.expand(Rule.BOX)
            successor = advance(self.tableau, position, index)
            following = self._normalise(premise, successor, trail)
            return [(successor, trail, True, following)]

        principal = self.tableau.principals[node]
        focus = position[1]
        entry = Annotated(principal, FOCUSED if principal in focus else UNFOCUSED)
        premises = tree.expand(_PROOF_RULES[rule], entry)
        result = []
        for index, premise in enumerate(premises):
            trail = [tree]
            successor = advance(self.tableau, position, index)
            following = self._normalise(premise, successor, trail)
            result.append((successor, trail, False, following))
        return result

    def _discharge(self, companion, leaf):
        if companion.rule is not Rule.D:
            token = f'x{self.tokens}'
            self.tokens += 1
            inner = ProofTree(companion.sequent, companion.rule, companion.children, companion.token)
            companion.rule = Rule.D
            companion.children = [inner]
            companion.token = token
        leaf.discharge(companion.token)

    def build(self):
        initial = self.arena.initial
        root = ProofTree(annotated_sequent(self.tableau, initial))
        stack = [(initial, root, _Branch())]
        while stack:
            position, tree, branch = stack.pop()
            if len(branch.entries) > self.bound:
                raise ProverError('分支长度超过乘积博弈位置数，未找到可回指的祖先')
            for successor, trail, has_box, following in reversed(self._expand(position, tree)):
                segment = _Segment(
                    uses_focus_rule=any(t.rule in (Rule.F, Rule.U) for t in trail),
                    has_box=has_box,
                    focused=all(is_focused(t.sequent) for t in trail),
                )
                extended = branch.extend(tree.sequent, tree, segment)
                companion = extended.companion_for(following.sequent)
                if companion is not None:
                    self._discharge(companion, following)
                else:
                    stack.append((successor, following, extended))
        return root


def strategy_to_cyclic_proof(game, strategy=None):
    """
    由 Prover 的位置胜策略构造有限循环证明

    在每个主节点上模拟表列规则，随后用 W 细化；后继为重置位置时用 F
    把整个相继式聚焦。主节点与某个祖先主节点的标注相继式相同，且其间
    没有 F/U、至少有一次 RBox、全程有聚焦公式时，以该祖先为伙伴回指。

    Returns:
        Proof
    """
    strategy = strategy or game.strategy(Player.EXISTS)
    root = _ProofBuilder(game, strategy).build()
    proof = Proof.from_tree(root)
    logger.info(f'循环证明构造完成: {len(proof)} 个节点')
    return proof


def decide(formulas, schedule=None):
    """
    判定相继式

    Args:
        formulas: 公式序列，须为有守卫的交替自由公式
        schedule: 表列调度顺序，默认取配置

    Returns:
        Valid 或 Invalid

    Raises:
        ProverError: 构造出的证明未通过检查，或反模型没有否定相继式
    """
    formulas = list(formulas)
    tableau = build_tableau(formulas, schedule)
    game = solve_tableau_game(tableau)
    if game.prover_wins:
        proof = strategy_to_cyclic_proof(game)
        violations = check_proof(proof)
        if violations:
            first = violations[0]
            raise ProverError(f'构造出的证明未通过检查: 节点 {first.node} 条件 {first.condition}')
        return Valid(proof)

    model, world = extract_countermodel(game)
    for formula in formulas:
        if world in denote(formula, model):
            raise ProverError(f'反模型没有否定 {to_text(formula)}')
    return Invalid(model, world)
