"""
Focus 证明系统
带焦点标注的相继式、推理规则、带回边的证明对象与证明检查，
以及证明迹、细化、反向闭包、单步模拟、展开和 JSON/LaTeX 导出
"""
import enum
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

import networkx as nx

from mucalc.formula import (
    And, Box, Dia, MuCalcError, NegProp, Or, Prop, Top, closure, is_fixpoint, order_key, parse,
    to_latex as formula_latex, to_text, unfold,
)

logger = logging.getLogger(__name__)

FOCUSED = 'f'
UNFOCUSED = 'u'
ANNOTATIONS = (FOCUSED, UNFOCUSED)


class RuleNotApplicable(MuCalcError):
    """规则的适用条件不满足"""
    pass


class ProofFormatError(MuCalcError):
    """证明 JSON 格式错误"""
    pass


class SimulationError(MuCalcError):
    """单步模拟的前提条件不满足"""
    pass


# ==================== 标注相继式 ====================

class Annotated(NamedTuple):
    """带焦点标注的公式 φ^a"""
    formula: object
    ann: str

    def __str__(self):
        return f'{to_text(self.formula)}^{self.ann}'


def annotate(formulas, ann=FOCUSED):
    """给一组公式统一加上标注"""
    return frozenset(Annotated(formula, ann) for formula in formulas)


def make_sequent(entries):
    """由 (公式或文本, 标注) 对构造标注相继式"""
    result = set()
    for formula, ann in entries:
        if isinstance(formula, str):
            formula = parse(formula, rename=False)
        if ann not in ANNOTATIONS:
            raise ValueError(f'未知标注: {ann}')
        result.add(Annotated(formula, ann))
    return frozenset(result)


def underlying(sequent):
    """去掉标注后的公式集合"""
    return frozenset(entry.formula for entry in sequent)


def is_focused(sequent):
    return any(entry.ann == FOCUSED for entry in sequent)


def entry_key(entry):
    return (order_key(entry.formula), entry.ann)


def sorted_entries(sequent):
    return sorted(sequent, key=entry_key)


def sequent_text(sequent):
    return ', '.join(str(entry) for entry in sorted_entries(sequent))


def _at_least(ann):
    """按 u ⊏ f 的序，不低于 ann 的标注"""
    return ANNOTATIONS if ann == UNFOCUSED else (FOCUSED,)


def _complementary(first, second):
    return (
        isinstance(first, Prop) and isinstance(second, NegProp) and first.name == second.name
        or isinstance(first, NegProp) and isinstance(second, Prop) and first.name == second.name
    )


# ==================== 规则 ====================

class Rule(enum.Enum):
    """证明节点的规则标签，Discharged 与 Assumption 只出现在叶子上"""
    AX1 = 'Ax1'
    AX2 = 'Ax2'
    OR = 'ROr'
    AND = 'RAnd'
    BOX = 'RBox'
    MU = 'RMu'
    NU = 'RNu'
    W = 'W'
    F = 'F'
    U = 'U'
    D = 'D'
    DISCHARGED = 'Discharged'
    ASSUMPTION = 'Assumption'


LEAF_RULES = frozenset((Rule.DISCHARGED, Rule.ASSUMPTION))
PRINCIPAL_RULES = frozenset((Rule.OR, Rule.AND, Rule.MU, Rule.NU, Rule.W, Rule.F, Rule.U))
PROGRESSIVE_RULES = frozenset((Rule.OR, Rule.AND, Rule.MU, Rule.NU))


def apply_rule(rule, conclusion, principal=None):
    """
    自下而上应用一条规则

    Args:
        rule: Rule
        conclusion: 结论相继式
        principal: 主公式 φ^a，Ax1/Ax2/RBox/D 不需要

    Returns:
        list: 前提相继式列表，轴公理返回空列表

    Raises:
        RuleNotApplicable: 结论形状或主公式不满足规则要求
    """
    conclusion = frozenset(conclusion)
    if rule is Rule.AX1:
        if len(conclusion) == 2:
            first, second = conclusion
            if _complementary(first.formula, second.formula):
                return []
        raise RuleNotApplicable('Ax1 要求结论恰为 {p^a, ¬p^b}')
    if rule is Rule.AX2:
        if len(conclusion) == 1 and isinstance(next(iter(conclusion)).formula, Top):
            return []
        raise RuleNotApplicable('Ax2 要求结论恰为 {⊤^a}')
    if rule is Rule.BOX:
        boxes = [entry for entry in conclusion if isinstance(entry.formula, Box)]
        if len(boxes) != 1:
            raise RuleNotApplicable(f'RBox 要求恰好一个 □ 公式，实际 {len(boxes)} 个')
        box = boxes[0]
        if principal is not None and principal != box:
            raise RuleNotApplicable(f'RBox 的主公式必须是 {box}')
        rest = conclusion - {box}
        if any(not isinstance(entry.formula, Dia) for entry in rest):
            raise RuleNotApplicable('RBox 的上下文只能含 ◇ 公式')
        premise = {Annotated(box.formula.body, box.ann)}
        premise.update(Annotated(entry.formula.body, entry.ann) for entry in rest)
        return [frozenset(premise)]
    if rule is Rule.D:
        return [conclusion]
    if rule in LEAF_RULES:
        raise RuleNotApplicable(f'{rule.value} 是叶子标签，没有前提')

    if principal is None or principal not in conclusion:
        raise RuleNotApplicable(f'{rule.value} 的主公式不在结论中')
    formula, ann = principal
    rest = conclusion - {principal}
    if rule is Rule.OR:
        if not isinstance(formula, Or):
            raise RuleNotApplicable(f'ROr 的主公式必须是析取: {principal}')
        return [rest | {Annotated(formula.left, ann), Annotated(formula.right, ann)}]
    if rule is Rule.AND:
        if not isinstance(formula, And):
            raise RuleNotApplicable(f'RAnd 的主公式必须是合取: {principal}')
        return [rest | {Annotated(formula.left, ann)}, rest | {Annotated(formula.right, ann)}]
    if rule is Rule.MU:
        if not (is_fixpoint(formula) and formula.tag == 'mu'):
            raise RuleNotApplicable(f'RMu 的主公式必须是 μ 公式: {principal}')
        # 展开后失去焦点
        return [rest | {Annotated(unfold(formula), UNFOCUSED)}]
    if rule is Rule.NU:
        if not (is_fixpoint(formula) and formula.tag == 'nu'):
            raise RuleNotApplicable(f'RNu 的主公式必须是 ν 公式: {principal}')
        return [rest | {Annotated(unfold(formula), ann)}]
    if rule is Rule.W:
        return [rest]
    if rule is Rule.F:
        if ann != UNFOCUSED:
            raise RuleNotApplicable(f'F 的主公式必须未聚焦: {principal}')
        return [rest | {Annotated(formula, FOCUSED)}]
    if ann != FOCUSED:
        raise RuleNotApplicable(f'U 的主公式必须已聚焦: {principal}')
    return [rest | {Annotated(formula, UNFOCUSED)}]


def match_rule(rule, conclusion, premises):
    """
    判断前提是否恰为规则作用于结论的结果

    Returns:
        (bool, principal): 匹配结果与推断出的主公式
    """
    premises = list(premises)
    if rule in PRINCIPAL_RULES:
        for candidate in sorted_entries(conclusion):
            try:
                if apply_rule(rule, conclusion, candidate) == premises:
                    return True, candidate
            except RuleNotApplicable:
                continue
        return False, None
    try:
        return apply_rule(rule, conclusion) == premises, None
    except RuleNotApplicable:
        return False, None


# ==================== 证明对象 ====================

@dataclass
class ProofTree:
    """
    可变的证明树，用于构造证明

    rule 为 None 的节点在转换为 Proof 时视为开放假设。
    """
    sequent: frozenset
    rule: Rule = None
    children: list = field(default_factory=list)
    token: str = None

    def expand(self, rule, principal=None):
        """应用规则并挂上前提节点，返回新的子节点"""
        self.rule = rule
        self.children = [ProofTree(premise) for premise in apply_rule(rule, self.sequent, principal)]
        return self.children

    def discharge(self, token):
        """把节点标记为记号叶子"""
        self.rule = Rule.DISCHARGED
        self.token = token
        self.children = []


@dataclass(frozen=True)
class ProofNode:
    sequent: frozenset
    rule: Rule
    parent: int = None
    companion: int = None
    token: str = None


class Violation(NamedTuple):
    """检查发现的问题：节点下标、条件编号与说明"""
    node: int
    condition: str
    message: str

    def to_json(self):
        return {'node': self.node, 'condition': self.condition, 'message': self.message}


class Proof:
    """
    有限循环证明

    节点按先序存储，parent 为父节点下标。记号叶子通过 companion
    指向带同名 D 规则的祖先节点。
    """

    def __init__(self, nodes):
        self.nodes = tuple(nodes)
        if not self.nodes:
            raise ProofFormatError('证明至少需要一个节点')
        self.children = [[] for _ in self.nodes]
        self.depth = [0] * len(self.nodes)
        path = []
        for index, node in enumerate(self.nodes):
            if index == 0:
                if node.parent is not None:
                    raise ProofFormatError('根节点不能有父节点')
                path = [0]
                continue
            if node.parent is None or not 0 <= node.parent < index:
                raise ProofFormatError(f'节点 {index} 的父节点下标不合法: {node.parent}')
            while path and path[-1] != node.parent:
                path.pop()
            if not path:
                raise ProofFormatError(f'节点 {index} 不符合先序排列')
            self.children[node.parent].append(index)
            self.depth[index] = self.depth[node.parent] + 1
            path.append(index)

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f'<Proof {len(self.nodes)} nodes>'

    @classmethod
    def from_tree(cls, tree):
        """先序展平 ProofTree，按路径上的 D 节点解析记号叶子的伙伴"""
        nodes = []
        stack = [(tree, None, {})]
        while stack:
            current, parent, active = stack.pop()
            index = len(nodes)
            rule = current.rule or Rule.ASSUMPTION
            companion = active.get(current.token) if rule is Rule.DISCHARGED else None
            nodes.append(ProofNode(current.sequent, rule, parent, companion, current.token))
            if rule is Rule.D:
                active = {**active, current.token: index}
            for child in reversed(current.children):
                stack.append((child, index, active))
        return cls(nodes)

    def to_tree(self):
        trees = [ProofTree(node.sequent, node.rule, [], node.token) for node in self.nodes]
        for index, node in enumerate(self.nodes):
            if node.parent is not None:
                trees[node.parent].children.append(trees[index])
        return trees[0]

    def sequent(self, index):
        return self.nodes[index].sequent

    def rule(self, index):
        return self.nodes[index].rule

    def is_ancestor(self, ancestor, node):
        """ancestor 是否是 node 的真祖先"""
        if self.depth[ancestor] >= self.depth[node]:
            return False
        while self.depth[node] > self.depth[ancestor]:
            node = self.nodes[node].parent
        return node == ancestor

    def path(self, top, bottom):
        """从祖先 top 到 bottom 的节点序列（含两端）"""
        result = [bottom]
        while result[-1] != top:
            parent = self.nodes[result[-1]].parent
            if parent is None:
                raise ValueError(f'{top} 不是 {bottom} 的祖先')
            result.append(parent)
        return result[::-1]

    def leaves(self):
        return [i for i, children in enumerate(self.children) if not children]

    def discharged_leaves(self):
        return [i for i, node in enumerate(self.nodes) if node.rule is Rule.DISCHARGED]

    def principal(self, index):
        """推断节点的主公式，无法推断时返回 None"""
        node = self.nodes[index]
        premises = [self.nodes[c].sequent for c in self.children[index]]
        return match_rule(node.rule, node.sequent, premises)[1]


def proof_size(proof):
    return len(proof.nodes)


# ==================== 证明检查 ====================

def _check_discharge(proof, index, companions):
    node = proof.nodes[index]
    if not node.token:
        return [Violation(index, '3', '记号叶子缺少记号')]
    candidates = companions.get(node.token, [])
    if len(candidates) != 1:
        return [Violation(index, '3', f'记号 {node.token} 对应 {len(candidates)} 个 D 节点')]
    companion = candidates[0]
    if node.companion is not None and node.companion != companion:
        return [Violation(index, '3', f'伙伴 {node.companion} 不是记号 {node.token} 的 D 节点')]
    if not proof.is_ancestor(companion, index) or proof.depth[index] - proof.depth[companion] < 2:
        return [Violation(index, '3', 'D 节点及其子节点必须是叶子的真祖先')]
    if proof.sequent(companion) != node.sequent:
        return [Violation(index, '3', '记号叶子与伙伴的相继式不同')]

    violations = []
    path = proof.path(companion, index)
    if any(proof.rule(k) in (Rule.F, Rule.U) for k in path):
        violations.append(Violation(index, '4a', '伙伴到叶子的路径上使用了 F 或 U'))
    if not any(proof.rule(k) is Rule.BOX for k in path):
        violations.append(Violation(index, '4b', '伙伴到叶子的路径上没有 RBox'))
    if not all(is_focused(proof.sequent(k)) for k in path):
        violations.append(Violation(index, '4c', '伙伴到叶子的路径上有节点没有聚焦公式'))
    return violations


def check_proof(proof, allow_assumptions=False):
    """
    检查证明

    Args:
        proof: Proof
        allow_assumptions: 为 True 时允许开放假设叶子

    Returns:
        list: Violation 列表，为空表示证明合法
    """
    violations = []
    companions = defaultdict(list)
    for index, node in enumerate(proof.nodes):
        if node.rule is Rule.D:
            companions[node.token].append(index)

    for index, node in enumerate(proof.nodes):
        children = proof.children[index]
        if not node.sequent:
            violations.append(Violation(index, '1', '相继式为空'))
        if node.rule in LEAF_RULES:
            if children:
                violations.append(Violation(index, '2', f'{node.rule.value} 节点必须是叶子'))
            if node.rule is Rule.DISCHARGED:
                violations.extend(_check_discharge(proof, index, companions))
            elif not allow_assumptions:
                violations.append(Violation(index, 'open', '存在开放假设'))
            continue
        if node.rule is Rule.D:
            if not node.token:
                violations.append(Violation(index, '3', 'D 节点缺少记号'))
            elif companions[node.token][0] != index:
                violations.append(Violation(index, '3', f'记号 {node.token} 被多个 D 节点使用'))
        premises = [proof.sequent(c) for c in children]
        matched, _ = match_rule(node.rule, node.sequent, premises)
        if not matched:
            violations.append(Violation(index, '1', f'前提与规则 {node.rule.value} 不符'))
    if violations:
        logger.debug(f'证明检查发现 {len(violations)} 处问题')
    return violations


# ==================== 细化与渐进性 ====================

def thinning(sequent):
    """去掉同时以两种标注出现的公式的未聚焦副本"""
    return frozenset(
        entry for entry in sequent
        if entry.ann == FOCUSED or Annotated(entry.formula, FOCUSED) not in sequent
    )


def is_thin_sequent(sequent):
    return thinning(sequent) == frozenset(sequent)


def thinning_steps(sequent):
    """需要用 W 去掉的未聚焦副本，按固定顺序排列"""
    return sorted_entries(frozenset(sequent) - thinning(sequent))


def is_thin(proof):
    """非细节点必须是去掉某个重复公式未聚焦副本的 W"""
    for index, node in enumerate(proof.nodes):
        duplicates = frozenset(node.sequent) - thinning(node.sequent)
        if not duplicates:
            continue
        if node.rule is not Rule.W or proof.principal(index) not in duplicates:
            return False
    return True


def is_progressive(proof):
    """布尔与不动点规则的主公式不出现在前提中"""
    for index, node in enumerate(proof.nodes):
        if node.rule not in PROGRESSIVE_RULES:
            continue
        principal = proof.principal(index)
        if principal is None:
            return False
        if any(principal in proof.sequent(c) for c in proof.children[index]):
            return False
    return True


# ==================== 焦点序与反向闭包 ====================

def more_focus(gamma, sigma):
    """Γ ⊑_F Σ：Γ 中每个 φ^a 在 Σ 中都有标注不低于 a 的副本"""
    return all(
        any(Annotated(entry.formula, b) in sigma for b in _at_least(entry.ann))
        for entry in gamma
    )


def _backward_step(formula, ann, members):
    for b in _at_least(ann):
        if b != ann and Annotated(formula, b) in members:
            return True
    if isinstance(formula, Or):
        return Annotated(formula.left, ann) in members and Annotated(formula.right, ann) in members
    if isinstance(formula, And):
        return Annotated(formula.left, ann) in members or Annotated(formula.right, ann) in members
    if is_fixpoint(formula):
        if formula.tag == 'mu':
            return Annotated(unfold(formula), UNFOCUSED) in members
        return Annotated(unfold(formula), ann) in members
    return False


def backwards_closure(sigma, within=()):
    """
    反向闭包 Q(Σ)

    在 Clos(Σ ∪ within) × {f, u} 内求 Γ ↦ Σ ∪ Q₀(Γ) 的最小不动点。

    Args:
        sigma: 标注公式集合
        within: 额外纳入考察范围的公式

    Returns:
        frozenset: Q(Σ)
    """
    sigma = frozenset(sigma)
    universe = sorted(closure(underlying(sigma) | frozenset(within)), key=order_key)
    members = set(sigma)
    changed = True
    while changed:
        changed = False
        for formula in universe:
            for ann in ANNOTATIONS:
                entry = Annotated(formula, ann)
                if entry not in members and _backward_step(formula, ann, members):
                    members.add(entry)
                    changed = True
    return frozenset(members)


# ==================== 单步模拟 ====================

def _weaken_to(tree, keep):
    """沿 W 链去掉 keep 之外的公式，返回链顶节点"""
    current = tree
    for entry in sorted_entries(current.sequent - keep):
        (current,) = current.expand(Rule.W, entry)
    return current


def _thin_out(tree):
    """沿 W 链做细化，返回链顶节点"""
    current = tree
    for entry in thinning_steps(current.sequent):
        (current,) = current.expand(Rule.W, entry)
    return current


def _find_entry(sequent, formula, ann):
    for b in (FOCUSED, UNFOCUSED):
        if b in _at_least(ann) and Annotated(formula, b) in sequent:
            return Annotated(formula, b)
    return None


def simulate_basic_step(basic, gamma):
    """
    用细且渐进的带假设证明模拟一步基本证明

    Args:
        basic: 基本证明，根节点之上只有开放假设叶子
        gamma: 细的标注相继式 Γ'，要求根相继式 Γ ⊆ Q(Γ')

    Returns:
        Proof: 以 Γ' 为根的带假设证明

    Raises:
        SimulationError: 前提条件不满足
    """
    gamma = frozenset(gamma)
    root = basic.nodes[0]
    if any(basic.rule(c) is not Rule.ASSUMPTION for c in basic.children[0]):
        raise SimulationError('输入不是基本证明')
    if not is_thin_sequent(gamma):
        raise SimulationError(f'Γ\' 不是细的: {sequent_text(gamma)}')
    if not root.sequent <= backwards_closure(gamma, underlying(root.sequent)):
        raise SimulationError('根相继式不包含在 Q(Γ\') 中')

    tree = ProofTree(gamma)
    rule = root.rule
    if rule in (Rule.AX1, Rule.AX2):
        keep = set()
        for entry in root.sequent:
            found = _find_entry(gamma, entry.formula, entry.ann)
            if found is None:
                raise SimulationError(f'Γ\' 中缺少 {entry}')
            keep.add(found)
        _weaken_to(tree, frozenset(keep)).expand(rule)
    elif rule in PROGRESSIVE_RULES:
        principal = basic.principal(0)
        found = _find_entry(gamma, principal.formula, principal.ann)
        if found is not None:
            for premise in tree.expand(rule, found):
                _thin_out(premise)
    elif rule is Rule.BOX:
        box = next(entry for entry in root.sequent if isinstance(entry.formula, Box))
        found = _find_entry(gamma, box.formula, box.ann)
        if found is None:
            raise SimulationError(f'Γ\' 中缺少 {box}')
        keep = {found} | {entry for entry in gamma if isinstance(entry.formula, Dia)}
        (premise,) = _weaken_to(tree, frozenset(keep)).expand(Rule.BOX)
        _thin_out(premise)
    elif rule is Rule.F:
        current = tree
        for entry in sorted_entries(gamma):
            if entry.ann == UNFOCUSED:
                (current,) = current.expand(Rule.F, entry)
    elif rule not in (Rule.W, Rule.U, Rule.D):
        raise SimulationError(f'无法模拟规则 {rule.value}')
    return Proof.from_tree(tree)


# ==================== 证明迹 ====================

ACTIVE = 'active'
PASSIVE = 'passive'


def edge_trail(proof, parent, child):
    """
    一条边上的迹关系

    child 可以是 parent 的子节点，也可以是记号叶子 parent 的伙伴。

    Returns:
        (active, passive): 两个 (φ^a, ψ^b) 对的集合
    """
    node = proof.nodes[parent]
    source = node.sequent
    if node.rule is Rule.DISCHARGED or node.rule is Rule.D:
        return frozenset(), frozenset((e, e) for e in source)
    if node.rule is Rule.BOX:
        active = frozenset(
            (entry, Annotated(entry.formula.body, entry.ann)) for entry in source
        )
        return active, frozenset()
    if node.rule not in PRINCIPAL_RULES:
        return frozenset(), frozenset()
    principal = proof.principal(parent)
    if principal is None:
        return frozenset(), frozenset()
    formula, ann = principal
    context = frozenset((e, e) for e in source - {principal})
    if node.rule is Rule.W:
        return frozenset(), context
    if node.rule is Rule.F:
        return frozenset(), context | {(principal, Annotated(formula, FOCUSED))}
    if node.rule is Rule.U:
        return frozenset(), context | {(principal, Annotated(formula, UNFOCUSED))}
    if node.rule is Rule.OR:
        targets = (Annotated(formula.left, ann), Annotated(formula.right, ann))
    elif node.rule is Rule.AND:
        side = formula.left if proof.children[parent].index(child) == 0 else formula.right
        targets = (Annotated(side, ann),)
    elif node.rule is Rule.MU:
        targets = (Annotated(unfold(formula), UNFOCUSED),)
    else:
        targets = (Annotated(unfold(formula), ann),)
    return frozenset((principal, target) for target in targets), context


def proof_trails(proof, path):
    """
    沿路径复合一般迹关系

    Args:
        path: 节点下标序列，相邻两项为父子边或记号叶子到伙伴的回边

    Returns:
        frozenset: (起点标注公式, 终点标注公式) 对
    """
    relation = frozenset((e, e) for e in proof.sequent(path[0]))
    for parent, child in zip(path, path[1:]):
        active, passive = edge_trail(proof, parent, child)
        step = defaultdict(set)
        for source, target in active | passive:
            step[source].add(target)
        relation = frozenset(
            (start, target) for start, middle in relation for target in step.get(middle, ())
        )
    return relation


def nu_trail_exists(proof, loop):
    """
    判断沿循环路径是否存在 ν-迹

    loop 为节点下标序列，末项经一条边（父子边或回边）回到首项。
    迹在循环上周期出现；不经过 μ 公式的主动步且至少含一个主动步的环即为 ν-迹。
    """
    graph = nx.DiGraph()
    length = len(loop)
    for i, node in enumerate(loop):
        following = loop[(i + 1) % length]
        active, passive = edge_trail(proof, node, following)
        for source, target in passive:
            graph.add_edge((i, source), ((i + 1) % length, target), active=False)
        for source, target in active:
            if is_fixpoint(source.formula) and source.formula.tag == 'mu':
                continue
            graph.add_edge((i, source), ((i + 1) % length, target), active=True)
    for component in nx.strongly_connected_components(graph):
        for u, v, is_active in graph.subgraph(component).edges(data='active'):
            if is_active:
                return True
    return False


# ==================== 展开 ====================

def unravel_prefix(proof, depth):
    """
    证明展开的有限前缀

    D 节点被省去，记号叶子沿回边继续展开，每条分支至多经过 depth 次回边；
    截断处的叶子标为开放假设。
    """
    root = ProofTree(proof.sequent(0))
    stack = [(0, root, 0)]
    while stack:
        index, tree, used = stack.pop()
        node = proof.nodes[index]
        if node.rule is Rule.D:
            stack.append((proof.children[index][0], tree, used))
            continue
        if node.rule is Rule.DISCHARGED:
            if used < depth and node.companion is not None:
                stack.append((proof.children[node.companion][0], tree, used + 1))
            else:
                tree.rule = Rule.ASSUMPTION
            continue
        tree.rule = node.rule
        for child in proof.children[index]:
            subtree = ProofTree(proof.sequent(child))
            tree.children.append(subtree)
            stack.append((child, subtree, used))
    return Proof.from_tree(root)


# ==================== JSON 与 LaTeX ====================

def sequent_to_json(sequent):
    return [[to_text(entry.formula), entry.ann] for entry in sorted_entries(sequent)]


def sequent_from_json(data):
    if not isinstance(data, list):
        raise ProofFormatError('seq 必须是列表')
    entries = []
    for item in data:
        if not isinstance(item, list) or len(item) != 2 or item[1] not in ANNOTATIONS:
            raise ProofFormatError(f'标注公式格式错误: {item!r}')
        try:
            entries.append(Annotated(parse(str(item[0]), rename=False), item[1]))
        except MuCalcError as exc:
            raise ProofFormatError(f'无法解析公式 {item[0]!r}: {exc}') from exc
    return frozenset(entries)


def proof_to_json(proof):
    """证明 JSON: {nodes: [{seq, rule, parent, companion, token}]}，节点按先序排列"""
    return {
        'nodes': [
            {
                'seq': sequent_to_json(node.sequent),
                'rule': node.rule.value,
                'parent': node.parent,
                'companion': node.companion,
                'token': node.token,
            }
            for node in proof.nodes
        ]
    }


def proof_from_json(data):
    """从 JSON 数据构造证明，格式错误时抛出 ProofFormatError"""
    if not isinstance(data, dict) or not isinstance(data.get('nodes'), list):
        raise ProofFormatError('证明 JSON 必须是含 nodes 列表的对象')
    rules = {rule.value: rule for rule in Rule}
    nodes = []
    for index, item in enumerate(data['nodes']):
        if not isinstance(item, dict):
            raise ProofFormatError(f'节点 {index} 必须是对象')
        rule = rules.get(item.get('rule'))
        if rule is None:
            raise ProofFormatError(f'节点 {index} 的规则未知: {item.get("rule")!r}')
        parent, companion, token = item.get('parent'), item.get('companion'), item.get('token')
        for name, value in (('parent', parent), ('companion', companion)):
            if value is not None and not isinstance(value, int):
                raise ProofFormatError(f'节点 {index} 的 {name} 必须是整数或 null')
        if token is not None and not isinstance(token, str):
            raise ProofFormatError(f'节点 {index} 的 token 必须是字符串或 null')
        if companion is not None and not 0 <= companion < len(data['nodes']):
            raise ProofFormatError(f'节点 {index} 的伙伴下标越界: {companion}')
        nodes.append(ProofNode(sequent_from_json(item.get('seq')), rule, parent, companion, token))
    return Proof(nodes)


_LATEX_RULES = {
    Rule.AX1: r'\mathsf{Ax1}', Rule.AX2: r'\mathsf{Ax2}', Rule.OR: r'\mathsf{R}_{\lor}',
    Rule.AND: r'\mathsf{R}_{\land}', Rule.BOX: r'\mathsf{R}_{\Box}', Rule.MU: r'\mathsf{R}_{\mu}',
    Rule.NU: r'\mathsf{R}_{\nu}', Rule.W: r'\mathsf{W}', Rule.F: r'\mathsf{F}', Rule.U: r'\mathsf{U}',
}


def sequent_latex(sequent):
    return ', '.join(
        f'{{{formula_latex(entry.formula)}}}^{{{entry.ann}}}' for entry in sorted_entries(sequent)
    )


def to_latex(proof):
    """bussproofs 格式的 LaTeX"""
    lines = []

    def emit(index):
        node = proof.nodes[index]
        text = sequent_latex(node.sequent)
        if node.rule is Rule.DISCHARGED:
            lines.append(rf'\AxiomC{{$[{text}]^{{{node.token}}}$}}')
            return
        if node.rule is Rule.ASSUMPTION:
            lines.append(rf'\AxiomC{{${text}$}}')
            return
        children = proof.children[index]
        for child in children:
            emit(child)
        if not children:
            lines.append(r'\AxiomC{}')
        label = rf'\mathsf{{D}}^{{{node.token}}}' if node.rule is Rule.D else _LATEX_RULES[node.rule]
        lines.append(rf'\RightLabel{{${label}$}}')
        inference = {0: 'UnaryInfC', 1: 'UnaryInfC', 2: 'BinaryInfC'}[len(children)]
        lines.append(rf'\{inference}{{${text}$}}')

    emit(0)
    return '\n'.join([r'\begin{prooftree}', *lines, r'\end{prooftree}']) + '\n'
