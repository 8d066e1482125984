"""
Craig 插值
由带划分的 Focus 证明计算插值公式：诱导逐节点划分、平衡化、
连通类与不动点着色、逐节点插值，以及对结果的完整复核
"""
import logging
from dataclasses import dataclass

import networkx as nx

from mucalc.conf import focus_setting
from mucalc.formula import (
    BOTTOM, TOP, And, Bottom, Box, Dia, Fixpoint, MuCalcError, Or, Prop, Top, binder,
    boolean_dual, in_noetherian, is_alternation_free, is_fixpoint, negation, swap_literals, to_text,
    unfold,
)

from .proofs import (
    FOCUSED, UNFOCUSED, Annotated, Proof, ProofTree, Rule, check_proof, is_focused, sequent_text,
)
from .prover import decide

logger = logging.getLogger(__name__)

TRANSPARENT = '✓'


class InterpolationError(MuCalcError):
    """插值失败；蕴涵不成立时附带反模型"""

    def __init__(self, message, model=None, world=None):
        super().__init__(message)
        self.model = model
        self.world = world


class ColouringError(MuCalcError):
    """连通类两侧都没有一致的聚焦公式，无法着色"""
    pass


# ==================== 逐节点划分 ====================

@dataclass(frozen=True)
class NodewisePartition:
    """
    逐节点划分

    Attributes:
        proof: Proof
        left: 节点 -> 左侧标注相继式，右侧为相继式中的其余部分
    """
    proof: Proof
    left: tuple

    def right(self, index):
        return self.proof.sequent(index) - self.left[index]

    def split(self, index):
        return self.left[index], self.right(index)

    def is_balanced(self):
        """每个记号叶子的划分与其伙伴的划分相同"""
        return all(
            self.left[leaf] == self.left[self.proof.nodes[leaf].companion]
            for leaf in self.proof.discharged_leaves()
        )


def _residuals(rule, principal, position):
    """规则在第 position 个前提中产生的公式"""
    formula, ann = principal
    if rule is Rule.OR:
        return {Annotated(formula.left, ann), Annotated(formula.right, ann)}
    if rule is Rule.AND:
        return {Annotated(formula.left if position == 0 else formula.right, ann)}
    if rule is Rule.MU:
        return {Annotated(unfold(formula), UNFOCUSED)}
    if rule is Rule.NU:
        return {Annotated(unfold(formula), ann)}
    if rule is Rule.F:
        return {Annotated(formula, FOCUSED)}
    if rule is Rule.U:
        return {Annotated(formula, UNFOCUSED)}
    return set()


def premise_splits(proof, index, left):
    """
    按规则把节点的划分传到各前提

    主公式在哪一侧，它在前提中产生的公式就归哪一侧；
    RBox 的前提按 □ 公式所在的一侧归属其体。

    Returns:
        list: 每个前提的左侧相继式
    """
    node = proof.nodes[index]
    children = proof.children[index]
    if not children:
        return []
    if node.rule is Rule.D:
        return [left]
    if node.rule is Rule.BOX:
        box = next(entry for entry in node.sequent if isinstance(entry.formula, Box))
        body = Annotated(box.formula.body, box.ann)
        bodies = frozenset(Annotated(entry.formula.body, entry.ann) for entry in left if entry != box)
        if box in left:
            return [bodies | {body}]
        return [bodies - {body}]

    principal = proof.principal(index)
    if principal is None:
        raise InterpolationError(f'无法确定节点 {index} 的主公式')
    rest = left - {principal}
    splits = []
    for position, _ in enumerate(children):
        produced = _residuals(node.rule, principal, position)
        splits.append(frozenset(rest | produced if principal in left else rest - produced))
    return splits


def induce_partition(proof, left_root):
    """
    由根相继式的划分自上而下诱导逐节点划分

    Args:
        proof: Proof
        left_root: 根相继式中划入左侧的标注公式

    Returns:
        NodewisePartition
    """
    left_root = frozenset(left_root)
    if not left_root <= proof.sequent(0):
        raise InterpolationError('根划分的左侧不是根相继式的子集')
    left = [None] * len(proof)
    left[0] = left_root
    # 先序排列保证父节点先于子节点
    for index in range(len(proof)):
        for child, split in zip(proof.children[index], premise_splits(proof, index, left[index])):
            left[child] = split
    return NodewisePartition(proof, tuple(left))


# ==================== 平衡化 ====================

@dataclass
class _Visit:
    """展开路径上的一个节点"""
    tree: ProofTree
    left: frozenset
    rule: Rule


def _cut_point(path, sequent, left):
    """路径上离根最近的、可以把当前叶子回指过去的祖先"""
    has_box, clean, focused = False, True, is_focused(sequent)
    found = None
    for depth in range(len(path) - 1, -1, -1):
        visit = path[depth]
        has_box |= visit.rule is Rule.BOX
        clean &= visit.rule not in (Rule.F, Rule.U)
        focused &= is_focused(visit.tree.sequent)
        if (
            visit.tree.sequent == sequent and visit.left == left
            and has_box and clean and focused
        ):
            found = visit
    return found


def balance(proof, partition):
    """
    把逐节点划分平衡化

    已平衡时原样返回。否则沿回边展开证明并同时传递划分，
    在记号叶子的副本处寻找相继式与划分都相同、且路径满足回指条件的祖先，
    在那里重新放置 D 规则。

    Returns:
        (Proof, NodewisePartition)

    Raises:
        InterpolationError: 展开规模超过 MAX_BALANCE_NODES，或结果不平衡
    """
    if partition.is_balanced():
        return proof, partition
    limit = focus_setting('MAX_BALANCE_NODES')
    root = ProofTree(proof.sequent(0))
    tokens = 0
    created = 1
    stack = [(0, root, partition.left[0], [])]
    while stack:
        index, tree, left, path = stack.pop()
        node = proof.nodes[index]
        if node.rule is Rule.D:
            stack.append((proof.children[index][0], tree, left, path))
            continue
        if node.rule is Rule.DISCHARGED:
            target = _cut_point(path, tree.sequent, left)
            if target is None:
                stack.append((proof.children[node.companion][0], tree, left, path))
                continue
            companion = target.tree
            if companion.rule is not Rule.D:
                inner = ProofTree(companion.sequent, companion.rule, companion.children, companion.token)
                companion.rule = Rule.D
                companion.children = [inner]
                companion.token = f'x{tokens}'
                tokens += 1
            tree.discharge(companion.token)
            continue

        tree.rule = node.rule
        extended = path + [_Visit(tree, left, node.rule)]
        pending = []
        for child, split in zip(proof.children[index], premise_splits(proof, index, left)):
            created += 1
            if created > limit:
                raise InterpolationError(f'平衡化展开的节点数超过上限 {limit}')
            subtree = ProofTree(proof.sequent(child))
            tree.children.append(subtree)
            pending.append((child, subtree, split, extended))
        stack.extend(reversed(pending))

    balanced = Proof.from_tree(root)
    result = induce_partition(balanced, partition.left[0])
    if check_proof(balanced, allow_assumptions=True) or not result.is_balanced():
        raise InterpolationError('平衡化后的证明不合法或仍不平衡')
    logger.info(f'平衡化完成: {len(proof)} -> {len(balanced)} 个节点')
    return balanced, result


# ==================== 连通类与着色 ====================

def connectedness_classes(proof):
    """
    连通类：共享某个伙伴到叶子区间的节点属于同一类

    Returns:
        list: 节点下标的 frozenset 列表，不在任何区间上的节点不出现
    """
    graph = nx.Graph()
    for leaf in proof.discharged_leaves():
        interval = proof.path(proof.nodes[leaf].companion, leaf)
        graph.add_nodes_from(interval)
        graph.add_edges_from(zip(interval, interval[1:]))
    return [frozenset(component) for component in nx.connected_components(graph)]


@dataclass(frozen=True)
class FixpointColouring:
    """
    不动点着色

    Attributes:
        colour: 节点 -> Fixpoint.MU / Fixpoint.NU / TRANSPARENT
        classes: 节点 -> 所在连通类（透明节点为 None）
    """
    colour: tuple
    classes: tuple

    def summary(self):
        return {
            'mu': sum(1 for c in self.colour if c is Fixpoint.MU),
            'nu': sum(1 for c in self.colour if c is Fixpoint.NU),
            'transparent': sum(1 for c in self.colour if c == TRANSPARENT),
        }


def fixpoint_colouring(proof, partition):
    """
    为平衡划分计算不动点着色

    连通类中每个节点的左侧都有聚焦公式时着 μ，否则每个节点的右侧都须有聚焦公式，着 ν。

    Raises:
        ColouringError: 某个连通类两侧都不满足
    """
    colour = [TRANSPARENT] * len(proof)
    classes = [None] * len(proof)
    for component in connectedness_classes(proof):
        if all(is_focused(partition.left[i]) for i in component):
            fixpoint = Fixpoint.MU
        elif all(is_focused(partition.right(i)) for i in component):
            fixpoint = Fixpoint.NU
        else:
            raise ColouringError(f'连通类 {sorted(component)[:5]}... 两侧都没有一致的聚焦公式')
        for i in component:
            colour[i] = fixpoint
            classes[i] = component
    return FixpointColouring(tuple(colour), tuple(classes))


# ==================== 插值公式 ====================

def simple_negation(formula, tokens=frozenset()):
    """
    保持记号变量不变的否定

    记号变量原样保留，其余部分取布尔对偶并交换字面量；
    公式中没有自由记号变量时与 negation 相同。
    """
    return swap_literals(boolean_dual(formula), formula.free - frozenset(tokens))


def _free_letters(sequent):
    letters = set()
    for entry in sequent:
        letters |= entry.formula.free
    return frozenset(letters)


def _token_names(proof):
    """把记号改名为不与根相继式中字母冲突的变量名"""
    taken = set(_free_letters(proof.sequent(0)))
    names = {}
    counter = 0
    for node in proof.nodes:
        if node.rule is not Rule.D or node.token in names:
            continue
        while f'x{counter}' in taken:
            counter += 1
        names[node.token] = f'x{counter}'
        taken.add(f'x{counter}')
    return names


def _local_interpolant(proof, partition, index, parts):
    """节点上的基本公式 χ 作用于子节点插值"""
    node = proof.nodes[index]
    left = partition.left[index]
    if node.rule is Rule.AX1:
        first, second = sorted(node.sequent, key=lambda e: e.formula.tag)
        on_left = (first in left, second in left)
        if on_left == (True, True):
            return BOTTOM
        if on_left == (False, False):
            return TOP
        return second.formula if on_left[0] else first.formula
    if node.rule is Rule.AX2:
        return BOTTOM if left else TOP
    if node.rule is Rule.AND:
        principal = proof.principal(index)
        return Or(*parts) if principal in left else And(*parts)
    if node.rule is Rule.BOX:
        box = next(entry for entry in node.sequent if isinstance(entry.formula, Box))
        return Dia(parts[0]) if box in left else Box(parts[0])
    return parts[0]


def _ancestor_tokens(proof, colouring, names):
    """X(s)：与 s 连通的真祖先伙伴的记号"""
    result = [frozenset()] * len(proof)
    for index, node in enumerate(proof.nodes):
        if node.parent is None:
            continue
        parent = node.parent
        component = colouring.classes[index]
        if component is None:
            continue
        inherited = result[parent] if colouring.classes[parent] is component else frozenset()
        if proof.rule(parent) is Rule.D and parent in component:
            inherited = inherited | {names[proof.nodes[parent].token]}
        result[index] = inherited
    return result


def interpolant(proof, partition, colouring):
    """
    自底向上计算每个节点的插值公式

    记号叶子取其记号变量；伙伴节点取 η x. I(子节点)；其余节点把基本公式作用于
    子节点的插值。构造过程中逐节点检查自由变量与片段条件。

    Returns:
        Formula: 根节点的插值，闭公式中不含记号变量

    Raises:
        InterpolationError: 出现开放假设、没有记号叶子的 D 节点、透明的伙伴节点，
            或逐节点检查失败
    """
    names = _token_names(proof)
    discharged = {}
    for leaf in proof.discharged_leaves():
        discharged.setdefault(proof.nodes[leaf].companion, []).append(leaf)
    tokens_above = _ancestor_tokens(proof, colouring, names)
    formulas = [None] * len(proof)
    for index in range(len(proof) - 1, -1, -1):
        node = proof.nodes[index]
        parts = [formulas[c] for c in proof.children[index]]
        if node.rule is Rule.ASSUMPTION:
            raise InterpolationError(f'节点 {index} 是开放假设，无法插值')
        if node.rule is Rule.DISCHARGED:
            formula = Prop(names[node.token])
        elif node.rule is Rule.D:
            if index not in discharged:
                raise InterpolationError(f'D 节点 {index} 没有回指到它的叶子')
            fixpoint = colouring.colour[index]
            if fixpoint == TRANSPARENT:
                raise InterpolationError(f'伙伴节点 {index} 被着为透明')
            formula = binder(fixpoint, names[node.token], parts[0])
        else:
            formula = _local_interpolant(proof, partition, index, parts)

        left, right = partition.split(index)
        allowed = (_free_letters(left) & _free_letters(right)) | tokens_above[index]
        if not formula.free <= allowed:
            raise InterpolationError(
                f'节点 {index} 的插值 {to_text(formula)} 含多余自由变量 {sorted(formula.free - allowed)}'
            )
        fixpoint = colouring.colour[index]
        if fixpoint != TRANSPARENT and not in_noetherian(formula, fixpoint, tokens_above[index]):
            raise InterpolationError(f'节点 {index} 的插值不在 Noetherian 片段中: {to_text(formula)}')
        formulas[index] = formula
        logger.debug(f'节点 {index} [{sequent_text(left)} | {sequent_text(right)}]: {to_text(formula)}')
    return formulas[0]


def simplify(formula):
    """只使用 ⊥∨α≡α、⊤∧α≡α、◇⊥≡⊥、□⊤≡⊤ 及其对称形式化简"""
    if isinstance(formula, (Or, And)):
        left, right = simplify(formula.left), simplify(formula.right)
        unit = Bottom if isinstance(formula, Or) else Top
        if isinstance(left, unit):
            return right
        if isinstance(right, unit):
            return left
        return type(formula)(left, right)
    if isinstance(formula, Dia):
        body = simplify(formula.body)
        return BOTTOM if isinstance(body, Bottom) else Dia(body)
    if isinstance(formula, Box):
        body = simplify(formula.body)
        return TOP if isinstance(body, Top) else Box(body)
    if is_fixpoint(formula):
        return binder(formula.fixpoint, formula.var, simplify(formula.body))
    return formula


# ==================== 插值流程 ====================

@dataclass
class InterpolationResult:
    """
    插值结果

    Attributes:
        formula: 主结果，SIMPLIFY_INTERPOLANTS 打开时为化简后的公式
        raw: 未化简的插值
        simplified: 化简后的插值
        colouring: 着色统计 {mu, nu, transparent}
        left_valid: φ → θ 是否可证
        right_valid: θ → ψ 是否可证
        free_ok: FV(θ) ⊆ FV(φ) ∩ FV(ψ)
    """
    formula: object
    raw: object
    simplified: object
    colouring: dict
    left_valid: bool
    right_valid: bool
    free_ok: bool

    def to_json(self):
        return {
            'interpolant': to_text(self.formula),
            'raw': to_text(self.raw),
            'simplified': to_text(self.simplified),
            'colouring': self.colouring,
            'left_valid': self.left_valid,
            'right_valid': self.right_valid,
            'free_ok': self.free_ok,
        }


def interpolate(phi, psi, schedule=None):
    """
    计算 φ → ψ 的 Craig 插值 θ

    先判定 {φ̄, ψ}；可证时以 φ̄ | ψ 划分根相继式，平衡化、着色并计算插值，
    最后复核自由变量、交替自由性以及 φ → θ、θ → ψ 两个蕴涵。

    Returns:
        InterpolationResult

    Raises:
        InterpolationError: 蕴涵不成立（附反模型）或复核失败
    """
    left_formula = negation(phi)
    verdict = decide([left_formula, psi], schedule)
    if not verdict.valid:
        raise InterpolationError(
            f'{to_text(phi)} → {to_text(psi)} 不成立', model=verdict.model, world=verdict.world
        )
    proof = verdict.proof
    left_root = frozenset(e for e in proof.sequent(0) if e.formula is left_formula)
    partition = induce_partition(proof, left_root)
    proof, partition = balance(proof, partition)
    colouring = fixpoint_colouring(proof, partition)
    raw = interpolant(proof, partition, colouring)
    simplified = simplify(raw)

    free_ok = raw.free <= (phi.free & psi.free)
    if not free_ok:
        raise InterpolationError(f'插值含多余自由变量: {sorted(raw.free - (phi.free & psi.free))}')
    if not is_alternation_free(raw):
        raise InterpolationError(f'插值不是交替自由的: {to_text(raw)}')
    left_valid = decide([left_formula, raw], schedule).valid
    right_valid = decide([negation(raw), psi], schedule).valid
    if not (left_valid and right_valid):
        raise InterpolationError(f'插值复核失败: φ→θ {left_valid}, θ→ψ {right_valid}')
    logger.info(f'插值完成: {to_text(simplified)} (原始大小 {raw.size})')
    main = simplified if focus_setting('SIMPLIFY_INTERPOLANTS') else raw
    return InterpolationResult(
        main, raw, simplified, colouring.summary(), left_valid, right_valid, free_ok,
    )
