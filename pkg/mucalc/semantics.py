"""
Kripke 语义
Kripke 模型、指称语义（Knaster–Tarski 迭代）、求值博弈、双重校验的模型检测，
以及小模型穷举搜索
"""
import itertools
import logging

import networkx as nx

from .formula import (
    And, Bottom, Box, Dia, Fixpoint, FragmentError, MuCalcError, NegProp, Or, Prop, Top,
    closure, is_alternation_free, is_fixpoint, order_key, to_text, unfold,
)
from .games import GameArena, Player, WeakParity, solve

logger = logging.getLogger(__name__)


class ModelError(MuCalcError):
    """模型数据不合法"""
    pass


class OracleDisagreement(MuCalcError):
    """指称语义与求值博弈的结论不一致"""
    pass


# ==================== Kripke 模型 ====================

class KripkeModel:
    """
    有限 Kripke 模型

    世界集合按给定顺序编号，世界集合在内部用位集表示。
    未出现在赋值中的命题字母视为处处为假。
    """

    def __init__(self, worlds, rel=(), val=None):
        self.worlds = tuple(worlds)
        if len(set(self.worlds)) != len(self.worlds):
            raise ModelError('世界名称有重复')
        if not self.worlds:
            raise ModelError('模型至少需要一个世界')
        self.index = {w: i for i, w in enumerate(self.worlds)}
        self.rel = frozenset((a, b) for a, b in rel)
        for a, b in self.rel:
            if a not in self.index or b not in self.index:
                raise ModelError(f'可达关系引用了未知世界: ({a}, {b})')
        self.val = {}
        for letter, holds in (val or {}).items():
            holds = frozenset(holds)
            unknown = holds - set(self.index)
            if unknown:
                raise ModelError(f'赋值 {letter} 引用了未知世界: {sorted(unknown)}')
            self.val[letter] = holds
        self.full = (1 << len(self.worlds)) - 1
        self.succ_mask = [0] * len(self.worlds)
        for a, b in self.rel:
            self.succ_mask[self.index[a]] |= 1 << self.index[b]
        self.val_mask = {letter: self.mask(holds) for letter, holds in self.val.items()}

    def __repr__(self):
        return f'<KripkeModel {len(self.worlds)} worlds, {len(self.rel)} edges>'

    def __eq__(self, other):
        return (isinstance(other, KripkeModel) and self.worlds == other.worlds
                and self.rel == other.rel and self._val_key() == other._val_key())

    def __hash__(self):
        return hash((self.worlds, self.rel, self._val_key()))

    def _val_key(self):
        return frozenset((letter, holds) for letter, holds in self.val.items() if holds)

    def mask(self, worlds):
        result = 0
        for world in worlds:
            result |= 1 << self.index[world]
        return result

    def worlds_of(self, mask):
        return frozenset(w for i, w in enumerate(self.worlds) if mask >> i & 1)

    def successors(self, world):
        return self.worlds_of(self.succ_mask[self.index[world]])

    def holds(self, letter, world):
        return world in self.val.get(letter, ())

    def pre_exists(self, mask):
        result = 0
        for i, succ in enumerate(self.succ_mask):
            if succ & mask:
                result |= 1 << i
        return result

    def pre_forall(self, mask):
        result = 0
        for i, succ in enumerate(self.succ_mask):
            if not succ & ~mask:
                result |= 1 << i
        return result

    def to_json(self):
        return model_to_json(self)


def model_to_json(model):
    """模型 JSON: {worlds, rel, val}，字母与边按字典序输出"""
    return {
        'worlds': list(model.worlds),
        'rel': [[a, b] for a, b in sorted(model.rel, key=lambda e: (model.index[e[0]], model.index[e[1]]))],
        'val': {
            letter: sorted(holds, key=model.index.get)
            for letter, holds in sorted(model.val.items())
        },
    }


def model_from_json(data):
    """从 JSON 数据构造模型，格式错误时抛出 ModelError"""
    if not isinstance(data, dict):
        raise ModelError('模型 JSON 必须是对象')
    try:
        worlds = [str(w) for w in data['worlds']]
    except (KeyError, TypeError) as exc:
        raise ModelError('模型 JSON 缺少 worlds 列表') from exc
    rel = data.get('rel', [])
    val = data.get('val', {})
    if not isinstance(rel, list) or any(not isinstance(e, list) or len(e) != 2 for e in rel):
        raise ModelError('rel 必须是由二元列表组成的列表')
    if not isinstance(val, dict):
        raise ModelError('val 必须是对象')
    return KripkeModel(worlds, [(str(a), str(b)) for a, b in rel],
                       {str(k): [str(w) for w in v] for k, v in val.items()})


# ==================== 指称语义 ====================

class _Evaluator:
    """按公式与相关环境缓存结果的指称计算"""

    def __init__(self, model, trace=None):
        self.model = model
        self.cache = {}
        self.trace = trace

    def evaluate(self, formula, env):
        key = (formula, frozenset((v, env[v]) for v in formula.free if v in env))
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        result = self._compute(formula, env)
        self.cache[key] = result
        return result

    def _compute(self, formula, env):
        model = self.model
        if isinstance(formula, Top):
            return model.full
        if isinstance(formula, Bottom):
            return 0
        if isinstance(formula, Prop):
            if formula.name in env:
                return env[formula.name]
            return model.val_mask.get(formula.name, 0)
        if isinstance(formula, NegProp):
            return model.full & ~model.val_mask.get(formula.name, 0)
        if isinstance(formula, Or):
            return self.evaluate(formula.left, env) | self.evaluate(formula.right, env)
        if isinstance(formula, And):
            return self.evaluate(formula.left, env) & self.evaluate(formula.right, env)
        if isinstance(formula, Dia):
            return model.pre_exists(self.evaluate(formula.body, env))
        if isinstance(formula, Box):
            return model.pre_forall(self.evaluate(formula.body, env))
        return self.iterate(formula, env)[-1]

    def iterate(self, formula, env):
        """Knaster–Tarski 迭代，返回全部近似值"""
        current = 0 if formula.fixpoint is Fixpoint.MU else self.model.full
        approximants = [current]
        while True:
            inner = dict(env)
            inner[formula.var] = current
            following = self.evaluate(formula.body, inner)
            if following == current:
                return approximants
            approximants.append(following)
            current = following


def denote(formula, model, env=None):
    """
    公式在模型中的指称

    Args:
        formula: 公式
        model: KripkeModel
        env: 可选，变量 -> 世界集合

    Returns:
        frozenset: 使公式为真的世界
    """
    masks = {var: model.mask(worlds) for var, worlds in (env or {}).items()}
    return model.worlds_of(_Evaluator(model).evaluate(formula, masks))


def fixpoint_iterates(formula, model, env=None):
    """不动点公式的近似值序列（世界集合列表）"""
    if not is_fixpoint(formula):
        raise MuCalcError(f'不是不动点公式: {to_text(formula)}')
    masks = {var: model.mask(worlds) for var, worlds in (env or {}).items()}
    return [model.worlds_of(m) for m in _Evaluator(model).iterate(formula, masks)]


# ==================== 求值博弈 ====================

def _game_position(formula, world, model):
    """单个位置的归属与后继"""
    if isinstance(formula, Prop):
        return (Player.FORALL if model.holds(formula.name, world) else Player.EXISTS), ()
    if isinstance(formula, NegProp):
        return (Player.EXISTS if model.holds(formula.name, world) else Player.FORALL), ()
    if isinstance(formula, Top):
        return Player.FORALL, ()
    if isinstance(formula, Bottom):
        return Player.EXISTS, ()
    if isinstance(formula, Or):
        return Player.EXISTS, ((formula.left, world), (formula.right, world))
    if isinstance(formula, And):
        return Player.FORALL, ((formula.left, world), (formula.right, world))
    successors = sorted(model.successors(world), key=model.index.get)
    if isinstance(formula, Dia):
        return Player.EXISTS, tuple((formula.body, t) for t in successors)
    if isinstance(formula, Box):
        return Player.FORALL, tuple((formula.body, t) for t in successors)
    return None, ((unfold(formula), world),)


def evaluation_game(formula, model, world=None):
    """
    求值博弈 E(ξ, S)

    位置为 Clos(ξ) × 世界；弱奇偶条件按强连通分量上出现的不动点类型给出优先级：
    含 ν 公式的分量为 0，含 μ 公式的分量为 1。
    """
    if not is_alternation_free(formula):
        raise FragmentError(f'求值博弈只接受交替自由公式: {to_text(formula)}')
    world = model.worlds[0] if world is None else world
    if world not in model.index:
        raise ModelError(f'未知世界: {world}')
    formulas = sorted(closure(formula), key=order_key)
    positions = [(f, w) for f in formulas for w in model.worlds]
    moves = {}
    owner = {}
    for position in positions:
        player, successors = _game_position(position[0], position[1], model)
        moves[position] = successors
        if player is not None:
            owner[position] = player

    graph = nx.DiGraph()
    graph.add_nodes_from(positions)
    graph.add_edges_from((v, w) for v in positions for w in moves[v])
    priority = {}
    for component in nx.strongly_connected_components(graph):
        kinds = {f.fixpoint for f, _ in component if is_fixpoint(f)}
        if len(kinds) > 1:
            raise FragmentError('求值博弈的强连通分量同时含有 μ 与 ν 公式')
        value = 1 if kinds == {Fixpoint.MU} else 0
        for position in component:
            priority[position] = value
    return GameArena(positions, moves, owner, (formula, world), WeakParity(priority))


def model_check(formula, model, world):
    """
    模型检测：同时计算指称语义与求值博弈的胜者，两者必须一致

    Returns:
        bool: 公式是否在 world 处为真
    """
    if world not in model.index:
        raise ModelError(f'未知世界: {world}')
    semantic = world in denote(formula, model)
    solution = solve(evaluation_game(formula, model, world))
    by_game = solution.winner((formula, world)) is Player.EXISTS
    if semantic != by_game:
        logger.error(f'模型检测结论不一致: {to_text(formula)} @ {world}')
        raise OracleDisagreement(
            f'{to_text(formula)} 在 {world}: 指称语义为 {semantic}, 求值博弈为 {by_game}'
        )
    return semantic


# ==================== 小模型搜索 ====================

def all_models(letters, max_worlds):
    """
    穷举至多 max_worlds 个世界、字母集为 letters 的全部模型

    世界命名为 s0, s1, …；按世界数、可达关系、赋值的顺序生成。
    """
    letters = sorted(letters)
    for count in range(1, max_worlds + 1):
        worlds = [f's{i}' for i in range(count)]
        pairs = [(a, b) for a in worlds for b in worlds]
        subsets = [
            [w for i, w in enumerate(worlds) if bits >> i & 1]
            for bits in range(1 << count)
        ]
        for edge_bits in range(1 << len(pairs)):
            rel = [pair for i, pair in enumerate(pairs) if edge_bits >> i & 1]
            for choice in itertools.product(subsets, repeat=len(letters)):
                yield KripkeModel(worlds, rel, dict(zip(letters, choice)))


def find_countermodel(formulas, letters=None, max_worlds=2):
    """
    在小模型中搜索使所有公式同时为假的点

    Returns:
        (KripkeModel, world) 或 None
    """
    formulas = list(formulas)
    if letters is None:
        letters = set()
        for formula in formulas:
            letters |= formula.free
    for model in all_models(letters, max_worlds):
        evaluator = _Evaluator(model)
        covered = 0
        for formula in formulas:
            covered |= evaluator.evaluate(formula, {})
        if covered != model.full:
            missing = model.full & ~covered
            world = model.worlds[(missing & -missing).bit_length() - 1]
            return model, world
    return None
