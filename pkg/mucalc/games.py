"""
有限博弈
博弈场地、可达/Büchi/co-Büchi/弱奇偶条件的求解以及位置策略验证。
胜利条件一律从 Exists 的角度表述。
"""
import enum
import logging
from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .formula import MuCalcError

logger = logging.getLogger(__name__)


class ArenaError(MuCalcError):
    """博弈场地不满足不变式"""
    pass


class Player(enum.Enum):
    """博弈双方"""
    EXISTS = 'exists'
    FORALL = 'forall'

    @property
    def opponent(self):
        return Player.FORALL if self is Player.EXISTS else Player.EXISTS


# ==================== 胜利条件 ====================

@dataclass(frozen=True)
class Reachability:
    """Exists 需要到达 target"""
    target: frozenset

    def to_json(self, name):
        return {'type': 'reachability', 'target': sorted(name(v) for v in self.target)}


@dataclass(frozen=True)
class Buchi:
    """Exists 需要无穷次访问 accepting"""
    accepting: frozenset

    def to_json(self, name):
        return {'type': 'buchi', 'accepting': sorted(name(v) for v in self.accepting)}


@dataclass(frozen=True)
class CoBuchi:
    """Exists 需要只有限次访问 avoid"""
    avoid: frozenset

    def to_json(self, name):
        return {'type': 'cobuchi', 'avoid': sorted(name(v) for v in self.avoid)}


@dataclass(frozen=True)
class WeakParity:
    """
    弱奇偶条件

    优先级在每个强连通分量上恒定，最终停留的分量优先级为偶数时 Exists 胜
    """
    priority: dict = field(hash=False)

    def to_json(self, name):
        return {
            'type': 'weak_parity',
            'priority': {name(v): p for v, p in sorted(self.priority.items(), key=lambda item: name(item[0]))},
        }


# ==================== 博弈场地 ====================

@dataclass
class GameArena:
    """
    博弈场地

    Attributes:
        positions: 位置序列，其顺序即求解时的确定性遍历顺序
        moves: 位置 -> 后继序列
        owner: 部分映射，出度不为 1 的位置必须给出
        initial: 初始位置
        condition: 胜利条件
    """
    positions: tuple
    moves: dict
    owner: dict
    initial: object
    condition: object

    def __post_init__(self):
        self.positions = tuple(self.positions)
        self.moves = {v: tuple(dict.fromkeys(self.moves.get(v, ()))) for v in self.positions}

    def successors(self, position):
        return self.moves[position]

    def graph(self):
        graph = nx.DiGraph()
        graph.add_nodes_from(self.positions)
        for position in self.positions:
            for successor in self.moves[position]:
                graph.add_edge(position, successor)
        return graph

    def validate(self):
        """检查场地不变式，失败时抛出 ArenaError"""
        known = set(self.positions)
        if len(known) != len(self.positions):
            raise ArenaError('位置有重复')
        if self.initial not in known:
            raise ArenaError(f'初始位置不在场地中: {self.initial!r}')
        for position in self.positions:
            for successor in self.moves[position]:
                if successor not in known:
                    raise ArenaError(f'{position!r} 的后继 {successor!r} 不在场地中')
            if len(self.moves[position]) != 1 and self.owner.get(position) is None:
                raise ArenaError(f'出度为 {len(self.moves[position])} 的位置 {position!r} 没有归属')
        condition = self.condition
        if isinstance(condition, Reachability):
            marked = condition.target
        elif isinstance(condition, Buchi):
            marked = condition.accepting
        elif isinstance(condition, CoBuchi):
            marked = condition.avoid
        elif isinstance(condition, WeakParity):
            marked = ()
            missing = known - set(condition.priority)
            if missing:
                raise ArenaError(f'{len(missing)} 个位置没有优先级')
            for component in nx.strongly_connected_components(self.graph()):
                values = {condition.priority[v] for v in component}
                if len(values) > 1:
                    raise ArenaError(f'强连通分量上的优先级不恒定: {sorted(values)}')
        else:
            raise ArenaError(f'未知的胜利条件: {condition!r}')
        stray = [v for v in marked if v not in known]
        if stray:
            raise ArenaError(f'胜利条件引用了场地外的位置: {stray[:3]!r}')

    def swapped(self):
        """
        交换双方角色后的等价场地（仅 Büchi 与 co-Büchi）

        Exists 的 Büchi(A) 等价于角色互换后 Exists 的 co-Büchi(A)
        """
        owner = {v: p.opponent for v, p in self.owner.items() if p is not None}
        if isinstance(self.condition, Buchi):
            condition = CoBuchi(self.condition.accepting)
        elif isinstance(self.condition, CoBuchi):
            condition = Buchi(self.condition.avoid)
        else:
            raise ArenaError('只有 Büchi 与 co-Büchi 场地可以交换角色')
        return GameArena(self.positions, self.moves, owner, self.initial, condition)

    def to_json(self, name=str):
        """调试用 JSON 导出"""
        return {
            'positions': [name(v) for v in self.positions],
            'edges': [[name(v), name(w)] for v in self.positions for w in self.moves[v]],
            'owners': {name(v): p.value for v, p in self.owner.items() if p is not None},
            'initial': name(self.initial),
            'condition': self.condition.to_json(name),
        }


# ==================== 求解 ====================

@dataclass(frozen=True)
class Strategy:
    """位置策略：在 region 中该玩家所属的位置上给出一步"""
    player: Player
    region: frozenset
    moves: dict = field(hash=False)

    def move(self, position):
        return self.moves.get(position)


@dataclass
class GameSolution:
    """双方的胜区与位置胜策略"""
    arena: GameArena
    regions: dict
    strategies: dict

    def winner(self, position=None):
        position = self.arena.initial if position is None else position
        return Player.EXISTS if position in self.regions[Player.EXISTS] else Player.FORALL


class _Solver:
    """在补全死端后的整数下标图上求解"""

    def __init__(self, arena):
        self.arena = arena
        self.index = {v: i for i, v in enumerate(arena.positions)}
        count = len(arena.positions)
        self.win_sink = count
        self.lose_sink = count + 1
        self.size = count + 2
        self.owner = [arena.owner.get(v) for v in arena.positions] + [None, None]
        self.succ = []
        for position in arena.positions:
            targets = [self.index[w] for w in arena.moves[position]]
            if not targets:
                # 卡住的一方输
                stuck = arena.owner[position]
                targets = [self.lose_sink if stuck is Player.EXISTS else self.win_sink]
            self.succ.append(targets)
        self.succ.append([self.win_sink])
        self.succ.append([self.lose_sink])
        self.pred = [[] for _ in range(self.size)]
        for v in range(self.size):
            for w in self.succ[v]:
                self.pred[w].append(v)

    def _mapped(self, positions):
        return {self.index[v] for v in positions}

    def _controls(self, player, v):
        return self.owner[v] is player or len(self.succ[v]) == 1

    def attractor(self, player, target, universe, domain=None):
        """
        player 在 universe 内强制到达 target 的位置集合

        Args:
            domain: 对手位置计数出边时考虑的后继范围，None 表示全部后继
        """
        attr = set(target)
        strategy = {}
        remaining = {}
        queue = deque(sorted(attr))
        while queue:
            u = queue.popleft()
            for v in self.pred[u]:
                if v in attr or v not in universe:
                    continue
                if self._controls(player, v):
                    attr.add(v)
                    strategy[v] = u
                    queue.append(v)
                    continue
                if v not in remaining:
                    succ = self.succ[v]
                    remaining[v] = len(succ) if domain is None else sum(1 for w in succ if w in domain)
                remaining[v] -= 1
                if remaining[v] == 0:
                    attr.add(v)
                    queue.append(v)
        return attr, strategy

    def _first(self, v, allowed):
        for w in self.succ[v]:
            if w in allowed:
                return w
        return self.succ[v][0]

    def buchi(self, player, accepting):
        """player 需要无穷次访问 accepting，返回双方胜区与策略"""
        opponent = player.opponent
        game = set(range(self.size))
        opp_region = set()
        opp_strategy = {}
        while True:
            reach, reach_strategy = self.attractor(player, accepting & game, game, game)
            trap = game - reach
            if not trap:
                break
            lost, lost_strategy = self.attractor(opponent, trap, game, game)
            for v in sorted(lost):
                if self.owner[v] is not opponent:
                    continue
                if v in trap:
                    opp_strategy[v] = self._first(v, trap)
                else:
                    opp_strategy[v] = lost_strategy[v]
            opp_region |= lost
            game -= lost
        strategy = {}
        for v in sorted(game):
            if self.owner[v] is player:
                if v in accepting or v not in reach_strategy:
                    strategy[v] = self._first(v, game)
                else:
                    strategy[v] = reach_strategy[v]
        return {player: game, opponent: opp_region}, {player: strategy, opponent: opp_strategy}

    def reachability(self, target):
        everything = set(range(self.size))
        region, attr_strategy = self.attractor(Player.EXISTS, target, everything)
        rest = everything - region
        exists_strategy = {}
        for v in sorted(region):
            if self.owner[v] is Player.EXISTS:
                exists_strategy[v] = attr_strategy.get(v, self._first(v, region))
        forall_strategy = {
            v: self._first(v, rest) for v in sorted(rest) if self.owner[v] is Player.FORALL
        }
        return ({Player.EXISTS: region, Player.FORALL: rest},
                {Player.EXISTS: exists_strategy, Player.FORALL: forall_strategy})

    def weak_parity(self, priority):
        """按强连通分量逆拓扑序逐个求解"""
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.size))
        for v in range(self.size):
            graph.add_edges_from((v, w) for w in self.succ[v])
        dag = nx.condensation(graph)
        regions = {Player.EXISTS: set(), Player.FORALL: set()}
        strategies = {Player.EXISTS: {}, Player.FORALL: {}}
        for component in reversed(list(nx.topological_sort(dag))):
            members = dag.nodes[component]['members']
            sample = min(members)
            good = Player.EXISTS if priority[sample] % 2 == 0 else Player.FORALL
            bad = good.opponent
            frontier = {w for v in members for w in self.succ[v] if w in regions[bad]}
            attr, attr_strategy = self.attractor(bad, frontier, members)
            lost = attr & members
            kept = members - lost
            for v in sorted(lost):
                if self.owner[v] is bad:
                    strategies[bad][v] = attr_strategy[v]
                elif self.owner[v] is good:
                    strategies[good][v] = self.succ[v][0]
            for v in sorted(kept):
                if self.owner[v] is good:
                    safe = [w for w in self.succ[v] if w not in attr]
                    strategies[good][v] = safe[0]
            regions[bad] |= lost
            regions[good] |= kept
        return regions, strategies

    def solve(self):
        arena = self.arena
        condition = arena.condition
        win, lose = self.win_sink, self.lose_sink
        if isinstance(condition, Reachability):
            regions, strategies = self.reachability(self._mapped(condition.target) | {win})
        elif isinstance(condition, Buchi):
            regions, strategies = self.buchi(Player.EXISTS, self._mapped(condition.accepting) | {win})
        elif isinstance(condition, CoBuchi):
            regions, strategies = self.buchi(Player.FORALL, self._mapped(condition.avoid) | {lose})
        else:
            priority = [condition.priority[v] for v in arena.positions] + [0, 1]
            regions, strategies = self.weak_parity(priority)
        return self._export(regions, strategies)

    def _export(self, regions, strategies):
        positions = self.arena.positions
        count = len(positions)
        result_regions = {}
        result_strategies = {}
        for player in Player:
            region = frozenset(positions[i] for i in regions[player] if i < count)
            moves = {}
            for v, w in strategies[player].items():
                if v < count and w < count and self.owner[v] is player and v in regions[player]:
                    moves[positions[v]] = positions[w]
            result_regions[player] = region
            result_strategies[player] = Strategy(player, region, moves)
        return result_regions, result_strategies


def solve(arena):
    """
    求解博弈

    Returns:
        GameSolution: 双方胜区构成场地的划分，策略为位置策略
    """
    arena.validate()
    solver = _Solver(arena)
    regions, strategies = solver.solve()
    logger.debug(
        f'博弈求解完成: {len(arena.positions)} 个位置, '
        f'Exists 胜区 {len(regions[Player.EXISTS])}, Forall 胜区 {len(regions[Player.FORALL])}'
    )
    return GameSolution(arena, regions, strategies)


# ==================== 策略验证 ====================

def _cyclic_components(graph):
    for component in nx.strongly_connected_components(graph):
        if len(component) > 1:
            yield component
        else:
            (node,) = component
            if graph.has_edge(node, node):
                yield component


def verify_strategy(arena, player, strategy):
    """
    验证位置策略在其胜区上对 player 是必胜的

    有限图上只需检查策略子图：封闭性加上所有环的性质。
    """
    region = frozenset(strategy.region)
    condition = arena.condition
    target = condition.target if isinstance(condition, Reachability) else frozenset()
    finished = target if player is Player.EXISTS else frozenset()
    if player is Player.FORALL and region & target:
        return False

    graph = nx.DiGraph()
    for v in region:
        if v in finished:
            continue
        graph.add_node(v)
        moves = arena.moves.get(v, ())
        if arena.owner.get(v) is player and not moves:
            return False
        if arena.owner.get(v) is player and len(moves) > 1:
            choice = strategy.moves.get(v)
            if choice not in moves or choice not in region:
                return False
            successors = (choice,)
        else:
            if any(w not in region for w in moves):
                return False
            successors = moves
        for w in successors:
            if w not in finished:
                graph.add_edge(v, w)

    if isinstance(condition, Reachability):
        if player is Player.EXISTS:
            return nx.is_directed_acyclic_graph(graph)
        return True
    if isinstance(condition, Buchi):
        marked = condition.accepting
        if player is Player.EXISTS:
            return nx.is_directed_acyclic_graph(graph.subgraph(v for v in graph if v not in marked))
        return not any(component & marked for component in _cyclic_components(graph))
    if isinstance(condition, CoBuchi):
        marked = condition.avoid
        if player is Player.EXISTS:
            return not any(component & marked for component in _cyclic_components(graph))
        return nx.is_directed_acyclic_graph(graph.subgraph(v for v in graph if v not in marked))
    wanted = 0 if player is Player.EXISTS else 1
    for component in _cyclic_components(graph):
        if any(condition.priority[v] % 2 != wanted for v in component):
            return False
    return True
