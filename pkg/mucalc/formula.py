"""
模态 μ 演算公式代数
提供公式构造（哈希共享）、文本解析与打印、否定、代入、展开、闭包、
守卫性、交替自由性判定以及迹的分类
"""
import enum
import functools
import logging
import threading
import weakref
from dataclasses import dataclass

from lark import Lark
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken

logger = logging.getLogger(__name__)


# ==================== 异常 ====================

class MuCalcError(Exception):
    """μ 演算领域错误的基类"""
    pass


class FormulaSyntaxError(MuCalcError):
    """公式文本语法错误"""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f'{message} (第 {line} 行, 第 {column} 列)'
        super().__init__(message)


class PositivityError(MuCalcError):
    """不动点变量以否定形式出现在其约束体中"""
    pass


class TidinessError(MuCalcError):
    """公式不整洁：自由变量与约束变量相交"""
    pass


class CaptureError(MuCalcError):
    """代入会发生变量捕获"""
    pass


class NotAFixpointError(MuCalcError):
    """对非不动点公式做展开"""
    pass


class FragmentError(MuCalcError):
    """输入不在有守卫的交替自由片段内"""
    pass


class TraceError(MuCalcError):
    """迹不满足闭包后继关系或无法分类"""
    pass


class Fixpoint(enum.Enum):
    """不动点类型"""
    MU = 'mu'
    NU = 'nu'

    @property
    def dual(self):
        return Fixpoint.NU if self is Fixpoint.MU else Fixpoint.MU


# ==================== 公式节点 ====================

_TABLE = weakref.WeakValueDictionary()
_TABLE_LOCK = threading.Lock()
_CACHES = []


def _cached(func):
    wrapped = functools.cache(func)
    _CACHES.append(wrapped)
    return wrapped


def clear_caches():
    """
    清空结构函数的缓存

    共享表只弱引用公式节点，缓存释放后不再使用的公式随之回收。
    长时间运行的批量任务在两次判定之间调用。
    """
    for func in _CACHES:
        func.cache_clear()
    logger.debug(f'公式缓存已清空，共享表中剩余 {len(_TABLE)} 个节点')


class Formula:
    """
    公式节点基类

    所有节点经哈希共享构造：结构相同的公式是同一个对象，
    因此相等即同一性，哈希值在构造时预先计算。节点不可变。
    """
    __slots__ = ('_key', '_hash', 'size', 'free', 'bound', 'negated', 'order_key', '__weakref__')
    tag = ''
    rank = 0
    children = ()

    def __new__(cls, *args):
        key = (cls.tag,) + args
        node = _TABLE.get(key)
        if node is not None:
            return node
        cls._validate(*args)
        with _TABLE_LOCK:
            node = _TABLE.get(key)
            if node is None:
                node = object.__new__(cls)
                node._setup(key, args)
                _TABLE[key] = node
        return node

    @classmethod
    def _validate(cls, *args):
        pass

    def _setup(self, key, args):
        put = functools.partial(object.__setattr__, self)
        put('_key', key)
        put('_hash', hash(key))
        self._fill(put, *args)
        children = self.children
        put('size', 1 + sum(child.size for child in children))
        put('order_key', (
            self.size, self.rank, self._names(),
            tuple(child.order_key for child in children),
        ))

    def _fill(self, put, *args):
        put('free', frozenset())
        put('bound', frozenset())
        put('negated', frozenset())

    def _names(self):
        return ()

    def __setattr__(self, name, value):
        raise AttributeError('公式节点不可变')

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __reduce__(self):
        return (type(self), self._key[1:])

    def __repr__(self):
        return f'<{type(self).__name__} {to_text(self)}>'

    def __str__(self):
        return to_text(self)


class Top(Formula):
    __slots__ = ()
    tag = 'top'
    rank = 0


class Bottom(Formula):
    __slots__ = ()
    tag = 'bottom'
    rank = 1


class _Literal(Formula):
    __slots__ = ('name',)

    @classmethod
    def _validate(cls, name):
        if not isinstance(name, str) or not name:
            raise MuCalcError(f'命题字母必须是非空字符串: {name!r}')

    def _names(self):
        return (self.name,)


class Prop(_Literal):
    __slots__ = ()
    tag = 'prop'
    rank = 2

    def _fill(self, put, name):
        put('name', name)
        put('free', frozenset((name,)))
        put('bound', frozenset())
        put('negated', frozenset())


class NegProp(_Literal):
    __slots__ = ()
    tag = 'negprop'
    rank = 3

    def _fill(self, put, name):
        put('name', name)
        put('free', frozenset((name,)))
        put('bound', frozenset())
        put('negated', frozenset((name,)))


class _Binary(Formula):
    __slots__ = ('left', 'right')

    @classmethod
    def _validate(cls, left, right):
        if (left.free & right.bound) or (right.free & left.bound):
            raise TidinessError(f'{cls.__name__} 的两个分量不整洁')

    def _fill(self, put, left, right):
        put('left', left)
        put('right', right)
        put('free', left.free | right.free)
        put('bound', left.bound | right.bound)
        put('negated', left.negated | right.negated)

    @property
    def children(self):
        return (self.left, self.right)


class Or(_Binary):
    __slots__ = ()
    tag = 'or'
    rank = 4


class And(_Binary):
    __slots__ = ()
    tag = 'and'
    rank = 5


class _Modal(Formula):
    __slots__ = ('body',)

    def _fill(self, put, body):
        put('body', body)
        put('free', body.free)
        put('bound', body.bound)
        put('negated', body.negated)

    @property
    def children(self):
        return (self.body,)


class Dia(_Modal):
    __slots__ = ()
    tag = 'dia'
    rank = 6


class Box(_Modal):
    __slots__ = ()
    tag = 'box'
    rank = 7


class _Binder(Formula):
    __slots__ = ('var', 'body')
    fixpoint = None

    @classmethod
    def _validate(cls, var, body):
        _Literal._validate(var)
        if var in body.negated:
            raise PositivityError(f'¬{var} 出现在 {var} 的约束体中')

    def _fill(self, put, var, body):
        put('var', var)
        put('body', body)
        put('free', body.free - {var})
        put('bound', body.bound | {var})
        put('negated', body.negated - {var})

    def _names(self):
        return (self.var,)

    @property
    def children(self):
        return (self.body,)


class Mu(_Binder):
    __slots__ = ()
    tag = 'mu'
    rank = 8
    fixpoint = Fixpoint.MU


class Nu(_Binder):
    __slots__ = ()
    tag = 'nu'
    rank = 9
    fixpoint = Fixpoint.NU


BINDERS = {Fixpoint.MU: Mu, Fixpoint.NU: Nu}

TOP = Top()
BOTTOM = Bottom()


def binder(fixpoint, var, body):
    """按不动点类型构造约束公式"""
    return BINDERS[fixpoint](var, body)


def is_fixpoint(formula):
    return isinstance(formula, _Binder)


def is_literal(formula):
    return isinstance(formula, (Prop, NegProp))


def is_atomic(formula):
    """⊤、⊥ 与命题字面量"""
    return isinstance(formula, (Top, Bottom, Prop, NegProp))


def is_modal(formula):
    return isinstance(formula, (Dia, Box))


def order_key(formula):
    """公式上固定的全序：先按大小，再按结构字典序"""
    return formula.order_key


def sort_formulas(formulas):
    return sorted(formulas, key=order_key)


def free_vars(formula):
    return formula.free


def bound_vars(formula):
    return formula.bound


def is_tidy(formula):
    return not (formula.free & formula.bound)


@_cached
def subformulas(formula):
    """全部语法子公式（含自身）"""
    result = {formula}
    for child in formula.children:
        result |= subformulas(child)
    return frozenset(result)


# ==================== 解析与打印 ====================

GRAMMAR = r"""
    start: formula

    ?formula: disj_closed
            | disj_open

    ?disj_closed: conj_closed
                | disj_closed "|" conj_closed -> or_
    ?disj_open: conj_open
              | disj_closed "|" conj_open -> or_

    ?conj_closed: unary_closed
                | conj_closed "&" unary_closed -> and_
    ?conj_open: unary_open
              | conj_closed "&" unary_open -> and_

    ?unary_closed: "~" IDENT -> neg
                 | "<>" unary_closed -> dia
                 | "[]" unary_closed -> box
                 | atom
    ?unary_open: "<>" unary_open -> dia
               | "[]" unary_open -> box
               | "mu" IDENT "." formula -> mu_binder
               | "nu" IDENT "." formula -> nu_binder

    ?atom: "true" -> top
         | "false" -> bottom
         | IDENT -> prop
         | "(" formula ")"

    IDENT: /[A-Za-z_][A-Za-z0-9_]*/

    %import common.WS
    %ignore WS
"""

_PARSER = Lark(GRAMMAR, parser='lalr', maybe_placeholders=False)


def _identifiers(tree):
    names = set()
    for token in tree.scan_values(lambda value: True):
        if getattr(token, 'type', None) == 'IDENT':
            names.add(str(token))
    return names


def _free_identifiers(tree, scope=frozenset()):
    kind = tree.data
    if kind == 'prop':
        name = str(tree.children[0])
        return set() if name in scope else {name}
    if kind == 'neg':
        name = str(tree.children[0])
        return set() if name in scope else {name}
    if kind in ('mu_binder', 'nu_binder'):
        var, body = tree.children
        return _free_identifiers(body, scope | {str(var)})
    result = set()
    for child in tree.children:
        if hasattr(child, 'data'):
            result |= _free_identifiers(child, scope)
    return result


class _TreeBuilder:
    """把语法树转换为公式，必要时对约束变量改名以保证整洁"""

    def __init__(self, tree, rename):
        self.rename = rename
        self.free = _free_identifiers(tree)
        self.reserved = _identifiers(tree) | set(self.free)
        self.taken = set()

    def fresh(self, name):
        index = 1
        while f'{name}_{index}' in self.reserved or f'{name}_{index}' in self.taken:
            index += 1
        return f'{name}_{index}'

    def build(self, tree, scope):
        kind = tree.data
        if kind == 'start':
            return self.build(tree.children[0], scope)
        if kind == 'top':
            return TOP
        if kind == 'bottom':
            return BOTTOM
        if kind == 'prop':
            name = str(tree.children[0])
            return Prop(scope.get(name, name))
        if kind == 'neg':
            token = tree.children[0]
            name = str(token)
            if name in scope:
                raise PositivityError(
                    f'¬{name} 出现在 {name} 的约束体中 (第 {token.line} 行, 第 {token.column} 列)'
                )
            return NegProp(name)
        if kind == 'or_':
            return Or(self.build(tree.children[0], scope), self.build(tree.children[1], scope))
        if kind == 'and_':
            return And(self.build(tree.children[0], scope), self.build(tree.children[1], scope))
        if kind == 'dia':
            return Dia(self.build(tree.children[0], scope))
        if kind == 'box':
            return Box(self.build(tree.children[0], scope))
        if kind in ('mu_binder', 'nu_binder'):
            token, body = tree.children
            name = str(token)
            internal = name
            if self.rename and (name in self.free or name in self.taken):
                internal = self.fresh(name)
                logger.debug(f'约束变量 {name} 改名为 {internal}')
            self.taken.add(internal)
            inner = dict(scope)
            inner[name] = internal
            fixpoint = Fixpoint.MU if kind == 'mu_binder' else Fixpoint.NU
            return binder(fixpoint, internal, self.build(body, inner))
        raise FormulaSyntaxError(f'无法识别的语法节点: {kind}')


def parse(text, rename=True):
    """
    解析公式文本

    Args:
        text: 公式文本，语法见 GRAMMAR
        rename: 为 True 时对与自由变量或其他约束变量重名的约束变量改名；
                为 False 时保持原名，只检查整洁性（用于读取证明文件）

    Returns:
        Formula: 整洁的公式
    """
    if not isinstance(text, str) or not text.strip():
        raise FormulaSyntaxError('公式文本不能为空')
    try:
        tree = _PARSER.parse(text)
    except UnexpectedEOF as exc:
        raise FormulaSyntaxError('公式意外结束', getattr(exc, 'line', None), getattr(exc, 'column', None)) from exc
    except (UnexpectedCharacters, UnexpectedToken) as exc:
        raise FormulaSyntaxError(f'无法解析: {text!r}', exc.line, exc.column) from exc
    except UnexpectedInput as exc:
        raise FormulaSyntaxError(f'无法解析: {text!r}', getattr(exc, 'line', None), getattr(exc, 'column', None)) from exc

    formula = _TreeBuilder(tree, rename).build(tree, {})
    if not is_tidy(formula):
        raise TidinessError(f'公式不整洁: {text!r}')
    return formula


def to_text(formula, prec=0):
    """按规范语法打印公式，parse(to_text(φ), rename=False) 还原 φ"""
    if isinstance(formula, Top):
        return 'true'
    if isinstance(formula, Bottom):
        return 'false'
    if isinstance(formula, Prop):
        return formula.name
    if isinstance(formula, NegProp):
        return f'~{formula.name}'
    if isinstance(formula, Or):
        text = f'{to_text(formula.left, 1)} | {to_text(formula.right, 2)}'
        return f'({text})' if prec > 1 else text
    if isinstance(formula, And):
        text = f'{to_text(formula.left, 2)} & {to_text(formula.right, 3)}'
        return f'({text})' if prec > 2 else text
    if isinstance(formula, Dia):
        return f'<>{to_text(formula.body, 3)}'
    if isinstance(formula, Box):
        return f'[]{to_text(formula.body, 3)}'
    text = f'{formula.fixpoint.value} {formula.var}. {to_text(formula.body, 0)}'
    return f'({text})' if prec > 0 else text


def to_latex(formula, prec=0):
    """LaTeX 形式，用于证明导出"""
    if isinstance(formula, Top):
        return r'\top'
    if isinstance(formula, Bottom):
        return r'\bot'
    if isinstance(formula, Prop):
        return formula.name
    if isinstance(formula, NegProp):
        return rf'\overline{{{formula.name}}}'
    if isinstance(formula, Or):
        text = rf'{to_latex(formula.left, 1)} \lor {to_latex(formula.right, 2)}'
        return f'({text})' if prec > 1 else text
    if isinstance(formula, And):
        text = rf'{to_latex(formula.left, 2)} \land {to_latex(formula.right, 3)}'
        return f'({text})' if prec > 2 else text
    if isinstance(formula, Dia):
        return rf'\Diamond {to_latex(formula.body, 3)}'
    if isinstance(formula, Box):
        return rf'\Box {to_latex(formula.body, 3)}'
    text = rf'\{formula.fixpoint.value} {formula.var} . {to_latex(formula.body, 0)}'
    return f'({text})' if prec > 0 else text


# ==================== 否定、代入与展开 ====================

@_cached
def boolean_dual(formula):
    """布尔对偶：μ↔ν、∧↔∨、◇↔□、⊤↔⊥，字面量保持不变"""
    if isinstance(formula, Top):
        return BOTTOM
    if isinstance(formula, Bottom):
        return TOP
    if is_literal(formula):
        return formula
    if isinstance(formula, Or):
        return And(boolean_dual(formula.left), boolean_dual(formula.right))
    if isinstance(formula, And):
        return Or(boolean_dual(formula.left), boolean_dual(formula.right))
    if isinstance(formula, Dia):
        return Box(boolean_dual(formula.body))
    if isinstance(formula, Box):
        return Dia(boolean_dual(formula.body))
    return binder(formula.fixpoint.dual, formula.var, boolean_dual(formula.body))


@_cached
def swap_literals(formula, letters):
    """交换 letters 中自由字母的正负字面量，letters 须为 frozenset"""
    if not (formula.free & letters):
        return formula
    if isinstance(formula, Prop):
        return NegProp(formula.name)
    if isinstance(formula, NegProp):
        return Prop(formula.name)
    if isinstance(formula, Or):
        return Or(swap_literals(formula.left, letters), swap_literals(formula.right, letters))
    if isinstance(formula, And):
        return And(swap_literals(formula.left, letters), swap_literals(formula.right, letters))
    if isinstance(formula, Dia):
        return Dia(swap_literals(formula.body, letters))
    if isinstance(formula, Box):
        return Box(swap_literals(formula.body, letters))
    return type(formula)(formula.var, swap_literals(formula.body, letters - {formula.var}))


def negation(formula):
    """否定 φ̄：布尔对偶后交换自由字母的正负字面量"""
    return swap_literals(boolean_dual(formula), formula.free)


@_cached
def _replace(chi, var, xi):
    if var not in chi.free:
        return chi
    if isinstance(chi, Prop):
        return xi
    if isinstance(chi, Or):
        return Or(_replace(chi.left, var, xi), _replace(chi.right, var, xi))
    if isinstance(chi, And):
        return And(_replace(chi.left, var, xi), _replace(chi.right, var, xi))
    if isinstance(chi, Dia):
        return Dia(_replace(chi.body, var, xi))
    if isinstance(chi, Box):
        return Box(_replace(chi.body, var, xi))
    # 约束变量同名时 var 不再自由，上面已返回
    return type(chi)(chi.var, _replace(chi.body, var, xi))


def substitute(chi, var, xi):
    """
    代入 χ[ξ/x]

    Args:
        chi: 被代入的公式，其中不得出现 ¬x
        var: 变量名 x
        xi: 代入的公式，FV(ξ) 与 BV(χ) 必须不交

    Returns:
        Formula: 将 χ 中 x 的全部自由出现替换为 ξ 后的公式
    """
    if var in chi.negated:
        raise PositivityError(f'¬{var} 出现在代入目标中')
    clash = xi.free & chi.bound
    if clash:
        raise CaptureError(f'代入会捕获变量: {sorted(clash)}')
    return _replace(chi, var, xi)


def unfold(formula):
    """不动点公式 ηx.χ 的展开 χ[ηx.χ/x]"""
    if not is_fixpoint(formula):
        raise NotAFixpointError(f'只能展开不动点公式: {to_text(formula)}')
    return substitute(formula.body, formula.var, formula)


# ==================== 闭包 ====================

def clos0(formula):
    """直接闭包后继"""
    if isinstance(formula, _Binary):
        return frozenset((formula.left, formula.right))
    if isinstance(formula, _Modal):
        return frozenset((formula.body,))
    if is_fixpoint(formula):
        return frozenset((unfold(formula),))
    return frozenset()


@_cached
def _closure_of(formula):
    seen = {formula}
    pending = [formula]
    while pending:
        current = pending.pop()
        for successor in clos0(current):
            if successor not in seen:
                seen.add(successor)
                pending.append(successor)
    return frozenset(seen)


def closure(formulas):
    """包含给定公式的最小 Clos₀ 饱和集"""
    if isinstance(formulas, Formula):
        formulas = (formulas,)
    result = set()
    for formula in formulas:
        result |= _closure_of(formula)
    return frozenset(result)


# ==================== 守卫性 ====================

@_cached
def unguarded_vars(formula):
    """在模态算子作用域之外自由出现的变量"""
    if is_literal(formula):
        return frozenset((formula.name,))
    if isinstance(formula, _Binary):
        return unguarded_vars(formula.left) | unguarded_vars(formula.right)
    if is_fixpoint(formula):
        return unguarded_vars(formula.body) - {formula.var}
    return frozenset()


@_cached
def is_guarded(formula):
    """每个约束变量在其约束体内都处于某个模态算子的作用域中"""
    if is_fixpoint(formula) and formula.var in unguarded_vars(formula.body):
        return False
    return all(is_guarded(child) for child in formula.children)


def _replace_unguarded(formula, var, constant):
    if var not in unguarded_vars(formula):
        return formula
    if isinstance(formula, Prop):
        return constant
    if isinstance(formula, Or):
        return Or(_replace_unguarded(formula.left, var, constant),
                  _replace_unguarded(formula.right, var, constant))
    if isinstance(formula, And):
        return And(_replace_unguarded(formula.left, var, constant),
                   _replace_unguarded(formula.right, var, constant))
    return type(formula)(formula.var, _replace_unguarded(formula.body, var, constant))


@_cached
def guard(formula):
    """
    守卫化变换

    自底向上处理：内层不动点先守卫化，然后把 ηx.ψ 中 x 的无守卫出现
    替换为 ⊥（μ）或 ⊤（ν）。对交替自由公式结果等价且仍交替自由。
    """
    if isinstance(formula, _Binary):
        return type(formula)(guard(formula.left), guard(formula.right))
    if isinstance(formula, _Modal):
        return type(formula)(guard(formula.body))
    if is_fixpoint(formula):
        body = guard(formula.body)
        constant = BOTTOM if formula.fixpoint is Fixpoint.MU else TOP
        return type(formula)(formula.var, _replace_unguarded(body, formula.var, constant))
    return formula


# ==================== 交替自由性 ====================

@_cached
def is_alternation_free(formula):
    """归纳判定：每个不动点的体对其约束变量属于同型 Noetherian 片段"""
    if is_fixpoint(formula):
        return in_noetherian(formula.body, formula.fixpoint, frozenset((formula.var,)))
    return all(is_alternation_free(child) for child in formula.children)


@_cached
def _in_noetherian(formula, fixpoint, letters):
    if not (formula.free & letters):
        return is_alternation_free(formula)
    if isinstance(formula, Prop):
        return True
    if isinstance(formula, NegProp):
        return False
    if is_fixpoint(formula):
        if formula.fixpoint is fixpoint:
            return _in_noetherian(formula.body, fixpoint, letters | {formula.var})
        return False
    return all(_in_noetherian(child, fixpoint, letters) for child in formula.children)


def in_noetherian(formula, fixpoint, letters=frozenset()):
    """
    η 型 Noetherian 片段的成员判定

    Args:
        formula: 待判定公式，可含作自由字母使用的记号变量
        fixpoint: 片段类型 η
        letters: 变量集合，其中变量不得出现在对偶类型的不动点算子之下
    """
    return _in_noetherian(formula, fixpoint, frozenset(letters))


@_cached
def is_alternation_free_direct(formula):
    """直接判据：ηx.ψ 中 x 的自由出现都不在对偶不动点算子的作用域内"""
    for sub in subformulas(formula):
        if not is_fixpoint(sub):
            continue
        for inner in subformulas(sub.body):
            if is_fixpoint(inner) and inner.fixpoint is not sub.fixpoint and sub.var in inner.free:
                return False
    return True


def require_fragment(formulas):
    """检查输入公式都是有守卫的交替自由公式"""
    for formula in formulas:
        if not is_guarded(formula):
            raise FragmentError(f'公式没有守卫: {to_text(formula)}')
        if not is_alternation_free(formula):
            raise FragmentError(f'公式不是交替自由的: {to_text(formula)}')


# ==================== 迹 ====================

@dataclass(frozen=True)
class TraceLasso:
    """无穷迹的有限表示：前缀加非空循环"""
    prefix: tuple
    loop: tuple

    def __post_init__(self):
        object.__setattr__(self, 'prefix', tuple(self.prefix))
        object.__setattr__(self, 'loop', tuple(self.loop))
        if not self.loop:
            raise TraceError('迹的循环部分不能为空')

    def steps(self):
        sequence = self.prefix + self.loop + self.loop[:1]
        return zip(sequence, sequence[1:])


def check_trace(lasso):
    """检查相邻公式满足 Clos₀ 后继关系"""
    for current, successor in lasso.steps():
        if successor not in clos0(current):
            raise TraceError(f'{to_text(successor)} 不是 {to_text(current)} 的闭包后继')


def dominant_formula(lasso):
    """循环中作为所有循环公式子公式的那个公式"""
    candidates = [
        formula for formula in set(lasso.loop)
        if all(formula in subformulas(other) for other in lasso.loop)
    ]
    if len(candidates) != 1 or not is_fixpoint(candidates[0]):
        raise TraceError('循环中没有唯一的主导不动点公式')
    return candidates[0]


def classify_trace(lasso):
    """
    判定迹是 μ-迹还是 ν-迹

    Returns:
        Fixpoint: 循环上只出现 μ 公式时为 MU，只出现 ν 公式时为 NU
    """
    check_trace(lasso)
    kinds = {formula.fixpoint for formula in lasso.loop if is_fixpoint(formula)}
    if len(kinds) != 1:
        raise TraceError(f'循环上的不动点类型不唯一: {sorted(kind.value for kind in kinds)}')
    kind = kinds.pop()
    if dominant_formula(lasso).fixpoint is not kind:
        raise TraceError('主导公式与循环的不动点类型不一致')
    return kind
