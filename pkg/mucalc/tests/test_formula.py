import gc
import weakref

from django.test import SimpleTestCase

from mucalc.formula import (
    BOTTOM, TOP, And, Box, CaptureError, Dia, Fixpoint, FormulaSyntaxError, FragmentError, Mu,
    NegProp, NotAFixpointError, Nu, Or, PositivityError, Prop, TidinessError, TraceError,
    TraceLasso, classify_trace, clear_caches, closure, dominant_formula, guard, in_noetherian,
    is_alternation_free, is_alternation_free_direct, is_fixpoint, is_guarded, negation, parse,
    require_fragment, substitute, subformulas, to_latex, to_text, unfold,
)
from mucalc.tests.factories import FormulaFactory


class ParseTests(SimpleTestCase):

    def test_precedence(self):
        self.assertIs(parse('p | ~q'), Or(Prop('p'), NegProp('q')))
        self.assertIs(parse('<>p & q'), And(Dia(Prop('p')), Prop('q')))
        self.assertIs(parse('p | q & r'), Or(Prop('p'), And(Prop('q'), Prop('r'))))
        self.assertIs(parse('[]<>true'), Box(Dia(TOP)))

    def test_binder_extends_right(self):
        expected = Mu('x', Or(Dia(Prop('x')), Prop('p')))
        self.assertIs(parse('mu x. <>x | p'), expected)
        self.assertIs(parse('q & nu y. []y'), And(Prop('q'), Nu('y', Box(Prop('y')))))

    def test_keywords_need_boundaries(self):
        self.assertIs(parse('mux'), Prop('mux'))
        self.assertIs(parse('nu_1 | truth'), Or(Prop('nu_1'), Prop('truth')))

    def test_hash_consing(self):
        self.assertIs(parse('p & <>q'), parse('(p) & (<>q)'))
        self.assertEqual(hash(parse('[]p')), hash(Box(Prop('p'))))

    def test_rename_clashing_binders(self):
        formula = parse('x | mu x. <>x')
        self.assertIs(formula.left, Prop('x'))
        self.assertEqual(formula.right.var, 'x_1')
        self.assertIs(formula.right.body, Dia(Prop('x_1')))

    def test_rename_repeated_binders(self):
        formula = parse('(mu x. <>x) & nu x. []x')
        self.assertEqual(formula.bound, frozenset({'x', 'x_1'}))

    def test_keep_names_rejects_untidy(self):
        with self.assertRaises(TidinessError):
            parse('x | mu x. <>x', rename=False)

    def test_positivity(self):
        with self.assertRaises(PositivityError):
            parse('mu x. ~x | <>x')

    def test_syntax_errors(self):
        for text in ('', 'p |', 'p & & q', 'mu . p', '(p', 'p q'):
            with self.subTest(text=text):
                with self.assertRaises(FormulaSyntaxError):
                    parse(text)

    def test_error_position(self):
        with self.assertRaises(FormulaSyntaxError) as ctx:
            parse('p & $')
        self.assertEqual(ctx.exception.line, 1)
        self.assertEqual(ctx.exception.column, 5)


class PrinterTests(SimpleTestCase):

    def test_examples(self):
        self.assertEqual(to_text(parse('(p | q) & r')), '(p | q) & r')
        self.assertEqual(to_text(parse('p | (q | r)')), 'p | (q | r)')
        self.assertEqual(to_text(parse('<>(mu x. []x) | p')), '<>(mu x. []x) | p')
        self.assertEqual(to_text(parse('(nu x. []x) & p')), '(nu x. []x) & p')

    def test_round_trip_on_corpus(self):
        for formula in FormulaFactory(seed=11).corpus(60):
            with self.subTest(formula=to_text(formula)):
                self.assertIs(parse(to_text(formula), rename=False), formula)

    def test_latex(self):
        self.assertEqual(to_latex(parse('mu x. ~p | <>x')), r'\mu x . \overline{p} \lor \Diamond x')


class AlgebraTests(SimpleTestCase):

    def test_negation_example(self):
        self.assertIs(negation(parse('mu x. p | <>x')), parse('nu x. ~p & []x'))
        self.assertIs(negation(TOP), BOTTOM)
        self.assertIs(negation(parse('[]~q')), parse('<>q'))

    def test_negation_is_involution(self):
        for formula in FormulaFactory(seed=3).corpus(60):
            with self.subTest(formula=to_text(formula)):
                self.assertIs(negation(negation(formula)), formula)
                self.assertEqual(negation(formula).free, formula.free)

    def test_unfold(self):
        formula = parse('mu x. p | <>x')
        self.assertIs(unfold(formula), Or(Prop('p'), Dia(formula)))
        with self.assertRaises(NotAFixpointError):
            unfold(parse('p'))

    def test_substitute(self):
        chi = parse('<>y & q')
        self.assertIs(substitute(chi, 'y', parse('[]p')), parse('<>[]p & q'))
        with self.assertRaises(CaptureError):
            substitute(parse('mu x. <>x | y'), 'y', Prop('x'))
        with self.assertRaises(PositivityError):
            substitute(parse('~y & q'), 'y', TOP)

    def test_tidiness_enforced_by_constructor(self):
        with self.assertRaises(TidinessError):
            Or(Prop('x'), Mu('x', Dia(Prop('x'))))

    def test_closure(self):
        formula = parse('mu x. p | <>x')
        self.assertEqual(closure(formula), {
            formula, Or(Prop('p'), Dia(formula)), Prop('p'), Dia(formula),
        })

    def test_closure_is_saturated(self):
        for formula in FormulaFactory(seed=5).corpus(30):
            members = closure(formula)
            for member in members:
                self.assertTrue(closure(member) <= members)

    def test_subformulas(self):
        self.assertEqual(subformulas(parse('p & <>q')), {
            parse('p & <>q'), Prop('p'), Dia(Prop('q')), Prop('q'),
        })


class FragmentTests(SimpleTestCase):

    def test_guard(self):
        formula = parse('mu x. x | <>x')
        self.assertFalse(is_guarded(formula))
        guarded = guard(formula)
        self.assertIs(guarded, parse('mu x. false | <>x'))
        self.assertTrue(is_guarded(guarded))
        self.assertIs(guard(parse('nu y. p & y')), parse('nu y. p & true'))

    def test_guard_keeps_guarded_formulas(self):
        for formula in FormulaFactory(seed=8).corpus(40):
            self.assertTrue(is_guarded(formula))
            self.assertIs(guard(formula), formula)

    def test_alternation(self):
        self.assertFalse(is_alternation_free(parse('nu x. mu y. <>y | []x')))
        self.assertTrue(is_alternation_free(parse('nu x. [](mu y. <>y | p) & []x')))
        self.assertTrue(is_alternation_free(parse('mu x. <>x | nu y. []y')))

    def test_inductive_and_direct_agree(self):
        texts = [
            'nu x. mu y. <>y | []x',
            'nu x. nu y. mu z. <>z | []y',
            'nu x. []x & mu y. <>y | p',
            'mu x. <>(nu y. []y & x)',
        ]
        formulas = [parse(text) for text in texts] + FormulaFactory(seed=21).corpus(60)
        for formula in formulas:
            with self.subTest(formula=to_text(formula)):
                self.assertEqual(is_alternation_free(formula), is_alternation_free_direct(formula))

    def test_in_noetherian(self):
        self.assertTrue(in_noetherian(parse('p & <>x'), Fixpoint.MU, {'x'}))
        self.assertFalse(in_noetherian(parse('nu y. []y & x'), Fixpoint.MU, {'x'}))
        self.assertTrue(in_noetherian(parse('nu y. []y & p'), Fixpoint.MU, {'x'}))

    def _fixpoint_instances(self):
        letters = {'p', 'q'}
        for formula in FormulaFactory(seed=31, max_depth=4).corpus(80):
            for sub in subformulas(formula):
                if is_fixpoint(sub):
                    yield sub, frozenset(sub.free - letters)

    def test_noetherian_grows_with_unused_variables(self):
        for sub, outer in self._fixpoint_instances():
            with self.subTest(formula=to_text(sub)):
                eta, body = sub.fixpoint, sub.body
                self.assertTrue(in_noetherian(body, eta, outer | {sub.var}))
                self.assertTrue(in_noetherian(body, eta, outer | {sub.var, 'y'}))
                self.assertTrue(in_noetherian(sub, eta, outer | {'y'}))

    def test_noetherian_closed_under_substitution(self):
        for sub, outer in self._fixpoint_instances():
            eta, body = sub.fixpoint, sub.body
            replacements = [TOP, Prop('p'), Or(NegProp('q'), Box(Prop('p'))), sub]
            replacements += [Dia(Prop(var)) for var in sorted(outer)]
            for xi in replacements:
                with self.subTest(formula=to_text(sub), xi=to_text(xi)):
                    self.assertTrue(in_noetherian(xi, eta, outer))
                    self.assertTrue(in_noetherian(substitute(body, sub.var, xi), eta, outer))
            self.assertTrue(in_noetherian(unfold(sub), eta, outer))

    def test_require_fragment(self):
        require_fragment([parse('mu x. p | <>x')])
        with self.assertRaises(FragmentError):
            require_fragment([parse('mu x. x | p')])
        with self.assertRaises(FragmentError):
            require_fragment([parse('nu x. mu y. <>y | []x')])


class TraceTests(SimpleTestCase):

    def test_nu_trace(self):
        formula = parse('nu x. []x')
        lasso = TraceLasso((), (formula, Box(formula)))
        self.assertIs(classify_trace(lasso), Fixpoint.NU)
        self.assertIs(dominant_formula(lasso), formula)

    def test_mu_trace_with_prefix(self):
        formula = parse('mu x. p | <>x')
        body = unfold(formula)
        lasso = TraceLasso((), (formula, body, Dia(formula)))
        self.assertIs(classify_trace(lasso), Fixpoint.MU)
        self.assertIs(classify_trace(TraceLasso((Dia(formula),), (formula, body, Dia(formula)))), Fixpoint.MU)

    def test_broken_trace(self):
        formula = parse('nu x. []x')
        with self.assertRaises(TraceError):
            classify_trace(TraceLasso((), (formula, formula)))
        with self.assertRaises(TraceError):
            TraceLasso((formula,), ())


class SharingTests(SimpleTestCase):

    def test_clear_caches_keeps_identity(self):
        formula = parse('mu x. p | <>x')
        members = closure(formula)
        clear_caches()
        self.assertIs(parse('mu x. p | <>x'), formula)
        self.assertEqual(closure(formula), members)
        self.assertTrue(is_alternation_free(formula))

    def test_unused_nodes_are_released(self):
        node = Dia(Prop('letter_only_used_here'))
        ref = weakref.ref(node)
        del node
        gc.collect()
        self.assertIsNone(ref())
