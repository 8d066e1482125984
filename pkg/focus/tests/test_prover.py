from django.test import SimpleTestCase

from mucalc.formula import closure, negation, parse
from mucalc.semantics import denote, find_countermodel
from mucalc.tests.factories import FormulaFactory

from focus.proofs import (
    FOCUSED, Rule, check_proof, is_progressive, is_thin, unravel_prefix,
)
from focus.prover import Invalid, Valid, annotated_sequent, decide, strategy_to_cyclic_proof
from focus.tableaux import build_tableau, solve_tableau_game


def _rules(proof):
    return [proof.rule(i) for i in range(len(proof))]


class DecideTests(SimpleTestCase):

    def test_small_cycle(self):
        result = decide([parse('nu x. []x')])
        self.assertIsInstance(result, Valid)
        self.assertEqual(_rules(result.proof), [Rule.D, Rule.NU, Rule.BOX, Rule.DISCHARGED])
        self.assertEqual(result.proof.nodes[3].companion, 0)
        self.assertEqual(check_proof(result.proof), [])

    def test_axioms(self):
        proof = decide([parse('p'), parse('~p')]).proof
        self.assertEqual(_rules(proof), [Rule.AX1])
        proof = decide([parse('p | ~p')]).proof
        self.assertEqual(_rules(proof), [Rule.OR, Rule.AX1])
        proof = decide([parse('true'), parse('<>p')]).proof
        self.assertEqual(_rules(proof), [Rule.W, Rule.AX2])

    def test_invalid(self):
        result = decide([parse('mu x. <>x')])
        self.assertIsInstance(result, Invalid)
        self.assertFalse(result.valid)
        self.assertEqual(result.model.successors(result.world), frozenset())
        data = result.to_json()
        self.assertEqual(data['verdict'], 'INVALID')
        self.assertEqual(data['world'], 's0')

    def test_valid_json(self):
        data = decide([parse('nu x. []x')]).to_json()
        self.assertEqual(data['verdict'], 'VALID')
        self.assertEqual(len(data['proof']['nodes']), 4)

    def test_root_fully_focused(self):
        game = solve_tableau_game(build_tableau([parse('p | <>q'), parse('[]~q')]))
        proof = strategy_to_cyclic_proof(game)
        sequent = annotated_sequent(game.tableau, game.arena.initial)
        self.assertEqual(proof.sequent(0), sequent)
        self.assertTrue(all(e.ann == FOCUSED for e in sequent))


class CorpusTests(SimpleTestCase):
    """随机公式上与有界模型搜索交叉检查"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        factory = FormulaFactory(seed=7, max_depth=3)
        cls.corpus = []
        while len(cls.corpus) < 500:
            formula = factory.formula()
            if len(closure(formula)) <= 40:
                cls.corpus.append(formula)
        cls.results = [(formula, decide([formula])) for formula in cls.corpus]

    def test_verdicts_agree_with_small_models(self):
        for formula, result in self.results:
            with self.subTest(formula=str(formula)):
                if result.valid:
                    self.assertIsNone(find_countermodel([formula], max_worlds=3))
                else:
                    self.assertNotIn(result.world, denote(formula, result.model))

    def test_valid_proof_objects(self):
        for formula, result in self.results:
            if not result.valid:
                continue
            with self.subTest(formula=str(formula)):
                proof = result.proof
                self.assertEqual(check_proof(proof), [])
                self.assertTrue(is_thin(proof))
                self.assertTrue(is_progressive(proof))
                for depth in range(4):
                    self.assertEqual(check_proof(unravel_prefix(proof, depth), allow_assumptions=True), [])

    def test_excluded_middle(self):
        for formula in self.corpus[:25]:
            with self.subTest(formula=str(formula)):
                result = decide([formula, negation(formula)])
                self.assertTrue(result.valid)
                proof = result.proof
                self.assertTrue(is_thin(proof))
                self.assertTrue(is_progressive(proof))
                self.assertEqual(check_proof(unravel_prefix(proof, 2), allow_assumptions=True), [])

    def test_schedules_agree(self):
        for formula in self.corpus[:60]:
            with self.subTest(formula=str(formula)):
                least = decide([formula], 'least')
                greatest = decide([formula], 'greatest')
                self.assertEqual(least.valid, greatest.valid)
