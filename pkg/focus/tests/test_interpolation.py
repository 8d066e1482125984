from django.test import SimpleTestCase, override_settings

from mucalc.formula import BOTTOM, TOP, Fixpoint, is_alternation_free, negation, parse
from mucalc.tests.factories import FormulaFactory, ImplicationFactory

from focus.interpolation import (
    TRANSPARENT, ColouringError, InterpolationError, NodewisePartition, balance,
    connectedness_classes, fixpoint_colouring, induce_partition, interpolant, interpolate,
    simple_negation, simplify,
)
from focus.proofs import FOCUSED, UNFOCUSED, Annotated, Proof, ProofTree, Rule, annotate, check_proof
from focus.prover import decide
from focus.tests import worked_example

A = parse('nu x. []x')
G = parse('nu y. <>((nu x. []x) | y)', rename=False)


def _f(formula):
    return Annotated(formula, FOCUSED)


def _equivalent(first, second):
    return decide([negation(first), second]).valid and decide([negation(second), first]).valid


def swap_proof():
    """
    一个不平衡的小证明：{A, G} 的左侧为 A，回到伙伴时 A 来自 G 的展开，划入右侧
    """
    root = ProofTree(annotate([A, G]))
    (node,) = root.expand(Rule.D)
    root.token = 'x0'
    (node,) = node.expand(Rule.NU, _f(A))
    (node,) = node.expand(Rule.NU, _f(G))
    (node,) = node.expand(Rule.BOX)
    (leaf,) = node.expand(Rule.OR, _f(parse('(nu x. []x) | (nu y. <>((nu x. []x) | y))', rename=False)))
    leaf.discharge('x0')
    return Proof.from_tree(root)


def balanced_swap():
    proof = swap_proof()
    return balance(proof, induce_partition(proof, {_f(A)}))


def _axiom(*texts):
    return Proof.from_tree(ProofTree(frozenset(_f(parse(t)) for t in texts), Rule.AX1))


class PartitionTests(SimpleTestCase):

    def test_box_follows_side(self):
        box, dia_p, dia_q = _f(parse('[]p')), _f(parse('<>p')), Annotated(parse('<>q'), UNFOCUSED)
        root = ProofTree(frozenset({box, dia_p, dia_q}))
        root.expand(Rule.BOX)
        proof = Proof.from_tree(root)
        body_p, body_q = _f(parse('p')), Annotated(parse('q'), UNFOCUSED)

        left_box = induce_partition(proof, {box, dia_q})
        self.assertEqual(left_box.left[1], frozenset({body_p, body_q}))
        left_dia = induce_partition(proof, {dia_p})
        self.assertEqual(left_dia.left[1], frozenset())
        self.assertEqual(left_dia.right(1), frozenset({body_p, body_q}))

    def test_root_split_must_be_subset(self):
        with self.assertRaises(InterpolationError):
            induce_partition(_axiom('p', '~p'), {_f(parse('q'))})

    def test_worked_example_is_balanced(self):
        proof = worked_example.build_proof()
        partition = induce_partition(proof, worked_example.left_root(proof))
        self.assertTrue(partition.is_balanced())
        (leaf,) = proof.discharged_leaves()
        self.assertIn(_f(worked_example.PHI), partition.left[leaf])
        self.assertEqual(balance(proof, partition), (proof, partition))

    def test_balance_unravels_swapped_split(self):
        proof = swap_proof()
        self.assertEqual(check_proof(proof), [])
        partition = induce_partition(proof, {_f(A)})
        self.assertFalse(partition.is_balanced())

        balanced, result = balance(proof, partition)
        self.assertEqual(len(balanced), 10)
        self.assertTrue(result.is_balanced())
        self.assertEqual(check_proof(balanced), [])
        self.assertEqual(balanced.rule(0), Rule.NU)
        self.assertEqual(balanced.rule(4), Rule.D)
        self.assertEqual(result.left[4], frozenset())

    @override_settings(FOCUS={'MAX_BALANCE_NODES': 4})
    def test_balance_limit(self):
        proof = swap_proof()
        with self.assertRaises(InterpolationError):
            balance(proof, induce_partition(proof, {_f(A)}))


class ColouringTests(SimpleTestCase):

    def test_worked_example(self):
        proof = worked_example.build_proof()
        partition = induce_partition(proof, worked_example.left_root(proof))
        (component,) = connectedness_classes(proof)
        (leaf,) = proof.discharged_leaves()
        self.assertEqual(component, frozenset(proof.path(proof.nodes[leaf].companion, leaf)))
        colouring = fixpoint_colouring(proof, partition)
        self.assertEqual(colouring.summary()['mu'], len(component))
        self.assertEqual(colouring.summary()['transparent'], len(proof) - len(component))

    def test_right_side_gives_nu(self):
        proof, partition = balanced_swap()
        colouring = fixpoint_colouring(proof, partition)
        self.assertEqual(colouring.summary(), {'mu': 0, 'nu': 6, 'transparent': 4})
        self.assertEqual(colouring.colour[0], TRANSPARENT)
        self.assertIs(colouring.colour[4], Fixpoint.NU)

    def test_mixed_class(self):
        proof = decide([parse('nu x. []x')]).proof
        mixed = NodewisePartition(proof, (frozenset(), proof.sequent(1), frozenset(), frozenset()))
        with self.assertRaises(ColouringError):
            fixpoint_colouring(proof, mixed)


class InterpolantTests(SimpleTestCase):

    def _run(self, proof, left):
        partition = induce_partition(proof, left)
        return interpolant(proof, partition, fixpoint_colouring(proof, partition))

    def test_axiom_splits(self):
        proof = _axiom('p', '~p')
        self.assertIs(self._run(proof, {_f(parse('~p'))}), parse('p'))
        self.assertIs(self._run(proof, {_f(parse('p'))}), parse('~p'))
        self.assertIs(self._run(proof, proof.sequent(0)), BOTTOM)
        self.assertIs(self._run(proof, set()), TOP)

    def test_worked_example(self):
        proof = worked_example.build_proof()
        raw = self._run(proof, worked_example.left_root(proof))
        self.assertEqual(raw.free, frozenset({'r'}))
        self.assertTrue(_equivalent(raw, worked_example.EXPECTED))

    def test_swap_proof(self):
        proof, partition = balanced_swap()
        raw = interpolant(proof, partition, fixpoint_colouring(proof, partition))
        self.assertIs(raw, parse('<>(nu x0. []x0)', rename=False))
        self.assertTrue(decide([A, raw]).valid)
        self.assertTrue(decide([negation(raw), G]).valid)

    def test_open_assumption(self):
        root = ProofTree(annotate([parse('p'), parse('<>q')]))
        root.expand(Rule.W, _f(parse('<>q')))
        proof = Proof.from_tree(root)
        with self.assertRaises(InterpolationError):
            self._run(proof, {_f(parse('p'))})

    def test_simple_negation(self):
        self.assertIs(simple_negation(parse('p & <>q')), parse('~p | []~q'))
        self.assertIs(simple_negation(parse('mu x. p | <>x')), parse('nu x. ~p & []x'))
        self.assertIs(simple_negation(parse('<>x & p'), {'x'}), parse('[]x | ~p'))
        for formula in FormulaFactory(seed=3, max_depth=3).corpus(10):
            self.assertIs(simple_negation(formula), negation(formula))

    def test_simplify(self):
        self.assertIs(simplify(parse('false | (true & <>false)')), BOTTOM)
        self.assertIs(simplify(parse('[]true & p')), parse('p'))
        self.assertIs(simplify(parse('mu x. (false | r) & <>x')), parse('mu x. r & <>x'))
        self.assertIs(simplify(parse('p | q')), parse('p | q'))


class InterpolateTests(SimpleTestCase):

    def test_propositional(self):
        result = interpolate(parse('p & q'), parse('p | r'))
        self.assertTrue(result.left_valid and result.right_valid and result.free_ok)
        self.assertLessEqual(result.raw.free, frozenset({'p'}))
        self.assertTrue(_equivalent(result.raw, parse('p')))
        self.assertEqual(result.to_json()['left_valid'], True)

    def test_identity(self):
        result = interpolate(parse('p'), parse('p'))
        self.assertIs(result.raw, parse('p'))

    def test_invalid_implication(self):
        with self.assertRaises(InterpolationError) as ctx:
            interpolate(parse('p'), parse('q'))
        self.assertIsNotNone(ctx.exception.model)
        self.assertIsNotNone(ctx.exception.world)

    @override_settings(FOCUS={'SIMPLIFY_INTERPOLANTS': True})
    def test_simplified_result(self):
        result = interpolate(parse('p & q'), parse('p | r'))
        self.assertIs(result.formula, result.simplified)

    def test_fixpoint_implication(self):
        result = interpolate(parse('nu x. p & []x'), parse('nu y. (p | q) & [][]y'))
        self.assertLessEqual(result.raw.free, frozenset({'p'}))
        self.assertTrue(result.left_valid and result.right_valid)

    def test_worked_example_end_to_end(self):
        phi = negation(worked_example.LEFT_ROOT)
        result = interpolate(phi, worked_example.RIGHT_ROOT)
        self.assertLessEqual(result.raw.free, frozenset({'r'}))
        self.assertTrue(result.left_valid and result.right_valid and result.free_ok)

    def test_generated_implications(self):
        for phi, psi in ImplicationFactory(seed=11).corpus(100):
            with self.subTest(phi=str(phi), psi=str(psi)):
                result = interpolate(phi, psi)
                self.assertTrue(result.free_ok)
                self.assertLessEqual(result.raw.free, phi.free & psi.free)
                self.assertTrue(is_alternation_free(result.raw))
                self.assertTrue(result.left_valid and result.right_valid)
