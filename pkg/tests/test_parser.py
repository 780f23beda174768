import random

import pytest

import polardl as P
from polardl.errors import ParseError, SerializationError, UndeclaredRoleError

import fuzz


class TestParse:
    def test_minimal_document(self):
        kb = P.parse_kb("obj m4. feat f1. m4 : IM.")
        assert kb.obj_names == ("m4",)
        assert kb.feat_names == ("f1",)
        assert kb.abox == {P.member(P.named_obj("m4"), P.atom("IM"))}

    def test_movie_document(self, movies_kb):
        assert len(movies_kb.abox) == 20          # 12 source + 8 user terms
        assert len(movies_kb.tbox) == 4
        assert movies_kb.box_roles == 2 and movies_kb.dia_roles == 2
        kinds = [ax.kind for ax in movies_kb.tbox]
        assert kinds.count("sub") == 1 and kinds.count("equiv") == 3

    def test_syntax_error_at_end_of_input(self):
        with pytest.raises(ParseError) as err:
            P.parse_kb("obj m4. m4 : IM and")
        assert "end of input" in str(err.value)

    def test_error_positions(self):
        with pytest.raises(ParseError) as err:
            P.parse_kb("obj m4.\nfeat f1.\nm4 : : IM.")
        assert err.value.line == 3

    def test_sort_error(self):
        with pytest.raises(ParseError) as err:
            P.parse_kb("obj m4. feat f1. f1 : IM.")
        assert "used as an object" in str(err.value)

    def test_undeclared_individual(self):
        with pytest.raises(ParseError):
            P.parse_kb("obj m4. m5 : IM.")

    def test_undeclared_role_index(self):
        with pytest.raises(UndeclaredRoleError):
            P.parse_kb("roles box 1 dia 1. obj m. feat f. m Rbox2 f.")
        with pytest.raises(UndeclaredRoleError):
            P.parse_kb("roles box 1 dia 1. obj m. m : dia2 D.")

    def test_double_sort_declaration(self):
        with pytest.raises(ParseError):
            P.parse_kb("obj n. feat n.")

    def test_individual_name_as_concept(self):
        with pytest.raises(ParseError):
            P.parse_kb("obj m. feat f. m : f.")

    def test_comments_and_negation(self):
        kb = P.parse_kb("# header\nobj b. feat y.\nnot b I y. # trailing\n")
        assert kb.abox == {P.neg(P.rel_i(P.named_obj("b"), P.named_feat("y")))}

    def test_precedence_and_associativity(self):
        kb = P.parse_kb("roles box 1 dia 1. obj m. m : box1 A and B or C.")
        (term,) = kb.abox
        # box binds tightest, then and, then or; chains associate right
        want = P.join(P.meet(P.box(1, P.atom("A")), P.atom("B")), P.atom("C"))
        assert term.concept is want
        kb2 = P.parse_kb("obj m. m : A and B and C.")
        (term2,) = kb2.abox
        assert term2.concept is P.meet(P.atom("A"),
                                       P.meet(P.atom("B"), P.atom("C")))


class TestSerialize:
    def test_empty_kb_round_trip(self):
        kb = P.KnowledgeBase()
        text = P.serialize_kb(kb)
        again = P.parse_kb(text)
        assert again.abox == kb.abox and again.tbox == kb.tbox

    def test_movie_round_trip(self, movies_kb):
        again = P.parse_kb(P.serialize_kb(movies_kb))
        assert again.abox == movies_kb.abox
        assert again.tbox == movies_kb.tbox
        assert set(again.obj_names) == set(movies_kb.obj_names)
        assert set(again.feat_names) == set(movies_kb.feat_names)

    def test_synthetic_names_rejected(self):
        kb = P.KnowledgeBase(
            obj_names=("b",), feat_names=("y",),
            abox=frozenset({P.rel_i(P.adj_diamond(P.named_obj("b"), 1),
                                    P.named_feat("y"))}))
        with pytest.raises(SerializationError):
            P.serialize_kb(kb)

    def test_random_round_trips(self):
        rng = random.Random(7)
        for _ in range(60):
            abox = fuzz.random_abox(rng, n_terms=rng.randint(1, 8))
            kb = P.KnowledgeBase(
                obj_names=tuple(sorted({str(i) for a in abox
                                        for i in a.individuals()
                                        if i.sort == "obj"})),
                feat_names=tuple(sorted({str(i) for a in abox
                                         for i in a.individuals()
                                         if i.sort == "feat"})),
                box_roles=2, dia_roles=2, abox=abox)
            again = P.parse_kb(P.serialize_kb(kb))
            assert again.abox == kb.abox


class TestTermHelpers:
    def test_parse_concept(self, movies_kb):
        c = P.parse_concept("box2 (RM and DM)", movies_kb)
        assert c is P.box(2, P.meet(P.atom("RM"), P.atom("DM")))

    def test_parse_concept_rejects_trailing(self, movies_kb):
        with pytest.raises(ParseError):
            P.parse_concept("RM and", movies_kb)

    def test_parse_term(self, movies_kb):
        t = P.parse_term("m3 Rbox1 f3", movies_kb)
        assert t is P.rel_box(1, P.named_obj("m3"), P.named_feat("f3"))
        t2 = P.parse_term("not m1 I f2", movies_kb)
        assert t2 is P.neg(P.rel_i(P.named_obj("m1"), P.named_feat("f2")))

    def test_parse_individual(self, movies_kb):
        assert P.parse_individual("m1", movies_kb) is P.named_obj("m1")
        with pytest.raises(ParseError):
            P.parse_individual("nobody", movies_kb)
