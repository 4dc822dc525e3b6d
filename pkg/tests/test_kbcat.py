import random

from oplaxkit.complexes import ChainMap, compose_chainmap, cone, homotopic, identity_chainmap, shift, yoneda
from oplaxkit.field import GF, QQ
from oplaxkit.fincat import are_isomorphic
from oplaxkit.kbcat import (
    KbView,
    check_cxtransformation,
    check_kb_coherence,
    homotopy_equivalent,
    is_homotopy_equivalence,
    materialize_end_category,
    precompose_cx,
    proj_isomorphic,
    yoneda_1mor,
)
from oplaxkit.oplax import identity_1mor
from .helpers import a2_category, retract_category
from .test_oplax import retract_delta


def a2_t1(c):
    a = ChainMap(yoneda(c, "1"), yoneda(c, "2"), {0: ((c.mor("1", "2", [1]),),)}, name="a")
    return cone(a, name="T1")


class TestKbView:
    def test_probe_coherence_on_stalks(self):
        x = retract_delta()
        view = KbView(x)
        probes = {i: [yoneda(x.cat[i], o) for o in x.cat[i].objects] for i in x.index.objects}
        rep = check_kb_coherence(view, probes)
        assert rep.ok(), rep.format_text()

    def test_probe_coherence_on_two_term_complexes(self):
        x = retract_delta()
        c = x.cat["1"]
        t = cone(ChainMap(yoneda(c, "x"), yoneda(c, "y"), {0: ((c.mor("x", "y", [1]),),)}))
        rep = check_kb_coherence(KbView(x), {i: [t] for i in x.index.objects})
        assert rep.ok(), rep.format_text()

    def test_identity_morphism_acts_entrywise(self):
        x = retract_delta()
        view = KbView(x)
        c = x.cat["1"]
        t = yoneda(c, "x")
        assert view.act("id_1", t) == yoneda(c, "y")  # X(id) = E here, E(x) = y


class TestMaterialize:
    def test_stalks_reproduce_base_category(self):
        for c in (retract_category(), a2_category(), a2_category(GF(2))):
            mat = materialize_end_category(c, [(o, yoneda(c, o)) for o in c.objects])
            assert mat.cat.objects == c.objects
            for (x, y) in c.hom_pairs():
                assert mat.cat.dim(x, y) == c.dim(x, y)
            # structure constants agree in the canonical bases
            for key, m in c.comp.items():
                assert mat.cat.comp_matrix(*key) == m
            assert mat.cat.id_coord == c.id_coord

    def test_a2_tilted_end_category(self):
        c = a2_category()
        mat = materialize_end_category(c, [("T1", a2_t1(c)), ("T2", yoneda(c, "2"))])
        assert mat.cat.dim("T1", "T1") == 1
        assert mat.cat.dim("T2", "T2") == 1
        assert mat.cat.dim("T2", "T1") == 1
        assert mat.cat.dim("T1", "T2") == 0

    def test_empty_list(self):
        c = a2_category()
        mat = materialize_end_category(c, [])
        assert mat.cat.objects == ()

    def test_class_round_trip(self):
        c = a2_category()
        mat = materialize_end_category(c, [("T1", a2_t1(c)), ("T2", yoneda(c, "2"))])
        m = mat.cat.basis_mor("T2", "T1", 0)
        rep = mat.to_chainmap(m)
        assert mat.to_class("T2", "T1", rep) == m


class TestHomotopyEquivalence:
    def test_formal_sum_symmetry(self):
        c = a2_category()
        pair = proj_isomorphic(c, ("1", "2"), ("2", "1"))
        assert pair is not None
        f, g = pair
        assert homotopic(compose_chainmap(g, f), identity_chainmap(f.dom))
        assert homotopic(compose_chainmap(f, g), identity_chainmap(f.cod))

    def test_distinct_stalks_not_equivalent(self):
        c = a2_category()
        assert homotopy_equivalent(yoneda(c, "1"), yoneda(c, "2")) is None

    def test_cone_vs_shifted_stalk(self):
        c = a2_category()
        t1 = a2_t1(c)
        g = ChainMap(yoneda(c, "2"), t1, {0: ((c.identity("2"),),)})
        pair = homotopy_equivalent(cone(g), shift(yoneda(c, "1"), 1))
        assert pair is not None
        f, ginv = pair
        assert homotopic(compose_chainmap(ginv, f), identity_chainmap(f.dom))
        assert homotopic(compose_chainmap(f, ginv), identity_chainmap(f.cod))

    def test_is_homotopy_equivalence_detects(self):
        c = a2_category()
        t1 = a2_t1(c)
        good = homotopy_equivalent(cone(ChainMap(yoneda(c, "2"), t1, {0: ((c.identity("2"),),)})), shift(yoneda(c, "1"), 1))[0]
        assert is_homotopy_equivalence(good) is not None
        zero = ChainMap(yoneda(c, "1"), yoneda(c, "1"), {})
        assert is_homotopy_equivalence(zero) is None


class TestYoneda1Mor:
    def test_yoneda_1mor_checks(self):
        x = retract_delta()
        h = yoneda_1mor(x)
        rep = check_cxtransformation(h)
        assert rep.ok(), rep.format_text()

    def test_yoneda_full_faithful_dims(self):
        x = retract_delta()
        h = yoneda_1mor(x)
        from oplaxkit.complexes import hom_K

        for i in x.index.objects:
            c = x.cat[i]
            for u in c.objects:
                for v in c.objects:
                    assert hom_K(h.comps[i].apply_obj(u), h.comps[i].apply_obj(v), 0).dim == c.dim(u, v)

    def test_precompose_with_identity(self):
        x = retract_delta()
        h = yoneda_1mor(x)
        comp = precompose_cx(h, identity_1mor(x))
        rep = check_cxtransformation(comp)
        assert rep.ok(), rep.format_text()
        for i in x.index.objects:
            for o in x.cat[i].objects:
                assert comp.comps[i].apply_obj(o) == h.comps[i].apply_obj(o)
