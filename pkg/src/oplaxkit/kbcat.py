"""The bounded homotopy category of projectives as a lazy oplax functor.

K^b(prj X(i)) has infinitely many objects, so it is never materialized as a
whole: :class:`KbView` exposes the action of index morphisms on individual
complexes, with unit and composition 2-cells acting entrywise (degreewise
diagonal grids of eta / theta components). Coherence is checked pointwise on
finite probe sets; because the action is entrywise, validity of the
underlying oplax functor makes the probes a sound certificate.

Finite full subcategories are materialized through
:func:`materialize_end_category`: homs are homotopy classes with a
deterministic representative basis, composition is representative composition
followed by class reduction. Homotopy equivalence of complexes reduces to an
object isomorphism in such an end category after Gaussian minimization.
"""

from __future__ import annotations

from dataclasses import dataclass

from .complexes import (
    ChainMap,
    Complex,
    add_chainmap,
    apply_functor,
    apply_functor_chainmap,
    compose_chainmap,
    hom_K,
    homotopic,
    identity_chainmap,
    minimal_form,
    scale_chainmap,
    shift,
    zero_chainmap,
)
from .fincat import FinCat, Mor, are_isomorphic, check_fincat
from .linalg import Matrix
from .oplax import LeftTransformation, OplaxFunctor
from .report import Report


def _diagonal_chainmap(dom: Complex, cod: Complex, component) -> ChainMap:
    """Chain map whose degree-d grid is diag(component(summand))."""
    base = cod.base
    grids = {}
    for d in dom.degrees:
        p, q = dom.proj(d), cod.proj(d)
        if len(p) != len(q):
            raise ValueError("diagonal chain map needs equal summand counts")
        rows = []
        for r in range(len(q)):
            row = []
            for c in range(len(p)):
                if r == c:
                    row.append(component(d, c))
                else:
                    row.append(base.zero_mor(p.summands[c], q.summands[r]))
            rows.append(tuple(row))
        grids[d] = tuple(rows)
    return ChainMap(dom, cod, grids, _skip_check=True)


class KbView:
    """Lazy K^b(prj X): act on complexes entrywise, 2-cells degreewise."""

    def __init__(self, x: OplaxFunctor):
        self.oplax = x
        self.index = x.index

    def cat(self, i: str) -> FinCat:
        return self.oplax.cat[i]

    def act(self, a: str, cx: Complex) -> Complex:
        return apply_functor(self.oplax.act[a], cx)

    def act_map(self, a: str, f: ChainMap) -> ChainMap:
        return apply_functor_chainmap(self.oplax.act[a], f)

    def eta_at(self, i: str, cx: Complex) -> ChainMap:
        """K(eta)_i at cx: X(id_i)-applied complex -> cx."""
        e = self.index.identity[i]
        dom = self.act(e, cx)
        eta = self.oplax.eta[i]
        return _diagonal_chainmap(dom, cx, lambda d, c: eta.at(cx.proj(d).summands[c]))

    def theta_at(self, pair, cx: Complex) -> ChainMap:
        """K(theta)_{b,a} at cx: X(ba)-applied -> X(b)X(a)-applied."""
        b, a = pair
        ba = self.index.compose(b, a)
        dom = self.act(ba, cx)
        cod = self.act(b, self.act(a, cx))
        th = self.oplax.theta[(b, a)]
        return _diagonal_chainmap(dom, cod, lambda d, c: th.at(cx.proj(d).summands[c]))


def kb_oplax(x: OplaxFunctor) -> KbView:
    return KbView(x)


def check_kb_coherence(view: KbView, probes) -> Report:
    """Oplax axioms of the K^b view on a finite probe set of complexes.

    ``probes``: i -> list of complexes over X(i). All equalities are exact at
    chain level (the entrywise construction satisfies them on the nose).
    """
    rep = Report("kb coherence")
    idx = view.index
    for a in idx.morphisms:
        i, j = idx.src(a), idx.tgt(a)
        for k, cx in enumerate(probes.get(i, [])):
            rep.tick(2)
            lhs = compose_chainmap(view.act_map(a, view.eta_at(i, cx)), view.theta_at((a, idx.identity[i]), cx))
            if lhs != identity_chainmap(view.act(a, cx)):
                rep.fail(f"kb-axiom-a1 (a={a}, probe {i}#{k})", "K(a)K(eta) o K(theta) != id")
            lhs = compose_chainmap(view.eta_at(j, view.act(a, cx)), view.theta_at((idx.identity[j], a), cx))
            if lhs != identity_chainmap(view.act(a, cx)):
                rep.fail(f"kb-axiom-a2 (a={a}, probe {i}#{k})", "K(eta)K(a) o K(theta) != id")
    for (c, b, a) in idx.composable_triples():
        i = idx.src(a)
        ba = idx.compose(b, a)
        cb = idx.compose(c, b)
        for k, cx in enumerate(probes.get(i, [])):
            rep.tick()
            lhs = compose_chainmap(view.act_map(c, view.theta_at((b, a), cx)), view.theta_at((c, ba), cx))
            rhs = compose_chainmap(view.theta_at((c, b), view.act(a, cx)), view.theta_at((cb, a), cx))
            if lhs != rhs:
                rep.fail(f"kb-axiom-b (c={c}, b={b}, a={a}, probe {i}#{k})", "associativity square broken")
    return rep


# -- materialized end categories -------------------------------------------------


@dataclass
class MaterializedCategory:
    cat: FinCat
    complexes: dict  # object name -> Complex
    homs: dict  # (name, name) -> HomotopyHom

    def to_chainmap(self, m: Mor) -> ChainMap:
        """Representative chain map of a morphism of the end category."""
        hh = self.homs[(m.src, m.tgt)]
        u = self.complexes[m.src]
        v = self.complexes[m.tgt]
        acc = zero_chainmap(u, v)
        for coef, rep in zip(m.coords, hh.basis):
            if coef:
                acc = add_chainmap(acc, scale_chainmap(coef, rep))
        return acc

    def to_class(self, src: str, tgt: str, f: ChainMap) -> Mor:
        """Homotopy class of a chain map as a morphism of the end category."""
        hh = self.homs[(src, tgt)]
        coords = hh.class_coords(f)
        if coords is None:
            raise ValueError("chain map is not parallel to the hom space")
        return Mor(src, tgt, coords)


def materialize_end_category(base: FinCat, named_complexes, name: str = "End") -> MaterializedCategory:
    """Finite full subcategory of K^b on the given complexes.

    Hom spaces are homotopy classes with the echelon representative basis;
    structure constants come from composing representatives and reducing.
    """
    named = list(named_complexes)
    names = [n for n, _ in named]
    if len(set(names)) != len(names):
        raise ValueError("duplicate object names")
    cxs = dict(named)
    field = base.field
    homs = {}
    for nu, u in named:
        for nv, v in named:
            homs[(nu, nv)] = hom_K(u, v, 0)
    hom_basis = {}
    for (nu, nv), hh in homs.items():
        if hh.dim:
            hom_basis[(nu, nv)] = tuple(f"e{k}" for k in range(hh.dim))
    comp = {}
    for nu, _ in named:
        for nv, _ in named:
            for nw, _ in named:
                d_uv = homs[(nu, nv)].dim
                d_vw = homs[(nv, nw)].dim
                d_uw = homs[(nu, nw)].dim
                cols = []
                for q in range(d_vw):
                    g = homs[(nv, nw)].basis[q]
                    for r in range(d_uv):
                        f = homs[(nu, nv)].basis[r]
                        composite = compose_chainmap(g, f)
                        coords = homs[(nu, nw)].class_coords(composite)
                        cols.append(coords if coords is not None else (field.zero,) * d_uw)
                ents = []
                for i in range(d_uw):
                    for col in cols:
                        ents.append(col[i])
                if d_uw * len(cols) or d_uw:
                    comp[(nu, nv, nw)] = Matrix(field, d_uw, len(cols), ents)
    id_coord = {}
    for nu, u in named:
        coords = homs[(nu, nu)].class_coords(identity_chainmap(u))
        id_coord[nu] = coords if coords is not None else ()
    cat = FinCat(field, names, hom_basis, comp, id_coord, name=name)
    rep = check_fincat(cat)
    if not rep.ok():
        raise RuntimeError("materialized end category failed its law check:\n" + rep.format_text())
    return MaterializedCategory(cat, cxs, homs)


def homotopy_equivalent(u: Complex, v: Complex):
    """Mutually homotopy-inverse chain maps (f: u -> v, g: v -> u), or None.

    Gaussian-minimize both sides, then test object isomorphism in the
    materialized end category of the minimal forms (Krull-Schmidt at the
    homotopy level) and transport the witness back.
    """
    if u.base != v.base:
        return None
    mu, pu, su = minimal_form(u)
    mv, pv, sv = minimal_form(v)
    if mu.is_zero() and mv.is_zero():
        return (compose_chainmap(sv, compose_chainmap(zero_chainmap(mu, mv), pu)),
                compose_chainmap(su, compose_chainmap(zero_chainmap(mv, mu), pv)))
    if mu == mv:
        f = compose_chainmap(sv, pu)
        g = compose_chainmap(su, pv)
        return (f, g)
    mat = materialize_end_category(u.base, [("U", mu), ("V", mv)])
    pair = are_isomorphic("U", "V", mat.cat)
    if pair is None:
        return None
    f0 = mat.to_chainmap(pair[0])
    g0 = mat.to_chainmap(pair[1])
    f = compose_chainmap(sv, compose_chainmap(f0, pu))
    g = compose_chainmap(su, compose_chainmap(g0, pv))
    return (f, g)


def is_homotopy_equivalence(f: ChainMap):
    """Two-sided homotopy inverse of f, or None."""
    mat = materialize_end_category(f.dom.base, [("U", f.dom), ("V", f.cod)])
    cls = mat.to_class("U", "V", f)
    from .fincat import is_invertible

    inv = is_invertible(cls, mat.cat)
    if inv is None:
        return None
    return mat.to_chainmap(inv)


def proj_isomorphic(base: FinCat, p, q):
    """Isomorphism test for formal projectives (degree-0 complexes)."""
    from .complexes import FormalProj

    u = Complex(base, {0: FormalProj(tuple(p))}, {})
    v = Complex(base, {0: FormalProj(tuple(q))}, {})
    return homotopy_equivalent(u, v)


# -- functors into complexes and transformations into the kb view ----------------------


class ComplexFunctor:
    """k-functor from a finite category into complexes over another base.

    Laws hold up to homotopy; :func:`check_complex_functor` verifies them.
    """

    def __init__(self, dom: FinCat, base: FinCat, obj_map, mor_map, name: str = "T"):
        self.dom = dom
        self.base = base
        self.obj_map = dict(obj_map)  # x -> Complex over base
        self.mor_map = dict(mor_map)  # (x, y, k) -> ChainMap for the k-th basis morphism
        self.name = name
        for x in dom.objects:
            if x not in self.obj_map:
                raise ValueError(f"missing image of {x}")
        for (x, y) in dom.hom_pairs():
            for k in range(dom.dim(x, y)):
                m = self.mor_map.get((x, y, k))
                if m is None:
                    raise ValueError(f"missing image of basis morphism ({x},{y},{k})")
                if m.dom != self.obj_map[x] or m.cod != self.obj_map[y]:
                    raise ValueError(f"image of ({x},{y},{k}) has wrong endpoints")

    def apply_obj(self, x: str) -> Complex:
        return self.obj_map[x]

    def apply_mor(self, f: Mor) -> ChainMap:
        acc = zero_chainmap(self.obj_map[f.src], self.obj_map[f.tgt])
        for k, coef in enumerate(f.coords):
            if coef:
                acc = add_chainmap(acc, scale_chainmap(coef, self.mor_map[(f.src, f.tgt, k)]))
        return acc


def check_complex_functor(t: ComplexFunctor) -> Report:
    rep = Report(f"complex functor {t.name}")
    c = t.dom
    for x in c.objects:
        rep.tick()
        if not homotopic(t.apply_mor(c.identity(x)), identity_chainmap(t.obj_map[x])):
            rep.fail(f"functor-id at {x}", "image of id is not homotopic to id")
    for (x, y) in c.hom_pairs():
        for (y2, z) in c.hom_pairs():
            if y2 != y:
                continue
            for r in range(c.dim(x, y)):
                for q in range(c.dim(y, z)):
                    rep.tick()
                    f = c.basis_mor(x, y, r)
                    g = c.basis_mor(y, z, q)
                    lhs = t.apply_mor(c.compose(g, f))
                    rhs = compose_chainmap(t.apply_mor(g), t.apply_mor(f))
                    if not homotopic(lhs, rhs):
                        rep.fail(f"functoriality ({x},{y},{z}) basis ({q},{r})", "images do not compose")
    return rep


def yoneda_cxfunctor(c: FinCat, name: str = "H") -> ComplexFunctor:
    from .complexes import yoneda

    obj_map = {x: yoneda(c, x) for x in c.objects}
    mor_map = {}
    for (x, y) in c.hom_pairs():
        for k in range(c.dim(x, y)):
            m = c.basis_mor(x, y, k)
            mor_map[(x, y, k)] = ChainMap(obj_map[x], obj_map[y], {0: ((m,),)}, _skip_check=True)
    return ComplexFunctor(c, c, obj_map, mor_map, name=name)


class CxTransformation:
    """1-morphism from a FinCat-valued oplax functor into a KbView.

    Components per index object are :class:`ComplexFunctor`s; psi components
    are chain maps act(a, F_i x) -> F_j(X(a) x), one per object of the domain
    category. 2-cell equalities are taken modulo homotopy (homs in K^b are
    homotopy classes).
    """

    def __init__(self, dom: OplaxFunctor, cod: KbView, comps, psi, name: str = "T"):
        if dom.index != cod.index:
            raise ValueError("transformation over different index categories")
        self.dom = dom
        self.cod = cod
        self.comps = dict(comps)  # i -> ComplexFunctor X(i) -> complexes over cod base
        self.psi = {a: dict(v) for a, v in psi.items()}  # a -> {x -> ChainMap}
        self.name = name

    def psi_at(self, a: str, x: str) -> ChainMap:
        return self.psi[a][x]


def check_cxtransformation(t: CxTransformation) -> Report:
    rep = Report(f"kb 1-morphism {t.name}")
    x = t.dom
    view = t.cod
    idx = x.index
    for i in idx.objects:
        rep.merge(check_complex_functor(t.comps[i]), prefix=f"F({i}) ")
    for a in idx.morphisms:
        i, j = idx.src(a), idx.tgt(a)
        fi, fj = t.comps[i], t.comps[j]
        for obj in x.cat[i].objects:
            comp = t.psi_at(a, obj)
            rep.tick()
            want_dom = view.act(a, fi.apply_obj(obj))
            want_cod = fj.apply_obj(x.act[a].apply_obj(obj))
            if comp.dom != want_dom or comp.cod != want_cod:
                rep.fail(f"psi[{a}] at {obj}", "component has wrong endpoints")
        # naturality modulo homotopy
        for (u, v) in x.cat[i].hom_pairs():
            for k in range(x.cat[i].dim(u, v)):
                rep.tick()
                f = x.cat[i].basis_mor(u, v, k)
                lhs = compose_chainmap(fj.apply_mor(x.act[a].apply_mor(f)), t.psi_at(a, u))
                rhs = compose_chainmap(t.psi_at(a, v), view.act_map(a, fi.apply_mor(f)))
                if not homotopic(lhs, rhs):
                    rep.fail(f"psi[{a}] naturality at ({u},{v},{k})", "square does not commute up to homotopy")
    if not rep.ok():
        return rep
    for i in idx.objects:
        e = idx.identity[i]
        fi = t.comps[i]
        for obj in x.cat[i].objects:
            rep.tick()
            lhs = compose_chainmap(fi.apply_mor(x.eta[i].at(obj)), t.psi_at(e, obj))
            rhs = view.eta_at(i, fi.apply_obj(obj))
            if not homotopic(lhs, rhs):
                rep.fail(f"axiom-a (i={i}, a={e}, at {obj})", "unit square fails up to homotopy")
    for (b, a) in idx.composable_pairs():
        i = idx.src(a)
        k_ob = idx.tgt(b)
        ba = idx.compose(b, a)
        fi = t.comps[i]
        fk = t.comps[k_ob]
        for obj in x.cat[i].objects:
            rep.tick()
            lhs = compose_chainmap(
                t.psi_at(b, x.act[a].apply_obj(obj)),
                compose_chainmap(view.act_map(b, t.psi_at(a, obj)), view.theta_at((b, a), fi.apply_obj(obj))),
            )
            rhs = compose_chainmap(fk.apply_mor(x.theta[(b, a)].at(obj)), t.psi_at(ba, obj))
            if not homotopic(lhs, rhs):
                rep.fail(f"axiom-b (b={b}, a={a}, at {obj})", "hexagon fails up to homotopy")
    return rep


def yoneda_1mor(x: OplaxFunctor) -> CxTransformation:
    """(H, phi^H): X -> K^b(prj X); in this representation phi is the identity."""
    view = KbView(x)
    comps = {i: yoneda_cxfunctor(x.cat[i]) for i in x.index.objects}
    psi = {}
    for a in x.index.morphisms:
        i = x.index.src(a)
        fa = x.act[a]
        psi[a] = {}
        for obj in x.cat[i].objects:
            stalk = comps[i].apply_obj(obj)
            psi[a][obj] = identity_chainmap(apply_functor(fa, stalk))
    return CxTransformation(x, view, comps, psi, name="H")


def precompose_cx(t: CxTransformation, g: LeftTransformation) -> CxTransformation:
    """Composite (t o g): dom(g) -> kb view, pasting psi components."""
    if g.cod != t.dom:
        raise ValueError("precompose shape mismatch")
    x = g.dom
    idx = x.index
    comps = {}
    for i in idx.objects:
        fi = t.comps[i]
        gi = g.comps[i]
        obj_map = {u: fi.apply_obj(gi.apply_obj(u)) for u in x.cat[i].objects}
        mor_map = {}
        for (u, v) in x.cat[i].hom_pairs():
            for k in range(x.cat[i].dim(u, v)):
                mor_map[(u, v, k)] = fi.apply_mor(gi.apply_mor(x.cat[i].basis_mor(u, v, k)))
        comps[i] = ComplexFunctor(x.cat[i], fi.base, obj_map, mor_map, name=f"{t.name}{g.name}({i})")
    psi = {}
    for a in idx.morphisms:
        i, j = idx.src(a), idx.tgt(a)
        psi[a] = {}
        for u in x.cat[i].objects:
            first = t.psi_at(a, g.comps[i].apply_obj(u))
            second = t.comps[j].apply_mor(g.psi[a].at(u))
            psi[a][u] = compose_chainmap(second, first)
    return CxTransformation(x, t.cod, comps, psi, name=f"{t.name}*{g.name}")
