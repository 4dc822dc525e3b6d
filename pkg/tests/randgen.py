"""Randomized generators for the 2-category law suites.

Strategy: free path categories on random acyclic quivers give valid finite
k-linear categories; duplicated-object categories with conjugated hom bases
give genuine adjoint equivalences (with scalar-twisted units for variety);
comonads come from those adjunctions; 1-morphisms come from the
adjoint-induced construction and from transports along invertible natural
automorphisms, which also supply modifications.
"""

from __future__ import annotations

import random

from oplaxkit.fincat import (
    FinCat,
    KFunctor,
    Matrix,
    Mor,
    NatTrans,
    Presentation,
    identity_functor,
    identity_nattrans,
    is_invertible,
    nattrans_space,
    realize,
)
from oplaxkit.linalg import inverse
from oplaxkit.oplax import (
    AdjunctionFamily,
    IndexCat,
    LeftTransformation,
    Modification,
    NatTrans,
    OplaxFunctor,
    comonad_from_adjunction,
    free_index,
    trivial_index,
)


def random_fincat(field, rng: random.Random, max_objects: int = 3) -> FinCat:
    """Free path category on a random acyclic quiver (hom dims stay small)."""
    n = rng.randint(1, max_objects)
    vertices = tuple(f"v{k}" for k in range(1, n + 1))
    arrows = []
    for i in range(n):
        for j in range(i + 1, n):
            for copy in range(rng.choice([0, 0, 1, 1, 2])):
                if len(arrows) >= 3:
                    break
                arrows.append((f"a{i+1}{j+1}_{copy}", vertices[i], vertices[j]))
    pres = Presentation(field, vertices, tuple(arrows), (), max(2, n))
    c = realize(pres)
    c.name = "Crand"
    return c


def random_invertible_matrix(field, rng: random.Random, n: int) -> Matrix:
    while True:
        if field.p is None:
            m = Matrix.from_rows(field, [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)])
        else:
            m = Matrix.from_rows(field, [[rng.randrange(field.p) for _ in range(n)] for _ in range(n)])
        if n == 0 or inverse(m) is not None:
            return m


def _connected_components(c: FinCat):
    parent = {x: x for x in c.objects}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (x, y) in c.hom_pairs():
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry
    return {x: find(x) for x in c.objects}


def random_equivalence_adjunction(c: FinCat, rng: random.Random):
    """An adjoint equivalence L: c -> c', R: c' -> c with invertible unit.

    c' duplicates each object 1-2 times and conjugates every hom space by a
    random invertible change of basis; the unit is a scalar twist of the
    identity, constant on connected components.
    """
    field = c.field
    copies = {x: rng.randint(1, 2) for x in c.objects}
    objs = tuple(f"{x}@{t}" for x in c.objects for t in range(1, copies[x] + 1))
    of = {o: o.rsplit("@", 1)[0] for o in objs}  # c' object -> c object
    u_mats = {}
    for ox in objs:
        for oy in objs:
            d = c.dim(of[ox], of[oy])
            u_mats[(ox, oy)] = random_invertible_matrix(field, rng, d)
    hom_basis = {}
    for ox in objs:
        for oy in objs:
            base = c.basis_labels(of[ox], of[oy])
            if base:
                hom_basis[(ox, oy)] = tuple(f"{lbl}'" for lbl in base)
    comp = {}
    for ox in objs:
        for oy in objs:
            for oz in objs:
                x, y, z = of[ox], of[oy], of[oz]
                dxz = c.dim(x, z)
                dyz, dxy = c.dim(y, z), c.dim(x, y)
                if dyz * dxy == 0 and dxz == 0:
                    continue
                uyz, uxy = u_mats[(oy, oz)], u_mats[(ox, oy)]
                uxz_inv = inverse(u_mats[(ox, oz)]) if dxz else Matrix.zeros(field, 0, 0)
                # comp' = U_xz^{-1} comp (U_yz (x) U_xy)
                kron_ents = []
                for q1 in range(dyz):
                    for r1 in range(dxy):
                        for q2 in range(dyz):
                            for r2 in range(dxy):
                                kron_ents.append(field.mul(uyz[q1, q2], uxy[r1, r2]))
                kron = Matrix(field, dyz * dxy, dyz * dxy, kron_ents)
                comp[(ox, oy, oz)] = uxz_inv @ c.comp_matrix(x, y, z) @ kron
    id_coord = {}
    for ox in objs:
        x = of[ox]
        uxx_inv = inverse(u_mats[(ox, ox)])
        vec = uxx_inv @ Matrix.column(field, c.id_coord[x])
        id_coord[ox] = vec.col(0)
    cp = FinCat(field, objs, hom_basis, comp, id_coord, name=f"{c.name}~")

    # R: c' -> c via the U matrices; L: c -> c' hitting a random copy
    r_fun = KFunctor(cp, c, of, {(ox, oy): u_mats[(ox, oy)] for (ox, oy) in cp.hom_pairs()}, name="R")
    lcopy = {x: f"{x}@{rng.randint(1, copies[x])}" for x in c.objects}
    l_hom = {}
    for (x, y) in c.hom_pairs():
        l_hom[(x, y)] = inverse(u_mats[(lcopy[x], lcopy[y])])
    l_fun = KFunctor(c, cp, lcopy, l_hom, name="L")

    comps = _connected_components(c)
    lam = {}
    for x in c.objects:
        root = comps[x]
        if root not in lam:
            if field.p is None:
                lam[root] = field.coerce(rng.choice([1, 1, 2, 3, -1]))
            else:
                lam[root] = field.coerce(rng.randrange(1, field.p))
        lam[x] = lam[root]
    # unit: Id => RL is lambda * id; counit absorbs lambda^{-1}
    unit = NatTrans(
        identity_functor(c),
        # RL = Id on the nose by construction
        identity_functor(c),
        {x: c.scale_mor(lam[x], c.identity(x)) for x in c.objects},
    )
    lr = None
    counit_comp = {}
    for o in objs:
        x = of[o]
        # R^{-1}(id_x) from L R o = lcopy[x] to o, scaled by lambda^{-1}
        d = cp.dim(lcopy[x], o)
        sol = inverse(u_mats[(lcopy[x], o)]) @ Matrix.column(field, c.id_coord[x])
        m = Mor(lcopy[x], o, sol.col(0))
        counit_comp[o] = cp.scale_mor(field.inv(lam[x]), m)
    from oplaxkit.fincat import compose_functors

    counit = NatTrans(compose_functors(l_fun, r_fun), identity_functor(cp), counit_comp)
    return l_fun, r_fun, unit, counit


def random_index(rng: random.Random) -> IndexCat:
    kind = rng.choice(["trivial", "arrow", "a3", "z2"])
    if kind == "trivial":
        return trivial_index()
    if kind == "arrow":
        return free_index(("1", "2"), (("a", "1", "2"),))
    if kind == "a3":
        return free_index(("1", "2", "3"), (("a", "1", "2"), ("b", "2", "3")))
    # the 2-element group as a one-object category
    return IndexCat(
        ("*",),
        {"e": ("*", "*"), "g": ("*", "*")},
        {"*": "e"},
        {("e", "e"): "e", ("e", "g"): "g", ("g", "e"): "g", ("g", "g"): "e"},
        name="Z2",
    )


def random_adjunction_family(x: OplaxFunctor, rng: random.Random) -> AdjunctionFamily:
    left, right, unit, counit = {}, {}, {}, {}
    for i in x.index.objects:
        l, r, u, z = random_equivalence_adjunction(x.cat[i], rng)
        left[i], right[i], unit[i], counit[i] = l, r, u, z
    return AdjunctionFamily(left, right, unit, counit)


def random_comonad_oplax(field, rng: random.Random, index: IndexCat | None = None) -> OplaxFunctor:
    """Delta of a comonad coming from a random adjoint equivalence."""
    from oplaxkit.oplax import delta_from_comonad

    c = random_fincat(field, rng)
    l, r, u, z = random_equivalence_adjunction(c, rng)
    m = comonad_from_adjunction(l, r, u, z)
    idx = index or random_index(rng)
    return delta_from_comonad(m.base, m, idx, name="Xrand")


def invertible_natural_automorphism(f: KFunctor, rng: random.Random) -> NatTrans:
    """A random componentwise-invertible element of Nat(F, F)."""
    basis = nattrans_space(f, f)
    cod = f.cod
    fld = f.dom.field
    for _ in range(40):
        coeffs = []
        for _ in basis:
            coeffs.append(fld.coerce(rng.randint(-2, 2)) if fld.p is None else fld.coerce(rng.randrange(fld.p)))
        comp = {}
        for x in f.dom.objects:
            m = cod.zero_mor(f.apply_obj(x), f.apply_obj(x))
            for cf, t in zip(coeffs, basis):
                m = cod.add_mor(m, cod.scale_mor(cf, t.at(x)))
            comp[x] = m
        if all(is_invertible(comp[x], cod) is not None for x in f.dom.objects):
            return NatTrans(f, f, comp)
    return identity_nattrans(f)


def transport_1mor(t: LeftTransformation, rng: random.Random):
    """A parallel 1-morphism (F, psi') plus the modification (F,psi) => (F,psi')."""
    x, xp = t.dom, t.cod
    idx = x.index
    autos = {i: invertible_natural_automorphism(t.comps[i], rng) for i in idx.objects}
    inv_comp = {
        i: {obj: is_invertible(autos[i].at(obj), xp.cat[i]) for obj in x.cat[i].objects} for i in idx.objects
    }
    psi2 = {}
    for a in idx.morphisms:
        i, j = idx.src(a), idx.tgt(a)
        cj = xp.cat[j]
        comp = {}
        for obj in x.cat[i].objects:
            step = cj.compose(autos[j].at(x.act[a].apply_obj(obj)), t.psi[a].at(obj))
            comp[obj] = cj.compose(step, xp.act[a].apply_mor(inv_comp[i][obj]))
        psi2[a] = NatTrans(t.psi[a].dom, t.psi[a].cod, comp)
    t2 = LeftTransformation(x, xp, t.comps, psi2, name=f"{t.name}~")
    mod = Modification(t, t2, autos, name="transport")
    return t2, mod
