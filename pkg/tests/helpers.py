"""Shared fixtures: the two worked categories and independent path oracles."""

from __future__ import annotations

from oplaxkit.field import QQ, Field
from oplaxkit.fincat import FinCat, KFunctor, Matrix, NatTrans, Presentation, Relation, realize


def retract_presentation(field: Field = QQ, cap: int = 4) -> Presentation:
    """Two objects x <-> y with alpha.beta = id_y (a non-admissible relation)."""
    return Presentation(
        field=field,
        vertices=("x", "y"),
        arrows=(("alpha", "x", "y"), ("beta", "y", "x")),
        relations=(Relation("y", "y", ((1, ("alpha", "beta")), (-1, ()))),),
        length_cap=cap,
    )


def retract_category(field: Field = QQ) -> FinCat:
    c = realize(retract_presentation(field))
    c.name = "C"
    return c


def a2_presentation(field: Field = QQ) -> Presentation:
    """Free category on the quiver 1 -> 2 (single arrow a)."""
    return Presentation(
        field=field,
        vertices=("1", "2"),
        arrows=(("a", "1", "2"),),
        relations=(),
        length_cap=2,
    )


def a2_category(field: Field = QQ) -> FinCat:
    c = realize(a2_presentation(field))
    c.name = "A2"
    return c


def retract_endofunctor(c: FinCat) -> KFunctor:
    """Collapse everything onto y: z |-> y, every generator |-> id_y."""
    field = c.field
    hom = {}
    for (x, y) in c.hom_pairs():
        # each basis path maps to id_y: a row of ones (Hom(y,y) is 1-dim)
        hom[(x, y)] = Matrix.from_rows(field, [[1] * c.dim(x, y)])
    return KFunctor(c, c, {"x": "y", "y": "y"}, hom, name="E")


def retract_counit(c: FinCat, e: KFunctor) -> NatTrans:
    """sigma: E => Id with sigma_x = beta, sigma_y = id_y."""
    from oplaxkit.fincat import identity_functor

    return NatTrans(
        e,
        identity_functor(c),
        {"x": c.mor("y", "x", [1]), "y": c.identity("y")},
        name="sigma",
    )


# -- independent path-rewriting oracle (never touches realize internals) ------


def rewrite_normal_form(path: str) -> str:
    """Leftmost rewriting with the rule 'ab' -> '' (alpha=a, beta=b strings)."""
    s = path
    while "ab" in s:
        i = s.index("ab")
        s = s[:i] + s[i + 2 :]
    return s


def enumerate_reduced_paths(src: str, tgt: str, max_len: int) -> set[str]:
    """Normal forms of composable arrow words x<->y up to max_len.

    Arrows: 'a' = alpha: x->y, 'b' = beta: y->x; words are written left to
    right in composition order (rightmost letter applied first), matching the
    realize path convention.
    """
    ends = {"a": ("x", "y"), "b": ("y", "x")}
    out = set()
    if src == tgt:
        out.add("")
    # grow composable words from the right end at src
    words = [("", src)]
    for _ in range(max_len):
        nxt = []
        for (w, cur) in words:
            for ch in "ab":
                s, t = ends[ch]
                if s == cur:
                    nxt.append((ch + w, t))
        words = nxt
        for (w, cur) in words:
            if cur == tgt:
                out.add(rewrite_normal_form(w))
    return out
