"""The exchange text format: one grammar for every entity kind.

A workspace file is a sequence of statements; entities are named per kind and
reference earlier entities by name. The grammar is documented with a formal
EBNF in docs/format.md. Scalars serialize as ``a/b`` (rationals) or ``n mod p``
(prime fields); matrices as ``[ r1c1 r1c2 ; r2c1 r2c2 ]``; morphism-grid
entries as coordinate tuples ``( c1 c2 )`` with ``0`` for the zero morphism.

Serialization is deterministic and emits every dependency under a stable
generated name, so for any workspace in the image of ``parse``,
``parse(serialize(w)) == w`` structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .complexes import ChainMap, Complex, FormalProj, apply_functor, cone, shift, yoneda
from .field import QQ, Field, GF
from .fincat import (
    FinCat,
    KFunctor,
    Matrix,
    Mor,
    NatTrans,
    Presentation,
    Relation,
    compose_functors,
    identity_functor,
    realize,
)
from .kbcat import ComplexFunctor, CxTransformation, KbView
from .oplax import (
    AdjunctionFamily,
    Comonad,
    IndexCat,
    LeftTransformation,
    OplaxFunctor,
    delta_from_comonad,
    diagonal_oplax,
    free_index,
    idempotent_comonad,
)
from .tilting import (
    ConeStep,
    EquivarianceData,
    GenerationCertificate,
    ShiftStep,
    SummandStep,
    TiltingCandidate,
    Witness,
)


class ParseError(Exception):
    def __init__(self, message, line=None, col=None):
        loc = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(f"{message}{loc}")
        self.line = line
        self.col = col


PUNCT = {"->", "=>", "{", "}", "(", ")", "[", "]", ":", ";", "=", ",", "*", "+", "-"}
_IDENT_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.@'~/")


@dataclass
class Token:
    text: str
    line: int
    col: int


def tokenize(text: str):
    toks = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text[i : i + 2] in ("->", "=>"):
            toks.append(Token(text[i : i + 2], line, col))
            i += 2
            col += 2
            continue
        if ch in "{}()[]:;=,*+":
            toks.append(Token(ch, line, col))
            i += 1
            col += 1
            continue
        if ch == "-":
            if i + 1 < n and text[i + 1].isdigit():
                j = i + 1
                while j < n and (text[j].isdigit() or text[j] == "/"):
                    j += 1
                toks.append(Token(text[i:j], line, col))
                col += j - i
                i = j
                continue
            toks.append(Token("-", line, col))
            i += 1
            col += 1
            continue
        if ch in _IDENT_CHARS:
            j = i
            while j < n and text[j] in _IDENT_CHARS:
                j += 1
            toks.append(Token(text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    return toks


@dataclass
class Workspace:
    field: Field = QQ
    indexes: dict = dc_field(default_factory=dict)
    presentations: dict = dc_field(default_factory=dict)
    categories: dict = dc_field(default_factory=dict)
    functors: dict = dc_field(default_factory=dict)
    nattrans: dict = dc_field(default_factory=dict)
    comonads: dict = dc_field(default_factory=dict)
    oplax: dict = dc_field(default_factory=dict)
    onemors: dict = dc_field(default_factory=dict)
    complexes: dict = dc_field(default_factory=dict)
    chainmaps: dict = dc_field(default_factory=dict)
    candidates: dict = dc_field(default_factory=dict)
    certificates: dict = dc_field(default_factory=dict)
    equivariances: dict = dc_field(default_factory=dict)
    selections: dict = dc_field(default_factory=dict)
    adjunctions: dict = dc_field(default_factory=dict)
    images: dict = dc_field(default_factory=dict)

    def kinds(self):
        return {
            "index": self.indexes,
            "presentation": self.presentations,
            "category": self.categories,
            "functor": self.functors,
            "nattrans": self.nattrans,
            "comonad": self.comonads,
            "oplax": self.oplax,
            "onemor": self.onemors,
            "complex": self.complexes,
            "chainmap": self.chainmaps,
            "candidate": self.candidates,
            "certificate": self.certificates,
            "equivariance": self.equivariances,
            "selection": self.selections,
            "adjunction": self.adjunctions,
            "images": self.images,
        }

    def __eq__(self, other):
        if not isinstance(other, Workspace):
            return False
        if self.field != other.field:
            return False
        mine, theirs = self.kinds(), other.kinds()
        for kind in mine:
            a, b = mine[kind], theirs[kind]
            if set(a) != set(b):
                return False
            for nm in a:
                if not _entity_eq(a[nm], b[nm]):
                    return False
        return True


def _entity_eq(a, b):
    if isinstance(a, tuple) and isinstance(b, tuple):
        return len(a) == len(b) and all(_entity_eq(x, y) for x, y in zip(a, b))
    if isinstance(a, CxTransformation) and isinstance(b, CxTransformation):
        if a.dom != b.dom:
            return False
        for i in a.comps:
            fa, fb = a.comps[i], b.comps[i]
            if fa.obj_map != fb.obj_map or fa.mor_map != fb.mor_map:
                return False
        return a.psi == b.psi
    if isinstance(a, GenerationCertificate) and isinstance(b, GenerationCertificate):
        return a.steps == b.steps and a.witnesses == b.witnesses
    return a == b


class Parser:
    def __init__(self, text: str, default_field: Field | None = None):
        self.toks = tokenize(text)
        self.pos = 0
        self.ws = Workspace(field=default_field or QQ)
        self._field_set = default_field is not None

    # -- token helpers -----------------------------------------------------------

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self, expect=None):
        t = self.peek()
        if t is None:
            raise ParseError(f"unexpected end of input (expected {expect or 'more'})")
        if expect is not None and t.text != expect:
            raise ParseError(f"expected {expect!r}, found {t.text!r}", t.line, t.col)
        self.pos += 1
        return t

    def accept(self, text):
        t = self.peek()
        if t is not None and t.text == text:
            self.pos += 1
            return True
        return False

    def name(self, what="name"):
        t = self.next()
        if t.text in PUNCT:
            raise ParseError(f"expected {what}, found {t.text!r}", t.line, t.col)
        return t.text

    def err(self, msg):
        prev = self.toks[self.pos - 1] if 0 < self.pos <= len(self.toks) else None
        t = self.peek() or prev
        if t is None:
            raise ParseError(msg)
        raise ParseError(msg, t.line, t.col)

    # -- values --------------------------------------------------------------------

    def scalar(self):
        t = self.next()
        txt = t.text
        try:
            if self.ws.field.p is None:
                return self.ws.field.coerce(Fraction(txt))
            if "/" in txt:
                raise ValueError("fractions are not prime-field scalars")
            val = int(txt)
            nxt = self.peek()
            if nxt is not None and nxt.text == "mod":
                self.next()
                p = int(self.next().text)
                if p != self.ws.field.p:
                    raise ParseError(f"modulus {p} does not match the ambient field", t.line, t.col)
            return self.ws.field.coerce(val)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad scalar {txt!r}: {exc}", t.line, t.col)

    def coords_until(self, stoppers):
        out = []
        while True:
            t = self.peek()
            if t is None or t.text in stoppers:
                return tuple(out)
            out.append(self.scalar())

    def matrix(self, rows, cols):
        self.next("[")
        grid_rows = [[]]
        while True:
            t = self.peek()
            if t is None:
                self.err("unterminated matrix")
            if t.text == "]":
                self.next()
                break
            if t.text == ";":
                self.next()
                grid_rows.append([])
                continue
            grid_rows[-1].append(self.scalar())
        ents = [v for r in grid_rows for v in r]
        if rows * cols == 0:
            if ents:
                self.err(f"matrix should be empty ({rows}x{cols})")
            return Matrix(self.ws.field, rows, cols, [])
        if len(ents) != rows * cols:
            self.err(f"matrix needs {rows}x{cols} = {rows * cols} entries, found {len(ents)}")
        return Matrix(self.ws.field, rows, cols, ents)

    def mor_entry(self, cat: FinCat, src: str, tgt: str) -> Mor:
        t = self.peek()
        if t is not None and t.text == "0":
            self.next()
            return cat.zero_mor(src, tgt)
        self.next("(")
        coords = self.coords_until({")"})
        self.next(")")
        try:
            return cat.mor(src, tgt, coords)
        except ValueError as exc:
            raise ParseError(str(exc), t.line, t.col)

    def grid(self, cat: FinCat, dom: FormalProj, cod: FormalProj):
        self.next("[")
        rows = [[]]
        while True:
            t = self.peek()
            if t is None:
                self.err("unterminated grid")
            if t.text == "]":
                self.next()
                break
            if t.text == ";":
                self.next()
                rows.append([])
                continue
            r = len(rows) - 1
            c = len(rows[-1])
            if r >= len(cod) or c >= len(dom):
                self.err(f"grid entry ({r},{c}) outside {len(cod)}x{len(dom)}")
            rows[-1].append(self.mor_entry(cat, dom.summands[c], cod.summands[r]))
        if rows == [[]]:
            rows = []
        if len(rows) != len(cod) or any(len(r) != len(dom) for r in rows):
            self.err(f"grid must be {len(cod)}x{len(dom)}")
        return tuple(tuple(r) for r in rows)

    # -- references -----------------------------------------------------------------

    def lookup(self, table, nm, kind):
        if nm not in table:
            self.err(f"unknown {kind} {nm!r}")
        return table[nm]

    def funexpr(self):
        nm = self.name("functor")
        if nm == "id":
            self.next("(")
            cat = self.lookup(self.ws.categories, self.name("category"), "category")
            self.next(")")
            return identity_functor(cat)
        if nm == "comp":
            self.next("(")
            f = self.funexpr()
            self.next(",")
            g = self.funexpr()
            self.next(")")
            return compose_functors(f, g)
        return self.lookup(self.ws.functors, nm, "functor")

    # -- driver ----------------------------------------------------------------------

    def parse(self) -> Workspace:
        while self.peek() is not None:
            t = self.next()
            handler = getattr(self, f"stmt_{t.text}", None)
            if handler is None:
                raise ParseError(f"unknown statement {t.text!r}", t.line, t.col)
            handler()
        return self.ws

    def _register(self, table, nm, value, kind):
        if nm in table:
            self.err(f"duplicate {kind} name {nm!r}")
        table[nm] = value

    # -- statements --------------------------------------------------------------------

    def stmt_field(self):
        t = self.next()
        txt = t.text
        if txt == "q":
            f = QQ
        elif txt.startswith("f") and txt[1:].isdigit():
            try:
                f = GF(int(txt[1:]))
            except ValueError as exc:
                raise ParseError(str(exc), t.line, t.col)
        else:
            raise ParseError(f"bad field {txt!r} (use q or f<p>)", t.line, t.col)
        if self._field_set and f != self.ws.field:
            raise ParseError(f"field {txt} conflicts with the ambient field {self.ws.field}", t.line, t.col)
        self.ws.field = f
        self._field_set = True

    def stmt_index(self):
        nm = self.name("index name")
        self.next("{")
        objects = []
        morphisms = {}
        table = {}
        is_free = False
        arrows = []
        while not self.accept("}"):
            kw = self.next().text
            if kw == "objects":
                while self.peek() and self.peek().text not in ("mor", "compose", "free", "}"):
                    objects.append(self.name("object"))
            elif kw == "mor":
                mnm = self.name("morphism name")
                self.next(":")
                src = self.name("object")
                self.next("->")
                tgt = self.name("object")
                morphisms[mnm] = (src, tgt)
                arrows.append((mnm, src, tgt))
            elif kw == "free":
                is_free = True
            elif kw == "compose":
                b = self.name("morphism")
                a = self.name("morphism")
                self.next("=")
                table[(b, a)] = self.name("morphism")
            else:
                self.err(f"unknown index clause {kw!r}")
        try:
            if is_free:
                idx = free_index(tuple(objects), tuple(arrows), name=nm)
            else:
                identity = {}
                morphs = dict(morphisms)
                for o in objects:
                    e = f"id_{o}"
                    morphs.setdefault(e, (o, o))
                    identity[o] = e
                full = dict(table)
                for m, (s, t) in morphs.items():
                    full.setdefault((identity[t], m), m)
                    full.setdefault((m, identity[s]), m)
                idx = IndexCat(tuple(objects), morphs, identity, full, name=nm)
        except ValueError as exc:
            self.err(f"invalid index category: {exc}")
        self._register(self.ws.indexes, nm, idx, "index")

    def stmt_presentation(self):
        nm = self.name("presentation name")
        self.next("{")
        vertices = []
        arrows = []
        relations = []
        cap = 4
        while not self.accept("}"):
            kw = self.next().text
            if kw == "vertices":
                while self.peek() and self.peek().text not in ("arrow", "relation", "cap", "}"):
                    vertices.append(self.name("vertex"))
            elif kw == "arrow":
                anm = self.name("arrow name")
                self.next(":")
                src = self.name("vertex")
                self.next("->")
                tgt = self.name("vertex")
                arrows.append((anm, src, tgt))
            elif kw == "relation":
                relations.append(self._relation_body(vertices, arrows))
            elif kw == "cap":
                cap = int(self.next().text)
            else:
                self.err(f"unknown presentation clause {kw!r}")
        pres = Presentation(self.ws.field, tuple(vertices), tuple(arrows), tuple(relations), cap)
        self._register(self.ws.presentations, nm, pres, "presentation")

    def _relation_body(self, vertices, arrows):
        amap = {a[0]: (a[1], a[2]) for a in arrows}

        def term_ends(path):
            cur = amap[path[-1]][0]
            start = cur
            for a in reversed(path):
                s, t = amap[a]
                if s != cur:
                    self.err(f"path {'.'.join(path)} is not composable")
                cur = t
            return (start, cur)

        terms = []
        sign = 1
        while True:
            coeff = self.ws.field.coerce(sign)
            t = self.peek()
            if t is None:
                break
            if t.text.lstrip("-").split("/")[0].isdigit():
                coeff = self.ws.field.mul(coeff, self.scalar())
            pt = self.next()
            txt = pt.text
            if txt.startswith("id_"):
                path = ()
                vtx = txt[3:]
                if vtx not in vertices:
                    raise ParseError(f"unknown vertex in {txt}", pt.line, pt.col)
                ends = (vtx, vtx)
            else:
                path = tuple(txt.split("."))
                for a in path:
                    if a not in amap:
                        raise ParseError(f"unknown arrow {a!r}", pt.line, pt.col)
                ends = term_ends(path)
            terms.append((coeff, path, ends))
            if self.accept("+"):
                sign = 1
                continue
            if self.accept("-"):
                sign = -1
                continue
            break
        endset = {e for _, _, e in terms}
        if len(endset) != 1:
            self.err("relation terms are not parallel")
        (src, tgt) = endset.pop()
        return Relation(src, tgt, tuple((c, p) for c, p, _ in terms))

    def stmt_category(self):
        nm = self.name("category name")
        if self.accept("="):
            t = self.next()
            if t.text != "realize":
                raise ParseError("expected realize", t.line, t.col)
            pres = self.lookup(self.ws.presentations, self.name("presentation"), "presentation")
            try:
                cat = realize(pres)
            except Exception as exc:
                self.err(f"realization failed: {exc}")
            cat.name = nm
            self._register(self.ws.categories, nm, cat, "category")
            return
        self.next("{")
        objects = []
        hom_basis = {}
        id_coord = {}
        comp_entries = {}
        while not self.accept("}"):
            kw = self.next().text
            if kw == "objects":
                while self.peek() and self.peek().text not in ("hom", "id", "compose", "}"):
                    objects.append(self.name("object"))
            elif kw == "hom":
                x = self.name("object")
                y = self.name("object")
                self.next(":")
                labels = []
                while self.peek() and self.peek().text not in ("hom", "id", "compose", "}"):
                    labels.append(self.name("label"))
                hom_basis[(x, y)] = tuple(labels)
            elif kw == "id":
                x = self.name("object")
                self.next("=")
                id_coord[x] = self.coords_until({"hom", "id", "compose", "}"})
            elif kw == "compose":
                x = self.name("object")
                y = self.name("object")
                z = self.name("object")
                self.next(":")
                g = self.name("label")
                self.next("*")
                f = self.name("label")
                self.next("=")
                comp_entries[(x, y, z, g, f)] = self.coords_until({"hom", "id", "compose", "}"})
            else:
                self.err(f"unknown category clause {kw!r}")
        comp = {}
        for x in objects:
            for y in objects:
                for z in objects:
                    dxy = len(hom_basis.get((x, y), ()))
                    dyz = len(hom_basis.get((y, z), ()))
                    dxz = len(hom_basis.get((x, z), ()))
                    if dxy * dyz == 0:
                        continue
                    cols = []
                    for q in range(dyz):
                        for r in range(dxy):
                            glbl = hom_basis[(y, z)][q]
                            flbl = hom_basis[(x, y)][r]
                            co = comp_entries.get((x, y, z, glbl, flbl))
                            if co is None:
                                if dxz == 0:
                                    co = ()
                                else:
                                    self.err(f"missing compose {x} {y} {z} : {glbl} * {flbl}")
                            if len(co) != dxz:
                                self.err(f"compose {x} {y} {z} : {glbl} * {flbl} needs {dxz} coords")
                            cols.append(co)
                    ents = []
                    for i in range(dxz):
                        for col in cols:
                            ents.append(col[i])
                    comp[(x, y, z)] = Matrix(self.ws.field, dxz, dyz * dxy, ents)
        try:
            cat = FinCat(self.ws.field, objects, hom_basis, comp, id_coord, name=nm)
        except ValueError as exc:
            self.err(f"invalid category: {exc}")
        self._register(self.ws.categories, nm, cat, "category")

    def stmt_functor(self):
        nm = self.name("functor name")
        self.next(":")
        dom = self.lookup(self.ws.categories, self.name("category"), "category")
        self.next("->")
        cod = self.lookup(self.ws.categories, self.name("category"), "category")
        self.next("{")
        obj_map = {}
        hom_map = {}
        while not self.accept("}"):
            kw = self.next().text
            if kw == "obj":
                x = self.name("object")
                self.next("->")
                obj_map[x] = self.name("object")
            elif kw == "map":
                x = self.name("object")
                y = self.name("object")
                self.next("=")
                fx, fy = obj_map.get(x), obj_map.get(y)
                if fx is None or fy is None:
                    self.err("map clause before the obj clauses it needs")
                hom_map[(x, y)] = self.matrix(cod.dim(fx, fy), dom.dim(x, y))
            else:
                self.err(f"unknown functor clause {kw!r}")
        try:
            fun = KFunctor(dom, cod, obj_map, hom_map, name=nm)
        except (ValueError, KeyError) as exc:
            self.err(f"invalid functor: {exc}")
        self._register(self.ws.functors, nm, fun, "functor")

    def stmt_nattrans(self):
        nm = self.name("nattrans name")
        self.next(":")
        dom = self.funexpr()
        self.next("=>")
        cod = self.funexpr()
        self.next("{")
        comp = {}
        while not self.accept("}"):
            self.next("at")
            x = self.name("object")
            self.next("=")
            coords = self.coords_until({"at", "}"})
            try:
                comp[x] = dom.cod.mor(dom.apply_obj(x), cod.apply_obj(x), coords)
            except (ValueError, KeyError) as exc:
                self.err(f"bad component at {x}: {exc}")
        try:
            t = NatTrans(dom, cod, comp, name=nm)
        except (ValueError, KeyError) as exc:
            self.err(f"invalid nattrans: {exc}")
        self._register(self.ws.nattrans, nm, t, "nattrans")

    def stmt_comonad(self):
        nm = self.name("comonad name")
        self.next("on")
        cat = self.lookup(self.ws.categories, self.name("category"), "category")
        self.next("{")
        endo = counit = comult = None
        while not self.accept("}"):
            kw = self.next().text
            if kw == "endo":
                endo = self.funexpr()
            elif kw == "counit":
                counit = self.lookup(self.ws.nattrans, self.name("nattrans"), "nattrans")
            elif kw == "comult":
                comult = self.lookup(self.ws.nattrans, self.name("nattrans"), "nattrans")
            else:
                self.err(f"unknown comonad clause {kw!r}")
        if endo is None or counit is None:
            self.err("comonad needs endo and counit")
        try:
            m = idempotent_comonad(cat, endo, counit) if comult is None else Comonad(cat, endo, counit, comult)
        except Exception as exc:
            self.err(f"invalid comonad: {exc}")
        self._register(self.ws.comonads, nm, m, "comonad")

    def stmt_oplax(self):
        nm = self.name("oplax name")
        if self.accept("="):
            t = self.next()
            if t.text == "delta":
                self.next("(")
                idx = self.lookup(self.ws.indexes, self.name("index"), "index")
                self.next(",")
                m = self.lookup(self.ws.comonads, self.name("comonad"), "comonad")
                self.next(")")
                try:
                    x = delta_from_comonad(m.base, m, idx, name=nm)
                except Exception as exc:
                    self.err(f"delta construction failed: {exc}")
            elif t.text == "diagonal":
                self.next("(")
                idx = self.lookup(self.ws.indexes, self.name("index"), "index")
                self.next(",")
                cat = self.lookup(self.ws.categories, self.name("category"), "category")
                self.next(")")
                x = diagonal_oplax(cat, idx, name=nm)
            else:
                raise ParseError("expected delta or diagonal", t.line, t.col)
            self._register(self.ws.oplax, nm, x, "oplax")
            return
        self.next("on")
        idx = self.lookup(self.ws.indexes, self.name("index"), "index")
        self.next("{")
        cat = {}
        act = {}
        eta = {}
        theta = {}
        while not self.accept("}"):
            kw = self.next().text
            if kw == "at":
                i = self.name("index object")
                self.next("=")
                cat[i] = self.lookup(self.ws.categories, self.name("category"), "category")
            elif kw == "act":
                a = self.name("index morphism")
                self.next("=")
                act[a] = self.funexpr()
            elif kw == "eta":
                i = self.name("index object")
                self.next("=")
                eta[i] = self.lookup(self.ws.nattrans, self.name("nattrans"), "nattrans")
            elif kw == "theta":
                b = self.name("index morphism")
                a = self.name("index morphism")
                self.next("=")
                theta[(b, a)] = self.lookup(self.ws.nattrans, self.name("nattrans"), "nattrans")
            else:
                self.err(f"unknown oplax clause {kw!r}")
        try:
            x = OplaxFunctor(idx, cat, act, eta, theta, name=nm)
        except (ValueError, KeyError) as exc:
            self.err(f"invalid oplax functor: {exc}")
        self._register(self.ws.oplax, nm, x, "oplax")

    def stmt_onemor(self):
        nm = self.name("onemor name")
        self.next(":")
        dom = self.lookup(self.ws.oplax, self.name("oplax"), "oplax")
        self.next("->")
        cod = self.lookup(self.ws.oplax, self.name("oplax"), "oplax")
        self.next("{")
        comps = {}
        psi_coords = {}
        while not self.accept("}"):
            kw = self.next().text
            if kw == "at":
                i = self.name("index object")
                self.next("=")
                comps[i] = self.funexpr()
            elif kw == "psi":
                a = self.name("index morphism")
                x = self.name("object")
                self.next("=")
                psi_coords[(a, x)] = self.coords_until({"at", "psi", "}"})
            else:
                self.err(f"unknown onemor clause {kw!r}")
        psi = {}
        try:
            for a in dom.index.morphisms:
                i, j = dom.index.src(a), dom.index.tgt(a)
                dom_fun = compose_functors(cod.act[a], comps[i])
                cod_fun = compose_functors(comps[j], dom.act[a])
                comp = {}
                for x in dom.cat[i].objects:
                    coords = psi_coords.get((a, x))
                    if coords is None:
                        self.err(f"missing psi {a} {x}")
                    comp[x] = cod.cat[j].mor(dom_fun.apply_obj(x), cod_fun.apply_obj(x), coords)
                psi[a] = NatTrans(dom_fun, cod_fun, comp)
            t = LeftTransformation(dom, cod, comps, psi, name=nm)
        except (ValueError, KeyError) as exc:
            self.err(f"invalid 1-morphism: {exc}")
        self._register(self.ws.onemors, nm, t, "onemor")

    def _complex_body(self, cat: FinCat, name=""):
        self.next("{")
        comp = {}
        diff = {}
        while not self.accept("}"):
            kw = self.next().text
            if kw == "at":
                d = int(self.next().text)
                self.next(":")
                summands = []
                while self.peek() and self.peek().text not in ("at", "d", "}"):
                    summands.append(self.name("summand"))
                comp[d] = FormalProj(tuple(summands))
            elif kw == "d":
                d = int(self.next().text)
                self.next("=")
                dom, cod = comp.get(d), comp.get(d + 1)
                if dom is None or cod is None:
                    self.err(f"differential at {d} before its summand rows")
                diff[d] = self.grid(cat, dom, cod)
            else:
                self.err(f"unknown complex clause {kw!r}")
        try:
            return Complex(cat, comp, diff, name=name)
        except ValueError as exc:
            self.err(f"invalid complex: {exc}")

    def stmt_complex(self):
        nm = self.name("complex name")
        self.next("over")
        cat = self.lookup(self.ws.categories, self.name("category"), "category")
        cx = self._complex_body(cat, name=nm)
        self._register(self.ws.complexes, nm, cx, "complex")

    def stmt_chainmap(self):
        nm = self.name("chainmap name")
        self.next(":")
        dom = self.lookup(self.ws.complexes, self.name("complex"), "complex")
        self.next("->")
        cod = self.lookup(self.ws.complexes, self.name("complex"), "complex")
        self.next("{")
        grids = {}
        while not self.accept("}"):
            self.next("at")
            d = int(self.next().text)
            self.next("=")
            grids[d] = self.grid(dom.base, dom.proj(d), cod.proj(d))
        try:
            cm = ChainMap(dom, cod, grids, name=nm)
        except ValueError as exc:
            self.err(f"invalid chain map: {exc}")
        self._register(self.ws.chainmaps, nm, cm, "chainmap")

    def stmt_candidate(self):
        nm = self.name("candidate name")
        self.next("for")
        x = self.lookup(self.ws.oplax, self.name("oplax"), "oplax")
        self.next("{")
        objects = {}
        while not self.accept("}"):
            self.next("at")
            i = self.name("index object")
            self.next(":")
            named = []
            while self.peek() and self.peek().text not in ("at", "}"):
                cnm = self.name("complex")
                named.append((cnm, self.lookup(self.ws.complexes, cnm, "complex")))
            objects[i] = named
        for i in x.index.objects:
            objects.setdefault(i, [])
        self._register(self.ws.candidates, nm, TiltingCandidate(x, objects), "candidate")

    def _grid_block(self, cat, dom_cx: Complex, cod_cx: Complex):
        self.next("{")
        grids = {}
        while not self.accept("}"):
            self.next("at")
            d = int(self.next().text)
            self.next("=")
            grids[d] = self.grid(cat, dom_cx.proj(d), cod_cx.proj(d))
        return grids

    def stmt_certificate(self):
        nm = self.name("certificate name")
        self.next("for")
        tc_name = self.name("candidate")
        tc = self.lookup(self.ws.candidates, tc_name, "candidate")
        self.next("{")
        steps = {}
        witnesses = {}
        while not self.accept("}"):
            self.next("at")
            i = self.name("index object")
            base = tc.oplax.cat[i]
            env = {n: cx for n, cx in tc.objects[i]}
            isteps = []
            iwit = {}
            self.next("{")
            while not self.accept("}"):
                kw = self.next().text
                if kw == "step":
                    snm = self.name("step name")
                    self.next("=")
                    op = self.next().text
                    if op == "shift":
                        ref = self.name("ref")
                        self.next("by")
                        n = int(self.next().text)
                        if ref not in env:
                            self.err(f"unknown ref {ref!r}")
                        isteps.append((snm, ShiftStep(ref, n)))
                        env[snm] = shift(env[ref], n)
                    elif op == "cone":
                        dref = self.name("ref")
                        self.next("->")
                        cref = self.name("ref")
                        if dref not in env or cref not in env:
                            self.err("unknown cone reference")
                        grids = self._grid_block(base, env[dref], env[cref])
                        isteps.append((snm, ConeStep(dref, cref, grids)))
                        try:
                            env[snm] = cone(ChainMap(env[dref], env[cref], grids))
                        except ValueError as exc:
                            self.err(f"invalid cone map: {exc}")
                    elif op == "summand":
                        ref = self.name("ref")
                        if ref not in env:
                            self.err(f"unknown ref {ref!r}")
                        self.next("{")
                        summand = proj_g = sect_g = idem_g = None
                        while not self.accept("}"):
                            part = self.next().text
                            if part == "object":
                                summand = self._complex_body(base)
                            elif part == "proj":
                                proj_g = self._grid_block(base, env[ref], summand)
                            elif part == "sect":
                                sect_g = self._grid_block(base, summand, env[ref])
                            elif part == "idem":
                                idem_g = self._grid_block(base, env[ref], env[ref])
                            else:
                                self.err(f"unknown summand part {part!r}")
                        if summand is None or proj_g is None or sect_g is None or idem_g is None:
                            self.err("summand step needs object, proj, sect, idem")
                        isteps.append((snm, SummandStep(ref, summand, proj_g, sect_g, idem_g)))
                        env[snm] = summand
                    else:
                        self.err(f"unknown step kind {op!r}")
                elif kw == "witness":
                    x = self.name("object")
                    self.next(":")
                    ref = self.name("ref")
                    if ref not in env:
                        self.err(f"unknown ref {ref!r}")
                    target = yoneda(base, x)
                    self.next("{")
                    fwd = bwd = None
                    while not self.accept("}"):
                        part = self.next().text
                        if part == "fwd":
                            fwd = self._grid_block(base, env[ref], target)
                        elif part == "bwd":
                            bwd = self._grid_block(base, target, env[ref])
                        else:
                            self.err(f"unknown witness part {part!r}")
                    if fwd is None or bwd is None:
                        self.err("witness needs fwd and bwd")
                    iwit[x] = Witness(ref, fwd, bwd)
                else:
                    self.err(f"unknown certificate clause {kw!r}")
            steps[i] = isteps
            witnesses[i] = iwit
        self._register(self.ws.certificates, nm, (tc_name, GenerationCertificate(steps, witnesses)), "certificate")

    def stmt_equivariance(self):
        nm = self.name("equivariance name")
        self.next("for")
        tc_name = self.name("candidate")
        tc = self.lookup(self.ws.candidates, tc_name, "candidate")
        self.next("{")
        obj_action = {}
        rho = {}
        x = tc.oplax
        while not self.accept("}"):
            kw = self.next().text
            if kw == "act":
                a = self.name("index morphism")
                self.next(":")
                src = self.name("complex name")
                self.next("->")
                tgt = self.name("complex name")
                obj_action.setdefault(a, {})[src] = tgt
            elif kw == "rho":
                a = self.name("index morphism")
                t = self.name("complex name")
                i, j = x.index.src(a), x.index.tgt(a)
                tgt_name = obj_action.get(a, {}).get(t)
                if tgt_name is None:
                    self.err(f"rho before the act clause for ({a},{t})")
                dom_cx = apply_functor(x.act[a], tc.complex(i, t))
                cod_cx = tc.complex(j, tgt_name)
                rho.setdefault(a, {})[t] = self._grid_block(x.cat[j], dom_cx, cod_cx)
            else:
                self.err(f"unknown equivariance clause {kw!r}")
        self._register(self.ws.equivariances, nm, (tc_name, EquivarianceData(obj_action, rho)), "equivariance")

    def stmt_selection(self):
        nm = self.name("selection name")
        self.next("for")
        ox_name = self.name("oplax")
        self.lookup(self.ws.oplax, ox_name, "oplax")
        self.next("{")
        sel = {}
        while not self.accept("}"):
            self.next("at")
            i = self.name("index object")
            self.next(":")
            objs = []
            while self.peek() and self.peek().text not in ("at", "}"):
                objs.append(self.name("object"))
            sel[i] = tuple(objs)
        self._register(self.ws.selections, nm, (ox_name, sel), "selection")

    def stmt_adjunction(self):
        nm = self.name("adjunction name")
        self.next("for")
        ox_name = self.name("oplax")
        self.lookup(self.ws.oplax, ox_name, "oplax")
        self.next("{")
        left, right, unit, counit = {}, {}, {}, {}
        while not self.accept("}"):
            self.next("at")
            i = self.name("index object")
            self.next("{")
            while not self.accept("}"):
                kw = self.next().text
                if kw == "left":
                    left[i] = self.funexpr()
                elif kw == "right":
                    right[i] = self.funexpr()
                elif kw == "unit":
                    unit[i] = self.lookup(self.ws.nattrans, self.name("nattrans"), "nattrans")
                elif kw == "counit":
                    counit[i] = self.lookup(self.ws.nattrans, self.name("nattrans"), "nattrans")
                else:
                    self.err(f"unknown adjunction clause {kw!r}")
        self._register(self.ws.adjunctions, nm, (ox_name, AdjunctionFamily(left, right, unit, counit)), "adjunction")

    def stmt_images(self):
        nm = self.name("images name")
        self.next(":")
        xp = self.lookup(self.ws.oplax, self.name("oplax"), "oplax")
        self.next("->")
        self.next("kb")
        self.next("(")
        x = self.lookup(self.ws.oplax, self.name("oplax"), "oplax")
        self.next(")")
        self.next("{")
        comps = {}
        psi = {}
        while not self.accept("}"):
            kw = self.next().text
            if kw == "at":
                i = self.name("index object")
                ci = xp.cat[i]
                self.next("{")
                obj_map = {}
                mor_map = {}
                while not self.accept("}"):
                    kw2 = self.next().text
                    if kw2 == "obj":
                        o = self.name("object")
                        self.next("->")
                        obj_map[o] = self.lookup(self.ws.complexes, self.name("complex"), "complex")
                    elif kw2 == "mor":
                        u = self.name("object")
                        v = self.name("object")
                        k = int(self.next().text)
                        self.next("=")
                        mor_map[(u, v, k)] = self.lookup(self.ws.chainmaps, self.name("chainmap"), "chainmap")
                    else:
                        self.err(f"unknown images clause {kw2!r}")
                try:
                    comps[i] = ComplexFunctor(ci, x.cat[i], obj_map, mor_map, name=f"{nm}({i})")
                except ValueError as exc:
                    self.err(f"invalid images component: {exc}")
            elif kw == "psi":
                a = self.name("index morphism")
                o = self.name("object")
                i = xp.index.src(a)
                j = xp.index.tgt(a)
                if i not in comps or j not in comps:
                    self.err("psi clause before the at blocks it needs")
                dom_cx = apply_functor(x.act[a], comps[i].apply_obj(o))
                cod_cx = comps[j].apply_obj(xp.act[a].apply_obj(o))
                grids = self._grid_block(x.cat[j], dom_cx, cod_cx)
                try:
                    psi.setdefault(a, {})[o] = ChainMap(dom_cx, cod_cx, grids)
                except ValueError as exc:
                    self.err(f"invalid psi component: {exc}")
            else:
                self.err(f"unknown images clause {kw!r}")
        t = CxTransformation(xp, KbView(x), comps, psi, name=nm)
        self._register(self.ws.images, nm, t, "images")


def parse(text: str, default_field: Field | None = None) -> Workspace:
    return Parser(text, default_field).parse()


# -- serialization --------------------------------------------------------------------


class Serializer:
    """Deterministic emitter; dependencies get stable generated names.

    Any workspace parsed from text has all dependencies named already, so for
    those parse(serialize(w)) == w exactly; programmatically built workspaces
    are normalized by the auto-naming on the way out.
    """

    def __init__(self, ws: Workspace):
        self.ws = ws
        self.f = ws.field
        self.chunks = {k: [] for k in ws.kinds()}
        self.cat_names = {}
        self.fun_names = {}
        self.nat_names = {}
        self.cx_names = {}
        self.cm_names = {}
        self.oplax_names = {}

    # naming helpers: reuse registered names, invent stable ones otherwise

    def _inventory(self):
        for nm, c in self.ws.categories.items():
            self.cat_names.setdefault(c.signature(), nm)
        for nm, f in self.ws.functors.items():
            self.fun_names.setdefault(id(f), nm)
        for nm, c in self.ws.complexes.items():
            self.cx_names.setdefault(id(c), nm)
        for nm, c in self.ws.chainmaps.items():
            self.cm_names.setdefault(id(c), nm)
        for nm, x in self.ws.oplax.items():
            self.oplax_names.setdefault(id(x), nm)

    def cat_name(self, cat: FinCat, hint: str) -> str:
        sig = cat.signature()
        if sig in self.cat_names:
            return self.cat_names[sig]
        for nm, c in self.ws.categories.items():
            if c == cat:
                self.cat_names[sig] = nm
                return nm
        nm = self._fresh(self.ws.categories, hint)
        self.ws.categories[nm] = cat
        self.cat_names[sig] = nm
        self._category(nm, cat)
        return nm

    def _fresh(self, table, hint: str) -> str:
        nm = hint
        k = 2
        while nm in table:
            nm = f"{hint}{k}"
            k += 1
        return nm

    def fun_expr(self, fun: KFunctor, hint: str) -> str:
        if id(fun) in self.fun_names:
            return self.fun_names[id(fun)]
        for nm, f in self.ws.functors.items():
            if f == fun:
                self.fun_names[id(fun)] = nm
                return nm
        cname = self.cat_name(fun.dom, f"{hint}.dom")
        if fun == identity_functor(fun.dom):
            return f"id({cname})"
        nm = self._fresh(self.ws.functors, hint)
        self.ws.functors[nm] = fun
        self.fun_names[id(fun)] = nm
        self._functor(nm, fun)
        return nm

    def nat_name(self, t: NatTrans, hint: str, dom_expr=None, cod_expr=None) -> str:
        if id(t) in self.nat_names:
            return self.nat_names[id(t)]
        for nm, s in self.ws.nattrans.items():
            if s == t:
                self.nat_names[id(t)] = nm
                return nm
        nm = self._fresh(self.ws.nattrans, hint)
        self.ws.nattrans[nm] = t
        self.nat_names[id(t)] = nm
        de = dom_expr or self.fun_expr(t.dom, f"{hint}.dom")
        ce = cod_expr or self.fun_expr(t.cod, f"{hint}.cod")
        out = self.chunks["nattrans"]
        out.append(f"nattrans {nm} : {de} => {ce} {{")
        for x in t.dom.dom.objects:
            out.append(f"  at {x} = {self.coords(t.at(x).coords)}".rstrip())
        out.append("}")
        return nm

    def cx_name(self, cx: Complex, hint: str) -> str:
        if id(cx) in self.cx_names:
            return self.cx_names[id(cx)]
        for nm, c in self.ws.complexes.items():
            if c == cx:
                self.cx_names[id(cx)] = nm
                return nm
        nm = self._fresh(self.ws.complexes, hint)
        self.ws.complexes[nm] = cx
        self.cx_names[id(cx)] = nm
        self._complex(nm, cx)
        return nm

    def cm_name(self, cm: ChainMap, hint: str) -> str:
        if id(cm) in self.cm_names:
            return self.cm_names[id(cm)]
        for nm, c in self.ws.chainmaps.items():
            if c == cm:
                self.cm_names[id(cm)] = nm
                return nm
        nm = self._fresh(self.ws.chainmaps, hint)
        self.ws.chainmaps[nm] = cm
        self.cm_names[id(cm)] = nm
        dn = self.cx_name(cm.dom, f"{hint}.dom")
        cn = self.cx_name(cm.cod, f"{hint}.cod")
        out = self.chunks["chainmap"]
        out.append(f"chainmap {nm} : {dn} -> {cn} {{")
        for d in sorted(cm.grids):
            out.append(f"  at {d} = {self.grid(cm.grids[d])}")
        out.append("}")
        return nm

    # formatting helpers

    def scalar(self, v) -> str:
        return self.f.format_scalar(v)

    def coords(self, co) -> str:
        return " ".join(self.scalar(v) for v in co)

    def matrix(self, m: Matrix) -> str:
        if m.rows * m.cols == 0:
            return "[ ]"
        rows = [" ".join(self.scalar(v) for v in m.row(r)) for r in range(m.rows)]
        return "[ " + " ; ".join(rows) + " ]"

    def grid(self, g) -> str:
        rows = []
        for row in g:
            cells = ["0" if m.is_zero() else "( " + self.coords(m.coords) + " )" for m in row]
            rows.append(" ".join(cells))
        return "[ " + " ; ".join(rows) + " ]" if rows else "[ ]"

    def grid_block_lines(self, grids, indent="    "):
        return [f"{indent}at {d} = {self.grid(grids[d])}" for d in sorted(grids)]

    # per-kind emitters

    def _index(self, nm, idx: IndexCat):
        out = self.chunks["index"]
        out.append(f"index {nm} {{")
        out.append(f"  objects {' '.join(idx.objects)}")
        idents = set(idx.identity.values())
        for m, (s, t) in idx.morphisms.items():
            if m not in idents:
                out.append(f"  mor {m} : {s} -> {t}")
        for (b, a), c in sorted(idx.table.items()):
            if b in idents or a in idents:
                continue
            out.append(f"  compose {b} {a} = {c}")
        out.append("}")

    def _presentation(self, nm, p: Presentation):
        out = self.chunks["presentation"]
        out.append(f"presentation {nm} {{")
        out.append(f"  vertices {' '.join(p.vertices)}")
        for (a, s, t) in p.arrows:
            out.append(f"  arrow {a} : {s} -> {t}")
        for rel in p.relations:
            terms = []
            for coeff, path in rel.terms:
                lbl = ".".join(path) if path else f"id_{rel.src}"
                terms.append(f"{self.scalar(coeff)} {lbl}")
            out.append(f"  relation {' + '.join(terms)}")
        out.append(f"  cap {p.length_cap}")
        out.append("}")

    def _category(self, nm, cat: FinCat):
        out = self.chunks["category"]
        out.append(f"category {nm} {{")
        out.append(f"  objects {' '.join(cat.objects)}")
        for (x, y) in cat.hom_pairs():
            out.append(f"  hom {x} {y} : {' '.join(cat.basis_labels(x, y))}")
        for x in cat.objects:
            if cat.dim(x, x):
                out.append(f"  id {x} = {self.coords(cat.id_coord[x])}")
        for x in cat.objects:
            for y in cat.objects:
                for z in cat.objects:
                    dxy, dyz = cat.dim(x, y), cat.dim(y, z)
                    if dxy * dyz == 0 or cat.dim(x, z) == 0:
                        continue
                    m = cat.comp_matrix(x, y, z)
                    for q in range(dyz):
                        for r in range(dxy):
                            col = q * dxy + r
                            coords = tuple(m[i, col] for i in range(m.rows))
                            g = cat.basis_labels(y, z)[q]
                            fl = cat.basis_labels(x, y)[r]
                            out.append(f"  compose {x} {y} {z} : {g} * {fl} = {self.coords(coords)}")
        out.append("}")

    def _functor(self, nm, fun: KFunctor):
        dn = self.cat_name(fun.dom, f"{nm}.dom")
        cn = self.cat_name(fun.cod, f"{nm}.cod")
        out = self.chunks["functor"]
        out.append(f"functor {nm} : {dn} -> {cn} {{")
        for x in fun.dom.objects:
            out.append(f"  obj {x} -> {fun.obj_map[x]}")
        for (x, y) in fun.dom.hom_pairs():
            out.append(f"  map {x} {y} = {self.matrix(fun.hom_map[(x, y)])}")
        out.append("}")

    def _complex(self, nm, cx: Complex):
        cn = self.cat_name(cx.base, f"{nm}.base")
        out = self.chunks["complex"]
        out.append(f"complex {nm} over {cn} {{")
        for d in cx.degrees:
            out.append(f"  at {d} : {' '.join(cx.proj(d).summands)}")
        for d in sorted(cx.diff):
            out.append(f"  d {d} = {self.grid(cx.diff[d])}")
        out.append("}")

    def _comonad(self, nm, m: Comonad):
        cn = self.cat_name(m.base, f"{nm}.base")
        en = self.fun_expr(m.endo, f"{nm}.endo")
        cu = self.nat_name(m.counit, f"{nm}.counit", dom_expr=en, cod_expr=f"id({cn})")
        co = self.nat_name(m.comult, f"{nm}.comult", dom_expr=en, cod_expr=f"comp({en}, {en})")
        self.chunks["comonad"].append(f"comonad {nm} on {cn} {{ endo {en} counit {cu} comult {co} }}")

    def _oplax(self, nm, x: OplaxFunctor):
        idxn = self._ensure_index(x.index, f"{nm}.index")
        act_exprs = {a: self.fun_expr(x.act[a], f"{nm}.act.{a}") for a in x.index.morphisms}
        out = self.chunks["oplax"]
        lines = [f"oplax {nm} on {idxn} {{"]
        for i in x.index.objects:
            lines.append(f"  at {i} = {self.cat_name(x.cat[i], f'{nm}.cat.{i}')}")
        for a in x.index.morphisms:
            lines.append(f"  act {a} = {act_exprs[a]}")
        for i in x.index.objects:
            e = x.index.identity[i]
            en = self.nat_name(
                x.eta[i],
                f"{nm}.eta.{i}",
                dom_expr=act_exprs[e],
                cod_expr=f"id({self.cat_name(x.cat[i], f'{nm}.cat.{i}')})",
            )
            lines.append(f"  eta {i} = {en}")
        for (b, a) in x.index.composable_pairs():
            ba = x.index.compose(b, a)
            tn = self.nat_name(
                x.theta[(b, a)],
                f"{nm}.theta.{b}.{a}",
                dom_expr=act_exprs[ba],
                cod_expr=f"comp({act_exprs[b]}, {act_exprs[a]})",
            )
            lines.append(f"  theta {b} {a} = {tn}")
        lines.append("}")
        out.extend(lines)

    def _ensure_index(self, idx: IndexCat, hint: str) -> str:
        for nm, i in self.ws.indexes.items():
            if i == idx:
                return nm
        nm = self._fresh(self.ws.indexes, hint)
        self.ws.indexes[nm] = idx
        self._index(nm, idx)
        return nm

    def _oplax_name(self, x: OplaxFunctor, hint: str) -> str:
        if id(x) in self.oplax_names:
            return self.oplax_names[id(x)]
        for nm, c in self.ws.oplax.items():
            if c is x or c == x:
                self.oplax_names[id(x)] = nm
                return nm
        nm = self._fresh(self.ws.oplax, hint)
        self.ws.oplax[nm] = x
        self.oplax_names[id(x)] = nm
        self._oplax(nm, x)
        return nm

    def _onemor(self, nm, t: LeftTransformation):
        dn = self._oplax_name(t.dom, f"{nm}.dom")
        cn = self._oplax_name(t.cod, f"{nm}.cod")
        out = self.chunks["onemor"]
        out.append(f"onemor {nm} : {dn} -> {cn} {{")
        for i in t.dom.index.objects:
            out.append(f"  at {i} = {self.fun_expr(t.comps[i], f'{nm}.at.{i}')}")
        for a in t.dom.index.morphisms:
            for x in t.dom.cat[t.dom.index.src(a)].objects:
                out.append(f"  psi {a} {x} = {self.coords(t.psi[a].at(x).coords)}".rstrip())
        out.append("}")

    def _candidate(self, nm, tc: TiltingCandidate):
        xn = self._oplax_name(tc.oplax, f"{nm}.oplax")
        out = self.chunks["candidate"]
        out.append(f"candidate {nm} for {xn} {{")
        for i in tc.oplax.index.objects:
            named = tc.objects.get(i, [])
            if named:
                names = [self.cx_name(cx, cnm) for cnm, cx in named]
                out.append(f"  at {i} : {' '.join(names)}")
        out.append("}")

    def _certificate(self, nm, cert: GenerationCertificate, tc_name: str):
        out = self.chunks["certificate"]
        out.append(f"certificate {nm} for {tc_name} {{")
        all_is = sorted(set(list(cert.steps) + list(cert.witnesses)))
        for i in all_is:
            out.append(f"  at {i} {{")
            for snm, step in cert.steps.get(i, []):
                if isinstance(step, ShiftStep):
                    out.append(f"    step {snm} = shift {step.ref} by {step.n}")
                elif isinstance(step, ConeStep):
                    out.append(f"    step {snm} = cone {step.dom_ref} -> {step.cod_ref} {{")
                    out.extend(self.grid_block_lines(step.grids, indent="      "))
                    out.append("    }")
                elif isinstance(step, SummandStep):
                    out.append(f"    step {snm} = summand {step.ref} {{")
                    out.append("      object {")
                    for d in step.summand.degrees:
                        out.append(f"        at {d} : {' '.join(step.summand.proj(d).summands)}")
                    for d in sorted(step.summand.diff):
                        out.append(f"        d {d} = {self.grid(step.summand.diff[d])}")
                    out.append("      }")
                    for label, grids in (("proj", step.proj_grids), ("sect", step.sect_grids), ("idem", step.idem_grids)):
                        out.append(f"      {label} {{")
                        out.extend(self.grid_block_lines(grids, indent="        "))
                        out.append("      }")
                    out.append("    }")
            for x in sorted(cert.witnesses.get(i, {})):
                w = cert.witnesses[i][x]
                out.append(f"    witness {x} : {w.ref} {{")
                out.append("      fwd {")
                out.extend(self.grid_block_lines(w.fwd_grids, indent="        "))
                out.append("      }")
                out.append("      bwd {")
                out.extend(self.grid_block_lines(w.bwd_grids, indent="        "))
                out.append("      }")
                out.append("    }")
            out.append("  }")
        out.append("}")

    def _equivariance(self, nm, ed: EquivarianceData, tc_name: str):
        out = self.chunks["equivariance"]
        out.append(f"equivariance {nm} for {tc_name} {{")
        for a in sorted(ed.obj_action):
            for src in sorted(ed.obj_action[a]):
                out.append(f"  act {a} : {src} -> {ed.obj_action[a][src]}")
        for a in sorted(ed.rho):
            for t in sorted(ed.rho[a]):
                out.append(f"  rho {a} {t} {{")
                out.extend(self.grid_block_lines(ed.rho[a][t], indent="    "))
                out.append("  }")
        out.append("}")

    def _selection(self, nm, sel, oplax_name):
        out = self.chunks["selection"]
        out.append(f"selection {nm} for {oplax_name} {{")
        for i in sorted(sel):
            out.append(f"  at {i} : {' '.join(sel[i])}")
        out.append("}")

    def _adjunction(self, nm, adj: AdjunctionFamily, oplax_name):
        out = self.chunks["adjunction"]
        out.append(f"adjunction {nm} for {oplax_name} {{")
        for i in adj.left:
            le = self.fun_expr(adj.left[i], f"{nm}.left.{i}")
            re = self.fun_expr(adj.right[i], f"{nm}.right.{i}")
            an = self.cat_name(adj.left[i].dom, f"{nm}.a.{i}")
            bn = self.cat_name(adj.left[i].cod, f"{nm}.b.{i}")
            un = self.nat_name(adj.unit[i], f"{nm}.unit.{i}", dom_expr=f"id({an})", cod_expr=f"comp({re}, {le})")
            cn = self.nat_name(adj.counit[i], f"{nm}.counit.{i}", dom_expr=f"comp({le}, {re})", cod_expr=f"id({bn})")
            out.append(f"  at {i} {{ left {le} right {re} unit {un} counit {cn} }}")
        out.append("}")

    def _images(self, nm, t: CxTransformation):
        xpn = self._oplax_name(t.dom, f"{nm}.dom")
        xn = self._oplax_name(t.cod.oplax, f"{nm}.cod")
        out = self.chunks["images"]
        lines = [f"images {nm} : {xpn} -> kb ( {xn} ) {{"]
        for i in t.dom.index.objects:
            fi = t.comps[i]
            lines.append(f"  at {i} {{")
            for o in t.dom.cat[i].objects:
                lines.append(f"    obj {o} -> {self.cx_name(fi.apply_obj(o), f'{nm}.{i}.{o}')}")
            for (u, v) in t.dom.cat[i].hom_pairs():
                for k in range(t.dom.cat[i].dim(u, v)):
                    lines.append(f"    mor {u} {v} {k} = {self.cm_name(fi.mor_map[(u, v, k)], f'{nm}.{i}.{u}.{v}.{k}')}")
            lines.append("  }")
        for a in t.dom.index.morphisms:
            i = t.dom.index.src(a)
            for o in t.dom.cat[i].objects:
                lines.append(f"  psi {a} {o} {{")
                lines.extend(self.grid_block_lines(t.psi_at(a, o).grids, indent="    "))
                lines.append("  }")
        lines.append("}")
        out.extend(lines)

    def serialize(self) -> str:
        self._inventory()
        for nm, idx in list(self.ws.indexes.items()):
            self._index(nm, idx)
        for nm, p in list(self.ws.presentations.items()):
            self._presentation(nm, p)
        for nm, cat in list(self.ws.categories.items()):
            self.cat_names.setdefault(cat.signature(), nm)
            self._category(nm, cat)
        for nm, fun in list(self.ws.functors.items()):
            self._functor(nm, fun)
        for nm, t in list(self.ws.nattrans.items()):
            self.nat_names.setdefault(id(t), nm)
            de = self.fun_expr(t.dom, f"{nm}.dom")
            ce = self.fun_expr(t.cod, f"{nm}.cod")
            out = self.chunks["nattrans"]
            out.append(f"nattrans {nm} : {de} => {ce} {{")
            for x in t.dom.dom.objects:
                out.append(f"  at {x} = {self.coords(t.at(x).coords)}".rstrip())
            out.append("}")
        for nm, m in list(self.ws.comonads.items()):
            self._comonad(nm, m)
        for nm, x in list(self.ws.oplax.items()):
            self.oplax_names.setdefault(id(x), nm)
            self._oplax(nm, x)
        for nm, t in list(self.ws.onemors.items()):
            self._onemor(nm, t)
        for nm, cx in list(self.ws.complexes.items()):
            self.cx_names.setdefault(id(cx), nm)
            self._complex(nm, cx)
        for nm, cm in list(self.ws.chainmaps.items()):
            self.cm_names.setdefault(id(cm), nm)
            dn = self.cx_name(cm.dom, f"{nm}.dom")
            cn = self.cx_name(cm.cod, f"{nm}.cod")
            out = self.chunks["chainmap"]
            out.append(f"chainmap {nm} : {dn} -> {cn} {{")
            for d in sorted(cm.grids):
                out.append(f"  at {d} = {self.grid(cm.grids[d])}")
            out.append("}")
        for nm, tc in list(self.ws.candidates.items()):
            self._candidate(nm, tc)
        for nm, (tc_name, cert) in list(self.ws.certificates.items()):
            self._certificate(nm, cert, tc_name)
        for nm, (tc_name, ed) in list(self.ws.equivariances.items()):
            self._equivariance(nm, ed, tc_name)
        for nm, (ox_name, sel) in list(self.ws.selections.items()):
            self._selection(nm, sel, ox_name)
        for nm, (ox_name, adj) in list(self.ws.adjunctions.items()):
            self._adjunction(nm, adj, ox_name)
        for nm, t in list(self.ws.images.items()):
            self._images(nm, t)
        order = [
            "index",
            "presentation",
            "category",
            "functor",
            "nattrans",
            "comonad",
            "oplax",
            "complex",
            "chainmap",
            "onemor",
            "candidate",
            "certificate",
            "equivariance",
            "selection",
            "adjunction",
            "images",
        ]
        lines = [f"field {self.f}"]
        for kind in order:
            lines.extend(self.chunks[kind])
        return "\n".join(lines) + "\n"


def serialize(ws: Workspace) -> str:
    return Serializer(ws).serialize()
