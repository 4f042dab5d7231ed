"""A small DOL subset: models, refinements and networks over view files.

Views are looked up next to the .dol file by name (NAME.cd, NAME.od,
NAME.stm, NAME.sd, NAME.cmp) unless a ``library { NAME = "path" }`` block
says otherwise.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .behavioral import CompositeStructure, StateMachine, parse_cmp, parse_stm
from .errors import DiagnosticError, ParseError, ResolveError, TypingError, UnresolvedSymbol, ViewNetError
from .interaction import Interaction, parse_sd
from .kernel import InstitutionId, InstitutionMorphism, Comorphism, Theory
from .lexer import Cursor
from .morphisms import (
    amalgamate,
    cd_of_theory,
    cd_theory,
    extend,
    lookup,
    rename_theory,
    restrict_signature,
    sd_theory,
    with_translation_eval,
)
from .structural import ClassDiagram, InitialContains, ObjectDiagram, parse_cd, parse_od

EXTENSIONS = (".cd", ".od", ".stm", ".sd", ".cmp")


# -- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Ref:
    name: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Raw:
    text: str


@dataclass(frozen=True)
class Group:
    expr: "Expr"


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Then:
    left: "Expr"
    block: Union[Ref, Raw]


@dataclass(frozen=True)
class WithTranslation:
    base: "Expr"
    comorphism: str
    symmap: Tuple[Tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Rename:
    base: "Expr"
    symmap: Tuple[Tuple[str, str], ...]


@dataclass(frozen=True)
class HideAlong:
    base: "Expr"
    morphism: str


@dataclass(frozen=True)
class Reveal:
    base: "Expr"
    symbols: Tuple[str, ...]


Expr = Union[Ref, Raw, Group, And, Then, WithTranslation, Rename, HideAlong, Reveal]


@dataclass(frozen=True)
class ModelDecl:
    name: str
    expr: Expr
    annotations: Tuple[str, ...] = ()


@dataclass(frozen=True)
class RefinementDecl:
    name: str
    abstract: Expr
    concrete: Expr
    annotations: Tuple[str, ...] = ()


@dataclass(frozen=True)
class NetworkDecl:
    name: str
    elements: Tuple[str, ...]
    annotations: Tuple[str, ...] = ()

    @property
    def consistent(self) -> bool:
        return "consistent" in self.annotations


@dataclass(frozen=True)
class LibraryDecl:
    entries: Tuple[Tuple[str, str], ...]


Decl = Union[ModelDecl, RefinementDecl, NetworkDecl, LibraryDecl]


@dataclass(frozen=True)
class NetSpec:
    decls: Tuple[Decl, ...] = ()

    def named(self) -> Dict[str, Decl]:
        return {d.name: d for d in self.decls if not isinstance(d, LibraryDecl)}


# -- parser ----------------------------------------------------------------

_STOP = ("end", "and", "then", "refined", "}", ",")
_KEYWORDS = ("end", "and", "then", "refined", "to", "model", "refinement", "network", "library", "hide", "reveal", "with")


def parse_dol(text: str, source: str = "") -> NetSpec:
    cur = Cursor(text, source)
    decls: List[Decl] = []
    names: Dict[str, object] = {}
    while not cur.at_kind("eof"):
        cur.skip_semis()
        if cur.at_kind("eof"):
            break
        annots = _annotations(cur)
        t = cur.tok
        if cur.accept("model"):
            name = cur.ident("model name")
            cur.expect("=")
            annots += _annotations(cur)
            d: Decl = ModelDecl(name, _expr(cur), annots)
            cur.expect("end")
        elif cur.accept("refinement"):
            name = cur.ident("refinement name")
            cur.expect("=")
            annots += _annotations(cur)
            a = _expr(cur)
            cur.expect("refined")
            cur.expect("to")
            d = RefinementDecl(name, a, _expr(cur), annots)
            cur.expect("end")
        elif cur.accept("network"):
            name = cur.ident("network name")
            cur.expect("=")
            annots += _annotations(cur)
            elems = [_element(cur)]
            while cur.accept(","):
                elems.append(_element(cur))
            d = NetworkDecl(name, tuple(elems), annots)
            cur.expect("end")
        elif cur.accept("library"):
            cur.expect("{")
            entries = []
            while not cur.accept("}"):
                cur.skip_semis()
                if cur.accept("}"):
                    break
                n = cur.ident("view name")
                cur.expect("=")
                if cur.tok.kind != "string":
                    cur.error(f"expected a quoted path, found {cur.describe(cur.tok)}")
                entries.append((n, cur.advance().text))
            decls.append(LibraryDecl(tuple(entries)))
            continue
        else:
            cur.error(f"expected model, refinement, network or library, found {cur.describe(t)}")
        if d.name in names:
            cur.error(f"duplicate declaration {d.name!r}", t)
        names[d.name] = d
        decls.append(d)
    return NetSpec(tuple(decls))


def _element(cur: Cursor) -> str:
    if cur.tok.text in _KEYWORDS:
        cur.error(f"expected a network element, found {cur.describe(cur.tok)}")
    return cur.ident("network element")


def _annotations(cur: Cursor) -> Tuple[str, ...]:
    out = []
    while cur.at_kind("annot"):
        out.append(cur.advance().text[1:])
    return tuple(out)


def _expr(cur: Cursor) -> Expr:
    e = _postfix(cur)
    while True:
        if cur.accept("and"):
            e = And(e, _postfix(cur))
        elif cur.accept("then"):
            e = Then(e, _native(cur))
        else:
            return e


def _native(cur: Cursor) -> Union[Ref, Raw]:
    t = cur.tok
    if t.kind == "raw":
        cur.advance()
        return Raw(t.text)
    return Ref(cur.ident("view name"), t.line, t.column)


def _postfix(cur: Cursor) -> Expr:
    e = _primary(cur)
    while True:
        if cur.at("with"):
            cur.advance()
            if cur.accept("translation"):
                name = cur.ident("comorphism name")
                symmap: Tuple[Tuple[str, str], ...] = ()
                if cur.at("with") and _map_ahead(cur, 1):
                    cur.advance()
                    symmap = _symmap(cur)
                e = WithTranslation(e, name, symmap)
            else:
                e = Rename(e, _symmap(cur))
        elif cur.accept("hide"):
            cur.expect("along")
            e = HideAlong(e, cur.ident("morphism name"))
        elif cur.accept("reveal"):
            syms = [_symbol(cur)]
            while cur.at(",") and cur.peek().kind == "ident" and cur.peek().text not in _STOP:
                cur.advance()
                syms.append(_symbol(cur))
            e = Reveal(e, tuple(syms))
        else:
            return e


def _symbol(cur: Cursor) -> str:
    s = cur.ident("symbol")
    if cur.at(".") and cur.peek().kind == "ident":
        cur.advance()
        s += "." + cur.ident("member name")
    return s


def _map_ahead(cur: Cursor, k: int) -> bool:
    """Is a ``sym |-> sym`` pair starting ``k`` tokens ahead?"""
    if cur.peek(k).kind != "ident":
        return False
    if cur.peek(k + 1).text == "." and cur.peek(k + 2).kind == "ident":
        k += 2
    return cur.peek(k + 1).text == "|->"


def _symmap(cur: Cursor) -> Tuple[Tuple[str, str], ...]:
    pairs = []
    while True:
        a = _symbol(cur)
        cur.expect("|->")
        pairs.append((a, _symbol(cur)))
        if not (cur.at(",") and _map_ahead(cur, 1)):
            return tuple(pairs)
        cur.advance()


def _primary(cur: Cursor) -> Expr:
    t = cur.tok
    if cur.accept("{"):
        e = _expr(cur)
        cur.expect("}")
        return Group(e)
    if t.kind == "raw":
        cur.advance()
        return Raw(t.text)
    return Ref(cur.ident("model name"), t.line, t.column)


# -- printer ---------------------------------------------------------------

def format_expr(e: Expr) -> str:
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Raw):
        return f'"""{e.text}"""'
    if isinstance(e, Group):
        return f"{{ {format_expr(e.expr)} }}"
    if isinstance(e, And):
        return f"{format_expr(e.left)}\nand\n  {format_expr(e.right)}"
    if isinstance(e, Then):
        return f"{format_expr(e.left)}\nthen\n  {format_expr(e.block)}"
    if isinstance(e, WithTranslation):
        s = f"{format_expr(e.base)} with translation {e.comorphism}"
        return s + (f" with {_fmt_map(e.symmap)}" if e.symmap else "")
    if isinstance(e, Rename):
        return f"{format_expr(e.base)} with {_fmt_map(e.symmap)}"
    if isinstance(e, HideAlong):
        return f"{format_expr(e.base)} hide along {e.morphism}"
    return f"{format_expr(e.base)} reveal {', '.join(e.symbols)}"


def _fmt_map(m) -> str:
    return ", ".join(f"{a} |-> {b}" for a, b in m)


def _fmt_annots(a) -> str:
    return "".join(f" %{x}" for x in a)


def format_decl(d: Decl) -> str:
    if isinstance(d, ModelDecl):
        return f"model {d.name} ={_fmt_annots(d.annotations)}\n  {format_expr(d.expr)}\nend\n"
    if isinstance(d, RefinementDecl):
        return (
            f"refinement {d.name} ={_fmt_annots(d.annotations)}\n"
            f"  {format_expr(d.abstract)}\n  refined to {format_expr(d.concrete)}\nend\n"
        )
    if isinstance(d, NetworkDecl):
        return f"network {d.name} ={_fmt_annots(d.annotations)}\n  {', '.join(d.elements)}\nend\n"
    body = "".join(f'  {n} = "{p}"\n' for n, p in d.entries)
    return f"library {{\n{body}}}\n"


def format_spec(spec: NetSpec) -> str:
    return "\n".join(format_decl(d) for d in spec.decls)


# -- resolved graph ----------------------------------------------------------

@dataclass(frozen=True)
class Model:
    """Semantic value of a model expression.

    Exactly one of ``theory`` (a flat theory) or ``op`` (a derived class of
    realizations) is set.
    """

    institution: InstitutionId
    signature: object
    theory: Optional[Theory] = None
    op: Optional[tuple] = None  # ("hide", Model, morphism name) | ("reveal", Model, symbols)
    label: str = ""
    refs: Tuple[str, ...] = ()

    def symbols(self) -> frozenset:
        return self.signature.symbols()


@dataclass(frozen=True)
class Node:
    name: str
    model: Model
    origin: str  # "view" | "model" | "anonymous"
    source: str = ""

    @property
    def institution(self) -> InstitutionId:
        return self.model.institution


@dataclass(frozen=True)
class Link:
    name: str
    abstract: str  # node names
    concrete: str


@dataclass(frozen=True)
class Network:
    name: str
    nodes: Tuple[str, ...]
    links: Tuple[str, ...]
    annotations: Tuple[str, ...] = ()

    @property
    def consistent(self) -> bool:
        return "consistent" in self.annotations


@dataclass
class ResolvedGraph:
    nodes: Dict[str, Node] = field(default_factory=dict)
    edges: List[Tuple[str, str, str]] = field(default_factory=list)  # (from, to, label)
    links: Dict[str, Link] = field(default_factory=dict)
    networks: Dict[str, Network] = field(default_factory=dict)
    directory: str = ""

    def node(self, name: str) -> Node:
        try:
            return self.nodes[name]
        except KeyError:
            raise UnresolvedSymbol(f"unknown node {name!r}") from None

    def network(self, name: str) -> Network:
        try:
            return self.networks[name]
        except KeyError:
            raise UnresolvedSymbol(f"unknown network {name!r}") from None


class Library:
    """Lookup of view files by name."""

    def __init__(self, directory: str = "", overrides: Mapping[str, str] = {}, texts: Mapping[str, str] = {}):
        self.directory = directory
        self.overrides = dict(overrides)
        self.texts = dict(texts)  # "NAME.ext" -> text, for in-memory use
        self._cache: Dict[str, object] = {}

    def find(self, name: str) -> Optional[Tuple[str, str]]:
        """(path or key, text) of the view called ``name``."""
        if name in self.overrides:
            path = os.path.join(self.directory, self.overrides[name])
            return path, _read(path)
        for ext in EXTENSIONS:
            key = name + ext
            if key in self.texts:
                return key, self.texts[key]
            path = os.path.join(self.directory, key) if self.directory else None
            if path and os.path.isfile(path):
                return path, _read(path)
        return None

    def all_names(self) -> List[str]:
        names = set(self.overrides)
        names |= {os.path.splitext(k)[0] for k in self.texts}
        if self.directory and os.path.isdir(self.directory):
            for f in os.listdir(self.directory):
                base, ext = os.path.splitext(f)
                if ext in EXTENSIONS:
                    names.add(base)
        return sorted(names)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise ResolveError(f"cannot read {path}: {e.strerror}") from None


def parse_view(text: str, source: str = ""):
    """Parse any view text, dispatching on its first keyword."""
    head = Cursor(text, source).tok.text
    parsers = {
        "classdiagram": parse_cd,
        "objectdiagram": parse_od,
        "statemachine": parse_stm,
        "interaction": parse_sd,
        "component": parse_cmp,
    }
    if head not in parsers:
        raise ParseError(f"unknown view kind {head!r}", 1, 1, source)
    return parsers[head](text, source)


class _Resolver:
    def __init__(self, spec: NetSpec, lib: Library):
        self.spec = spec
        self.lib = lib
        self.decls = spec.named()
        self.graph = ResolvedGraph(directory=lib.directory)
        self.models: Dict[str, Model] = {}
        self.visiting: List[str] = []
        self.views: Dict[str, object] = {}

    # views ------------------------------------------------------------
    def view(self, name: str):
        if name in self.views:
            return self.views[name]
        hit = self.lib.find(name)
        if hit is None:
            raise ResolveError(f"unresolved reference {name!r}: no declaration and no view file")
        path, text = hit
        v = parse_view(text, path)
        self.views[name] = v
        return v

    def cd_named(self, name: str) -> ClassDiagram:
        v = self.view(name) if name not in self.decls else None
        if isinstance(v, ClassDiagram):
            return v
        m = self.model(name)
        if m.theory is None or m.institution is not InstitutionId.CD:
            raise ResolveError(f"{name} is not a class diagram")
        return cd_of_theory(m.theory)

    def cd_for_class(self, cls: str, what: str) -> ClassDiagram:
        found = []
        for n in self.lib.all_names():
            try:
                v = self.view(n)
            except ViewNetError:
                continue
            if isinstance(v, ClassDiagram) and v.has_class(cls):
                found.append(v)
        if len(found) != 1:
            raise ResolveError(
                f"{what} needs a class diagram declaring {cls}; found {len(found)}. "
                "Build it with 'CD with translation cd2stm then ...'"
            )
        return found[0]

    def view_model(self, name: str) -> Model:
        v = self.view(name)
        if isinstance(v, ClassDiagram):
            th = cd_theory(v)
        elif isinstance(v, ObjectDiagram):
            cd = self.cd_named(v.context)
            th = Theory(InstitutionId.CD, cd.signature(), (InitialContains(v.snapshot, name),))
        elif isinstance(v, Interaction):
            cd = self.cd_named(v.context) if v.context else None
            th = sd_theory(v, cd)
        elif isinstance(v, StateMachine):
            cd = self.cd_for_class(v.context, f"machine {v.name}")
            th = extend(with_translation_eval(cd_theory(cd), lookup("cd2stm")), v)
        elif isinstance(v, CompositeStructure):
            th = self._standalone_cmp(v)
        else:
            raise ResolveError(f"{name} is not a view")
        return Model(th.institution, th.signature, th, label=name)

    def _standalone_cmp(self, c: CompositeStructure) -> Theory:
        if not c.parts:
            return Theory(InstitutionId.CMP, _empty_cmp_signature(), (c,))
        th = None
        for p in c.parts:
            cd = self.cd_for_class(p.cls, f"part {p.name}")
            stm = with_translation_eval(cd_theory(cd), lookup("cd2stm"))
            if p.machine:
                m = self.view(p.machine)
                if not isinstance(m, StateMachine):
                    raise ResolveError(f"{p.machine} is not a state machine")
                stm = extend(stm, m)
            one = with_translation_eval(stm, lookup("stm2cmp"), {"cid": p.name} if p.machine else {})
            th = one if th is None else amalgamate(th, one)
        return extend(th, c)

    # expressions --------------------------------------------------------
    def model(self, name: str) -> Model:
        if name in self.models:
            return self.models[name]
        if name in self.visiting:
            cycle = " -> ".join(self.visiting[self.visiting.index(name):] + [name])
            raise ResolveError(f"cyclic model definition: {cycle}")
        d = self.decls.get(name)
        self.visiting.append(name)
        try:
            if isinstance(d, ModelDecl):
                m = self.expr(d.expr, name)
                m = Model(m.institution, m.signature, m.theory, m.op, name, m.refs)
                origin = "model"
            elif d is None:
                m = self.view_model(name)
                origin = "view"
            else:
                raise ResolveError(f"{name} is a {type(d).__name__.replace('Decl', '').lower()}, not a model")
        finally:
            self.visiting.pop()
        self.models[name] = m
        self.graph.nodes[name] = Node(name, m, origin)
        return m

    def expr(self, e: Expr, owner: str) -> Model:
        if isinstance(e, Group):
            return self.expr(e.expr, owner)
        if isinstance(e, Ref):
            m = self.model(e.name)
            self._edge(e.name, owner, "")
            return Model(m.institution, m.signature, m.theory, m.op, e.name, (e.name,))
        if isinstance(e, Raw):
            v = parse_view(e.text, f"{owner} (inline)")
            th = self._theory_of_native(v)
            return Model(th.institution, th.signature, th, label="inline")
        if isinstance(e, And):
            l, r = self.expr(e.left, owner), self.expr(e.right, owner)
            th = amalgamate(self._flat(l, "and"), self._flat(r, "and"))
            return Model(th.institution, th.signature, th, label=format_expr(e), refs=l.refs + r.refs)
        if isinstance(e, Then):
            l = self.expr(e.left, owner)
            if isinstance(e.block, Ref):
                v = self.view(e.block.name)
                self._edge(e.block.name, owner, "then")
            else:
                v = parse_view(e.block.text, f"{owner} (inline)")
            try:
                th = extend(self._flat(l, "then"), v)
            except TypingError as err:
                raise ResolveError(str(err)) from None
            return Model(th.institution, th.signature, th, label=format_expr(e), refs=l.refs)
        if isinstance(e, WithTranslation):
            b = self.expr(e.base, owner)
            rho = self._lookup(e.comorphism, Comorphism)
            self._relabel(b.refs, owner, f"with translation {e.comorphism}")
            try:
                th = with_translation_eval(self._flat(b, "with translation"), rho, dict(e.symmap))
            except TypingError as err:
                raise ResolveError(str(err)) from None
            return Model(th.institution, th.signature, th, label=format_expr(e), refs=b.refs)
        if isinstance(e, Rename):
            b = self.expr(e.base, owner)
            th = rename_theory(self._flat(b, "with"), dict(e.symmap))
            return Model(th.institution, th.signature, th, label=format_expr(e), refs=b.refs)
        if isinstance(e, HideAlong):
            b = self.expr(e.base, owner)
            mu = self._lookup(e.morphism, InstitutionMorphism)
            if b.institution is not mu.source:
                raise ResolveError(f"{e.morphism} maps {mu.source} models, but the operand is {b.institution}")
            self._relabel(b.refs, owner, f"hide along {e.morphism}")
            if mu.name == "sd2cd":
                sig = mu.sig_project(b.signature, name=f"{b.label}_cd")
            else:
                sig = mu.sig_project(b.signature)
            return Model(mu.target, sig, None, ("hide", b, mu.name), format_expr(e), b.refs)
        if isinstance(e, Reveal):
            b = self.expr(e.base, owner)
            syms = self._reveal_symbols(b, e.symbols)
            self._relabel(b.refs, owner, "reveal")
            sig = restrict_signature(b.institution, b.signature, syms)
            return Model(b.institution, sig, None, ("reveal", b, syms), format_expr(e), b.refs)
        raise ResolveError(f"cannot resolve {e!r}")

    def _theory_of_native(self, v) -> Theory:
        if isinstance(v, ClassDiagram):
            return cd_theory(v)
        if isinstance(v, Interaction):
            return sd_theory(v, self.cd_named(v.context) if v.context else None)
        raise ResolveError("inline views must be class diagrams or interactions")

    def _flat(self, m: Model, op: str) -> Theory:
        if m.theory is None:
            raise ResolveError(f"'{op}' needs a flat model, but {m.label} is derived by hiding or revealing")
        return m.theory

    def _lookup(self, name, kind):
        try:
            return lookup(name, kind)
        except (UnresolvedSymbol, TypingError) as err:
            raise ResolveError(str(err)) from None

    def _reveal_symbols(self, b: Model, names: Sequence[str]) -> frozenset:
        if len(names) == 1 and (names[0] in self.decls or self.lib.find(names[0]) is not None):
            other = self.model(names[0])
            syms = other.symbols()
            missing = syms - b.symbols()
            if missing:
                raise ResolveError(
                    f"cannot reveal {names[0]}: {', '.join(sorted(map(str, missing)))} not in the revealed model"
                )
            return syms
        out = set()
        for n in names:
            hits = {s for s in b.symbols() if s.name == n}
            if not hits:
                raise ResolveError(f"cannot reveal unknown symbol {n!r}")
            out |= hits
            # revealing a class keeps its declared members visible only when named
        return frozenset(out)

    def _edge(self, src: str, dst: str, label: str) -> None:
        if src != dst:
            self.graph.edges.append((src, dst, label))

    def _relabel(self, refs, owner, label) -> None:
        """Attach the operation name to the most recent plain edge(s) from refs."""
        for i in range(len(self.graph.edges) - 1, -1, -1):
            s, d, l = self.graph.edges[i]
            if d == owner and s in refs and l == "":
                self.graph.edges[i] = (s, d, label)

    # declarations -------------------------------------------------------
    def run(self) -> ResolvedGraph:
        for d in self.spec.decls:
            if isinstance(d, ModelDecl):
                self.model(d.name)
        for d in self.spec.decls:
            if isinstance(d, RefinementDecl):
                self.refinement(d)
        for d in self.spec.decls:
            if isinstance(d, NetworkDecl):
                self.network(d)
        self.graph.edges = sorted(set(self.graph.edges))
        return self.graph

    def endpoint(self, e: Expr, link: str, side: str) -> str:
        inner = e.expr if isinstance(e, Group) else e
        if isinstance(inner, Ref):
            self.model(inner.name)
            return inner.name
        name = f"{link}.{side}"
        m = self.expr(e, name)
        self.graph.nodes[name] = Node(name, m, "anonymous", format_expr(e))
        return name

    def refinement(self, d: RefinementDecl) -> None:
        a = self.endpoint(d.abstract, d.name, "abstract")
        c = self.endpoint(d.concrete, d.name, "concrete")
        ma, mc = self.graph.nodes[a].model, self.graph.nodes[c].model
        if ma.institution is not mc.institution:
            raise ResolveError(
                f"refinement {d.name}: signature mismatch, {ma.institution} refined to {mc.institution}"
            )
        missing = ma.symbols() - mc.symbols()
        if missing:
            raise ResolveError(
                f"refinement {d.name}: signature mismatch, concrete side lacks {', '.join(sorted(map(str, missing)))}"
            )
        self.graph.links[d.name] = Link(d.name, a, c)

    def network(self, d: NetworkDecl) -> None:
        nodes, links = [], []
        for el in d.elements:
            if el in self.graph.links:
                links.append(el)
            elif isinstance(self.decls.get(el), (RefinementDecl, NetworkDecl)):
                raise ResolveError(f"network {d.name}: {el} is not a model or refinement")
            else:
                self.model(el)
                nodes.append(el)
        self.graph.networks[d.name] = Network(d.name, tuple(nodes), tuple(links), d.annotations)


def _empty_cmp_signature():
    from .behavioral import CompositeSignature

    return CompositeSignature(ClassDiagram(""), (), ())


def resolve(spec: NetSpec, library: Union[Library, str, None] = None) -> ResolvedGraph:
    if library is None or isinstance(library, str):
        library = Library(library or "")
    overrides = dict(library.overrides)
    for d in spec.decls:
        if isinstance(d, LibraryDecl):
            overrides.update(d.entries)
    lib = Library(library.directory, overrides, library.texts)
    try:
        return _Resolver(spec, lib).run()
    except (DiagnosticError, ParseError, ResolveError):
        raise
    except (TypingError, UnresolvedSymbol) as err:
        raise ResolveError(str(err)) from None


def load(path: str) -> Tuple[NetSpec, ResolvedGraph]:
    """Parse and resolve a .dol file against the views in its directory."""
    text = _read(path)
    spec = parse_dol(text, path)
    return spec, resolve(spec, Library(os.path.dirname(os.path.abspath(path))))


# -- DOT export --------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def export_dot(g: ResolvedGraph) -> str:
    """Development graph: solid definitional edges, dashed refinement links."""
    if not g.nodes and not g.links:
        return ""
    lines = ["digraph development {", "  rankdir=BT;", "  node [shape=box];"]
    for name in sorted(g.nodes):
        n = g.nodes[name]
        label = f"{name}:{n.institution}"
        if n.origin == "anonymous":
            label = f"{n.source}:{n.institution}"
        style = ", style=rounded" if n.origin == "anonymous" else ""
        lines.append(f"  {_q(name)} [label={_q(label)}{style}];")
    for s, d, l in g.edges:
        if s in g.nodes and d in g.nodes:
            attr = f" [label={_q(l)}]" if l else ""
            lines.append(f"  {_q(s)} -> {_q(d)}{attr};")
    for name in sorted(g.links):
        k = g.links[name]
        lines.append(f"  {_q(k.abstract)} -> {_q(k.concrete)} [style=dashed, label={_q(name)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
