"""Shared interface metadata for the back-translation of a component pair."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..aim.link import MethodSig as LinkSig
from ..aim.words import SYS_ID
from ..encoding import encode_class
from ..jem import ast


class ImportMismatch(Exception):
    """The two components differ in imports or class layout: trivially distinguishable."""


def _jem_type(name: str) -> ast.JemType:
    return {
        "Unit": ast.T_UNIT,
        "Bool": ast.T_BOOL,
        "Int": ast.T_INT,
        "Obj": ast.T_OBJ,
    }.get(name) or ast.t_class(name)


def jem_sig(sig: LinkSig) -> ast.MethodSig:
    return ast.MethodSig(sig.name, _jem_type(sig.recv), tuple(_jem_type(p) for p in sig.params), _jem_type(sig.ret))


@dataclass
class MethodKnowledge:
    """Map from action addresses to jem method signatures (rule methodKnowledge)."""

    by_addr: dict = field(default_factory=dict)

    def lookup(self, addr):
        return self.by_addr.get(tuple(addr))


@dataclass
class Interface:
    internal_classes: list[str]
    external_classes: list[str]
    methods: MethodKnowledge
    exported_objects: list  # (name, class, canonical id, registry index)
    required_objects: list  # (name, class, "$symbol", registry index)

    def is_internal(self, t: ast.JemType) -> bool:
        return t.kind == "class" and t.cname in self.internal_classes

    def is_external(self, t: ast.JemType) -> bool:
        return t.kind == "class" and t.cname in self.external_classes

    def class_of_encoding(self, enc):
        for name in self.internal_classes + self.external_classes:
            if encode_class(name) == enc:
                return name
        return None

    def seeded_name_table(self) -> dict:
        """nonce_to_int seeds: exported masks then required-object symbols, from 1."""
        table = {}
        for name, cls, word, idx in self.exported_objects + self.required_objects:
            table[word] = idx
        return table


def build_interface(c1: ast.JemComponent, c2: ast.JemComponent, image, image2=None) -> Interface:
    """Shared knowledge of the pair: internal/external classes, method addresses,
    object registries. Exports coincide across the pair; requirements are the
    union (each compilation only requires the methods it calls)."""
    if _import_shape(c1) != _import_shape(c2):
        raise ImportMismatch("components import different interfaces or objects")
    if sorted(c.name for c in c1.classes) != sorted(c.name for c in c2.classes):
        raise ImportMismatch("components define different classes")
    internal = sorted(c.name for c in c1.classes)
    ics, ios = c1.all_imports()
    external = sorted({ic.name for ic in ics})

    mk = MethodKnowledge()
    for sig, addr in image.table.em.items():
        if addr.mid != SYS_ID:
            mk.by_addr[(addr.mid, addr.off)] = jem_sig(sig)
    for img in (image, image2):
        if img is None:
            continue
        for sig, iota, sigma in img.table.rm:
            mk.by_addr[(f"${iota.name}", f"${sigma.name}")] = jem_sig(sig)

    eo, idx = [], 1
    canon = {}
    for k, mask in sorted(image.table.eo.items()):
        cname = f"N{len(canon)}"
        canon[mask] = cname
        eo.append((k.name, k.cls, cname, idx))
        idx += 1
    ro = []
    for k, sym in sorted(image.table.ro, key=lambda e: (e[0].render(), e[1].name)):
        ro.append((k.name, k.cls, f"${sym.name}", idx))
        idx += 1
    return Interface(internal, external, mk, eo, ro)


def _import_shape(c: ast.JemComponent):
    ics, ios = c.all_imports()
    return (
        sorted((ic.name, tuple(sorted(map(repr, ic.sigs)))) for ic in ics),
        sorted((io.name, io.cname) for io in ios),
    )
