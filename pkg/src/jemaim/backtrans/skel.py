"""The witness skeleton: stub classes, per-type registries, the Helper class.

The skeleton implements every interface the component pair imports (stub
classes with default-returning methods and a factory), declares everything the
pair exports (so plugging succeeds), and equips Helper with the step counter,
the divergence loop, and per-type object registries backed by linked-list
classes. Registries are pre-populated with all statically known objects in
main's prelude, using the same numbering the emulator assigns to ids.
"""
from __future__ import annotations

from ..jem import ast
from ..jem.ast import JemType, T_BOOL, T_INT, T_OBJ, T_UNIT, t_class
from .interface import ImportMismatch, Interface


def default_value(t: JemType):
    if t == T_UNIT:
        return ast.Lit("unit")
    if t == T_BOOL:
        return ast.Lit(True)
    if t == T_INT:
        return ast.Lit(0)
    return ast.Lit("null")


def oc_call(mname, *args):
    return ast.Call(ast.Var("oc"), mname, list(args))


def seq(*exprs):
    out = exprs[-1]
    for e in reversed(exprs[:-1]):
        out = ast.Seq(e, out)
    return out


def _method(name, params, recv, ptypes, ret, body):
    return ast.Method(name, params, ast.MethodSig(name, recv, tuple(ptypes), ret), body)


def _listof(tname: str) -> ast.JemClass:
    """Linked-list registry node for one object type."""
    t = t_class(tname) if tname != "Obj" else T_OBJ
    me = t_class(f"listof-{tname}")
    get = _method(
        "getByName",
        ["k"],
        me,
        [T_INT],
        t,
        ast.If(
            ast.BinOp("==", ast.FieldGet(ast.This(), "n"), ast.Var("k")),
            ast.FieldGet(ast.This(), "v"),
            ast.If(
                ast.BinOp("==", ast.FieldGet(ast.This(), "next"), ast.Lit("null")),
                ast.Lit("null"),
                ast.Call(ast.FieldGet(ast.This(), "next"), "getByName", [ast.Var("k")]),
            ),
        ),
    )
    append = _method(
        "append",
        ["o", "k"],
        me,
        [t, T_INT],
        me,
        ast.New(f"listof-{tname}", [ast.Var("o"), ast.Var("k"), ast.This()]),
    )
    return ast.JemClass(
        name=f"listof-{tname}",
        import_classes=[],
        import_objects=[],
        ctor=ast.Ctor(["v", "n", "next"]),
        field_types={"v": t, "n": T_INT, "next": me},
        methods=[get, append],
        objects=[
            ast.ObjectDef(f"sentinel-{tname}", f"listof-{tname}", {"v": "null", "n": 0, "next": "null"})
        ],
    )


def _stub_class(ic: ast.ImportClass) -> ast.JemClass:
    methods = []
    for sig in ic.sigs:
        params = [f"x-{j + 1}" for j in range(len(sig.params))]
        methods.append(_method(sig.name, params, sig.recv, sig.params, sig.ret, default_value(sig.ret)))
    factory = _method(f"mk-{ic.name}", [], t_class(ic.name), [], t_class(ic.name), ast.New(ic.name, []))
    if any(m.name == factory.name for m in methods):
        raise ImportMismatch(f"interface {ic.name} collides with the factory name {factory.name}")
    return ast.JemClass(
        name=ic.name,
        import_classes=[],
        import_objects=[],
        ctor=ast.Ctor([]),
        field_types={},
        methods=methods + [factory],
        objects=[ast.ObjectDef(f"static-for-{ic.name}", ic.name, {})],
    )


def skel(c1: ast.JemComponent, c2: ast.JemComponent, iface: Interface) -> ast.JemComponent:
    """The differentiating context's skeleton; emulation fills its method bodies."""
    ics, ios = c1.all_imports()
    by_name: dict[str, ast.ImportClass] = {}
    for ic in ics:
        prev = by_name.get(ic.name)
        if prev is None:
            by_name[ic.name] = ic
        else:
            known = {s.name for s in prev.sigs}
            prev.sigs.extend(s for s in ic.sigs if s.name not in known)
    if "Helper" in by_name or any(c.name == "Helper" for c in c1.classes):
        raise ImportMismatch("the name Helper must be fresh")

    stubs = [_stub_class(ic) for ic in sorted(by_name.values(), key=lambda ic: ic.name)]
    # stub objects for every object declaration the pair imports
    declared = {o.name for s in stubs for o in s.objects}
    for io in sorted({(io.name, io.cname) for io in ios}):
        name, cname = io
        if name in declared:
            continue
        for s in stubs:
            if s.name == cname:
                s.objects.append(ast.ObjectDef(name, cname, {}))

    registry_types = sorted(iface.internal_classes) + sorted(iface.external_classes) + ["Obj"]
    registries = [_listof(t) for t in registry_types]

    helper = _helper_class(c1, iface, registry_types)
    return ast.JemComponent(registries + stubs + [helper])


def _helper_class(c1: ast.JemComponent, iface: Interface, registry_types: list[str]) -> ast.JemClass:
    fields: dict[str, JemType] = {"step": T_INT}
    obj_fields: dict[str, object] = {"step": 0}
    for t in registry_types:
        fields[f"head-{t}"] = t_class(f"listof-{t}")
        obj_fields[f"head-{t}"] = ("objref", f"sentinel-{t}")

    me = t_class("Helper")
    methods = [
        _method(
            "isStep",
            ["x"],
            me,
            [T_INT],
            T_BOOL,
            ast.If(
                ast.BinOp("==", ast.FieldGet(ast.This(), "step"), ast.Var("x")),
                ast.Lit(True),
                ast.Lit(False),
            ),
        ),
        _method(
            "incrStep",
            [],
            me,
            [],
            T_UNIT,
            ast.FieldSet(ast.This(), "step", ast.BinOp("+", ast.FieldGet(ast.This(), "step"), ast.Lit(1))),
        ),
        _method("diverge", [], me, [], T_UNIT, ast.Call(ast.This(), "diverge", [])),
        _method("main", [], me, [], T_INT, _prelude(iface)),
    ]
    for t in registry_types:
        tt = t_class(t) if t != "Obj" else T_OBJ
        methods.append(
            _method(
                f"addObject-{t}",
                ["o", "k"],
                me,
                [tt, T_INT],
                T_UNIT,
                ast.FieldSet(
                    ast.This(),
                    f"head-{t}",
                    ast.Call(ast.FieldGet(ast.This(), f"head-{t}"), "append", [ast.Var("o"), ast.Var("k")]),
                ),
            )
        )
        methods.append(
            _method(
                f"getByName-{t}",
                ["k"],
                me,
                [T_INT],
                tt,
                ast.Call(ast.FieldGet(ast.This(), f"head-{t}"), "getByName", [ast.Var("k")]),
            )
        )
    for t in sorted(iface.external_classes):
        methods.append(
            _method(
                f"createNew-{t}",
                ["k"],
                me,
                [T_INT],
                t_class(t),
                seq(
                    ast.VarDecl("o", t_class(t), ast.Call(ast.Var(f"static-for-{t}"), f"mk-{t}", [])),
                    ast.Call(ast.This(), f"addObject-{t}", [ast.Var("o"), ast.Var("k")]),
                    ast.Var("o"),
                ),
            )
        )
    # generic dispatchers over every registry
    methods.append(_generic_add(me, registry_types))
    methods.append(_generic_get(me, registry_types))

    # the witness imports everything the component pair exports
    import_classes = []
    for c in c1.classes:
        import_classes.append(ast.ImportClass(c.name, [m.sig for m in c.methods]))
    import_objects = [
        ast.ImportObj(name, cls) for name, cls, _, _ in iface.exported_objects
    ]
    return ast.JemClass(
        name="Helper",
        import_classes=import_classes,
        import_objects=import_objects,
        ctor=ast.Ctor(list(fields)),
        field_types=fields,
        methods=methods,
        objects=[
            ast.ObjectDef("oc", "Helper", dict(obj_fields)),
            ast.ObjectDef("main", "Helper", dict(obj_fields)),
        ],
    )


def _generic_add(me, registry_types):
    body = ast.Call(ast.This(), "addObject-Obj", [ast.Var("o"), ast.Var("k")])
    for t in registry_types:
        if t == "Obj":
            continue
        body = ast.If(ast.InstanceOf(ast.Var("o"), t), ast.Call(ast.This(), "addObject-Obj", [ast.Var("o"), ast.Var("k")]), body)
    return _method("addObject", ["o", "k"], me, [T_OBJ, T_INT], T_UNIT, body)


def _generic_get(me, registry_types):
    body = ast.Lit("null")
    for t in reversed(registry_types):
        probe = ast.Call(ast.This(), f"getByName-{t}", [ast.Var("k")])
        body = seq(
            ast.VarDecl(f"r-{t}", T_OBJ, probe),
            ast.If(ast.BinOp("==", ast.Var(f"r-{t}"), ast.Lit("null")), body, ast.Var(f"r-{t}")),
        )
    return _method("getByName", ["k"], me, [T_INT], T_OBJ, body)


def _prelude(iface: Interface) -> ast.Expr:
    """main's opening: register every statically known object under its number."""
    exprs = []
    for name, cls, _word, idx in iface.exported_objects:
        exprs.append(oc_call(f"addObject-{cls}", ast.Var(name), ast.Lit(idx)))
    for name, cls, _word, idx in iface.required_objects:
        exprs.append(oc_call(f"addObject-{cls}", ast.Var(name), ast.Lit(idx)))
    exprs.append(ast.Lit(0))
    return seq(*exprs)
