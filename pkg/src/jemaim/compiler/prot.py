"""The protective wrapper: entry points, dynamic checks, masking, exports.

prot() assembles a compiled class into a protected module:

    [EP 0: return entry]  [EP i: method i]  ...   (N_W words each)
    [return-entry code] [method-entry code]* [method bodies]* [exit] [abort]
    [data: stack pointers, signature table, static objects]

Method entry points admit only jumps forwarded by sys (r0=1, r5=3*N_W), load
masked receivers, typecheck receiver and parameters, run the body, mask the
result and return through sys. The return entry point (offset 0) accepts only
sys, pops the outcall triple and typechecks the returned value before
resuming. Exports bind methods to their entry points and objects to masks.
"""
from __future__ import annotations

from ..aim.isa import Assembler, Label
from ..aim.link import MethodSig as LinkSig
from ..aim.link import ObjKey, ProgramImage, SymbolTable
from ..aim.words import N_W, Address, Descriptor, Nonce
from ..encoding import ENC_BOOL, ENC_INT, ENC_OBJ, ENC_UNIT
from ..jem import ast
from .comp import DATA_BASE, FRAME_LIMIT, FSP, OCD, CompiledClass, CompileError
from .encoding import encode_class, encode_type
from .sysmod import TESTOBJ

ZF, SF = 0, 1

SIGTAB_BASE = FRAME_LIMIT + 1

INSTANCEOF_KEY = LinkSig("instanceof", "Obj", ("Obj", "Obj"), "Bool")

_instance = 0


def _trampoline(a: Assembler, target: str):
    start = a.here()
    a.emit("movi", 1, Label(target))
    a.emit("cmp", 0, 0)
    a.emit("je", 1, ZF)
    a.raw(*([0] * (N_W - (a.here() - start))))


def _check_eq(cc, a: Assembler, reg: int, value, fail_label="abort"):
    ok = cc.fresh_label("chk")
    a.emit("movi", 1, value)
    a.emit("cmp", reg, 1)
    a.emit("movi", 2, Label(ok))
    a.emit("je", 2, ZF)
    cc.always_jump(a, fail_label)
    a.label(ok)


def _param_check(cc, a: Assembler, reg: int, t: ast.JemType):
    if t.kind == "class" and t.cname == cc.cls.name:
        skip = cc.fresh_label("pnull")
        a.emit("movi", 1, 0)
        a.emit("cmp", reg, 1)
        cc.jump_if_zf(a, skip)
        a.emit("tbl_get", reg, reg)
        a.emit("movi", 1, cc.own_enc)
        a.emit("tychk", reg, 1)
        a.label(skip)
    else:
        a.emit("movi", 1, encode_type(t))
        a.emit("tychk", reg, 1)


def _method_entry(cc, a: Assembler, m: ast.Method):
    a.label(f"epimpl_{m.name}")
    _check_eq(cc, a, 0, 1)  # jumps must come via sys
    _check_eq(cc, a, 5, 3 * N_W)  # with the forward-return address armed
    a.emit("tbl_get", 6, 6)  # receiver: unknown or null masks abort
    a.emit("movi", 1, cc.own_enc)
    a.emit("tychk", 6, 1)
    for i, pt in enumerate(m.sig.params):
        _param_check(cc, a, 7 + i, pt)
    ret = cc.fresh_label("epret")
    a.emit("movi", 5, Label(ret))
    cc.always_jump(a, f"body_{m.name}")
    a.label(ret)
    cc.mask_out(a, 6, m.sig.ret)
    for r in (1, 2, 3, 4):
        a.emit("movi", r, 0)
    for r in range(7, 16):
        a.emit("movi", r, 0)
    a.emit("movi", 5, 1)
    a.emit("movi", 1, 3 * N_W)
    a.emit("movi", 2, 1)
    a.emit("jmp", 1, 2)


def _return_entry(cc, a: Assembler):
    a.label("retimpl")
    _check_eq(cc, a, 0, 1)  # only sys forwards returns
    # there must be an outstanding outcall
    a.emit("movi", 10, cc.mid)
    a.emit("movi", 9, OCD)
    a.emit("movl", 1, 10, 9)
    a.emit("movi", 2, 0)
    a.emit("cmp", 1, 2)
    cc.jump_if_zf(a, "abort")
    a.emit("movi", 2, 1)
    a.emit("sub", 1, 2)
    a.emit("movs", 10, 1, 9)
    # pop the [this, return type, resume] triple
    a.emit("movi", 9, FSP)
    a.emit("movl", 9, 10, 9)
    a.emit("movi", 11, 3)
    a.emit("sub", 9, 11)
    a.emit("movi", 11, FSP)
    a.emit("movs", 10, 9, 11)
    a.emit("movl", 12, 10, 9)  # saved current object
    a.emit("movi", 11, 1)
    a.emit("add", 9, 11)
    a.emit("movl", 1, 10, 9)  # expected return-type encoding
    a.emit("movi", 11, 1)
    a.emit("add", 9, 11)
    a.emit("movl", 2, 10, 9)  # resume offset
    own = cc.fresh_label("ret_own")
    go = cc.fresh_label("ret_go")
    a.emit("movi", 11, cc.own_enc)
    a.emit("cmp", 1, 11)
    cc.jump_if_zf(a, own)
    a.emit("tychk", 6, 1)
    cc.always_jump(a, go)
    a.label(own)
    a.emit("movi", 11, 0)
    a.emit("cmp", 6, 11)
    cc.jump_if_zf(a, go)  # null return needs no unmasking
    a.emit("tbl_get", 6, 6)
    a.emit("tychk", 6, 1)
    a.label(go)
    a.emit("cmp", 0, 0)
    a.emit("je", 2, ZF)


def prot(compiled: CompiledClass) -> ProgramImage:
    """Wrap a compiled class into a protected aim module."""
    cc = compiled.cc
    k = len(compiled.methods)
    a = Assembler(0)
    _trampoline(a, "retimpl")
    for m in compiled.methods:
        _trampoline(a, f"epimpl_{m.name}")
    _return_entry(cc, a)
    for m in compiled.methods:
        _method_entry(cc, a, m)
    for m in compiled.methods:
        cc.emit_body(a, m)
    cc.emit_exit(a)
    cc.emit_abort(a)
    code = a.words()
    code_len = len(code)
    if code_len >= DATA_BASE:
        raise CompileError(f"code section of {compiled.cname!r} exceeds the data base")

    mem = {Address(compiled.mid, i): w for i, w in enumerate(code)}
    for off, w in cc.data_words().items():
        mem[Address(compiled.mid, off)] = w
    # signature table: [iota, sigma, recv, ret, nparams, params...] per requirement
    off = SIGTAB_BASE
    for sig, iota, sigma in compiled.required_methods:
        row = [iota, sigma, _enc_name(sig.recv), _enc_name(sig.ret), len(sig.params)]
        row += [_enc_name(p) for p in sig.params]
        for w in row:
            mem[Address(compiled.mid, off)] = w
            off += 1

    # masking table for statically exported objects: one fresh mask each;
    # the stream is per-instance so re-compilations never share masks
    global _instance
    _instance += 1
    stream = f"static-{compiled.cname}-{compiled.mid}-{_instance}"
    masks: dict[int, Nonce] = {}
    eo: dict[ObjKey, Nonce] = {}
    for seq, (key, obj_off) in enumerate(compiled.exported_objects):
        mask = Nonce(stream, seq)
        masks[obj_off] = mask
        eo[key] = mask

    em = {}
    for i, m in enumerate(compiled.methods):
        from .encoding import link_sig

        em[link_sig(m.sig)] = Address(compiled.mid, (i + 1) * N_W)

    rm = []
    for sig, iota, sigma in compiled.required_methods:
        if sig == INSTANCEOF_KEY:
            rm.append((TESTOBJ, iota, sigma))  # instanceof resolves to the system test
        else:
            rm.append((sig, iota, sigma))

    table = SymbolTable(em=em, eo=eo, rm=rm, ro=list(compiled.required_objects))
    desc = Descriptor(compiled.mid, code_len, k + 1)
    return ProgramImage(mem, [desc], table, {compiled.mid: masks})


def _enc_name(tname: str) -> int:
    if tname == "Unit":
        return ENC_UNIT
    if tname == "Bool":
        return ENC_BOOL
    if tname == "Int":
        return ENC_INT
    if tname == "Obj":
        return ENC_OBJ
    return encode_class(tname)
