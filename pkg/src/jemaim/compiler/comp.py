"""The base compiler: one jem class to aim code, data and a symbol table.

Code generation is a stack machine over a memory-resident evaluation stack.
Per-module data layout (data section starts at the fixed base D):

    D+0  evaluation stack pointer       D+16..   evaluation stack
    D+1  frame stack pointer            D+4212.. frame stack (activation
    D+2  heap bump pointer                        records and outcall triples)
    D+3  outstanding-outcall counter    D+8300.. static objects, then heap

Activation records are [resume offset, this, vars...]; an outcall pushes a
[saved this, return-type encoding, resume offset] triple that the return entry
point pops. Objects are [class encoding, fields...]; an internal object id is
its data offset. Values of the module's own class are internal ids inside the
module; every other object value is a cross-module id (mask) or comp(null).

Register discipline: r0 caller id, r1/r2 ALU and branch scratch, r3/r4 jump
targets, r5 return designator, r6 this/result, r7+ parameters, r9..r12
addressing scratch. Local control flow uses cmp/je only; `jmp` appears solely
at the module exits, so caller-callee authentication stamps r0 exactly at
boundary crossings.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..aim.isa import Assembler, Label
from ..aim.link import MethodSig as LinkSig
from ..aim.link import ObjKey
from ..aim.words import N_W, Symbol
from ..encoding import ENC_OBJ
from ..jem import ast
from ..jem.typecheck import Env, T_NULL
from .encoding import encode_class, encode_type, encode_value, link_sig

DATA_BASE = 65536
ESP = DATA_BASE + 0
FSP = DATA_BASE + 1
HP = DATA_BASE + 2
OCD = DATA_BASE + 3
EVAL_BASE = DATA_BASE + 16
FRAME_BASE = DATA_BASE + 4212
FRAME_LIMIT = DATA_BASE + 8200
STATIC_BASE = DATA_BASE + 8300

ZF, SF = 0, 1


class CompileError(Exception):
    pass


@dataclass
class CompiledClass:
    """Unlinked compilation of one class: body emitters plus table ingredients.

    prot() assembles the protected module around it; `plain_assembly()` gives
    the bare multi-entry/single-exit memory of the base compiler alone.
    """

    cname: str
    mid: int
    methods: list[ast.Method]  # sorted by name; entry point i+1 belongs to methods[i]
    cc: "ClassCompiler"

    @property
    def required_methods(self) -> list[tuple[LinkSig, Symbol, Symbol]]:
        return self.cc.required_methods()

    @property
    def required_objects(self) -> list[tuple[ObjKey, Symbol]]:
        return self.cc.required_objects()

    @property
    def exported_objects(self) -> list[tuple[ObjKey, int]]:
        return self.cc.exported_objects()

    def plain_assembly(self):
        """(code words, data words) with exports bound directly to body offsets."""
        asm = Assembler(0)
        for m in self.methods:
            self.cc.emit_body(asm, m)
        self.cc.emit_exit(asm)
        self.cc.emit_abort(asm)
        code = asm.words()
        offsets = {}
        off = 0
        for it in asm.items:
            if isinstance(it, tuple) and it[0] == "label":
                offsets[it[1]] = off
            elif isinstance(it, tuple):
                off += len(it[1])
            else:
                off += it.width
        em = {link_sig(m.sig): offsets[f"body_{m.name}"] for m in self.methods}
        return code, self.cc.data_words(), em


class ClassCompiler:
    def __init__(self, component: ast.JemComponent, cls: ast.JemClass, mid: int):
        self.comp = component
        self.cls = cls
        self.mid = mid
        self.env = Env(component)
        self.own_enc = encode_class(cls.name)
        self._rm: dict[LinkSig, tuple[Symbol, Symbol]] = {}
        self._ro: dict[ObjKey, Symbol] = {}
        self._labels = 0
        # static object layout
        self.obj_offsets: dict[str, int] = {}
        off = STATIC_BASE
        for o in cls.objects:
            self.obj_offsets[o.name] = off
            off += 1 + len(component.cls(o.cname).field_types)
        self.heap_start = off
        # instanceof is always required and later rebound to the system test procedure
        self.inst_syms = (Symbol(f"{cls.name}.instanceof.id"), Symbol(f"{cls.name}.instanceof.off"))
        self._rm[LinkSig("instanceof", "Obj", ("Obj", "Obj"), "Bool")] = self.inst_syms

    # -- symbol management ---------------------------------------------------

    def require_method(self, sig: LinkSig) -> tuple[Symbol, Symbol]:
        if sig not in self._rm:
            base = f"{self.cls.name}.{sig.recv}.{sig.name}"
            self._rm[sig] = (Symbol(base + ".id"), Symbol(base + ".off"))
        return self._rm[sig]

    def require_object(self, name: str, cname: str) -> Symbol:
        key = ObjKey(name, cname)
        if key not in self._ro:
            self._ro[key] = Symbol(f"{self.cls.name}.obj.{name}")
        return self._ro[key]

    def required_methods(self):
        inst_key = LinkSig("instanceof", "Obj", ("Obj", "Obj"), "Bool")
        out = [(inst_key, *self.inst_syms)]
        for sig, (i, s) in sorted(self._rm.items()):
            if sig != inst_key:
                out.append((sig, i, s))
        return out

    def required_objects(self):
        return sorted(self._ro.items())

    def exported_objects(self):
        return [(ObjKey(o.name, o.cname), self.obj_offsets[o.name]) for o in self.cls.objects]

    def fresh_label(self, stem: str) -> str:
        self._labels += 1
        return f"{stem}_{self._labels}"

    # -- type reconstruction (input is already typechecked) -------------------

    def ty(self, e: ast.Expr, scope: dict[str, ast.JemType]) -> ast.JemType:
        if isinstance(e, ast.Lit):
            if e.value == "unit":
                return ast.T_UNIT
            if isinstance(e.value, bool):
                return ast.T_BOOL
            if isinstance(e.value, int):
                return ast.T_INT
            return T_NULL
        if isinstance(e, ast.Var):
            if e.name in scope:
                return scope[e.name]
            cname = self.env.objects.get(e.name) or self.env.decl_objects.get(e.name)
            return ast.t_class(cname)
        if isinstance(e, ast.This):
            return ast.t_class(self.cls.name)
        if isinstance(e, ast.FieldGet):
            return self.cls.field_types[e.fname]
        if isinstance(e, (ast.FieldSet, ast.VarDecl)):
            return ast.T_UNIT
        if isinstance(e, ast.Call):
            rt = self.ty(e.recv, scope)
            return self.env.method_sig(rt.cname, e.mname).ret
        if isinstance(e, ast.BinOp):
            return ast.T_INT if e.op in ("+", "-") else ast.T_BOOL
        if isinstance(e, ast.New):
            return ast.t_class(e.cname)
        if isinstance(e, ast.Seq):
            t1 = self.ty(e.first, scope)
            if isinstance(e.first, ast.VarDecl):
                scope[e.first.name] = e.first.vtype
            return self.ty(e.second, scope)
        if isinstance(e, ast.If):
            t = self.ty(e.then, dict(scope))
            return t if t != T_NULL else self.ty(e.els, dict(scope))
        if isinstance(e, ast.Exit):
            return self.ty(e.value, scope)
        if isinstance(e, ast.InstanceOf):
            return ast.T_BOOL
        raise CompileError(f"untypeable {type(e).__name__}")

    # -- emission helpers ------------------------------------------------------

    def always_jump(self, a: Assembler, label: str, tmp: int = 11):
        a.emit("movi", tmp, Label(label))
        a.emit("cmp", 0, 0)
        a.emit("je", tmp, ZF)

    def jump_if_zf(self, a: Assembler, label: str, tmp: int = 11):
        a.emit("movi", tmp, Label(label))
        a.emit("je", tmp, ZF)

    def push(self, a: Assembler, reg: int):
        a.emit("movi", 10, self.mid)
        a.emit("movi", 9, ESP)
        a.emit("movl", 9, 10, 9)
        a.emit("movs", 10, reg, 9)
        a.emit("movi", 11, 1)
        a.emit("add", 9, 11)
        a.emit("movi", 11, ESP)
        a.emit("movs", 10, 9, 11)

    def pop(self, a: Assembler, reg: int):
        a.emit("movi", 10, self.mid)
        a.emit("movi", 9, ESP)
        a.emit("movl", 9, 10, 9)
        a.emit("movi", 11, 1)
        a.emit("sub", 9, 11)
        a.emit("movi", 11, ESP)
        a.emit("movs", 10, 9, 11)
        a.emit("movl", reg, 10, 9)

    def var_addr(self, a: Assembler, slot: int, framesize: int):
        """r9 := address offset of var slot; r10 := module id."""
        a.emit("movi", 10, self.mid)
        a.emit("movi", 9, FSP)
        a.emit("movl", 9, 10, 9)
        a.emit("movi", 11, framesize - 2 - slot)
        a.emit("sub", 9, 11)

    def load_this(self, a: Assembler, reg: int, framesize: int):
        a.emit("movi", 10, self.mid)
        a.emit("movi", 9, FSP)
        a.emit("movl", 9, 10, 9)
        a.emit("movi", 11, framesize - 1)
        a.emit("sub", 9, 11)
        a.emit("movl", reg, 10, 9)

    def push_value(self, a: Assembler, value: int):
        a.emit("movi", 1, value)
        self.push(a, 1)

    # -- method bodies ---------------------------------------------------------

    def var_slots(self, m: ast.Method) -> dict[str, int]:
        slots = {p: i for i, p in enumerate(m.params)}

        def walk(e):
            if isinstance(e, ast.VarDecl):
                if e.name not in slots:
                    slots[e.name] = len(slots)
                walk(e.value)
            elif isinstance(e, ast.Seq):
                walk(e.first)
                walk(e.second)
            elif isinstance(e, ast.If):
                walk(e.cond)
                walk(e.then)
                walk(e.els)
            elif isinstance(e, ast.BinOp):
                walk(e.left)
                walk(e.right)
            elif isinstance(e, (ast.FieldGet,)):
                walk(e.obj)
            elif isinstance(e, ast.FieldSet):
                walk(e.obj)
                walk(e.value)
            elif isinstance(e, ast.Call):
                walk(e.recv)
                for x in e.args:
                    walk(x)
            elif isinstance(e, ast.New):
                for x in e.args:
                    walk(x)
            elif isinstance(e, (ast.Exit, ast.InstanceOf)):
                walk(e.value)

        walk(m.body)
        return slots

    def emit_body(self, a: Assembler, m: ast.Method):
        slots = self.var_slots(m)
        framesize = 2 + len(slots)
        a.label(f"body_{m.name}")
        # frame-overflow guard: spin in place rather than corrupt memory
        a.emit("movi", 10, self.mid)
        a.emit("movi", 9, FSP)
        a.emit("movl", 1, 10, 9)
        a.emit("movi", 2, FRAME_LIMIT)
        a.emit("sub", 1, 2)
        ok = self.fresh_label("frame_ok")
        spin = self.fresh_label("spin")
        a.emit("movi", 11, Label(ok))
        a.emit("je", 11, SF)
        a.label(spin)
        self.always_jump(a, spin)
        a.label(ok)
        # push activation record [r5, r6, params...]
        a.emit("movi", 10, self.mid)
        a.emit("movi", 9, FSP)
        a.emit("movl", 9, 10, 9)
        a.emit("movs", 10, 5, 9)
        a.emit("movi", 11, 1)
        a.emit("add", 9, 11)
        a.emit("movs", 10, 6, 9)
        for i in range(len(m.params)):
            a.emit("movi", 11, 1)
            a.emit("add", 9, 11)
            a.emit("movs", 10, 7 + i, 9)
        a.emit("movi", 9, FSP)
        a.emit("movl", 1, 10, 9)
        a.emit("movi", 2, framesize)
        a.emit("add", 1, 2)
        a.emit("movs", 10, 1, 9)
        # body expression leaves its value on the eval stack
        scope = dict(zip(m.params, m.sig.params))
        self.expr(a, m.body, scope, slots, framesize)
        # epilogue: r6 := result, restore r5 and the frame pointer, local return
        self.pop(a, 6)
        a.emit("movi", 10, self.mid)
        a.emit("movi", 9, FSP)
        a.emit("movl", 9, 10, 9)
        a.emit("movi", 11, framesize)
        a.emit("sub", 9, 11)
        a.emit("movl", 5, 10, 9)
        a.emit("movi", 11, FSP)
        a.emit("movs", 10, 9, 11)
        a.emit("cmp", 0, 0)
        a.emit("je", 5, ZF)

    # -- expressions -------------------------------------------------------------

    def expr(self, a: Assembler, e: ast.Expr, scope, slots, framesize):
        if isinstance(e, ast.Lit):
            self.push_value(a, encode_value(e.value))
        elif isinstance(e, ast.Var):
            self.compile_var(a, e, scope, slots, framesize)
        elif isinstance(e, ast.This):
            self.load_this(a, 1, framesize)
            self.push(a, 1)
        elif isinstance(e, ast.Seq):
            self.expr(a, e.first, scope, slots, framesize)
            self.pop(a, 1)
            if isinstance(e.first, ast.VarDecl):
                scope[e.first.name] = e.first.vtype
            self.expr(a, e.second, scope, slots, framesize)
        elif isinstance(e, ast.VarDecl):
            self.expr(a, e.value, scope, slots, framesize)
            self.pop(a, 2)
            self.var_addr(a, slots[e.name], framesize)
            a.emit("movs", 10, 2, 9)
            scope[e.name] = e.vtype
            self.push_value(a, encode_value("unit"))
        elif isinstance(e, ast.FieldGet):
            self.expr(a, e.obj, scope, slots, framesize)
            self.pop(a, 1)
            self.null_abort(a, 1)
            a.emit("movi", 11, 1 + list(self.cls.field_types).index(e.fname))
            a.emit("add", 1, 11)
            a.emit("movi", 10, self.mid)
            a.emit("movl", 1, 10, 1)
            self.push(a, 1)
        elif isinstance(e, ast.FieldSet):
            self.expr(a, e.obj, scope, slots, framesize)
            self.expr(a, e.value, scope, slots, framesize)
            self.pop(a, 2)
            self.pop(a, 1)
            self.null_abort(a, 1)
            a.emit("movi", 11, 1 + list(self.cls.field_types).index(e.fname))
            a.emit("add", 1, 11)
            a.emit("movi", 10, self.mid)
            a.emit("movs", 10, 2, 1)
            self.push_value(a, encode_value("unit"))
        elif isinstance(e, ast.BinOp):
            self.compile_binop(a, e, scope, slots, framesize)
        elif isinstance(e, ast.If):
            self.compile_if(a, e, scope, slots, framesize)
        elif isinstance(e, ast.New):
            self.compile_new(a, e, scope, slots, framesize)
        elif isinstance(e, ast.Exit):
            self.expr(a, e.value, scope, slots, framesize)
            self.pop(a, 1)
            a.emit("movi", 6, 0)
            a.emit("add", 6, 1)
            a.emit("halt")
        elif isinstance(e, ast.InstanceOf):
            self.compile_instanceof(a, e, scope, slots, framesize)
        elif isinstance(e, ast.Call):
            self.compile_call(a, e, scope, slots, framesize)
        else:
            raise CompileError(f"cannot compile {type(e).__name__}")

    def compile_var(self, a: Assembler, e: ast.Var, scope, slots, framesize):
        if e.name in scope:
            self.var_addr(a, slots[e.name], framesize)
            a.emit("movl", 1, 10, 9)
            self.push(a, 1)
        elif e.name in self.obj_offsets:
            self.push_value(a, self.obj_offsets[e.name])
        else:
            # a static object of another module: its cross-module id arrives at link time
            cname = self.env.objects.get(e.name) or self.env.decl_objects.get(e.name)
            sym = self.require_object(e.name, cname)
            a.emit("movi", 1, sym)
            self.push(a, 1)

    def null_abort(self, a: Assembler, reg: int):
        a.emit("movi", 11, 0)
        a.emit("cmp", reg, 11)
        self.jump_if_zf(a, "abort")

    def compile_binop(self, a: Assembler, e: ast.BinOp, scope, slots, framesize):
        self.expr(a, e.left, scope, slots, framesize)
        self.expr(a, e.right, scope, slots, framesize)
        self.pop(a, 2)
        self.pop(a, 1)
        if e.op == "+":
            a.emit("add", 1, 2)
            self.push(a, 1)
        elif e.op == "-":
            neg = self.fresh_label("neg")
            done = self.fresh_label("done")
            a.emit("sub", 1, 2)
            a.emit("movi", 11, Label(neg))
            a.emit("je", 11, SF)
            self.always_jump(a, done)
            a.label(neg)
            a.emit("movi", 1, 0)
            a.label(done)
            self.push(a, 1)
        elif e.op == "<":
            a.emit("sub", 1, 2)
            self.push_flag(a, SF)
        elif e.op == "==":
            a.emit("cmp", 1, 2)
            self.push_flag(a, ZF)
        elif e.op == "&&":
            # true=2: the sum is 4 exactly when both are true
            a.emit("add", 1, 2)
            a.emit("movi", 2, 4)
            a.emit("cmp", 1, 2)
            self.push_flag(a, ZF)
        else:
            raise CompileError(f"operator {e.op}")

    def push_flag(self, a: Assembler, flag: int):
        """Push comp(true) if `flag` is set else comp(false)."""
        yes = self.fresh_label("flag_yes")
        done = self.fresh_label("flag_done")
        a.emit("movi", 11, Label(yes))
        a.emit("je", 11, flag)
        a.emit("movi", 1, encode_value(False))
        self.always_jump(a, done)
        a.label(yes)
        a.emit("movi", 1, encode_value(True))
        a.label(done)
        self.push(a, 1)

    def compile_if(self, a: Assembler, e: ast.If, scope, slots, framesize):
        then_l = self.fresh_label("then")
        end_l = self.fresh_label("endif")
        self.expr(a, e.cond, scope, slots, framesize)
        self.pop(a, 1)
        a.emit("movi", 2, encode_value(True))
        a.emit("cmp", 1, 2)
        self.jump_if_zf(a, then_l)
        self.expr(a, e.els, dict(scope), slots, framesize)
        self.always_jump(a, end_l)
        a.label(then_l)
        self.expr(a, e.then, dict(scope), slots, framesize)
        a.label(end_l)

    def compile_new(self, a: Assembler, e: ast.New, scope, slots, framesize):
        if e.cname != self.cls.name:
            raise CompileError(
                f"class {self.cls.name!r} cannot allocate {e.cname!r}: objects are"
                " created by their defining class"
            )
        for x in e.args:
            self.expr(a, x, scope, slots, framesize)
        n = len(e.args)
        a.emit("movi", 10, self.mid)
        a.emit("movi", 9, HP)
        a.emit("movl", 1, 10, 9)
        a.emit("movi", 2, self.own_enc)
        a.emit("movs", 10, 2, 1)
        for i in reversed(range(n)):
            self.pop(a, 2)  # clobbers r9..r11, keeps r1
            a.emit("movi", 9, 1 + i)
            a.emit("add", 9, 1)
            a.emit("movi", 10, self.mid)
            a.emit("movs", 10, 2, 9)
        a.emit("movi", 9, 1 + n)
        a.emit("add", 9, 1)
        a.emit("movi", 10, self.mid)
        a.emit("movi", 11, HP)
        a.emit("movs", 10, 9, 11)
        self.push(a, 1)

    def compile_instanceof(self, a: Assembler, e: ast.InstanceOf, scope, slots, framesize):
        # the instanceof requirement symbols are materialised so linking rebinds them
        a.emit("movi", 11, self.inst_syms[0])
        a.emit("movi", 11, self.inst_syms[1])
        self.expr(a, e.value, scope, slots, framesize)
        self.pop(a, 1)
        enc = encode_class(e.cname)
        lfalse = self.fresh_label("inst_false")
        ltrue = self.fresh_label("inst_true")
        lnonce = self.fresh_label("inst_nonce")
        ldone = self.fresh_label("inst_done")
        a.emit("movi", 2, 0)
        a.emit("cmp", 1, 2)
        self.jump_if_zf(a, lfalse)  # null
        a.emit("movi", 2, 0)
        a.emit("add", 2, 1)  # r2 := arithmetic view; 0 exactly for a nonce here
        a.emit("movi", 11, 0)
        a.emit("cmp", 2, 11)
        self.jump_if_zf(a, lnonce)
        # internal id: compare the object's class word
        a.emit("movi", 10, self.mid)
        a.emit("movl", 2, 10, 1)
        a.emit("movi", 11, enc)
        a.emit("cmp", 2, 11)
        self.jump_if_zf(a, ltrue)
        self.always_jump(a, lfalse)
        a.label(lnonce)
        a.emit("movi", 11, enc)
        a.emit("gst_test", 2, 1, 11)
        a.emit("movi", 11, 0)
        a.emit("cmp", 2, 11)
        self.jump_if_zf(a, ltrue)
        a.label(lfalse)
        a.emit("movi", 1, encode_value(False))
        self.always_jump(a, ldone)
        a.label(ltrue)
        a.emit("movi", 1, encode_value(True))
        a.label(ldone)
        self.push(a, 1)

    # -- calls ---------------------------------------------------------------

    def compile_call(self, a: Assembler, e: ast.Call, scope, slots, framesize):
        recv_t = self.ty(e.recv, dict(scope))
        sig = self.env.method_sig(recv_t.cname, e.mname)
        self.expr(a, e.recv, scope, slots, framesize)
        for x in e.args:
            self.expr(a, x, scope, slots, framesize)
        n = len(e.args)
        for i in reversed(range(n)):
            self.pop(a, 7 + i)
        self.pop(a, 6)
        self.null_abort(a, 6)
        if recv_t.cname == self.cls.name:
            resume = self.fresh_label("iresume")
            a.emit("movi", 5, Label(resume))
            self.always_jump(a, f"body_{e.mname}")
            a.label(resume)
            self.push(a, 6)
        else:
            self.compile_outcall(a, sig, n, framesize)

    def compile_outcall(self, a: Assembler, sig: ast.MethodSig, n: int, framesize: int):
        iota, sigma = self.require_method(link_sig(sig))
        resume = self.fresh_label("oresume")
        # store the outcall triple [this, return-type encoding, resume offset];
        # `this` sits one below the active frame pointer
        a.emit("movi", 10, self.mid)
        a.emit("movi", 9, FSP)
        a.emit("movl", 9, 10, 9)
        a.emit("movi", 1, 0)
        a.emit("add", 1, 9)
        a.emit("movi", 11, framesize - 1)
        a.emit("sub", 1, 11)
        a.emit("movl", 1, 10, 1)
        a.emit("movs", 10, 1, 9)
        a.emit("movi", 11, 1)
        a.emit("add", 9, 11)
        a.emit("movi", 1, encode_type(sig.ret))
        a.emit("movs", 10, 1, 9)
        a.emit("movi", 11, 1)
        a.emit("add", 9, 11)
        a.emit("movi", 1, Label(resume))
        a.emit("movs", 10, 1, 9)
        a.emit("movi", 11, 1)
        a.emit("add", 9, 11)
        a.emit("movi", 1, FSP)
        a.emit("movs", 10, 9, 1)
        a.emit("movi", 9, OCD)
        a.emit("movl", 1, 10, 9)
        a.emit("movi", 11, 1)
        a.emit("add", 1, 11)
        a.emit("movs", 10, 1, 9)
        # mask outgoing object arguments
        for i, pt in enumerate(sig.params):
            self.mask_out(a, 7 + i, pt)
        # scrub scratch and unused parameter registers
        for r in (1, 2, 9, 10, 11, 12):
            a.emit("movi", r, 0)
        for r in range(7 + n, 16):
            a.emit("movi", r, 0)
        a.emit("movi", 3, iota)
        a.emit("movi", 4, sigma)
        self.always_jump(a, "exit")
        a.label(resume)
        self.push(a, 6)

    def mask_out(self, a: Assembler, reg: int, t: ast.JemType):
        """Replace an internal id by its mask before it crosses the boundary."""
        if t.kind == "class" and t.cname == self.cls.name:
            a.emit("tbl_add", reg)  # null and foreign words pass through untouched
        elif t.kind == "Obj":
            a.emit("tbl_add", reg)

    # -- shared blocks ----------------------------------------------------------

    def emit_exit(self, a: Assembler):
        """The single exit: every external jump funnels through here into sys."""
        a.label("exit")
        a.emit("movi", 5, 0)
        a.emit("movi", 1, 2 * N_W)
        a.emit("movi", 2, 1)
        a.emit("jmp", 1, 2)

    def emit_abort(self, a: Assembler):
        a.label("abort")
        a.emit("zero")
        a.emit("halt")

    # -- data -------------------------------------------------------------------

    def data_words(self) -> dict[int, object]:
        mem = {ESP: EVAL_BASE, FSP: FRAME_BASE, HP: self.heap_start, OCD: 0}
        for o in self.cls.objects:
            base = self.obj_offsets[o.name]
            cls = self.comp.cls(o.cname)
            mem[base] = encode_class(o.cname)
            for i, fname in enumerate(cls.field_types):
                mem[base + 1 + i] = self.field_word(o.fields[fname])
        return mem

    def field_word(self, v):
        if isinstance(v, tuple) and v[0] == "objref":
            name = v[1]
            if name in self.obj_offsets:
                return self.obj_offsets[name]
            cname = self.env.objects.get(name) or self.env.decl_objects.get(name)
            return self.require_object(name, cname)
        return encode_value(v)

def comp_class(component: ast.JemComponent, cls: ast.JemClass, mid: int) -> CompiledClass:
    """Compile one class of a typechecked component for module id `mid`."""
    cc = ClassCompiler(component, cls, mid)
    methods = sorted(cls.methods, key=lambda m: m.name)
    return CompiledClass(cls.name, mid, methods, cc)
