"""Pretty-printer for terms; inverse of the parser up to alpha-renaming."""

from __future__ import annotations

from .prims import is_literal_name
from .syntax import (
    BOOL,
    App,
    CaseD,
    CaseP,
    Force,
    Inj,
    Lam,
    Let,
    Norm,
    Pair,
    Prim,
    Proj,
    Return,
    Sample,
    Score,
    Star,
    Term,
    ThunkT,
    Var,
    free_vars,
    ty_str,
)

# Precedence levels: 0 binder forms, 1 sequencing, 2 comparisons,
# 3 additive, 4 multiplicative, 5 application and unary minus, 6 atoms.

_CMP_NAMES = {"<": "<", ">": ">", "eq": "=="}
_ADD_NAMES = {"+", "-"}
_MUL_NAMES = {"*", "/"}
_KW_FORMS = {
    Return: "return",
    Sample: "sample",
    Score: "score",
    Norm: "norm",
    Force: "force",
    ThunkT: "thunk",
}


def pretty(t: Term) -> str:
    return _pp(t, 0)


def _paren(s: str, level: int, minimum: int) -> str:
    return f"({s})" if level < minimum else s


def _flatten_pair(t: Term) -> list[Term]:
    parts = [t]
    while isinstance(parts[-1], Pair):
        last = parts.pop()
        parts.extend((last.left, last.right))
    return parts


def _pp(t: Term, minimum: int) -> str:
    match t:
        case Var(name):
            return name
        case Star():
            return "*"
        case Pair():
            parts = _flatten_pair(t)
            return "(" + ", ".join(_pp(p, 0) for p in parts) + ")"
        case Proj(index, body):
            return f"{'fst' if index == 0 else 'snd'}({_pp(body, 0)})"
        case Inj(1, Star(), ty) if ty == BOOL:
            return "true"
        case Inj(0, Star(), ty) if ty == BOOL:
            return "false"
        case Inj(tag, body, ty):
            parts = _flatten_pair(body)
            inner = ", ".join(_pp(p, 0) for p in parts)
            return f"({tag}, {inner}) : {ty_str(ty)}"
        case Prim("neg", arg):
            return _paren(f"-{_pp(arg, 6)}", 5, minimum)
        case Prim(fname, Pair() as arg) if fname in _CMP_NAMES:
            s = f"{_pp(arg.left, 3)} {_CMP_NAMES[fname]} {_pp(arg.right, 3)}"
            return _paren(s, 2, minimum)
        case Prim(fname, Pair() as arg) if fname in _ADD_NAMES:
            s = f"{_pp(arg.left, 3)} {fname} {_pp(arg.right, 4)}"
            return _paren(s, 3, minimum)
        case Prim(fname, Pair() as arg) if fname in _MUL_NAMES:
            s = f"{_pp(arg.left, 4)} {fname} {_pp(arg.right, 5)}"
            return _paren(s, 4, minimum)
        case Prim(fname, Star()) if is_literal_name(fname):
            return fname
        case Prim(fname, arg):
            parts = _flatten_pair(arg)
            return f"{fname}(" + ", ".join(_pp(p, 0) for p in parts) + ")"
        case Lam(var, ann, body):
            return _paren(f"λ{var} : {ty_str(ann)}. {_pp(body, 0)}", 0, minimum)
        case App(fun, arg):
            return _paren(f"{_pp(fun, 5)} ({_pp(arg, 0)})", 5, minimum)
        case Let("_", bound, body) if "_" not in free_vars(body):
            return _paren(f"{_pp(bound, 2)}; {_pp(body, 1)}", 1, minimum)
        case Let(var, bound, body):
            return _paren(
                f"let {var} = {_pp(bound, 0)} in {_pp(body, 0)}", 0, minimum
            )
        case CaseD(scrut, arms) | CaseP(scrut, arms):
            if (
                len(arms) == 2
                and all(a.var not in free_vars(a.body) for a in arms)
            ):
                s = (
                    f"if {_pp(scrut, 0)} then {_pp(arms[1].body, 0)}"
                    f" else {_pp(arms[0].body, 0)}"
                )
                return _paren(s, 0, minimum)
            body = " | ".join(
                f"({i}, {arm.var}) => {_pp(arm.body, 0)}"
                for i, arm in enumerate(arms)
            )
            return _paren(f"case {_pp(scrut, 0)} of {{ {body} }}", 0, minimum)
        case _:
            kw = _KW_FORMS.get(type(t))
            if kw is not None:
                return f"{kw}({_pp(t.body, 0)})"
    raise AssertionError(f"cannot print {t!r}")
