"""Parser, AST, and pretty-printer for the tensor-functor directive language.

Three directive forms are recognized:

    functor(name: [i, j, 0:5] = ([i-1, j], [i+1, j], [i, j-1:j+2]))
    map(to: name(t[1:N-1, 1:M-1]))
    ml(predicated:cond) in(t) out(tnew) db("data.srdb") model("m")

Each may be written bare, or prefixed with ``#pragma approx`` / ``tensor``
as it would appear in an annotated source file. Backslash-newline
continuations, arbitrary whitespace, and ``//`` comments are skipped by the
scanner, so error offsets always refer to the text as given.

Symbolic expressions are restricted to the affine forms ``int``, ``sym``,
and ``sym +/- int``; anything more general is rejected with SemanticError.
Concrete slice bounds may reference integer identifiers, resolved against a
caller-supplied environment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union

from .errors import (
    DirectiveSyntaxError,
    EmptyRangeError,
    MissingClauseError,
    SemanticError,
    UnboundVariableError,
    UnsupportedConstructError,
)

__all__ = [
    "SymExpr",
    "SliceDim",
    "SymbolicSlice",
    "FunctorDecl",
    "ConcreteSlice",
    "MapTarget",
    "MapDirective",
    "MlDirective",
    "parse_functor_decl",
    "parse_tensor_map",
    "parse_ml_clause",
    "parse_directive",
    "iter_directive_chunks",
    "parse_directive_file",
    "pretty_print",
    "offset_to_line_col",
]

ML_MODES = ("infer", "collect", "predicated")
DIRECTIONS = ("to", "from")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymExpr:
    """Affine symbolic expression: an integer constant or ``sym +/- int``.

    ``name is None`` means an integer constant with value ``offset``.
    """

    name: Optional[str]
    offset: int

    def __post_init__(self):
        if self.name is not None and not self.name:
            raise SemanticError("symbol name must be a non-empty identifier")

    @classmethod
    def const(cls, value: int) -> "SymExpr":
        return cls(None, value)

    @classmethod
    def sym(cls, name: str, offset: int = 0) -> "SymExpr":
        return cls(name, offset)

    @property
    def is_const(self) -> bool:
        return self.name is None

    def __str__(self):
        if self.name is None:
            return str(self.offset)
        if self.offset == 0:
            return self.name
        sign = "+" if self.offset > 0 else "-"
        return f"{self.name}{sign}{abs(self.offset)}"


@dataclass(frozen=True)
class SliceDim:
    """One dimension of a symbolic slice: a point or a ``start:stop:step`` range."""

    start: SymExpr
    stop: Optional[SymExpr] = None
    step: int = 1

    def __post_init__(self):
        if self.step < 1:
            raise SemanticError(f"slice step must be >= 1, got {self.step}")
        if self.stop is None:
            return
        a, b = self.start, self.stop
        if a.is_const and b.is_const and a.offset >= b.offset:
            raise SemanticError(f"empty slice range {a}:{b}")
        if a.is_const != b.is_const:
            raise SemanticError(f"range {a}:{b} mixes a symbol with a constant")
        if not a.is_const and a.name != b.name:
            raise SemanticError(
                f"range {a}:{b} must reference a single symbol on both ends"
            )

    @property
    def is_point(self) -> bool:
        return self.stop is None

    @property
    def is_const(self) -> bool:
        return self.start.is_const and (self.stop is None or self.stop.is_const)

    @property
    def symbol(self) -> Optional[str]:
        return self.start.name

    def const_count(self) -> int:
        """Element count of a constant range (points count as 1)."""
        if self.stop is None:
            return 1
        lo, hi = self.start.offset, self.stop.offset
        return (hi - lo + self.step - 1) // self.step

    def __str__(self):
        if self.stop is None:
            return str(self.start)
        if self.step == 1:
            return f"{self.start}:{self.stop}"
        return f"{self.start}:{self.stop}:{self.step}"


@dataclass(frozen=True)
class SymbolicSlice:
    dims: tuple[SliceDim, ...]

    def __post_init__(self):
        if not self.dims:
            raise SemanticError("slice must have at least one dimension")

    def symbols(self) -> list[str]:
        """Symbol names in first-appearance order."""
        seen = []
        for d in self.dims:
            if d.symbol is not None and d.symbol not in seen:
                seen.append(d.symbol)
        return seen

    def __str__(self):
        return "[" + ", ".join(str(d) for d in self.dims) + "]"


@dataclass(frozen=True)
class FunctorDecl:
    """Named (LHS, RHS-list) pair describing element access patterns.

    The LHS partitions into symbolic dims (single-symbol points, one per
    sweep axis) and feature dims (constant integer ranges). RHS slices
    describe, per tensor entry, which application-memory elements feed it.
    """

    name: str
    lhs: SymbolicSlice
    rhs: tuple[SymbolicSlice, ...]

    def __post_init__(self):
        if not self.name:
            raise SemanticError("functor needs a name")
        if not self.rhs:
            raise SemanticError(f"functor {self.name!r} needs at least one RHS slice")
        n_sym = n_feat = 0
        for d in self.lhs.dims:
            if d.is_point and d.symbol is not None and d.start.offset == 0:
                n_sym += 1
            elif not d.is_point and d.is_const:
                n_feat += 1
            else:
                raise SemanticError(
                    f"LHS dim {d} must be a bare symbol or a constant range"
                )
        if n_sym == 0:
            raise SemanticError(f"functor {self.name!r} has no symbolic LHS dim")
        if n_feat == 0:
            raise SemanticError(f"functor {self.name!r} has no feature dim on the LHS")
        declared = set(self.symbols)
        for s in self.rhs:
            for d in s.dims:
                if d.symbol is not None and d.symbol not in declared:
                    raise SemanticError(
                        f"symbol {d.symbol!r} used on the RHS of {self.name!r}"
                        " but not declared on the LHS"
                    )

    @property
    def symbols(self) -> tuple[str, ...]:
        """LHS symbols in declaration order; sweep axes follow this order."""
        return tuple(
            d.symbol for d in self.lhs.dims if d.is_point and d.symbol is not None
        )

    @property
    def feature_sizes(self) -> tuple[int, ...]:
        """Sizes of the LHS constant ranges, always emitted as trailing axes."""
        return tuple(d.const_count() for d in self.lhs.dims if not d.is_point)

    @property
    def feature_count(self) -> int:
        n = 1
        for s in self.feature_sizes:
            n *= s
        return n


@dataclass(frozen=True)
class ConcreteSlice:
    """Fully resolved integer range, half-open with positive step."""

    start: int
    stop: int
    step: int = 1

    def __post_init__(self):
        if self.step < 1:
            raise SemanticError(f"slice step must be >= 1, got {self.step}")
        if self.start >= self.stop:
            raise EmptyRangeError(f"empty range {self.start}:{self.stop}")

    @property
    def count(self) -> int:
        return (self.stop - self.start + self.step - 1) // self.step

    def indices(self) -> range:
        return range(self.start, self.stop, self.step)

    def __str__(self):
        if self.step == 1:
            return f"{self.start}:{self.stop}"
        return f"{self.start}:{self.stop}:{self.step}"


@dataclass(frozen=True)
class MapTarget:
    array: str
    slices: tuple[ConcreteSlice, ...]

    def __str__(self):
        return f"{self.array}[" + ", ".join(str(s) for s in self.slices) + "]"


@dataclass(frozen=True)
class MapDirective:
    direction: str  # "to" | "from"
    functor: str
    targets: tuple[MapTarget, ...]

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise SemanticError(f"bad map direction {self.direction!r}")
        if not self.targets:
            raise SemanticError("map directive needs at least one target")


@dataclass(frozen=True)
class MlDirective:
    """Region annotation choosing between data collection and inference.

    Predicate and `if` expressions are kept as opaque text handles; the
    host evaluates them and passes booleans at invocation time.
    """

    mode: str  # "infer" | "collect" | "predicated"
    predicate: Optional[str] = None
    in_refs: tuple[str, ...] = ()
    out_refs: tuple[str, ...] = ()
    inout_refs: tuple[str, ...] = ()
    model_path: Optional[str] = None
    db_path: Optional[str] = None
    if_cond: Optional[str] = None

    def __post_init__(self):
        if self.mode not in ML_MODES:
            raise SemanticError(f"bad ml mode {self.mode!r}")
        if self.mode in ("infer", "predicated") and not self.model_path:
            raise MissingClauseError(f"ml({self.mode}) requires a model(...) clause")
        if self.mode in ("collect", "predicated") and not self.db_path:
            raise MissingClauseError(f"ml({self.mode}) requires a db(...) clause")
        if not (self.in_refs or self.inout_refs):
            raise MissingClauseError("ml directive maps no inputs (in/inout)")
        if not (self.out_refs or self.inout_refs):
            raise MissingClauseError("ml directive maps no outputs (out/inout)")


Directive = Union[FunctorDecl, MapDirective, MlDirective]


# ---------------------------------------------------------------------------
# Scanner
# ---------------------------------------------------------------------------

_PUNCT = set("()[]:,=+-#*/")


@dataclass
class _Token:
    kind: str  # IDENT | INT | STRING | PUNCT | EOF
    text: str
    offset: int


class _Scanner:
    """On-demand tokenizer over raw directive text.

    Tokenizing lazily lets the parser grab opaque boolean expressions as
    raw character spans (anything up to the balancing close paren) without
    having to lex host-language operators.
    """

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self._peeked: Optional[_Token] = None

    def _skip_blank(self):
        t, n = self.text, len(self.text)
        i = self.pos
        while i < n:
            c = t[i]
            if c in " \t\r\n":
                i += 1
            elif c == "\\" and i + 1 < n and t[i + 1] in "\r\n":
                i += 2
            elif c == "\\" and i + 1 == n:
                i += 1
            elif c == "/" and i + 1 < n and t[i + 1] == "/":
                while i < n and t[i] != "\n":
                    i += 1
            else:
                break
        self.pos = i

    def _lex(self) -> _Token:
        self._skip_blank()
        t, i, n = self.text, self.pos, len(self.text)
        if i >= n:
            return _Token("EOF", "", i)
        c = t[i]
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (t[j].isalnum() or t[j] == "_"):
                j += 1
            self.pos = j
            return _Token("IDENT", t[i:j], i)
        if c.isdigit():
            j = i + 1
            while j < n and t[j].isdigit():
                j += 1
            self.pos = j
            return _Token("INT", t[i:j], i)
        if c == '"':
            j = i + 1
            while j < n and t[j] != '"':
                j += 2 if t[j] == "\\" and j + 1 < n else 1
            if j >= n:
                raise DirectiveSyntaxError("unterminated string", i)
            self.pos = j + 1
            return _Token("STRING", t[i + 1 : j], i)
        if c in _PUNCT:
            self.pos = i + 1
            return _Token("PUNCT", c, i)
        raise DirectiveSyntaxError(f"unexpected character {c!r}", i)

    def peek(self) -> _Token:
        if self._peeked is None:
            self._peeked = self._lex()
        return self._peeked

    def next(self) -> _Token:
        tok = self.peek()
        self._peeked = None
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise DirectiveSyntaxError(
                f"expected {want!r}, found {tok.text or 'end of input'!r}",
                tok.offset,
                expected=want,
            )
        return self.next()

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[_Token]:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.next()
        return None

    def capture_balanced(self) -> str:
        """Raw text from here to the unmatched ')' that closes the current
        paren level. The closing paren is not consumed."""
        self._skip_blank()
        assert self._peeked is None
        t, n = self.text, len(self.text)
        i = start = self.pos
        depth = 0
        while i < n:
            c = t[i]
            if c == '"':
                j = i + 1
                while j < n and t[j] != '"':
                    j += 2 if t[j] == "\\" and j + 1 < n else 1
                i = j + 1
                continue
            if c == "(":
                depth += 1
            elif c == ")":
                if depth == 0:
                    self.pos = i
                    expr = t[start:i].strip()
                    if not expr:
                        raise DirectiveSyntaxError("empty expression", start)
                    return " ".join(expr.replace("\\\n", " ").split())
                depth -= 1
            i += 1
        raise DirectiveSyntaxError("unbalanced parentheses in expression", start)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _strip_prefix(sc: _Scanner):
    """Consume an optional ``#pragma approx`` and/or ``tensor`` prefix."""
    if sc.accept("PUNCT", "#"):
        sc.expect("IDENT", "pragma")
        sc.expect("IDENT", "approx")
    else:
        sc.accept("IDENT", "approx")
    tok = sc.peek()
    if tok.kind == "IDENT" and tok.text == "tensor":
        sc.next()


def _reject_non_affine(sc: _Scanner, expr: SymExpr) -> SymExpr:
    nxt = sc.peek()
    if nxt.kind == "PUNCT" and nxt.text in "*/":
        raise SemanticError(
            f"non-affine expression near offset {nxt.offset};"
            " only int, sym, and sym +/- int are supported"
        )
    return expr


def _parse_sym_expr(sc: _Scanner) -> SymExpr:
    tok = sc.peek()
    if tok.kind == "INT":
        sc.next()
        return _reject_non_affine(sc, SymExpr.const(int(tok.text)))
    if tok.kind == "PUNCT" and tok.text == "-":
        sc.next()
        val = sc.expect("INT")
        return _reject_non_affine(sc, SymExpr.const(-int(val.text)))
    if tok.kind == "IDENT":
        sc.next()
        sign = sc.accept("PUNCT", "+") or sc.accept("PUNCT", "-")
        if sign is None:
            return _reject_non_affine(sc, SymExpr.sym(tok.text))
        nxt = sc.peek()
        if nxt.kind == "IDENT":
            raise SemanticError(
                f"non-affine symbolic expression near offset {nxt.offset};"
                " only 'sym +/- int' is supported"
            )
        off = int(sc.expect("INT").text)
        expr = SymExpr.sym(tok.text, off if sign.text == "+" else -off)
        return _reject_non_affine(sc, expr)
    raise DirectiveSyntaxError(
        f"expected a slice expression, found {tok.text or 'end of input'!r}",
        tok.offset,
    )


def _parse_slice_dim(sc: _Scanner) -> SliceDim:
    start = _parse_sym_expr(sc)
    if not sc.accept("PUNCT", ":"):
        return SliceDim(start)
    stop = _parse_sym_expr(sc)
    step = 1
    if sc.accept("PUNCT", ":"):
        step = int(sc.expect("INT").text)
    return SliceDim(start, stop, step)


def _parse_symbolic_slice(sc: _Scanner) -> SymbolicSlice:
    sc.expect("PUNCT", "[")
    dims = [_parse_slice_dim(sc)]
    while sc.accept("PUNCT", ","):
        dims.append(_parse_slice_dim(sc))
    sc.expect("PUNCT", "]")
    return SymbolicSlice(tuple(dims))


def parse_functor_decl(text: str) -> FunctorDecl:
    """Parse one functor declaration, with or without the pragma prefix.

    Accepts the wrapped form ``functor(name: lhs = (rhs, ...))`` as well as
    the bare ``name: lhs = (rhs, ...)``; a redundant extra paren around the
    RHS list (as printed in annotated sources) is tolerated.
    """
    sc = _Scanner(text)
    _strip_prefix(sc)
    wrapped = False
    if sc.peek().kind == "IDENT" and sc.peek().text == "functor":
        sc.next()
        sc.expect("PUNCT", "(")
        wrapped = True
    name = sc.expect("IDENT").text
    sc.expect("PUNCT", ":")
    lhs = _parse_symbolic_slice(sc)
    sc.expect("PUNCT", "=")
    sc.expect("PUNCT", "(")
    extra_paren = sc.accept("PUNCT", "(") is not None
    rhs = [_parse_symbolic_slice(sc)]
    while sc.accept("PUNCT", ","):
        rhs.append(_parse_symbolic_slice(sc))
    sc.expect("PUNCT", ")")
    if extra_paren:
        sc.expect("PUNCT", ")")
    if wrapped:
        sc.expect("PUNCT", ")")
    sc.expect("EOF")
    return FunctorDecl(name, lhs, tuple(rhs))


def _resolve_bound(sc: _Scanner, env: Mapping[str, int]) -> int:
    expr = _parse_sym_expr(sc)
    if expr.is_const:
        return expr.offset
    if expr.name not in env:
        raise UnboundVariableError(expr.name)
    return env[expr.name] + expr.offset


def _parse_concrete_slice(sc: _Scanner, env: Mapping[str, int]) -> ConcreteSlice:
    start = _resolve_bound(sc, env)
    sc.expect("PUNCT", ":")
    stop = _resolve_bound(sc, env)
    step = 1
    if sc.accept("PUNCT", ":"):
        step = _resolve_bound(sc, env)
    return ConcreteSlice(start, stop, step)


def _parse_map_target(sc: _Scanner, env: Mapping[str, int]) -> MapTarget:
    array = sc.expect("IDENT").text
    sc.expect("PUNCT", "[")
    nxt = sc.peek()
    if nxt.kind == "IDENT" and nxt.text not in env:
        # Could be a nested map-target rather than a bound identifier; the
        # grammar allows nesting but this implementation does not.
        save = sc.pos, sc._peeked
        sc.next()
        if sc.peek().kind == "PUNCT" and sc.peek().text == "[":
            raise UnsupportedConstructError(
                f"nested map targets are not supported (near offset {nxt.offset})"
            )
        sc.pos, sc._peeked = save
    slices = [_parse_concrete_slice(sc, env)]
    while sc.accept("PUNCT", ","):
        slices.append(_parse_concrete_slice(sc, env))
    sc.expect("PUNCT", "]")
    return MapTarget(array, tuple(slices))


def parse_tensor_map(text: str, env: Optional[Mapping[str, int]] = None) -> MapDirective:
    """Parse one map directive; identifier bounds resolve against `env`."""
    env = env or {}
    sc = _Scanner(text)
    _strip_prefix(sc)
    sc.expect("IDENT", "map")
    sc.expect("PUNCT", "(")
    dir_tok = sc.expect("IDENT")
    direction = dir_tok.text
    if direction not in DIRECTIONS:
        raise DirectiveSyntaxError(
            f"expected 'to' or 'from', found {direction!r}", dir_tok.offset
        )
    sc.expect("PUNCT", ":")
    functor = sc.expect("IDENT").text
    sc.expect("PUNCT", "(")
    targets = [_parse_map_target(sc, env)]
    while sc.accept("PUNCT", ","):
        targets.append(_parse_map_target(sc, env))
    sc.expect("PUNCT", ")")
    sc.expect("PUNCT", ")")
    sc.expect("EOF")
    return MapDirective(direction, functor, tuple(targets))


def _parse_ident_list(sc: _Scanner) -> tuple[str, ...]:
    sc.expect("PUNCT", "(")
    names = [sc.expect("IDENT").text]
    while sc.accept("PUNCT", ","):
        names.append(sc.expect("IDENT").text)
    sc.expect("PUNCT", ")")
    return tuple(names)


def parse_ml_clause(text: str) -> MlDirective:
    """Parse one ml directive.

    Boolean expressions (the predicate and the `if` condition) are captured
    as opaque text; there is no compiler here to evaluate host expressions.
    """
    sc = _Scanner(text)
    _strip_prefix(sc)
    sc.expect("IDENT", "ml")
    sc.expect("PUNCT", "(")
    mode_tok = sc.expect("IDENT")
    if mode_tok.text not in ML_MODES:
        raise DirectiveSyntaxError(
            f"expected an ml mode (infer|collect|predicated), found {mode_tok.text!r}",
            mode_tok.offset,
        )
    predicate = None
    if sc.accept("PUNCT", ":"):
        predicate = sc.capture_balanced()
    sc.expect("PUNCT", ")")

    fields = {
        "in_refs": (),
        "out_refs": (),
        "inout_refs": (),
        "model_path": None,
        "db_path": None,
        "if_cond": None,
    }
    seen = set()
    while True:
        tok = sc.peek()
        if tok.kind == "EOF":
            break
        if tok.kind != "IDENT":
            raise DirectiveSyntaxError(
                f"expected a clause keyword, found {tok.text!r}", tok.offset
            )
        kw = tok.text
        if kw in seen:
            raise DirectiveSyntaxError(f"duplicate clause {kw!r}", tok.offset)
        seen.add(kw)
        sc.next()
        if kw == "in":
            fields["in_refs"] = _parse_ident_list(sc)
        elif kw == "out":
            fields["out_refs"] = _parse_ident_list(sc)
        elif kw == "inout":
            fields["inout_refs"] = _parse_ident_list(sc)
        elif kw == "model":
            sc.expect("PUNCT", "(")
            fields["model_path"] = sc.expect("STRING").text
            sc.expect("PUNCT", ")")
        elif kw in ("db", "database"):
            seen.add("db")
            seen.add("database")
            sc.expect("PUNCT", "(")
            fields["db_path"] = sc.expect("STRING").text
            sc.expect("PUNCT", ")")
        elif kw == "if":
            sc.expect("PUNCT", "(")
            fields["if_cond"] = sc.capture_balanced()
            sc.expect("PUNCT", ")")
        else:
            raise DirectiveSyntaxError(f"unknown clause {kw!r}", tok.offset)
    return MlDirective(mode=mode_tok.text, predicate=predicate, **fields)


def parse_directive(text: str, env: Optional[Mapping[str, int]] = None) -> Directive:
    """Dispatch on the directive keyword and parse accordingly."""
    sc = _Scanner(text)
    _strip_prefix(sc)
    tok = sc.peek()
    if tok.kind != "IDENT":
        raise DirectiveSyntaxError(
            f"expected a directive, found {tok.text or 'end of input'!r}", tok.offset
        )
    if tok.text == "map":
        return parse_tensor_map(text, env)
    if tok.text == "ml":
        return parse_ml_clause(text)
    # functor(...) or a bare "name: ..." declaration
    return parse_functor_decl(text)


# ---------------------------------------------------------------------------
# Directive files
# ---------------------------------------------------------------------------

def iter_directive_chunks(text: str) -> Iterator[tuple[int, str]]:
    """Yield (absolute_offset, chunk) per logical line of a directive file.

    A logical line spans physical lines joined by trailing backslashes;
    blank and comment-only lines are skipped. Chunks keep their raw text so
    parser error offsets stay meaningful relative to the chunk start.
    """
    offset = 0
    start = None
    buf = []
    for line in text.splitlines(keepends=True):
        body = line.split("//", 1)[0]
        stripped = body.strip()
        if start is None:
            if not stripped:
                offset += len(line)
                continue
            start = offset
        buf.append(line)
        offset += len(line)
        if stripped.endswith("\\"):
            continue
        yield start, "".join(buf)
        start, buf = None, []
    if buf:
        yield start, "".join(buf)


def offset_to_line_col(text: str, offset: int) -> tuple[int, int]:
    """1-based (line, column) of a byte offset into `text`."""
    offset = min(max(offset, 0), len(text))
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def parse_directive_file(
    text: str, env: Optional[Mapping[str, int]] = None
) -> list[Directive]:
    """Parse every directive in a file; re-raises the first error with its
    absolute offset rebased to the whole file."""
    out = []
    for start, chunk in iter_directive_chunks(text):
        try:
            out.append(parse_directive(chunk, env))
        except DirectiveSyntaxError as e:
            raise DirectiveSyntaxError(
                str(e).rsplit(" (at offset", 1)[0],
                start + e.offset,
                expected=e.expected,
            ) from None
    return out


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

def pretty_print(ast: Directive) -> str:
    """Canonical text form; parsing it back yields a structurally equal AST."""
    if isinstance(ast, FunctorDecl):
        rhs = ", ".join(str(s) for s in ast.rhs)
        return f"functor({ast.name}: {ast.lhs} = ({rhs}))"
    if isinstance(ast, MapDirective):
        targets = ", ".join(str(t) for t in ast.targets)
        return f"map({ast.direction}: {ast.functor}({targets}))"
    if isinstance(ast, MlDirective):
        head = ast.mode if ast.predicate is None else f"{ast.mode}:{ast.predicate}"
        parts = [f"ml({head})"]
        if ast.in_refs:
            parts.append("in(" + ", ".join(ast.in_refs) + ")")
        if ast.out_refs:
            parts.append("out(" + ", ".join(ast.out_refs) + ")")
        if ast.inout_refs:
            parts.append("inout(" + ", ".join(ast.inout_refs) + ")")
        if ast.model_path is not None:
            parts.append(f'model("{ast.model_path}")')
        if ast.db_path is not None:
            parts.append(f'db("{ast.db_path}")')
        if ast.if_cond is not None:
            parts.append(f"if({ast.if_cond})")
        return " ".join(parts)
    raise TypeError(f"not a directive AST: {type(ast).__name__}")
