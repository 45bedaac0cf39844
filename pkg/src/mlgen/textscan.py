"""Line-oriented scanning of Python-like snippet text.

Just enough lexing to know where strings, comments and brackets are, so
that import hoisting, output detection and the bracket check never look
inside a string literal or a parenthesised continuation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

OPEN = {"(": ")", "[": "]", "{": "}"}
CLOSE = {v: k for k, v in OPEN.items()}


@dataclass
class LogicalLine:
    first: int  # index of the first physical line
    last: int
    text: str  # physical lines joined with "\n"

    @property
    def top_level(self) -> bool:
        return bool(self.text) and not self.text[0].isspace()


@dataclass
class _State:
    stack: list = field(default_factory=list)  # (char, line, col)
    quote: str | None = None
    quote_pos: tuple[int, int] = (0, 0)
    issues: list = field(default_factory=list)


def _scan_line(line: str, lineno: int, st: _State) -> bool:
    """Advance ``st`` over one physical line; True if it ends in a backslash."""
    i, n = 0, len(line)
    while i < n:
        c = line[i]
        if st.quote:
            if c == "\\":
                i += 2
                continue
            if line.startswith(st.quote, i):
                i += len(st.quote)
                st.quote = None
                continue
            i += 1
            continue
        if c == "#":
            return False
        if c in "\"'":
            q = line[i:i + 3] if line[i:i + 3] in ('"""', "'''") else c
            st.quote = q
            st.quote_pos = (lineno, i)
            i += len(q)
            continue
        if c in OPEN:
            st.stack.append((c, lineno, i))
        elif c in CLOSE:
            if st.stack and st.stack[-1][0] == CLOSE[c]:
                st.stack.pop()
            else:
                st.issues.append(f"line {lineno + 1} col {i + 1}: unmatched {c!r}")
        i += 1
    if st.quote and len(st.quote) == 1:
        if line.endswith("\\"):
            return True
        st.issues.append(
            f"line {st.quote_pos[0] + 1} col {st.quote_pos[1] + 1}: unterminated string")
        st.quote = None
    return line.endswith("\\") and st.quote is None


def logical_lines(text: str) -> list[LogicalLine]:
    lines = text.split("\n")
    out: list[LogicalLine] = []
    st = _State()
    start = 0
    for idx, line in enumerate(lines):
        cont = _scan_line(line, idx, st)
        if cont or st.stack or st.quote:
            continue
        out.append(LogicalLine(start, idx, "\n".join(lines[start:idx + 1])))
        start = idx + 1
    if start < len(lines):
        out.append(LogicalLine(start, len(lines) - 1, "\n".join(lines[start:])))
    return out


def balance_issues(text: str) -> list[str]:
    """Unmatched brackets and unterminated strings, one message each."""
    st = _State()
    lines = text.split("\n")
    for idx, line in enumerate(lines):
        _scan_line(line, idx, st)
    issues = list(st.issues)
    if st.quote:
        issues.append(f"line {st.quote_pos[0] + 1} col {st.quote_pos[1] + 1}: "
                      "unterminated string")
    for c, line, col in st.stack:
        issues.append(f"line {line + 1} col {col + 1}: unclosed {c!r}")
    return issues


def top_level_assignment_target(text: str) -> str | None:
    """Left-hand side of ``text`` if it is a plain (non-augmented) assignment.

    The first ``=`` outside strings and brackets that is not part of a
    comparison operator is the split point; an annotation is dropped.
    """
    depth = 0
    quote = None
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if quote:
            if c == "\\":
                i += 2
                continue
            if text.startswith(quote, i):
                i += len(quote)
                quote = None
                continue
            i += 1
            continue
        if c == "#":
            return None
        if c in "\"'":
            quote = text[i:i + 3] if text[i:i + 3] in ('"""', "'''") else c
            i += len(quote)
            continue
        if c in OPEN:
            depth += 1
        elif c in CLOSE:
            depth -= 1
        elif c == "=" and depth == 0:
            prev = text[i - 1] if i else ""
            nxt = text[i + 1] if i + 1 < n else ""
            if nxt == "=":
                i += 2
                continue
            if prev in "=<>!":
                i += 1
                continue
            if prev in "+-*/%&|^@:" or text[max(0, i - 2):i] in ("//", "**", ">>", "<<"):
                # augmented assignment or walrus: not a declaration
                return None
            lhs = text[:i].strip()
            return _drop_annotation(lhs) or None
        i += 1
    return None


def _drop_annotation(lhs: str) -> str:
    depth = 0
    for i, c in enumerate(lhs):
        if c in OPEN:
            depth += 1
        elif c in CLOSE:
            depth -= 1
        elif c == ":" and depth == 0:
            return lhs[:i].strip()
    return lhs
