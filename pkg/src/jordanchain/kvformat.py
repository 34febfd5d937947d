"""Plain-text ``key = value`` files.

Grammar: one assignment per line, ``#`` starts a comment, lists are
written in brackets with comma separators.  Values are parsed as int,
float, boolean (true/false) or bare string, in that order.
"""

import os
import tempfile

from .errors import ValidationError


def _scalar(text):
    t = text.strip()
    if t == "":
        raise ValidationError("empty value")
    low = t.lower()
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(t)
        except ValueError:
            pass
    if len(t) >= 2 and t[0] == t[-1] and t[0] in "\"'":
        return t[1:-1]
    return t


def parse_value(text):
    t = text.strip()
    if t.startswith("["):
        if not t.endswith("]"):
            raise ValidationError(f"unterminated list: {text!r}")
        body = t[1:-1].strip()
        if not body:
            return []
        return [_scalar(item) for item in body.split(",")]
    return _scalar(t)


def parse_text(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValidationError(f"line {lineno}: missing key")
        out[key] = parse_value(val)
    return out


def read_file(path):
    with open(path) as fh:
        return parse_text(fh.read())


def format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)  # shortest round-trip representation
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    if hasattr(v, "item"):
        return format_value(v.item())
    return str(v)


def format_text(mapping):
    return "".join(f"{k} = {format_value(v)}\n" for k, v in mapping.items())


def atomic_write(path, text):
    """Write to a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_file(path, mapping):
    atomic_write(path, format_text(mapping))
