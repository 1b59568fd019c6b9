"""Small helpers for reading JSON documents from paths, file objects, or text."""

from __future__ import annotations

import json
import os
from typing import IO, Union

from .errors import ParseError

JsonSource = Union[str, "os.PathLike[str]", IO[str], dict, list]


def read_json(source: JsonSource):
    """Return the parsed JSON value behind ``source``.

    Accepts an already-parsed dict/list, a file object, a filesystem path, or
    raw JSON text (anything starting with '{' or '[').
    """
    if isinstance(source, (dict, list)):
        return source
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = os.fspath(source)
        if not text.lstrip().startswith(("{", "[")):
            with open(text, "r", encoding="utf-8") as fh:
                text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e.msg}", offset=e.pos) from e


def dump_json(value, sink: Union[str, IO[str], None] = None, *, indent: int = 2) -> str:
    """Serialize deterministically (sorted keys); optionally write to a path or file."""
    text = json.dumps(value, indent=indent, sort_keys=True, ensure_ascii=False)
    if sink is not None:
        if hasattr(sink, "write"):
            sink.write(text)
        else:
            with open(sink, "w", encoding="utf-8") as fh:
                fh.write(text)
    return text
