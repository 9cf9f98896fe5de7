import csv
import importlib.resources
import re
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import TYPE_CHECKING, cast

from pydantic_core import from_json

if TYPE_CHECKING:
	from pydantic import JsonValue

# String literals (escaped quotes included) are matched first and kept, so only a // outside one starts a comment
_string_or_comment = re.compile(r'("(?:\\.|[^"\\])*")|//.*$')


def parse_jsonc(text: str) -> 'JsonValue':
	"""JSON with // line comments, as used by run configs and the packaged data

	Raises:
		ValueError: if what is left is not valid JSON"""
	stripped = (_string_or_comment.sub(lambda match: match.group(1) or '', line) for line in text.splitlines())
	return cast('JsonValue', from_json('\n'.join(stripped)))


def parse_data(name: str) -> 'JsonValue':
	data = importlib.resources.files('schwingersim.data')
	jsonc = data.joinpath(f'{name}.jsonc').read_text('utf-8')
	return parse_jsonc(jsonc)


def format_float(value: float | None) -> str:
	"""Shortest string that round-trips to the same double, or empty for a missing value"""
	if value is None:
		return ''
	return repr(float(value))


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[float | int | str | None]]) -> None:
	"""RFC 4180-ish CSV with a header row, floats written with format_float so output is bit-stable"""
	path.parent.mkdir(parents=True, exist_ok=True)
	with path.open('w', newline='', encoding='utf-8') as f:
		writer = csv.writer(f, lineterminator='\r\n')
		writer.writerow(header)
		for row in rows:
			writer.writerow(
				[format_float(cell) if isinstance(cell, float) or cell is None else str(cell) for cell in row]
			)
