# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Configuration files
===================

Flat UTF-8 text files made of ``key = value`` lines, ``#`` starting a
comment. A key is ``<section>.<field>``, the section naming a configuration
dataclass and the field one of its attributes. Values are typed from the
dataclass annotations; tuples are written as comma-separated values.
"""
from typing import Any, Dict, Mapping, Optional, Type, Union
import configparser
import dataclasses
import pathlib
import typing

Path = Union[str, pathlib.Path]

#: Name of the implicit section of the configuration files
_SECTION = "config"

_BOOLEANS = {"true": True, "false": False, "yes": True, "no": False,
             "1": True, "0": False}


class ConfigError(ValueError):
    """Raised when a configuration file is invalid.

    Args:
        message (str): Description of the problem
        key (str, optional): Key at fault
    """
    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


def read_pairs(path: Path) -> Dict[str, str]:
    """Reads the ``key = value`` pairs of a file, in file order.

    Raises:
        ConfigError: if a line is not a ``key = value`` pair or if a key is
            repeated.
    """
    with open(path, "r", encoding="utf-8") as stream:
        text = stream.read()
    return parse_pairs(text, str(path))


def parse_pairs(text: str, source: str = "<string>") -> Dict[str, str]:
    """Parses the ``key = value`` pairs of a text"""
    parser = configparser.ConfigParser(interpolation=None,
                                       delimiters=("=", ),
                                       comment_prefixes=("#", ),
                                       inline_comment_prefixes=("#", ),
                                       empty_lines_in_values=False)
    parser.optionxform = str  # type: ignore
    try:
        parser.read_string(f"[{_SECTION}]\n" + text, source=source)
    except configparser.DuplicateOptionError as error:
        raise ConfigError("key defined twice", error.option) from error
    except configparser.Error as error:
        raise ConfigError(f"{source}: {error.message}") from error
    return dict(parser.items(_SECTION))


def parse_value(text: str, kind: Any, key: str) -> Any:
    """Converts the text of a value to the type annotated.

    Raises:
        ConfigError: if the text cannot be converted.
    """
    text = text.strip()
    origin = typing.get_origin(kind)
    try:
        if origin is tuple:
            args = typing.get_args(kind)
            items = [item.strip() for item in text.split(",") if item.strip()]
            if len(args) == 2 and args[1] is Ellipsis:
                return tuple(parse_value(item, args[0], key) for item in items)
            if len(items) != len(args):
                raise ConfigError(f"{len(args)} values expected, found "
                                  f"{len(items)}", key)
            return tuple(
                parse_value(item, arg, key) for item, arg in zip(items, args))
        if kind is bool:
            return _BOOLEANS[text.lower()]
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        if kind is str:
            return text
    except (KeyError, ValueError) as error:
        if isinstance(error, ConfigError):
            raise
        raise ConfigError(f"invalid value {text!r} for type "
                          f"{getattr(kind, '__name__', kind)}", key) from error
    raise ConfigError(f"type {kind!r} is not handled", key)


def format_value(value: Any) -> str:
    """Formats a value as written in the configuration files"""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ", ".join(format_value(item) for item in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def build(schema: Mapping[str, Type],
          pairs: Mapping[str, str],
          require_all: bool = True) -> Dict[str, Any]:
    """Builds the configuration dataclasses from ``section.field`` pairs.

    Args:
        schema (dict): Dataclass of every section
        pairs (dict): Values read
        require_all (bool, optional): Every field of every section must be
            set. If false, the missing fields keep their default value.

    Return:
        dict: an instance of every section.

    Raises:
        ConfigError: if a key is unknown or missing, or a value is invalid.
    """
    values = {section: {} for section in schema}  # type: Dict[str, Dict]
    for key, text in pairs.items():
        section, _, field = key.partition(".")
        if section not in schema:
            raise ConfigError("unknown key", key)
        hints = typing.get_type_hints(schema[section])
        names = {item.name for item in dataclasses.fields(schema[section])}
        if field not in names:
            raise ConfigError("unknown key", key)
        values[section][field] = parse_value(text, hints[field], key)
    if require_all:
        for section, cls in schema.items():
            for item in dataclasses.fields(cls):
                if item.name not in values[section]:
                    raise ConfigError("missing key", f"{section}.{item.name}")
    result = {}
    for section, cls in schema.items():
        try:
            result[section] = cls(**values[section])
        except (TypeError, ValueError) as error:
            raise ConfigError(f"invalid section: {error}",
                              section) from error
    return result


def dump(sections: Mapping[str, Any]) -> str:
    """Formats configuration dataclasses as a complete configuration text"""
    lines = []
    for section, instance in sections.items():
        lines.append(f"# {section}")
        for item in dataclasses.fields(instance):
            value = format_value(getattr(instance, item.name))
            lines.append(f"{section}.{item.name} = {value}")
        lines.append("")
    return "\n".join(lines)


def write(path: Path, sections: Mapping[str, Any]) -> None:
    """Writes configuration dataclasses to a file"""
    with open(path, "w", encoding="utf-8") as stream:
        stream.write(dump(sections))
