"""
Instances are stored as JSON documents::

    {
      "schema_version": 1,
      "examples": ["x1", "x2"],
      "concepts": ["c1", "c2"],
      "consistency": [
        [1, 0],
        [0, 1]
      ],
      "gamma": [
        [0.1, 0.2],
        [0.1, 0.2]
      ],
      "target": "c2"
    }

The optional keys ``example_weights`` and ``concept_weights`` hold the
distributions used by the similarities and heuristics. Decimals are written
with 12 significant digits, one matrix row per line, so that
``serialize_instance(parse_instance(text)) == text`` for every file this
module writes.

::

    from pacteaching import io

    inst = io.load_instance("instance.json")
    io.dump_instance(inst, "copy.json")

A malformed document raises :class:`InstanceFormatError`, whose
``location`` names the offending key, row or cell.
"""

import json
import math

from . import resource_path
from .helpers import SIG_DIGITS, round_significant
from .instance import Instance

SCHEMA_VERSION = 1


class InstanceFormatError(ValueError):
    """
    A malformed instance document.
    """

    def __init__(self, message, location=None):
        """
        Constructor.

        Parameters
        ----------
        message : :class:`str`
            What is wrong.
        location : :class:`str`, optional
            Where, e.g. ``"gamma[c1][x2]"``.
        """

        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


def _require(doc, key):
    if key not in doc:
        raise InstanceFormatError("missing key.", key)
    return doc[key]


def _ids(doc, key):
    ids = _require(doc, key)
    if not isinstance(ids, list) or not ids:
        raise InstanceFormatError("expected a nonempty list of ids.", key)
    for i, value in enumerate(ids):
        if not isinstance(value, str):
            raise InstanceFormatError("ids must be strings.", f"{key}[{i}]")
    if len(set(ids)) != len(ids):
        raise InstanceFormatError("ids must be unique.", key)
    return ids


def _matrix(doc, key, concepts, examples, check):
    rows = _require(doc, key)
    if not isinstance(rows, list) or len(rows) != len(concepts):
        raise InstanceFormatError(
            f"expected {len(concepts)} rows, one per concept.", key
        )
    for c, row in zip(concepts, rows):
        if not isinstance(row, list) or len(row) != len(examples):
            raise InstanceFormatError(
                f"expected {len(examples)} entries, one per example.",
                f"{key}[{c}]",
            )
        for x, value in zip(examples, row):
            check(value, f"{key}[{c}][{x}]")
    return rows


def _check_label(value, location):
    if isinstance(value, bool) or value not in (0, 1):
        raise InstanceFormatError(f"label {value!r} is not 0 or 1.", location)


def _check_number(value, location):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError(f"{value!r} is not a number.", location)
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise InstanceFormatError(
            f"{value!r} is outside [0, 1].", location
        )


def _weights(doc, key, ids):
    if key not in doc:
        return None
    values = doc[key]
    if not isinstance(values, list) or len(values) != len(ids):
        raise InstanceFormatError(
            f"expected {len(ids)} weights.", key
        )
    for i, value in zip(ids, values):
        _check_number(value, f"{key}[{i}]")
    return values


def parse_instance(data):
    """
    Parse and validate an instance document.

    Parameters
    ----------
    data : :class:`bytes` or :class:`str`
        UTF-8 JSON text.

    Returns
    -------
    :class:`~pacteaching.instance.Instance`

    Raises
    ------
    InstanceFormatError
        If the text is not valid JSON, a key is missing, the dimensions do
        not match, a label is not 0/1, an error is outside [0, 1] or the
        target is unknown.
    """

    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise InstanceFormatError(f"not UTF-8 ({err}).") from err
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as err:
        raise InstanceFormatError(
            f"invalid JSON ({err.msg}).", f"line {err.lineno}"
        ) from err
    if not isinstance(doc, dict):
        raise InstanceFormatError("expected a JSON object.")

    version = _require(doc, "schema_version")
    if version != SCHEMA_VERSION:
        raise InstanceFormatError(
            f"unsupported version {version!r}, expected {SCHEMA_VERSION}.",
            "schema_version",
        )
    examples = _ids(doc, "examples")
    concepts = _ids(doc, "concepts")
    consistency = _matrix(doc, "consistency", concepts, examples,
                          _check_label)
    gamma = _matrix(doc, "gamma", concepts, examples, _check_number)
    target = _require(doc, "target")
    if target not in concepts:
        raise InstanceFormatError(f"unknown target {target!r}.", "target")

    try:
        return Instance(
            examples,
            concepts,
            consistency,
            gamma,
            concepts.index(target),
            example_weights=_weights(doc, "example_weights", examples),
            concept_weights=_weights(doc, "concept_weights", concepts),
        )
    except ValueError as err:
        raise InstanceFormatError(str(err)) from err


def _number(value):
    return json.dumps(round_significant(value, SIG_DIGITS))


def _row(values, fmt):
    return "[" + ", ".join(fmt(v) for v in values) + "]"


def serialize_instance(instance):
    """
    The JSON text of an instance.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`

    Returns
    -------
    :class:`str`
    """

    def label(value):
        return str(int(value))

    def matrix(rows, fmt):
        body = ",\n".join("    " + _row(row, fmt) for row in rows)
        return "[\n" + body + "\n  ]"

    parts = [
        f'"schema_version": {SCHEMA_VERSION}',
        f'"examples": {json.dumps(list(instance.examples))}',
        f'"concepts": {json.dumps(list(instance.concepts))}',
        f'"consistency": {matrix(instance.consistency, label)}',
        f'"gamma": {matrix(instance.gamma, _number)}',
        f'"target": {json.dumps(instance.concepts[instance.target])}',
    ]
    if instance.example_weights is not None:
        parts.append(
            f'"example_weights": {_row(instance.example_weights, _number)}'
        )
    if instance.concept_weights is not None:
        parts.append(
            f'"concept_weights": {_row(instance.concept_weights, _number)}'
        )
    return "{\n  " + ",\n  ".join(parts) + "\n}\n"


def load_instance(path):
    """
    Read an instance file.

    Raises
    ------
    InstanceFormatError
        If the file is malformed.
    """

    with open(path, "rb") as fh:
        return parse_instance(fh.read())


def dump_instance(instance, path):
    """Write an instance file."""

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_instance(instance))


def load_worked_example():
    """
    The 2 x 2 worked example: ``c1(x1) = c2(x2) = 1``,
    ``c1(x2) = c2(x1) = 0``, errors 0.1 on x1 and 0.2 on x2 for both
    concepts, target c2.

    Returns
    -------
    :class:`~pacteaching.instance.Instance`
    """

    return parse_instance(
        resource_path("worked_example.json").read_bytes()
    )


def solve_report(instance, result):
    """
    A machine readable report of a solve, with stable key order.

    Parameters
    ----------
    instance : :class:`~pacteaching.instance.Instance`
    result : :class:`~pacteaching.optimizers.SolveResult`

    Returns
    -------
    :class:`dict`
    """

    inputs = {
        key: round_significant(value) if isinstance(value, float) else value
        for key, value in result.inputs.items()
    }
    partition = result.partition
    return {
        "objective": result.objective.value,
        "mode": result.mode.value,
        "inputs": inputs,
        "teaching_set": [
            [instance.examples[item.example_index], item.label]
            for item in result.teaching_set
        ],
        "achieved_p": round_significant(result.achieved_p),
        "achieved_q": round_significant(result.achieved_q),
        "size": result.size,
        "feasible": result.feasible,
        "good": [instance.concepts[c] for c in sorted(partition.good)],
        "bad": [instance.concepts[c] for c in sorted(partition.bad)],
        "subsets_evaluated": result.subsets_evaluated,
        "budget_exhausted": result.budget_exhausted,
        "wall_time_s": round_significant(result.wall_time.m_as("s"), 6),
    }


def format_report(report, fmt="json"):
    """
    Render a report as JSON or as an aligned two-column table.

    Parameters
    ----------
    report : :class:`dict`
    fmt : :class:`str`, optional
        ``"json"`` or ``"table"``, by default ``"json"``.

    Returns
    -------
    :class:`str`
    """

    if fmt == "json":
        return json.dumps(report, indent=2)
    if fmt != "table":
        raise ValueError(f"Unknown report format {fmt!r}.")
    width = max(len(key) for key in report)
    lines = []
    for key, value in report.items():
        if isinstance(value, (list, dict)):
            value = json.dumps(value)
        lines.append(f"{key:<{width}}  {value}")
    return "\n".join(lines)
