"""Line-oriented text format for measure descriptors.

One measure per line: a family tag followed by decimal parameters with 17
significant digits.  Used by the CLI's class-specification files.
"""
from __future__ import annotations

import numpy as np

from .measures import (
    Bernoulli,
    Deterministic,
    LaplaceMeasure,
    Markov,
    ProcessMeasure,
    UniformIID,
)

FMT = "{:.17g}"


def format_measure(m: ProcessMeasure) -> str:
    if isinstance(m, Bernoulli):
        return f"bernoulli {FMT.format(m.p)}"
    if isinstance(m, UniformIID):
        return f"uniform {m.alphabet_size}"
    if isinstance(m, LaplaceMeasure):
        return f"laplace {m.alphabet_size}"
    if isinstance(m, Deterministic):
        if m.tag and m.tag.startswith("constant:"):
            return f"constant {m.alphabet_size} {m.tag.split(':')[1]}"
        if m.tag and m.tag.startswith("zero-run:"):
            return f"zero-run {m.alphabet_size} {m.tag.split(':')[1]}"
        raise ValueError("only constant/zero-run deterministic measures serialize")
    if isinstance(m, Markov):
        parts = [f"markov {m.alphabet_size} {m.order}"]
        parts += [FMT.format(v) for v in m.initial]
        parts += [FMT.format(v) for v in m.table.ravel()]
        return " ".join(parts)
    raise ValueError(f"cannot serialize measure of type {type(m).__name__}")


def parse_measure(line: str) -> ProcessMeasure:
    fields = line.split()
    if not fields:
        raise ValueError("empty measure line")
    tag = fields[0]
    try:
        if tag == "bernoulli":
            return Bernoulli(float(fields[1]))
        if tag == "uniform":
            return UniformIID(int(fields[1]))
        if tag == "laplace":
            return LaplaceMeasure(int(fields[1]))
        if tag == "constant":
            return Deterministic.constant(int(fields[2]), int(fields[1]))
        if tag == "zero-run":
            return Deterministic.zero_run(int(fields[2]), int(fields[1]))
        if tag == "markov":
            size, order = int(fields[1]), int(fields[2])
            contexts = size ** order
            vals = [float(v) for v in fields[3:]]
            if len(vals) != contexts + contexts * size:
                raise ValueError("wrong parameter count for markov line")
            initial = np.array(vals[:contexts])
            table = np.array(vals[contexts:]).reshape(contexts, size)
            return Markov(order, table, initial, alphabet_size=size)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed measure line {line!r}: {exc}") from exc
    raise ValueError(f"unknown measure family {tag!r}")


def read_class_file(path) -> list[ProcessMeasure]:
    measures = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if line and not line.startswith("#"):
                measures.append(parse_measure(line))
    if not measures:
        raise ValueError(f"class file {path} contains no measures")
    return measures


def write_class_file(path, measures) -> None:
    with open(path, "w") as fh:
        for m in measures:
            fh.write(format_measure(m) + "\n")
