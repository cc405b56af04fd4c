"""Membership oracles: the learner only ever calls ``answer(x) -> bit``."""

from __future__ import annotations

import shlex
import subprocess

from .tree import (
    DecisionTree,
    TreeSpec,
    bitstring,
    evaluate,
    input_index,
    random_tree,
    read_truth_table,
)


class OracleProtocolError(RuntimeError):
    """An external oracle replied with something other than ``0`` or ``1``."""


class Oracle:
    n_features: int

    def answer(self, x) -> int:
        raise NotImplementedError

    def __call__(self, x):
        return self.answer(x)

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class TreeOracle(Oracle):
    def __init__(self, tree: DecisionTree):
        self.tree = tree
        self.n_features = tree.spec.n_features

    def answer(self, x):
        return evaluate(self.tree, x)


class RandomTreeOracle(TreeOracle):
    """Hidden tree drawn with :func:`random_tree` from ``seed``."""

    def __init__(self, spec: TreeSpec, seed):
        super().__init__(random_tree(spec, seed))
        self.seed = seed


class TableOracle(Oracle):
    """Lookup in a truth table (index = input read with x1 as the top bit)."""

    def __init__(self, table):
        table = tuple(int(b) for b in table)
        n = len(table).bit_length() - 1
        if len(table) != 1 << n or any(b not in (0, 1) for b in table):
            raise ValueError("truth table must hold 2**n bits")
        self.table = table
        self.n_features = n

    @classmethod
    def from_file(cls, path):
        return cls(read_truth_table(path))

    def answer(self, x):
        if len(x) != self.n_features:
            raise ValueError(f"expected {self.n_features} bits, got {len(x)}")
        return self.table[input_index(x)]


class ExecOracle(Oracle):
    """Long-lived child process speaking a line protocol.

    Each query writes the input as an n-character bitstring plus newline to
    the child's stdin; the child must answer with a line holding ``0`` or
    ``1``.
    """

    def __init__(self, command, n_features, timeout=None):
        self.command = command
        self.n_features = n_features
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.proc = subprocess.Popen(
            argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1
        )

    def answer(self, x):
        if len(x) != self.n_features:
            raise ValueError(f"expected {self.n_features} bits, got {len(x)}")
        query = bitstring(x)
        try:
            self.proc.stdin.write(query + "\n")
            self.proc.stdin.flush()
        except BrokenPipeError:
            raise OracleProtocolError(f"oracle process exited before query {query}") from None
        line = self.proc.stdout.readline()
        reply = line.strip()
        if reply not in ("0", "1"):
            raise OracleProtocolError(f"oracle replied {line!r} to query {query}")
        return int(reply)

    def close(self):
        if self.proc.poll() is None:
            try:
                self.proc.stdin.close()
                self.proc.wait(timeout=5)
            except (OSError, subprocess.TimeoutExpired):
                self.proc.kill()
                self.proc.wait()


def make_oracle(descr: str, spec: TreeSpec) -> Oracle:
    """Parse ``random:<seed>``, ``table:<path>`` or ``exec:<command>``."""
    kind, sep, arg = descr.partition(":")
    if not sep or not arg:
        raise ValueError(f"oracle must look like random:<seed>, table:<path> or exec:<cmd>, got {descr!r}")
    if kind == "random":
        return RandomTreeOracle(spec, int(arg))
    if kind == "table":
        oracle = TableOracle.from_file(arg)
        if oracle.n_features != spec.n_features:
            raise ValueError(f"{arg} has {oracle.n_features} features, expected {spec.n_features}")
        return oracle
    if kind == "exec":
        return ExecOracle(arg, spec.n_features)
    raise ValueError(f"unknown oracle kind {kind!r}")
