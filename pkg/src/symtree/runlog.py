"""Append-only JSONL run logs.

The main log holds only values that are a function of the inputs and seed, so
re-running a logged configuration reproduces it byte for byte. Wall-clock
timings go to an optional separate stream.
"""

from __future__ import annotations

import json

from .tree import truth_table


def _dump(stream, obj):
    stream.write(json.dumps(obj, separators=(",", ":")) + "\n")
    stream.flush()


class RunLog:
    def __init__(self, stream, timings=None):
        self.stream = stream
        self.timings = timings

    def start(self, **fields):
        _dump(self.stream, {"event": "start", **fields})

    def round(self, record):
        _dump(self.stream, {"event": "round", **record.to_dict()})
        if self.timings is not None:
            _dump(self.timings, {
                "round": record.round,
                "select_time": record.select_time,
                "count_time": record.count_time,
            })

    def finish(self, outcome):
        d = {"event": "end", "status": str(outcome.status), "queries": outcome.n_queries,
             "split_exhausted": outcome.split_exhausted}
        if outcome.initial_count is not None:
            d["initial_estimate"] = outcome.initial_count.value
        if outcome.tree is not None:
            d["node_feature"] = list(outcome.tree.node_feature)
            d["leaf_label"] = list(outcome.tree.leaf_label)
            d["truth_table"] = "".join(map(str, truth_table(outcome.tree)))
        _dump(self.stream, d)

    def error(self, message):
        _dump(self.stream, {"event": "error", "message": message})


def read_log(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]

