# Licensed under the Apache License, Version 2.0 (the "License"); you may
# not use this file except in compliance with the License. You may obtain
# a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations
# under the License.

"""Report files of an experiment run.

report.json holds everything that is a function of the configuration and
the seed, so two runs with the same inputs produce identical bytes.
Wall-clock runtimes go to timings.json next to it.
"""

import csv
import json
import math
import pathlib
import typing as t

import numpy as np
from oslo_log import log as logging

LOG = logging.getLogger(__name__)

REPORT_FILE = "report.json"
TIMINGS_FILE = "timings.json"
CHECKS_FILE = "checks.csv"
CHECK_COLUMNS = (
    "name",
    "anchor",
    "value",
    "threshold",
    "margin",
    "passed",
    "error",
)


def jsonable(value):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(key): jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def _dump(document, path: pathlib.Path):
    with open(path, "w", encoding="utf-8") as fd:
        json.dump(jsonable(document), fd, indent=2, sort_keys=True)
        fd.write("\n")


def check_rows(outcome) -> t.List[t.Dict[str, t.Any]]:
    return [
        {
            "name": check.name,
            "anchor": check.anchor,
            "value": check.value,
            "threshold": check.threshold,
            "margin": check.margin,
            "passed": check.passed,
            "error": check.error,
        }
        for check in outcome.checks
    ]


def report_document(outcome, config) -> t.Dict[str, t.Any]:
    document = {
        "command": outcome.command,
        "seed": config.seed,
        "parameters": config.parameters,
        "passed": outcome.passed,
        "failures": outcome.failures,
        "checks": check_rows(outcome),
        "summary": outcome.summary,
    }
    if config.format == "json":
        document["tables"] = {
            name: {"header": list(header), "rows": rows}
            for name, (header, rows) in outcome.tables.items()
        }
    return document


def _write_csv(path: pathlib.Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fd:
        writer = csv.writer(fd)
        writer.writerow(header)
        for row in rows:
            writer.writerow(jsonable(list(row)))


def write(outcome, config) -> t.List[pathlib.Path]:
    """Write the report files for outcome into config.output."""
    out = pathlib.Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / REPORT_FILE, out / TIMINGS_FILE]
    _dump(report_document(outcome, config), written[0])
    _dump(outcome.timings, written[1])
    if config.format == "csv":
        path = out / CHECKS_FILE
        _write_csv(
            path,
            CHECK_COLUMNS,
            [
                [row[column] for column in CHECK_COLUMNS]
                for row in check_rows(outcome)
            ],
        )
        written.append(path)
        for name, (header, rows) in sorted(outcome.tables.items()):
            path = out / f"{name}.csv"
            _write_csv(path, header, rows)
            written.append(path)
    LOG.info(f"Wrote {', '.join(path.name for path in written)} to {out}")
    return written


def failures_document(outcome) -> str:
    """Machine-readable failure list for stderr."""
    failed = [row for row in check_rows(outcome) if not row["passed"]]
    return json.dumps({"failures": jsonable(failed)}, sort_keys=True)


def errors_document(errors: t.Sequence[str]) -> str:
    return json.dumps({"errors": list(errors)}, sort_keys=True)
