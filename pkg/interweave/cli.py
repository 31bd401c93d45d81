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

"""The ``interweave`` command.

Usage::

    interweave [--config FILE] [--seed N] [--out DIR] [--format csv|json]
               [--set key=value ...] COMMAND [command flags]

Exit status is 0 when every check passes, 1 when at least one check
fails and 2 for configuration errors.
"""

import dataclasses
import sys
import typing as t

from oslo_config import cfg
from oslo_log import log as logging
from oslo_utils import encodeutils
from oslo_utils import strutils
import yaml

from interweave import conf
from interweave import exception
from interweave import experiments
from interweave import report

LOG = logging.getLogger(__name__)
CONF = conf.CONF

FORMATS = ("csv", "json")
TOP_LEVEL_KEYS = ("command", "seed", "output", "format", "parameters")
MAX_SEED = 2**64

COMMAND_HELP = {
    "verify": "Check the interweaving identities on truncated algebras.",
    "entropy": "Entropy decay against the transferred bounds.",
    "hyperbound": "L2 to Lp norms of birth-death semigroups.",
    "hardy": "Hardy-type constants of the birth-death chains.",
    "warmup": "Laplace transforms and sampling of warm-up laws.",
    "sample": "Exact and intertwined Laguerre samplers.",
    "cutoff": "Total variation profiles of tensorised OU families.",
}


def add_command_parsers(subparsers):
    for name in experiments.COMMANDS:
        parser = subparsers.add_parser(name, help=COMMAND_HELP[name])
        parser.set_defaults(suite=None, family=None, sizes=None)
        if name == "verify":
            parser.add_argument(
                "--suite", choices=experiments.SUITES + ("all",)
            )
        if name == "cutoff":
            parser.add_argument("--family", choices=experiments.FAMILIES)
            parser.add_argument(
                "--sizes", help="Comma separated family sizes."
            )


cli_opts = [
    cfg.StrOpt(
        "config",
        dest="experiment_config",
        help="YAML experiment configuration file.",
    ),
    cfg.IntOpt(
        "seed",
        min=0,
        max=MAX_SEED - 1,
        help="Master seed; overrides the configuration file.",
    ),
    cfg.StrOpt("out", help="Directory the report files are written to."),
    cfg.StrOpt(
        "format",
        dest="report_format",
        choices=FORMATS,
        help="Format of the tables.",
    ),
    cfg.MultiStrOpt(
        "set",
        dest="overrides",
        default=[],
        help="Override one parameter, as key=value. May be repeated.",
    ),
    cfg.SubCommandOpt(
        "command",
        title="Commands",
        help="Experiment to run.",
        handler=add_command_parsers,
    ),
]

CONF.register_cli_opts(cli_opts)
logging.register_options(CONF)


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    command: str
    seed: int
    parameters: t.Dict[str, t.Any]
    output: str = "."
    format: str = "json"


def _syntax_error(err: yaml.YAMLError) -> str:
    if isinstance(err, yaml.MarkedYAMLError) and err.problem_mark:
        mark = err.problem_mark
        return (
            f"line {mark.line + 1}, column {mark.column + 1}: "
            f"{err.problem}"
        )
    return f"syntax error: {err}"


def load_document(text) -> t.Dict[str, t.Any]:
    """Parse the YAML text of an experiment configuration."""
    try:
        text = encodeutils.safe_decode(text, incoming="utf-8")
    except UnicodeDecodeError as err:
        raise exception.ConfigError(errors=[f"not UTF-8 text: {err}"])
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise exception.ConfigError(errors=[_syntax_error(err)])
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise exception.ConfigError(
            errors=["the configuration must be a mapping of keys"]
        )
    return document


def _seed(value, errors):
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append(f"seed: expected an integer, got {value!r}")
    elif not 0 <= value < MAX_SEED:
        errors.append(f"seed: {value} is not a 64-bit unsigned integer")
    return value


def build_config(document: t.Mapping[str, t.Any]) -> ExperimentConfig:
    """Validate a parsed document, reporting every problem at once."""
    errors = [
        f"{key}: unknown key"
        for key in sorted(map(str, document))
        if key not in TOP_LEVEL_KEYS
    ]
    command = document.get("command")
    if command is None:
        errors.append("command: missing")
    elif command not in experiments.COMMANDS:
        errors.append(
            f"command: {command!r} is not one of "
            f"{', '.join(experiments.COMMANDS)}"
        )
    seed = _seed(document.get("seed", 0), errors)
    output = document.get("output", ".")
    if not isinstance(output, str) or not output:
        errors.append(f"output: expected a directory path, got {output!r}")
    fmt = document.get("format", "json")
    if fmt not in FORMATS:
        errors.append(f"format: {fmt!r} is not one of {', '.join(FORMATS)}")
    section = document.get("parameters") or {}
    parameters: t.Dict[str, t.Any] = {}
    if not isinstance(section, dict):
        errors.append("parameters: expected a mapping")
    elif command in experiments.COMMANDS:
        parameters, problems = experiments.validate_parameters(
            command, section
        )
        errors.extend(problems)
    if errors:
        raise exception.ConfigError(errors=errors)
    return ExperimentConfig(command, seed, parameters, output, fmt)


def parse_config(text) -> ExperimentConfig:
    return build_config(load_document(text))


def coerce_text(text: str):
    """Typed value of a --set override."""
    text = text.strip()
    if text.startswith("["):
        return yaml.safe_load(text)
    if "," in text:
        return [coerce_text(item) for item in strutils.split_by_commas(text)]
    if strutils.is_int_like(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        pass
    if text.lower() in strutils.TRUE_STRINGS + strutils.FALSE_STRINGS:
        return strutils.bool_from_string(text, strict=True)
    return text


def apply_overrides(document: t.Dict[str, t.Any], conf_obj) -> t.Dict:
    """Merge the command line into a parsed configuration document."""
    document = dict(document)
    errors = []
    command = conf_obj.command.name
    if document.get("command", command) != command:
        errors.append(
            f"command: the file names {document['command']!r} but "
            f"{command!r} was requested"
        )
    document["command"] = command
    if conf_obj.seed is not None:
        document["seed"] = conf_obj.seed
    if conf_obj.out is not None:
        document["output"] = conf_obj.out
    if conf_obj.report_format is not None:
        document["format"] = conf_obj.report_format
    parameters = dict(document.get("parameters") or {})
    for item in conf_obj.overrides:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            errors.append(f"--set: expected key=value, got {item!r}")
            continue
        try:
            parameters[key.strip()] = coerce_text(value)
        except yaml.YAMLError as err:
            errors.append(f"--set {key.strip()}: {_syntax_error(err)}")
    if conf_obj.command.suite is not None:
        parameters["suite"] = conf_obj.command.suite
    if conf_obj.command.family is not None:
        parameters["family"] = conf_obj.command.family
    if conf_obj.command.sizes is not None:
        sizes = coerce_text(conf_obj.command.sizes)
        parameters["sizes"] = sizes if isinstance(sizes, list) else [sizes]
    if errors:
        raise exception.ConfigError(errors=errors)
    document["parameters"] = parameters
    return document


def load_config(conf_obj=None) -> ExperimentConfig:
    conf_obj = CONF if conf_obj is None else conf_obj
    document: t.Dict[str, t.Any] = {}
    path = conf_obj.experiment_config
    if path:
        try:
            with open(path, "rb") as fd:
                document = load_document(fd.read())
        except OSError as err:
            raise exception.ConfigError(errors=[f"{path}: {err.strerror}"])
    return build_config(apply_overrides(document, conf_obj))


def run(config: ExperimentConfig, workers: t.Optional[int] = None) -> int:
    """Run a validated configuration and write its reports."""
    outcome = experiments.run(
        config.command, config.parameters, config.seed, workers
    )
    report.write(outcome, config)
    if outcome.passed:
        return 0
    sys.stderr.write(report.failures_document(outcome) + "\n")
    return 1


def _reject(errors: t.Sequence[str]) -> int:
    sys.stderr.write(report.errors_document(errors) + "\n")
    return 2


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        CONF(argv, project="interweave", default_config_files=[])
    except cfg.Error as err:
        return _reject([str(err)])
    logging.setup(CONF, "interweave")
    try:
        config = load_config()
    except exception.ConfigError as err:
        LOG.error(f"Invalid configuration: {err}")
        return _reject(err.errors)
    except cfg.Error as err:
        # option values are converted on first access
        return _reject([str(err)])
    try:
        return run(config)
    except exception.ConfigError as err:
        return _reject(err.errors)
    except exception.InterweaveException as err:
        LOG.error(f"'{config.command}' aborted: {err}")
        sys.stderr.write(report.errors_document([str(err)]) + "\n")
        return 1
