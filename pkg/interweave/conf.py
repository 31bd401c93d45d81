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

from oslo_config import cfg

polyop_group = cfg.OptGroup(
    name="polyop", title="Truncated polynomial operator calculus"
)

polyop_opts = [
    cfg.IntOpt(
        "degree",
        default=20,
        min=1,
        help=(
            "Default truncation degree N of the polynomial spaces "
            "on which generators, semigroups and kernels are compared."
        ),
    ),
    cfg.FloatOpt(
        "tolerance",
        default=1e-9,
        help=("Residual threshold for intertwining and interweaving checks."),
    ),
    cfg.FloatOpt(
        "eigen_gap",
        default=1e-9,
        help=(
            "Smallest relative gap between diagonal entries of a "
            "triangular generator before eigenpolynomials are "
            "considered degenerate."
        ),
    ),
]

montecarlo_group = cfg.OptGroup(
    name="montecarlo", title="Monte-Carlo estimation"
)

montecarlo_opts = [
    cfg.IntOpt(
        "samples",
        default=200000,
        min=1,
        help=("Default number of samples for Monte-Carlo estimates."),
    ),
    cfg.IntOpt(
        "chunk_size",
        default=50000,
        min=1,
        help=(
            "Number of samples drawn per vectorised chunk. "
            "Estimates are reduced chunk by chunk in a fixed order "
            "so results depend on the chunking only up to rounding."
        ),
    ),
]

ergodics_group = cfg.OptGroup(
    name="ergodics", title="Entropy decay and functional inequalities"
)

ergodics_opts = [
    cfg.IntOpt(
        "hardy_cap",
        default=2000,
        min=10,
        help=("Lattice cap used when summing the Hardy-type constants."),
    ),
    cfg.IntOpt(
        "ascent_steps",
        default=300,
        min=1,
        help=(
            "Projected gradient iterations per restart when searching "
            "for the L2 to Lp operator norm of a semigroup."
        ),
    ),
]

cutoff_group = cfg.OptGroup(
    name="cutoff", title="Cut-off experiments on tensorised OU families"
)

cutoff_opts = [
    cfg.IntOpt(
        "memory_cap_mb",
        default=512,
        min=1,
        help=(
            "Upper bound, in megabytes, for dense covariance assembly "
            "and for a single chunk of Monte-Carlo samples."
        ),
    ),
    cfg.FloatOpt(
        "start_scale",
        default=3.0,
        help=("Scale c of the fixed start vector of every block."),
    ),
]

runner_group = cfg.OptGroup(name="runner", title="Experiment runner")

runner_opts = [
    cfg.IntOpt(
        "workers",
        default=1,
        min=1,
        help=(
            "Number of worker threads used for independent checks. "
            "The environment variable INTERWEAVE_WORKERS overrides it."
        ),
    ),
]

CONF = cfg.CONF


def list_opts():
    return [
        (polyop_group, polyop_opts),
        (montecarlo_group, montecarlo_opts),
        (ergodics_group, ergodics_opts),
        (cutoff_group, cutoff_opts),
        (runner_group, runner_opts),
    ]


for _group, _opts in list_opts():
    CONF.register_group(_group)
    CONF.register_opts(_opts, group=_group)
