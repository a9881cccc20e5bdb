# Copyright 2026 The WDP Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python bindings for the wiretap DP-protection simulator."""

from wdp._wdp import (
    ConfigError,
    DivergenceError,
    GeneratorModel,
    GeneratorSpec,
    InvalidInput,
    MissingArtifact,
    NumericalError,
    apply_dp,
    approximate_epsilon,
    compute_clip_bounds,
    fit_laplace_scale,
    lr_at,
    main,
    resolve_config,
    run_sweep,
    sample_laplace,
    sensitivity_bruteforce,
    sensitivity_closed_form,
    transmit,
)

__all__ = [
    "ConfigError",
    "DivergenceError",
    "GeneratorModel",
    "GeneratorSpec",
    "InvalidInput",
    "MissingArtifact",
    "NumericalError",
    "apply_dp",
    "approximate_epsilon",
    "compute_clip_bounds",
    "fit_laplace_scale",
    "lr_at",
    "main",
    "resolve_config",
    "run_sweep",
    "sample_laplace",
    "sensitivity_bruteforce",
    "sensitivity_closed_form",
    "transmit",
]
