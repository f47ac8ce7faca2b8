# Apache Software License 2.0
#
# Modifications copyright (C) 2021, Till Döhmen, Fraunhofer FIT
# Copyright (c) 2019, Miguel Cabrera
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

from tryingsnake import Failure, Success, Try_


@dataclass(frozen=True)
class TrialOutcome:
    """What one Monte Carlo trial measured."""
    error_rate: float
    false_positives: int
    false_negatives: int
    sample_count: int
    p_hat: Optional[float] = None
    iterations: int = 0


@dataclass(frozen=True)
class TrialMetric:
    """
    One Monte Carlo trial, addressed by the indices of its (prevalence, sample size)
    cell and its trial number. ``value`` holds a TrialOutcome on success, or the
    exception that aborted the trial.
    """
    prevalence_index: int
    size_index: int
    trial: int
    value: Try_

    @property
    def key(self) -> Tuple[int, int, int]:
        return self.prevalence_index, self.size_index, self.trial

    @property
    def succeeded(self) -> bool:
        return self.value.isSuccess

    def asdict(self) -> Mapping[str, Union[int, float, str, None]]:
        row = {
            "prevalence_index": self.prevalence_index,
            "size_index": self.size_index,
            "trial": self.trial,
        }
        if self.value.isSuccess:
            row.update(vars(self.value.get()))
            row["failure"] = None
        else:
            row["failure"] = str(self.value.failed().get())
        return row


def metric_from_value(prevalence_index: int, size_index: int, trial: int, outcome: TrialOutcome) -> TrialMetric:
    return TrialMetric(prevalence_index, size_index, trial, Success(outcome))


def metric_from_failure(prevalence_index: int, size_index: int, trial: int, exception: Exception) -> TrialMetric:
    return TrialMetric(prevalence_index, size_index, trial, Failure(exception))


def failure_counts(metrics: Sequence[TrialMetric]) -> Dict[str, int]:
    counts: Dict[str, int] = {}
    for metric in metrics:
        if not metric.succeeded:
            name = type(metric.value.failed().get()).__name__
            counts[name] = counts.get(name, 0) + 1
    return counts
