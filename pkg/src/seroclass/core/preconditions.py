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

"""Preconditions are tested before a fit, an estimate or a classification is run"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from seroclass.core.params import DomainSpec
from seroclass.utils.exceptions import (
    DomainMismatchException,
    EmptyInputException,
    OutsideDomainException,
    PreconditionNotMetException,
)


class Precondition(ABC):
    @abstractmethod
    def check(self, points: np.ndarray) -> Optional[Exception]:
        """Returns the exception describing the violation, or None."""


def find_first_failing(points: np.ndarray, conditions: Sequence[Precondition]) -> Optional[Exception]:
    for condition in conditions:
        failure = condition.check(points)
        if failure is not None:
            return failure
    return None


def check_preconditions(points: np.ndarray, conditions: Sequence[Precondition]) -> None:
    failure = find_first_failing(points, conditions)
    if failure is not None:
        raise failure


@dataclass(frozen=True)
class NonEmpty(Precondition):
    what: str = "points"

    def check(self, points):
        if len(points) == 0:
            return EmptyInputException(f"Expected at least one of {self.what}, got none")
        return None


@dataclass(frozen=True)
class AtLeastPoints(Precondition):
    minimum: int
    what: str = "points"

    def check(self, points):
        if len(points) < self.minimum:
            return PreconditionNotMetException(
                f"Expected at least {self.minimum} {self.what}, got {len(points)}"
            )
        return None


@dataclass(frozen=True)
class FinitePoints(Precondition):
    def check(self, points):
        if len(points) and not np.all(np.isfinite(points)):
            bad = int(np.sum(~np.all(np.isfinite(points), axis=1)))
            return PreconditionNotMetException(f"{bad} point(s) have non-finite coordinates")
        return None


@dataclass(frozen=True)
class InsideDomain(Precondition):
    domain: DomainSpec

    def check(self, points):
        if not len(points):
            return None
        inside = self.domain.contains(points[:, 0], points[:, 1])
        if not np.all(inside):
            first = points[np.argmin(inside)]
            return OutsideDomainException(
                f"{int(np.sum(~inside))} point(s) lie outside [{self.domain.lo}, {self.domain.hi}]^2, "
                f"first offender ({first[0]}, {first[1]})"
            )
        return None


def require_shared_domain(first: DomainSpec, second: DomainSpec) -> None:
    if first != second:
        raise DomainMismatchException(f"Densities are defined on different domains: {first} and {second}")
