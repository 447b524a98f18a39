#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# pathwave: proper-time path integrals for weakly anisotropic wave media
#
# Copyright 2016-2018 Ran Aroussi
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

import sys

# =============================================
# check min, python version
if sys.version_info < (3, 7):
    raise SystemError("pathwave requires Python version >= 3.7")
# =============================================


class PathwaveError(Exception):
    """ base class for every error raised by pathwave """

    def context(self):
        """ machine readable error context for run reports """
        return {"error": self.__class__.__name__, "message": str(self)}


class ConfigError(PathwaveError, ValueError):

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = "%s: %s" % (field, message)
        super().__init__(message)

    def context(self):
        ctx = super().context()
        ctx["field"] = self.field
        return ctx


class DomainError(PathwaveError, ValueError):
    pass


class InvalidMediumError(PathwaveError, ValueError):
    pass


class UnsupportedConfigurationError(PathwaveError, ValueError):
    pass


class DegenerateSourceError(PathwaveError, ValueError):
    pass


class SymmetryError(PathwaveError, ValueError):
    pass


class SingularityError(PathwaveError, ArithmeticError):
    pass


class IllConditionedError(PathwaveError, ArithmeticError):

    def __init__(self, message, condition_number=None):
        self.condition_number = condition_number
        super().__init__(message)


class EvaluationError(PathwaveError, ArithmeticError):

    def __init__(self, message, node=None):
        self.node = node
        super().__init__(message)

    def context(self):
        ctx = super().context()
        ctx["node"] = self.node
        return ctx


class CausticError(PathwaveError, ArithmeticError):

    def __init__(self, message, index=None, eigenvalue=None):
        self.index = index
        self.eigenvalue = eigenvalue
        super().__init__(message)

    def context(self):
        ctx = super().context()
        ctx.update(index=self.index, eigenvalue=self.eigenvalue)
        return ctx


class IntegrationError(PathwaveError, RuntimeError):

    def __init__(self, message, last_sigma=None):
        self.last_sigma = last_sigma
        super().__init__(message)

    def context(self):
        ctx = super().context()
        ctx["last_sigma"] = self.last_sigma
        return ctx


class BoundaryValueError(PathwaveError, RuntimeError):

    def __init__(self, message, residual=None, ray=None):
        self.residual = residual
        self.ray = ray
        super().__init__(message)

    def context(self):
        ctx = super().context()
        ctx["residual"] = self.residual
        return ctx
