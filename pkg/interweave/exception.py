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

"""Interweave base exception handling."""

from oslo_log import log as logging

from interweave.i18n import _

LOG = logging.getLogger(__name__)


class InterweaveException(Exception):
    """Base Interweave Exception

    To correctly use this class, inherit from it and define
    a 'message' property. That message will get printf'd
    with the keyword arguments provided to the constructor.

    """

    message = _("An unknown exception occurred.")

    def __init__(self, message=None, **kwargs):
        self.kwargs = kwargs

        if message:
            self.message = message

        try:
            self.message = self.message % kwargs
        except (KeyError, TypeError, ValueError):
            # kwargs doesn't match a variable in the message
            # log the issue and the kwargs
            LOG.exception(
                "Exception in string format operation, kwargs: %s", kwargs
            )

        super().__init__(self.message)

    def __str__(self):
        return self.message


class DomainError(InterweaveException):
    message = _("Parameter %(name)s=%(value)s is outside its domain: %(why)s")


class DimensionMismatch(InterweaveException):
    message = _("Incompatible operands: %(detail)s")


class DegeneracyError(InterweaveException):
    message = _(
        "Eigenvalues %(first)s and %(second)s are closer than %(tol)s."
    )


class SingularError(InterweaveException):
    message = _("Matrix %(name)s is singular: %(detail)s")


class InfeasibleError(InterweaveException):
    message = _("Kernel %(name)s is not Markovian: %(detail)s")


class UnsupportedError(InterweaveException):
    message = _("%(what)s does not support %(operation)s.")


class PrecisionError(InterweaveException):
    message = _("Truncation did not converge: %(detail)s")


class InsufficientData(InterweaveException):
    message = _("Not enough data: %(detail)s")


class MemoryCapError(InterweaveException):
    message = _(
        "Request of %(needed)s bytes exceeds the memory cap of "
        "%(cap)s bytes."
    )


class ConfigError(InterweaveException):
    message = _("Invalid experiment configuration: %(errors)s")

    def __init__(self, errors=None, **kwargs):
        self.errors = list(errors or [])
        super().__init__(errors="; ".join(self.errors), **kwargs)
