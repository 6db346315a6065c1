# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import absolute_import, division, print_function
__metaclass__ = type


class LoclError(Exception):
    """Base class for every error raised by the locl module_utils."""
    pass


class DataError(LoclError):
    pass


class OrderingError(LoclError):
    pass


class AugmentationError(LoclError):
    pass


class TensorError(LoclError):
    pass


class ContainerError(LoclError):
    pass


class LossError(LoclError):
    pass


class PretrainError(LoclError):
    pass


class ProbeError(LoclError):
    pass


class ConfigError(LoclError):
    pass


class ArtifactError(LoclError):
    pass
