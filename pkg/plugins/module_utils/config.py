# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""
Key-value training config files and option layering.

The file grammar is the sysctl.conf one: ``key = value`` lines, ``#`` and
``;`` comments, blank lines ignored, the last occurrence of a key wins.
"""

from __future__ import absolute_import, division, print_function
__metaclass__ = type

import os

from ansible_collections.tabular.locl.plugins.module_utils.augmentation import CORRUPTIONS
from ansible_collections.tabular.locl.plugins.module_utils.errors import ConfigError
from ansible_collections.tabular.locl.plugins.module_utils.ordering import VARIANTS
from ansible_collections.tabular.locl.plugins.module_utils.pipeline import ENCODER_KINDS, FIELDS, TrainConfig


WORKERS_ENV = 'LOCL_WORKERS'


def _convert(name, raw, lineno):
    kind = FIELDS[name][0]
    try:
        if kind is list:
            return [int(v) for v in raw.split(',') if v.strip()]
        return kind(raw)
    except ValueError:
        raise ConfigError('line %d: cannot parse %r as %s for key %s' % (lineno, raw, kind.__name__, name))


def parse_config(text):
    """Return a dict of the keys set in ``text``, values converted to their field types."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()

        # don't split empty lines or comments
        if not line or line.startswith(("#", ";")):
            continue
        if "=" not in line:
            raise ConfigError('line %d: expected key = value, got %r' % (lineno, line))

        k, v = line.split('=', 1)
        k = k.strip()
        v = v.strip()
        if k not in FIELDS:
            raise ConfigError('line %d: unknown key %s' % (lineno, k))
        values[k] = _convert(k, v, lineno)
    return values


def read_config(path):
    try:
        with open(path, 'r') as read_file:
            return parse_config(read_file.read())
    except (IOError, OSError) as e:
        raise ConfigError('failed to open %s: %s' % (path, e))


def dump_config(config):
    lines = ['# resolved training configuration']
    for name, value in config.to_dict().items():
        if isinstance(value, list):
            value = ','.join(str(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append('%s = %s' % (name, value))
    return '\n'.join(lines) + '\n'


def resolve(options=None, config_file=None):
    """
    Build a TrainConfig from explicit options over file values over defaults.

    ``None`` option values count as unset.
    """
    values = read_config(config_file) if config_file else {}
    for name, value in (options or {}).items():
        if name in FIELDS and value is not None:
            values[name] = value
    return TrainConfig(**values)


def worker_count(environ=None):
    environ = os.environ if environ is None else environ
    raw = environ.get(WORKERS_ENV, '1')
    try:
        count = int(raw)
    except ValueError:
        raise ConfigError('%s must be a positive integer, got %r' % (WORKERS_ENV, raw))
    if count < 1:
        raise ConfigError('%s must be a positive integer, got %r' % (WORKERS_ENV, raw))
    return count


_CHOICES = {
    'ordering_variant': list(VARIANTS),
    'encoder_kind': list(ENCODER_KINDS),
    'corruption': list(CORRUPTIONS),
}


def train_config_argument_spec():
    """Module options for every TrainConfig field plus ``config_file``; all default to unset."""
    spec = dict(config_file=dict(type='path'))
    for name, (kind, _default) in FIELDS.items():
        if kind is list:
            spec[name] = dict(type='list', elements='int')
        else:
            spec[name] = dict(type={int: 'int', float: 'float', str: 'str'}[kind])
        if name in _CHOICES:
            spec[name]['choices'] = _CHOICES[name]
    return spec


def resolve_module_config(module):
    return resolve(dict((name, module.params.get(name)) for name in FIELDS), module.params.get('config_file'))
