# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""
Binary container shared by checkpoints, dataset artifacts and embeddings.

Layout::

    b"LOCL" | u32 format version | u64 manifest length | manifest (UTF-8 JSON)
    | float64 little-endian arrays, in manifest order

The manifest lists every array by name and shape, so a reader can validate
the payload length before touching any value.
"""

from __future__ import absolute_import, division, print_function
__metaclass__ = type

import json
import struct
import traceback

from collections import OrderedDict

from ansible_collections.tabular.locl.plugins.module_utils.errors import ContainerError

try:
    import numpy as np
    HAS_NUMPY = True
    NUMPY_IMPORT_ERROR = None
except ImportError:
    HAS_NUMPY = False
    NUMPY_IMPORT_ERROR = traceback.format_exc()


MAGIC = b'LOCL'
FORMAT_VERSION = 1

_PREAMBLE = struct.Struct('<4sIQ')


def canonical_json(obj):
    """Serialize ``obj`` so identical content always gives identical bytes."""
    return json.dumps(obj, sort_keys=True, separators=(',', ':'), allow_nan=False)


def pack(kind, manifest, arrays):
    """
    Build a container.

    :kind:      str, artifact kind recorded in the header (checkpoint, dataset, embedding)
    :manifest:  dict, JSON-serializable metadata
    :arrays:    list of (name, ndarray) pairs, written in this order
    """
    entries = []
    payload = []
    for name, array in arrays:
        array = np.ascontiguousarray(array, dtype='<f8')
        if not np.all(np.isfinite(array)):
            raise ContainerError('array %s holds non-finite values' % name)
        entries.append({'name': name, 'shape': list(array.shape)})
        payload.append(array.tobytes())

    header = canonical_json({'kind': kind, 'manifest': manifest, 'arrays': entries}).encode('utf-8')
    return b''.join([_PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header)), header] + payload)


def unpack(data, kind=None):
    """
    Read a container produced by :func:`pack`.

    Returns ``(manifest, arrays)`` where ``arrays`` is an ordered name -> ndarray map.
    """
    if len(data) < _PREAMBLE.size:
        raise ContainerError('truncated container: %d bytes' % len(data))

    magic, version, header_len = _PREAMBLE.unpack_from(data, 0)
    if magic != MAGIC:
        raise ContainerError('bad magic bytes %r, expected %r' % (magic, MAGIC))
    if version != FORMAT_VERSION:
        raise ContainerError('unsupported container version %d (this build reads %d)' % (version, FORMAT_VERSION))

    start = _PREAMBLE.size
    try:
        header = json.loads(data[start:start + header_len].decode('utf-8'))
    except ValueError as e:
        raise ContainerError('unreadable container manifest: %s' % e)

    if kind is not None and header.get('kind') != kind:
        raise ContainerError('expected a %s container, found %s' % (kind, header.get('kind')))

    offset = start + header_len
    arrays = OrderedDict()
    for entry in header['arrays']:
        shape = tuple(entry['shape'])
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(data):
            raise ContainerError('array %s runs past the end of the container' % entry['name'])
        array = np.frombuffer(data[offset:end], dtype='<f8').reshape(shape).astype(np.float64)
        arrays[entry['name']] = array
        offset = end

    if offset != len(data):
        raise ContainerError('%d trailing bytes after the last array' % (len(data) - offset))

    return header['manifest'], arrays
