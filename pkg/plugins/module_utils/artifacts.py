# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""
Artifact files of a run: atomic writes with change detection, the
``manifest.json`` run record and the JSON-lines training log.
"""

from __future__ import absolute_import, division, print_function
__metaclass__ = type

import datetime
import hashlib
import json
import os
import tempfile

from ansible.module_utils.common.text.converters import to_bytes, to_native

from ansible_collections.tabular.locl.plugins.module_utils import data, ordering
from ansible_collections.tabular.locl.plugins.module_utils.errors import ArtifactError


COLLECTION_VERSION = '1.0.0'
MANIFEST_NAME = 'manifest.json'


def current_time():
    return '%sZ' % datetime.datetime.now(datetime.timezone.utc).replace(tzinfo=None).isoformat()


def sha256(data):
    return hashlib.sha256(to_bytes(data)).hexdigest()


def file_sha256(path):
    if not os.path.exists(path):
        return None
    with open(path, 'rb') as f:
        return hashlib.sha256(f.read()).hexdigest()


def read_artifact(path, what='artifact'):
    try:
        with open(path, 'rb') as f:
            return f.read()
    except (IOError, OSError) as e:
        raise ArtifactError('failed to read %s %s: %s' % (what, path, to_native(e)))


def write_artifact(module, path, content):
    """
    Atomically replace ``path`` with ``content`` (bytes or text).

    Returns True when the bytes on disk changed. Nothing is written in check mode.
    """
    content = to_bytes(content)
    if file_sha256(path) == sha256(content):
        return False
    if module.check_mode:
        return True

    directory = os.path.dirname(os.path.realpath(path))
    if not os.path.isdir(directory):
        try:
            os.makedirs(directory)
        except OSError as e:
            raise ArtifactError('failed to create directory %s: %s' % (directory, to_native(e)))

    fd, tmp_path = tempfile.mkstemp('.tmp', '.ansible_m_locl_', directory)
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(content)
    except (IOError, OSError) as e:
        module.add_cleanup_file(tmp_path)
        raise ArtifactError('failed to write to file %s: %s' % (tmp_path, to_native(e)))
    module.atomic_move(tmp_path, os.path.realpath(path))
    return True


def dumps(obj, indent=None):
    return json.dumps(obj, sort_keys=True, indent=indent, separators=(',', ':') if indent is None else None)


def check_fingerprint(expected, actual, what):
    """Refuse stale artifacts: both fingerprints must be known and equal."""
    if expected != actual:
        raise ArtifactError('%s was built from dataset %s, but the given dataset is %s; rebuild it'
                            % (what, expected, actual))


class RunManifest(object):
    """
    ``manifest.json`` of an artifact directory.

    One entry per (command, primary output); re-running a command replaces
    its entry instead of appending.
    """

    def __init__(self, path, entries=None):
        self.path = path
        self.entries = entries or []

    @classmethod
    def for_directory(cls, directory):
        path = os.path.join(directory, MANIFEST_NAME)
        if not os.path.exists(path):
            return cls(path)
        try:
            entries = json.loads(to_native(read_artifact(path, 'run manifest')))['entries']
        except (ValueError, KeyError, TypeError) as e:
            raise ArtifactError('run manifest %s is unreadable: %s' % (path, to_native(e)))
        return cls(path, entries)

    def record(self, command, outputs, config=None, config_path=None, dataset_fingerprint=None, seed=None):
        """
        :outputs: list of artifact paths written by ``command``; the first one
                  identifies the entry
        """
        entry = {
            'command': command,
            'config_path': config_path,
            'config': config,
            'dataset_fingerprint': dataset_fingerprint,
            'seed': seed,
            'artifacts': dict((path, file_sha256(path)) for path in outputs),
            'primary': outputs[0],
            'version': COLLECTION_VERSION,
        }
        self.entries = [e for e in self.entries
                        if not (e.get('command') == command and e.get('primary') == entry['primary'])]
        self.entries.append(entry)
        self.entries.sort(key=lambda e: (e['command'], e['primary']))
        return entry

    def render(self):
        return dumps({'entries': self.entries}, indent=2) + '\n'

    def save(self, module):
        return write_artifact(module, self.path, self.render())


class JsonlLog(object):
    """
    Event sink writing one JSON object per line, tagged with ``_event`` and
    ``_timestamp``. Usable directly as the ``on_event`` hook of pretraining.
    """

    def __init__(self, path=None):
        self.path = path
        self.lines = []

    def __call__(self, event_name, output):
        self._write_event(event_name, dict(output))

    def _write_event(self, event_name, output):
        output['_event'] = event_name
        output['_timestamp'] = current_time()
        self.lines.append(dumps(output))

    def events(self, name=None):
        parsed = [json.loads(line) for line in self.lines]
        return [e for e in parsed if name is None or e['_event'] == name]

    def flush(self, module):
        """Write the log; a training log always counts as a fresh record of the run."""
        if self.path is None or module.check_mode:
            return
        write_artifact(module, self.path, ''.join(line + '\n' for line in self.lines))


def load_json(path, what='artifact'):
    try:
        return json.loads(to_native(read_artifact(path, what)))
    except ValueError as e:
        raise ArtifactError('%s %s is not valid JSON: %s' % (what, path, to_native(e)))


def run_key(**inputs):
    """Digest of everything a long run depends on; stored in its outputs."""
    return sha256(dumps(inputs))


def is_current(path, key):
    """True when the JSON artifact at ``path`` was produced by a run with ``key``."""
    if not os.path.exists(path):
        return False
    try:
        return load_json(path).get('run_key') == key
    except (ArtifactError, AttributeError):
        return False


def read_dataset(path):
    dataset = data.load_dataset(read_artifact(path, 'dataset'))
    return dataset, data.dataset_fingerprint(dataset)


def read_fold_plan(path, fingerprint):
    """Load a fold plan written for the dataset with ``fingerprint``."""
    values = load_json(path, 'fold plan')
    check_fingerprint(values.get('dataset_fingerprint'), fingerprint, 'fold plan %s' % path)
    return data.FoldPlan.from_dict(values)


def read_ordering(path, fingerprint, feature_names):
    """
    Load the feature ordering and split written by locl_order for the dataset
    with ``fingerprint``. Returns ``(FeatureOrdering, SplitPlan, fold)``.
    """
    values = load_json(path, 'ordering')
    check_fingerprint(values.get('dataset_fingerprint'), fingerprint, 'ordering %s' % path)
    if list(values.get('feature_names', ())) != list(feature_names):
        raise ArtifactError('ordering %s lists other features than the dataset; rebuild it' % path)
    try:
        feature_order = ordering.FeatureOrdering.from_dict(values['ordering'])
        split = ordering.SplitPlan.from_dict(values['split'])
    except (KeyError, TypeError) as e:
        raise ArtifactError('ordering %s is malformed: missing %s' % (path, to_native(e)))
    return feature_order, split, values.get('fold')


def write_reports(module, path, title, reports, **fields):
    """Write EvalReports as a ``*.report.json`` document readable by locl_report."""
    document = dict(fields, title=title, reports=[r.to_dict() for r in reports])
    return write_artifact(module, path, dumps(document, indent=2) + '\n')
