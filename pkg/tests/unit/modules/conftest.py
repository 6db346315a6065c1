# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import absolute_import, division, print_function

__metaclass__ = type

import json

import pytest

from ansible.module_utils.common.text.converters import to_bytes


@pytest.fixture
def patch_ansible_module(request, mocker):
    if isinstance(request.param, str):
        args = request.param
    elif isinstance(request.param, dict):
        if 'ANSIBLE_MODULE_ARGS' not in request.param:
            request.param = {'ANSIBLE_MODULE_ARGS': request.param}
        request.param['ANSIBLE_MODULE_ARGS'].setdefault('_ansible_remote_tmp', '/tmp')
        request.param['ANSIBLE_MODULE_ARGS'].setdefault('_ansible_keep_remote_files', False)
        args = json.dumps(request.param)
    else:
        raise Exception('Malformed data to the patch_ansible_module pytest fixture')

    mocker.patch('ansible.module_utils.basic._ANSIBLE_ARGS', to_bytes(args))


@pytest.fixture
def run_dir(tmp_path):
    """A run directory holding two finished reports."""
    from ansible_collections.tabular.locl.plugins.module_utils import artifacts, evaluation

    for name, accuracies in (('ablate', [0.8, 0.9]), ('protocol', [0.75, 0.85])):
        document = {
            'title': name.capitalize(),
            'reports': [evaluation.EvalReport(accuracies, 'abc', 'LoCL').to_dict()],
        }
        (tmp_path / ('%s.report.json' % name)).write_text(artifacts.dumps(document))
    return tmp_path
