#!/usr/bin/python
# -*- coding: utf-8 -*-

# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import absolute_import, division, print_function
__metaclass__ = type


DOCUMENTATION = r'''
---
module: locl_report
short_description: Render the evaluation reports of a run directory as text tables
description:
    - Collects every C(*.report.json) file of O(run_dir) and renders each as an aligned
      C(Model Variants | Accuracy | Std) table.
version_added: "1.0.0"
author:
    - tabular.locl contributors
options:
  run_dir:
    description:
      - Directory holding the reports.
    type: path
    required: true
  dest:
    description:
      - When set, also write the rendered tables to this file and record it, with the reports
        it was rendered from, in the C(manifest.json) of its directory.
    type: path
'''

EXAMPLES = r'''
- name: Render all tables of a run
  tabular.locl.locl_report:
    run_dir: /runs/diabetes
    dest: /runs/diabetes/tables.txt
  register: tables

- name: Show them
  ansible.builtin.debug:
    msg: "{{ tables.text }}"
'''

RETURN = r'''
reports:
    description: Report files found, in name order.
    returned: success
    type: list
    elements: str
text:
    description: All tables, each preceded by its title and file name.
    returned: success
    type: str
'''

import glob
import os
from traceback import format_exc

from ansible.module_utils.basic import AnsibleModule, missing_required_lib
from ansible.module_utils.common.text.converters import to_native

from ansible_collections.tabular.locl.plugins.module_utils import artifacts, evaluation
from ansible_collections.tabular.locl.plugins.module_utils.errors import ArtifactError, LoclError


def render(paths):
    sections = []
    for path in paths:
        document = artifacts.load_json(path, 'report')
        try:
            reports = [evaluation.EvalReport.from_dict(r) for r in document['reports']]
        except (KeyError, TypeError) as e:
            raise ArtifactError('report %s is malformed: %s' % (path, to_native(e)))
        title = '%s (%s)' % (document.get('title', 'Report'), os.path.basename(path))
        sections.append(evaluation.format_table(reports, title))
    return '\n'.join(sections)


def main():
    module = AnsibleModule(
        argument_spec=dict(
            run_dir=dict(type='path', required=True),
            dest=dict(type='path'),
        ),
        supports_check_mode=True,
    )

    if not evaluation.HAS_NUMPY:
        module.fail_json(msg=missing_required_lib('numpy'), exception=evaluation.NUMPY_IMPORT_ERROR)

    p = module.params
    if not os.path.isdir(p['run_dir']):
        module.fail_json(msg="run_dir %s doesn't exist" % p['run_dir'])

    paths = sorted(glob.glob(os.path.join(p['run_dir'], '*.report.json')))
    if not paths:
        module.fail_json(msg='no *.report.json files in %s' % p['run_dir'])

    changed = False
    try:
        text = render(paths)
        if p['dest']:
            changed = artifacts.write_artifact(module, p['dest'], text)
            manifest = artifacts.RunManifest.for_directory(os.path.dirname(p['dest']))
            manifest.record('locl_report', [p['dest']] + paths)
            changed |= manifest.save(module)
    except LoclError as e:
        module.fail_json(msg=to_native(e), exception=format_exc())

    module.exit_json(changed=changed, reports=paths, text=text)


if __name__ == '__main__':
    main()
