from __future__ import absolute_import, division, print_function

__metaclass__ = type

import json
import os
import shutil
import tempfile
import unittest
from unittest.mock import patch

from ansible.module_utils import basic
from ansible.module_utils.common.text.converters import to_bytes


def set_module_args(args):
    if '_ansible_remote_tmp' not in args:
        args['_ansible_remote_tmp'] = '/tmp'
    if '_ansible_keep_remote_files' not in args:
        args['_ansible_keep_remote_files'] = False

    args = json.dumps({'ANSIBLE_MODULE_ARGS': args})
    basic._ANSIBLE_ARGS = to_bytes(args)


class AnsibleExitJson(Exception):
    pass


class AnsibleFailJson(Exception):
    pass


def exit_json(*args, **kwargs):
    if 'changed' not in kwargs:
        kwargs['changed'] = False
    raise AnsibleExitJson(kwargs)


def fail_json(*args, **kwargs):
    kwargs['failed'] = True
    raise AnsibleFailJson(kwargs)


def write_csv(path, n=60, seed=0):
    """Two-class table with correlated numeric columns, a categorical one and a constant one."""
    import numpy as np

    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 2
    base = rng.normal(size=(n, 2)) + 1.5 * labels[:, None]
    lines = ['a,b,c,d,e,colour,flat,label']
    for i in range(n):
        values = [base[i, j % 2] + 0.3 * rng.normal() for j in range(5)]
        lines.append('%s,%s,1,%s' % (','.join('%.6f' % v for v in values), ('red', 'blue')[i % 3 == 0],
                                     ('yes', 'no')[labels[i]]))
    with open(path, 'w') as f:
        f.write('\n'.join(lines) + '\n')
    return path


class ModuleTestCase(unittest.TestCase):

    def setUp(self):
        self.mock_module = patch.multiple(basic.AnsibleModule, exit_json=exit_json, fail_json=fail_json)
        self.mock_module.start()
        set_module_args({})
        self.addCleanup(self.mock_module.stop)

        self.tmpdir = tempfile.mkdtemp(prefix='ansible-test-locl-')
        self.addCleanup(shutil.rmtree, self.tmpdir)

    def path(self, *names):
        return os.path.join(self.tmpdir, *names)

    def run_module(self, module, args):
        """Run ``module.main()`` with ``args``; return its result dict."""
        set_module_args(args)
        with self.assertRaises(AnsibleExitJson) as result:
            module.main()
        return result.exception.args[0]

    def fail_module(self, module, args):
        set_module_args(args)
        with self.assertRaises(AnsibleFailJson) as result:
            module.main()
        return result.exception.args[0]
