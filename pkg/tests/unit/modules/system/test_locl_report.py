from __future__ import absolute_import, division, print_function

__metaclass__ = type

import json

import pytest

from ansible_collections.tabular.locl.plugins.modules import locl_report
from ansible_collections.tabular.locl.tests.unit.modules.utils import AnsibleExitJson, exit_json, set_module_args


@pytest.mark.parametrize('patch_ansible_module', [{'run_dir': '/nonexistent/locl-run'}],
                         indirect=['patch_ansible_module'])
@pytest.mark.usefixtures('patch_ansible_module')
def test_missing_run_dir(capfd):
    with pytest.raises(SystemExit) as sys_exit:
        locl_report.main()
    out, _err = capfd.readouterr()
    results = json.loads(out)
    assert sys_exit.value.code == 1
    assert results['failed']
    assert "doesn't exist" in results['msg']


def test_renders_every_report(run_dir, mocker):
    mocker.patch.object(locl_report.AnsibleModule, 'exit_json', exit_json)
    set_module_args({'run_dir': str(run_dir), 'dest': str(run_dir / 'summary.txt')})
    with pytest.raises(AnsibleExitJson) as result:
        locl_report.main()

    values = result.value.args[0]
    assert values['changed']
    assert [r.rsplit('/', 1)[1] for r in values['reports']] == ['ablate.report.json', 'protocol.report.json']
    lines = values['text'].splitlines()
    assert lines[0] == 'Ablate (ablate.report.json)'
    assert 'Protocol (protocol.report.json)' in lines
    assert (run_dir / 'summary.txt').read_text() == values['text']


def test_second_render_is_unchanged(run_dir, mocker):
    mocker.patch.object(locl_report.AnsibleModule, 'exit_json', exit_json)
    args = {'run_dir': str(run_dir), 'dest': str(run_dir / 'summary.txt')}
    for expected in (True, False):
        set_module_args(dict(args))
        with pytest.raises(AnsibleExitJson) as result:
            locl_report.main()
        assert result.value.args[0]['changed'] is expected


def test_malformed_report(run_dir, capfd):
    (run_dir / 'broken.report.json').write_text('{"title": "Broken"}')
    set_module_args({'run_dir': str(run_dir)})
    with pytest.raises(SystemExit):
        locl_report.main()
    out, _err = capfd.readouterr()
    assert 'malformed' in json.loads(out)['msg']


def test_rendered_file_is_recorded(run_dir, mocker):
    mocker.patch.object(locl_report.AnsibleModule, 'exit_json', exit_json)
    set_module_args({'run_dir': str(run_dir), 'dest': str(run_dir / 'summary.txt')})
    with pytest.raises(AnsibleExitJson):
        locl_report.main()

    entries = json.loads((run_dir / 'manifest.json').read_text())['entries']
    assert [e['command'] for e in entries] == ['locl_report']
    assert entries[0]['primary'] == str(run_dir / 'summary.txt')
    assert sorted(p.rsplit('/', 1)[1] for p in entries[0]['artifacts']) == [
        'ablate.report.json', 'protocol.report.json', 'summary.txt']
