#!/usr/bin/python
# -*- coding: utf-8 -*-

# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import absolute_import, division, print_function
__metaclass__ = type


DOCUMENTATION = r'''
---
module: locl_embed
short_description: Encode a dataset with a pretrained checkpoint
description:
    - Encodes every row of a dataset, without corruption, with both branches of a
      checkpoint and writes the concatenated embeddings.
    - Refuses to run when the checkpoint was trained on a different dataset.
version_added: "1.0.0"
author:
    - tabular.locl contributors
options:
  checkpoint:
    description:
      - Path of a checkpoint written by M(tabular.locl.locl_pretrain).
    type: path
    required: true
  dataset:
    description:
      - Path of the dataset artifact the checkpoint was trained on.
    type: path
    required: true
  dest:
    description:
      - Path of the embedding file to write.
    type: path
    required: true
'''

EXAMPLES = r'''
- name: Embed the diabetes rows
  tabular.locl.locl_embed:
    checkpoint: /runs/diabetes/fold0.ckpt
    dataset: /runs/diabetes/dataset.locl
    dest: /runs/diabetes/fold0.emb
'''

RETURN = r'''
rows:
    description: Number of embedded rows.
    returned: success
    type: int
    sample: 1151
width:
    description: Embedding width, twice the latent size.
    returned: success
    type: int
    sample: 128
'''

import os
from traceback import format_exc

from ansible.module_utils.basic import AnsibleModule, missing_required_lib
from ansible.module_utils.common.text.converters import to_native

from ansible_collections.tabular.locl.plugins.module_utils import artifacts, pipeline
from ansible_collections.tabular.locl.plugins.module_utils.errors import LoclError


def main():
    module = AnsibleModule(
        argument_spec=dict(
            checkpoint=dict(type='path', required=True),
            dataset=dict(type='path', required=True),
            dest=dict(type='path', required=True),
        ),
        supports_check_mode=True,
    )

    if not pipeline.HAS_NUMPY:
        module.fail_json(msg=missing_required_lib('numpy'), exception=pipeline.NUMPY_IMPORT_ERROR)

    p = module.params
    try:
        dataset, fingerprint = artifacts.read_dataset(p['dataset'])
        model, extra = pipeline.load_checkpoint(artifacts.read_artifact(p['checkpoint'], 'checkpoint'))
        artifacts.check_fingerprint(model.dataset_fingerprint, fingerprint, 'checkpoint %s' % p['checkpoint'])

        embedding = pipeline.embed(model, dataset)
        payload = pipeline.save_embeddings(embedding, {
            'dataset_fingerprint': fingerprint,
            'checkpoint': artifacts.file_sha256(p['checkpoint']),
            'fold': extra.get('fold'),
            'config_fingerprint': model.config.fingerprint(),
        })
        changed = artifacts.write_artifact(module, p['dest'], payload)

        manifest = artifacts.RunManifest.for_directory(os.path.dirname(p['dest']))
        manifest.record('locl_embed', [p['dest']], config=model.config.to_dict(),
                        dataset_fingerprint=fingerprint, seed=model.config.seed)
        changed |= manifest.save(module)
    except LoclError as e:
        module.fail_json(msg=to_native(e), exception=format_exc())

    module.exit_json(changed=changed, rows=int(embedding.Z.shape[0]), width=int(embedding.Z.shape[1]))


if __name__ == '__main__':
    main()
