# -*- coding: utf-8 -*-

# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import absolute_import, division, print_function
__metaclass__ = type


class ModuleDocFragment(object):

    # Training options shared by every module that pretrains
    DOCUMENTATION = r'''
options:
  config_file:
    description:
      - Path of a C(key = value) training config file, for example the C(.cfg) file written next to a checkpoint.
      - Lines starting with C(#) or C(;) are comments. Keys are the option names below.
      - Options given to the task override the file; the file overrides the defaults.
    type: path
  batch_size:
    description:
      - Rows per training batch. The last partial batch of an epoch is dropped.
      - Defaults to C(128).
    type: int
  latent_dim:
    description:
      - Embedding width of each branch; embeddings have twice this width.
      - Defaults to C(64).
    type: int
  alpha:
    description:
      - Weight of the reconstruction loss against the contrastive loss.
      - Defaults to C(1.0).
    type: float
  lambda:
    description:
      - Weight of the off-diagonal cross-correlation terms.
      - Defaults to C(0.005).
    type: float
  mask_p:
    description:
      - Probability that a cell is corrupted, in [0, 1).
      - Defaults to C(0.3).
    type: float
  learning_rate:
    description:
      - RMSProp learning rate. Defaults to C(0.001).
    type: float
  max_epochs:
    description:
      - Upper bound on training epochs. Defaults to C(200).
    type: int
  patience:
    description:
      - Epochs without a validation improvement of at least O(min_delta) before stopping.
      - Defaults to C(10).
    type: int
  min_delta:
    description:
      - Smallest validation loss decrease counted as an improvement. Defaults to C(0.0001).
    type: float
  kernel_size:
    description:
      - Odd 1-D convolution kernel size. Defaults to C(3).
    type: int
  channel_plan:
    description:
      - Channels of the three convolution blocks. Defaults to C([16, 32, 64]).
      - Dense encoders use four times these counts, reversed, as hidden widths.
    type: list
    elements: int
  overlap_fraction:
    description:
      - Share of the features given to both branches, in [0, 0.5]. Defaults to C(0).
    type: float
  ordering_variant:
    description:
      - How features are ordered before the split.
      - V(mst) walks the maximum spanning tree of absolute correlations; the others are ablations.
      - Defaults to V(mst).
    type: str
    choices: [ mst, random, original, interleaved ]
  encoder_kind:
    description:
      - V(conv) for convolutional autoencoders, V(dense) for fully connected ones.
      - Defaults to V(conv).
    type: str
    choices: [ conv, dense ]
  corruption:
    description:
      - Replacement for masked cells. V(marginal) draws from the same column of the batch, V(zero) uses zero.
      - Defaults to V(marginal).
    type: str
    choices: [ marginal, zero ]
  validation_fraction:
    description:
      - Share of the pretraining rows held out for early stopping. Defaults to C(0.1).
    type: float
  rmsprop_decay:
    description:
      - Decay of the squared-gradient average. Defaults to C(0.9).
    type: float
  rmsprop_epsilon:
    description:
      - RMSProp denominator offset. Defaults to C(1e-8).
    type: float
  seed:
    description:
      - Master seed of every random draw of the run. Defaults to C(0).
    type: int
notes:
  - Requires C(numpy) on the target host. Fold planning and the probe regularization search also need C(scikit-learn).
  - The number of parallel fold workers is read from the E(LOCL_WORKERS) environment variable.
'''
