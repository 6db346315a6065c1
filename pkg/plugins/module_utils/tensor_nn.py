# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""
Dense arrays with explicit reverse-mode gradients for the layer set the
twin autoencoders need: conv1d, dense, maxpool1d, upsample1d, leakyrelu,
batch standardization, plus the RMSProp update.

Every layer is a pair of pure functions. ``forward`` returns the output and a
cache; ``backward`` takes the upstream gradient and that cache. Parameter
gradients are accumulated into the ``grad`` slot of the layer's tensors, so a
forward pass never mutates anything.
"""

from __future__ import absolute_import, division, print_function
__metaclass__ = type

import math
import traceback

from ansible_collections.tabular.locl.plugins.module_utils.errors import TensorError

try:
    import numpy as np
    from numpy.lib.stride_tricks import sliding_window_view
    HAS_NUMPY = True
    NUMPY_IMPORT_ERROR = None
except ImportError:
    HAS_NUMPY = False
    NUMPY_IMPORT_ERROR = traceback.format_exc()


BATCHNORM_EPSILON = 1e-5
LEAKY_SLOPE = 0.01
POOL_FACTOR = 2
CONV_DEPTH = 3


class Tensor(object):
    """Row-major float64 values with an optional gradient of the same shape."""

    def __init__(self, values, grad=None):
        self.values = np.array(values, dtype=np.float64)
        self.grad = None if grad is None else np.array(grad, dtype=np.float64)

    @property
    def shape(self):
        return self.values.shape

    def zero_grad(self):
        self.grad = np.zeros_like(self.values)

    def accumulate(self, grad):
        if self.grad is None:
            self.grad = np.zeros_like(self.values)
        self.grad += grad

    def copy(self):
        return Tensor(self.values.copy())


def glorot_uniform(shape, fan_in, fan_out, rng):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


# ==============================================================
#   FUNCTIONAL OPERATIONS
# ==============================================================

def _windows(x, kernel):
    pad = (kernel - 1) // 2
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
    return sliding_window_view(padded, kernel, axis=2)


def conv1d_forward(x, weight, bias):
    """Same-padded stride-1 cross-correlation: (n, C_in, L) -> (n, C_out, L)."""
    out_channels, in_channels, kernel = weight.shape
    if kernel % 2 != 1:
        raise TensorError('conv1d kernel must be odd, got %d' % kernel)
    if x.ndim != 3 or x.shape[1] != in_channels:
        raise TensorError('conv1d expects %d input channels, got input of shape %s' % (in_channels, x.shape))
    return np.einsum('nclk,ock->nol', _windows(x, kernel), weight) + bias[None, :, None]


def conv1d_backward(grad_out, x, weight):
    """Return ``(grad_x, grad_w, grad_b)`` for :func:`conv1d_forward`."""
    out_channels, in_channels, kernel = weight.shape
    n, _c, length = x.shape
    if grad_out.shape != (n, out_channels, length):
        raise TensorError('conv1d upstream gradient has shape %s, expected %s'
                          % (grad_out.shape, (n, out_channels, length)))

    pad = (kernel - 1) // 2
    grad_w = np.einsum('nol,nclk->ock', grad_out, _windows(x, kernel))
    grad_b = grad_out.sum(axis=(0, 2))
    grad_padded = np.zeros((n, in_channels, length + 2 * pad))
    for t in range(kernel):
        grad_padded[:, :, t:t + length] += np.einsum('nol,oc->ncl', grad_out, weight[:, :, t])
    return grad_padded[:, :, pad:pad + length], grad_w, grad_b


def dense_forward(x, weight, bias):
    if x.ndim != 2 or x.shape[1] != weight.shape[1]:
        raise TensorError('dense layer expects %d inputs, got input of shape %s' % (weight.shape[1], x.shape))
    return x @ weight.T + bias


def dense_backward(grad_out, x, weight):
    return grad_out @ weight, grad_out.T @ x, grad_out.sum(axis=0)


def maxpool1d_forward(x, factor):
    """Non-overlapping max pool; ties go to the lowest position."""
    n, channels, length = x.shape
    if length % factor:
        raise TensorError('maxpool length %d is not divisible by %d' % (length, factor))
    blocks = x.reshape(n, channels, length // factor, factor)
    arg = blocks.argmax(axis=3)
    pooled = np.take_along_axis(blocks, arg[..., None], axis=3)[..., 0]
    indices = arg + np.arange(length // factor) * factor
    return pooled, indices


def maxpool1d_backward(grad_out, indices, factor):
    n, channels, pooled = grad_out.shape
    grad = np.zeros((n, channels, pooled, factor))
    arg = indices - np.arange(pooled) * factor
    np.put_along_axis(grad, arg[..., None], grad_out[..., None], axis=3)
    return grad.reshape(n, channels, pooled * factor)


def upsample1d_forward(x, factor):
    return np.repeat(x, factor, axis=2)


def upsample1d_backward(grad_out, factor):
    n, channels, length = grad_out.shape
    return grad_out.reshape(n, channels, length // factor, factor).sum(axis=3)


def leakyrelu_forward(x, slope=LEAKY_SLOPE):
    return np.where(x > 0, x, slope * x)


def leakyrelu_backward(grad_out, x, slope=LEAKY_SLOPE):
    return grad_out * np.where(x > 0, 1.0, slope)


def batchnorm_forward(z, epsilon=BATCHNORM_EPSILON):
    """Standardize every column across the batch (population variance)."""
    if z.ndim != 2 or z.shape[0] < 2:
        raise TensorError('batch standardization needs a batch of at least 2, got shape %s' % (z.shape,))
    mean = z.mean(axis=0)
    inv_std = 1.0 / np.sqrt(z.var(axis=0) + epsilon)
    z_hat = (z - mean) * inv_std
    return z_hat, (z_hat, inv_std)


def batchnorm_backward(grad_out, cache):
    z_hat, inv_std = cache
    n = z_hat.shape[0]
    return inv_std / n * (n * grad_out - grad_out.sum(axis=0) - z_hat * (grad_out * z_hat).sum(axis=0))


def batchnorm_batch(z, epsilon=BATCHNORM_EPSILON):
    return batchnorm_forward(np.asarray(z, dtype=np.float64), epsilon)[0]


# ==============================================================
#   LAYERS
# ==============================================================

class Layer(object):
    """LayerParams: a kind, its weight tensors (possibly none) and its config."""

    kind = None

    def __init__(self, **config):
        self.config = config
        self.params = []

    def forward(self, x):
        raise NotImplementedError

    def backward(self, grad_out, cache):
        raise NotImplementedError

    def manifest(self):
        return {
            'kind': self.kind,
            'config': self.config,
            'params': [list(p.shape) for p in self.params],
        }


class Conv1d(Layer):
    kind = 'conv1d'

    def __init__(self, in_channels, out_channels, kernel, rng=None):
        super(Conv1d, self).__init__(in_channels=in_channels, out_channels=out_channels, kernel=kernel)
        if kernel % 2 != 1:
            raise TensorError('conv1d kernel must be odd, got %d' % kernel)
        shape = (out_channels, in_channels, kernel)
        if rng is None:
            weight = np.zeros(shape)
        else:
            weight = glorot_uniform(shape, in_channels * kernel, out_channels * kernel, rng)
        self.weight = Tensor(weight)
        self.bias = Tensor(np.zeros(out_channels))
        self.params = [self.weight, self.bias]

    def forward(self, x):
        return conv1d_forward(x, self.weight.values, self.bias.values), x

    def backward(self, grad_out, cache):
        grad_x, grad_w, grad_b = conv1d_backward(grad_out, cache, self.weight.values)
        self.weight.accumulate(grad_w)
        self.bias.accumulate(grad_b)
        return grad_x


class Dense(Layer):
    kind = 'dense'

    def __init__(self, in_features, out_features, rng=None):
        super(Dense, self).__init__(in_features=in_features, out_features=out_features)
        shape = (out_features, in_features)
        if rng is None:
            weight = np.zeros(shape)
        else:
            weight = glorot_uniform(shape, in_features, out_features, rng)
        self.weight = Tensor(weight)
        self.bias = Tensor(np.zeros(out_features))
        self.params = [self.weight, self.bias]

    def forward(self, x):
        return dense_forward(x, self.weight.values, self.bias.values), x

    def backward(self, grad_out, cache):
        grad_x, grad_w, grad_b = dense_backward(grad_out, cache, self.weight.values)
        self.weight.accumulate(grad_w)
        self.bias.accumulate(grad_b)
        return grad_x


class MaxPool1d(Layer):
    kind = 'maxpool1d'

    def __init__(self, factor=POOL_FACTOR):
        super(MaxPool1d, self).__init__(factor=factor)

    def forward(self, x):
        return maxpool1d_forward(x, self.config['factor'])

    def backward(self, grad_out, cache):
        return maxpool1d_backward(grad_out, cache, self.config['factor'])


class Upsample1d(Layer):
    kind = 'upsample1d'

    def __init__(self, factor=POOL_FACTOR):
        super(Upsample1d, self).__init__(factor=factor)

    def forward(self, x):
        return upsample1d_forward(x, self.config['factor']), None

    def backward(self, grad_out, cache):
        return upsample1d_backward(grad_out, self.config['factor'])


class LeakyReLU(Layer):
    kind = 'leakyrelu'

    def __init__(self, slope=LEAKY_SLOPE):
        super(LeakyReLU, self).__init__(slope=slope)

    def forward(self, x):
        return leakyrelu_forward(x, self.config['slope']), x

    def backward(self, grad_out, cache):
        return leakyrelu_backward(grad_out, cache, self.config['slope'])


class Reshape(Layer):
    """Reshape every sample to ``shape`` (the batch axis is kept)."""
    kind = 'reshape'

    def __init__(self, shape):
        super(Reshape, self).__init__(shape=list(shape))

    def forward(self, x):
        return x.reshape((x.shape[0],) + tuple(self.config['shape'])), x.shape

    def backward(self, grad_out, cache):
        return grad_out.reshape(cache)


class BatchNorm(Layer):
    kind = 'batchnorm'

    def __init__(self, epsilon=BATCHNORM_EPSILON):
        super(BatchNorm, self).__init__(epsilon=epsilon)

    def forward(self, x):
        return batchnorm_forward(x, self.config['epsilon'])

    def backward(self, grad_out, cache):
        return batchnorm_backward(grad_out, cache)


LAYER_KINDS = dict((cls.kind, cls) for cls in (Conv1d, Dense, MaxPool1d, Upsample1d, LeakyReLU, Reshape, BatchNorm))


class Sequential(object):

    def __init__(self, layers):
        self.layers = list(layers)

    def forward(self, x):
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x)
            caches.append(cache)
        return x, caches

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, grad_out, caches):
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            grad_out = layer.backward(grad_out, cache)
        return grad_out

    def parameters(self):
        return [p for layer in self.layers for p in layer.params]

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def manifest(self):
        return [layer.manifest() for layer in self.layers]

    @classmethod
    def from_manifest(cls, manifest):
        layers = []
        for entry in manifest:
            try:
                layer_cls = LAYER_KINDS[entry['kind']]
            except KeyError:
                raise TensorError('unknown layer kind %r in manifest' % entry.get('kind'))
            layer = layer_cls(**entry['config'])
            expected = [list(p.shape) for p in layer.params]
            if expected != [list(s) for s in entry['params']]:
                raise TensorError('%s layer manifest declares shapes %s, config implies %s'
                                  % (entry['kind'], entry['params'], expected))
            layers.append(layer)
        return cls(layers)


# ==============================================================
#   ARCHITECTURES
# ==============================================================

def padded_width(width, encoder_kind='conv'):
    """Conv inputs are right-padded with zeros to a multiple of 2**3."""
    if encoder_kind != 'conv':
        return width
    block = POOL_FACTOR ** CONV_DEPTH
    return int(math.ceil(width / float(block))) * block


def conv_autoencoder(width, latent_dim, kernel, channel_plan, rng):
    """
    Encoder: 3 x [conv1d -> LeakyReLU -> maxpool(2)], flatten, dense to ``latent_dim``.
    Decoder: dense, reshape, 3 x [upsample(2) -> conv1d -> LeakyReLU], final
    linear conv to one channel. Both work on (n, padded width) matrices.
    """
    if len(channel_plan) != CONV_DEPTH:
        raise TensorError('channel plan needs %d entries, got %s' % (CONV_DEPTH, list(channel_plan)))
    length = padded_width(width)
    bottom = length // POOL_FACTOR ** CONV_DEPTH

    encoder = [Reshape((1, length))]
    in_channels = 1
    for channels in channel_plan:
        encoder += [Conv1d(in_channels, channels, kernel, rng), LeakyReLU(), MaxPool1d()]
        in_channels = channels
    encoder += [Reshape((in_channels * bottom,)), Dense(in_channels * bottom, latent_dim, rng)]

    decoder = [Dense(latent_dim, in_channels * bottom, rng), Reshape((in_channels, bottom))]
    for channels in list(reversed(channel_plan))[1:] + [channel_plan[0]]:
        decoder += [Upsample1d(), Conv1d(in_channels, channels, kernel, rng), LeakyReLU()]
        in_channels = channels
    decoder += [Conv1d(in_channels, 1, kernel, rng), Reshape((length,))]

    return Sequential(encoder), Sequential(decoder)


def dense_autoencoder(width, latent_dim, channel_plan, rng):
    """Dense counterpart with hidden widths 4 x reversed channel plan."""
    hidden = [4 * c for c in reversed(channel_plan)]

    encoder = []
    in_features = width
    for features in hidden:
        encoder += [Dense(in_features, features, rng), LeakyReLU()]
        in_features = features
    encoder.append(Dense(in_features, latent_dim, rng))

    decoder = []
    in_features = latent_dim
    for features in reversed(hidden):
        decoder += [Dense(in_features, features, rng), LeakyReLU()]
        in_features = features
    decoder.append(Dense(in_features, width, rng))

    return Sequential(encoder), Sequential(decoder)


# ==============================================================
#   OPTIMIZER
# ==============================================================

class OptimizerState(object):
    """Squared-gradient accumulators keyed by parameter name."""

    def __init__(self, learning_rate=0.001, decay=0.9, epsilon=1e-8, accumulators=None):
        self.learning_rate = learning_rate
        self.decay = decay
        self.epsilon = epsilon
        self.accumulators = accumulators if accumulators is not None else {}


def rmsprop_step(params, grads, state):
    """
    One RMSProp update, in place.

    :params: list of (name, Tensor)
    :grads:  dict name -> ndarray
    """
    for name, _param in params:
        if not np.all(np.isfinite(grads[name])):
            raise TensorError('non-finite gradient for parameter %s' % name)

    for name, param in params:
        grad = grads[name]
        acc = state.accumulators.get(name)
        if acc is None:
            acc = np.zeros_like(param.values)
        acc = state.decay * acc + (1.0 - state.decay) * grad * grad
        state.accumulators[name] = acc
        param.values -= state.learning_rate * grad / (np.sqrt(acc) + state.epsilon)
    return params, state
