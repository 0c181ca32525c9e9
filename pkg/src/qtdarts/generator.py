"""One trainable weight generator: circuit ensemble feeding the bit/probability map.

Bundles the qubit-count arithmetic, the trainable triple (angles,
structural weights, mapping coefficients) as an optimizer-ready dict, and
the forward/backward chain from the triple to the target network's flat
parameter vector.
"""

import numpy as np

from . import mapping as mp
from .ensemble import EnsembleState, ensemble_backward, ensemble_forward, uniform_weights
from .nets import param_count


class QTGenerator:
    def __init__(self, net_spec, depth, prob_scale=None, softmax=False, mapping_hidden=0):
        self.net_spec = net_spec
        self.spec = mp.GeneratorSpec(
            param_count=param_count(net_spec),
            depth=depth,
            prob_scale=prob_scale,
            mapping_hidden=mapping_hidden,
        )
        self.softmax = softmax

    @property
    def n_qt(self):
        return self.spec.n_qt

    def total_trainable(self):
        return mp.total_trainable(self.spec)

    def init_params(self, rng, theta_scale=np.pi, beta_scale=0.2):
        """Fresh trainable triple: angles uniform in +-theta_scale, equal
        structural weights, small uniform mapping coefficients."""
        return {
            "theta": rng.uniform(-theta_scale, theta_scale, (self.spec.depth, self.n_qt)),
            "w": uniform_weights(),
            "beta": mp.init_mapping(self.spec, rng, scale=beta_scale).to_vector(),
        }

    def _beta(self, vec):
        if self.spec.mapping_hidden == 0:
            return mp.MappingParams.from_vector(vec)
        return mp.MlpMappingParams.from_vector(vec, self.n_qt, self.spec.mapping_hidden)

    def generate(self, params):
        """params triple -> (kappa, cache)."""
        state = EnsembleState(
            theta=params["theta"], weights=params["w"], n_qubits=self.n_qt, softmax=self.softmax
        )
        p_ens, ens_cache = ensemble_forward(state)
        kappa, map_cache = mp.generate_params(p_ens, self.spec, self._beta(params["beta"]))
        return kappa, (ens_cache, map_cache)

    def backward(self, cache, d_kappa):
        """d kappa -> gradients for the trainable triple."""
        ens_cache, map_cache = cache
        d_beta, dp_ens = mp.mapping_backward(d_kappa, map_cache)
        d_theta, d_w = ensemble_backward(ens_cache, dp_ens)
        return {"theta": d_theta, "w": d_w, "beta": d_beta}
