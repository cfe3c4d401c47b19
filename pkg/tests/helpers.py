import numpy as np

from optbp.network import NetworkConfig, forward, init_weights


def random_net(rng, in_dim, hidden_dim, out_dim, scale=0.8, output_activation="nonlinear", u0=1.0):
    config = NetworkConfig(in_dim, hidden_dim, out_dim, u0, output_activation)
    state = init_weights(config, int(rng.integers(2**32)), scale)
    return config, state


def random_trace(rng, in_dim=3, hidden_dim=4, out_dim=2, **kw):
    config, state = random_net(rng, in_dim, hidden_dim, out_dim, **kw)
    x = rng.normal(size=in_dim)
    return config, state, x, forward(config, state, x)


def loop_forward(W, V, x, u0=1.0, nonlinear=True):
    """Scalar-loop network evaluation, written independently of the vectorized path."""
    hn, n_in = W.shape
    on = V.shape[1]
    xa = [1.0] + list(x)
    s = [1.0]
    for i in range(hn):
        s.append(np.tanh(sum(W[i, j] * xa[j] for j in range(n_in)) / u0))
    out = []
    for k in range(on):
        z = sum(s[i] * V[i, k] for i in range(hn + 1))
        out.append(np.tanh(z / u0) if nonlinear else z)
    return xa, s, out


def loop_sample_gradient(W, V, x, y, u0=1.0, nonlinear=True):
    """Gradient of 1/2 |y - yhat|^2 by the scalar chain rule, entry by entry."""
    xa, s, out = loop_forward(W, V, x, u0, nonlinear)
    hn, n_in = W.shape
    on = V.shape[1]
    gV = np.zeros_like(V)
    gW = np.zeros_like(W)
    for k in range(on):
        e_k = y[k] - out[k]
        fp = (1 - out[k] ** 2) / u0 if nonlinear else 1.0
        for i in range(hn + 1):
            gV[i, k] = -e_k * fp * s[i]
        for i in range(hn):
            sp = (1 - s[i + 1] ** 2) / u0
            for j in range(n_in):
                gW[i, j] += -e_k * fp * V[i + 1, k] * sp * xa[j]
    return gV, gW


def half_sq_error(W, V, x, y, u0=1.0, nonlinear=True):
    _, _, out = loop_forward(W, V, x, u0, nonlinear)
    return 0.5 * sum((a - b) ** 2 for a, b in zip(y, out))


def fd_gradient(W, V, x, y, h=1e-6, u0=1.0, nonlinear=True):
    """Central finite differences of 1/2 |e|^2 with respect to every weight."""
    grads = []
    for M in (V, W):
        G = np.zeros_like(M)
        for idx in np.ndindex(M.shape):
            orig = M[idx]
            M[idx] = orig + h
            up = half_sq_error(W, V, x, y, u0, nonlinear)
            M[idx] = orig - h
            down = half_sq_error(W, V, x, y, u0, nonlinear)
            M[idx] = orig
            G[idx] = (up - down) / (2 * h)
        grads.append(G)
    return grads[0], grads[1]


def fd_output_jacobian(config, state, x, h=1e-6):
    """Jacobian of the network outputs w.r.t. [vec(V), vec(W)] by central differences."""
    W, V = state.W.copy(), state.V.copy()
    nonlinear = config.output_activation == "nonlinear"
    cols = []
    for M in (V, W):
        for idx in np.ndindex(M.shape):
            orig = M[idx]
            M[idx] = orig + h
            up = np.array(loop_forward(W, V, x, config.shape_factor, nonlinear)[2])
            M[idx] = orig - h
            down = np.array(loop_forward(W, V, x, config.shape_factor, nonlinear)[2])
            M[idx] = orig
            cols.append((up - down) / (2 * h))
    return np.array(cols).T
