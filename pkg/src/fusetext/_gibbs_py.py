"""Pure-Python Gibbs sweep kernels, the fallback for the compiled extension.

Both kernels consume one pre-drawn uniform per token and sample by inverse
CDF over the unnormalized topic weights. The arithmetic (expression order,
operand types) mirrors ``_gibbs.pyx`` exactly, so the two implementations
produce bitwise-identical assignments for the same inputs.
"""


def fit_sweep(word_ids, doc_of, z, n_dk, n_kw, n_k, alpha, beta, uniforms):
    """One collapsed-Gibbs pass over all tokens; counts updated in place."""
    n_tokens = len(word_ids)
    topics = n_kw.shape[0]
    vbeta = n_kw.shape[1] * beta

    wi = word_ids.tolist()
    di = doc_of.tolist()
    zz = z.tolist()
    uu = uniforms.tolist()
    ndk = n_dk.tolist()
    nkw = n_kw.tolist()
    nk = n_k.tolist()

    weights = [0.0] * topics
    for t in range(n_tokens):
        w = wi[t]
        row_d = ndk[di[t]]
        k_old = zz[t]
        row_d[k_old] -= 1
        nkw[k_old][w] -= 1
        nk[k_old] -= 1

        total = 0.0
        for k in range(topics):
            wt = (row_d[k] + alpha) * (nkw[k][w] + beta) / (nk[k] + vbeta)
            weights[k] = wt
            total += wt
        threshold = uu[t] * total
        acc = 0.0
        k_new = topics - 1
        for k in range(topics):
            acc += weights[k]
            if acc > threshold:
                k_new = k
                break

        row_d[k_new] += 1
        nkw[k_new][w] += 1
        nk[k_new] += 1
        zz[t] = k_new

    z[:] = zz
    n_dk[:] = ndk
    n_kw[:] = nkw
    n_k[:] = nk


def infer_sweep(word_ids, z, c_k, phi, alpha, uniforms):
    """One Gibbs pass for a single document with topic-word rows held fixed."""
    n_tokens = len(word_ids)
    topics = phi.shape[0]

    wi = word_ids.tolist()
    zz = z.tolist()
    uu = uniforms.tolist()
    ck = c_k.tolist()
    ph = phi.tolist()

    weights = [0.0] * topics
    for t in range(n_tokens):
        w = wi[t]
        k_old = zz[t]
        ck[k_old] -= 1

        total = 0.0
        for k in range(topics):
            wt = (ck[k] + alpha) * ph[k][w]
            weights[k] = wt
            total += wt
        threshold = uu[t] * total
        acc = 0.0
        k_new = topics - 1
        for k in range(topics):
            acc += weights[k]
            if acc > threshold:
                k_new = k
                break

        ck[k_new] += 1
        zz[t] = k_new

    z[:] = zz
    c_k[:] = ck
