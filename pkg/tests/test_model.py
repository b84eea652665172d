import numpy as np
import pytest

from spdelab.errors import ConfigError, ResolutionError
from spdelab.fields import Grid2
from spdelab.kernels import Coefficient, PamProvider
from spdelab.model import (SYMBOLS, AdmissibleModel, ModelledDistribution,
                           PamStructure, build_model, gamma_matrix, md_norms,
                           model_norm, pi_x_field, q_pair_model,
                           verify_model_limit)
from spdelab.noise import Mollifier, derive_seed, mollify, sample_white_noise
from spdelab.renorm import compute_renorm

G = Grid2.square(64)
COEF = Coefficient.constant(G, 1.0, 1.0)
PROV = PamProvider(COEF)


@pytest.fixture(scope="module")
def model():
    m = Mollifier.default(3)
    cn = compute_renorm(COEF, m)
    return build_model(sample_white_noise(G, 2026), m, cn, PROV)


def test_structure_grading():
    st = PamStructure(0.05)
    assert len(SYMBOLS) == 11
    assert st.homogeneity("Xi") == pytest.approx(-1.05)
    assert st.homogeneity("IXiXi") == pytest.approx(-0.1)
    assert st.homogeneity("IX3Xi") == pytest.approx(1.95)
    assert len(st.index_set) == 8
    assert st.solver_valid()
    assert not PamStructure(0.3).solver_valid()
    with pytest.raises(ConfigError):
        PamStructure(0.6)
    with pytest.raises(ConfigError):
        st.homogeneity("nope")


def test_build_determinism_and_xi_block(model):
    m = Mollifier.default(3)
    cn = compute_renorm(COEF, m)
    again = build_model(sample_white_noise(G, 2026), m, cn, PROV)
    for name in ("XI", "KXI", "PROD"):
        assert np.array_equal(model.blocks[name], again.blocks[name])
    xi = mollify(sample_white_noise(G, 2026), m)
    assert np.array_equal(model.blocks["XI"], xi.values)


def test_build_resolution_error():
    m = Mollifier.default(8)
    with pytest.raises(ResolutionError):
        build_model(sample_white_noise(G, 1), m, np.zeros(G.shape), PROV)


def test_polynomial_evaluations(model):
    ones = pi_x_field(model, "One", (3, 4))
    assert np.array_equal(ones, np.ones(G.shape))
    x2 = pi_x_field(model, "X2", (0, 0))
    assert x2[1, 0] == pytest.approx(1.0 / 64)
    assert x2[0, 5] == 0.0


def test_q_pair_two_path_coordinate_free(model):
    t = 2.0 ** -18
    for tau in ("Xi", "IXi", "IXiXi"):
        pair = q_pair_model(model, tau, t)
        scale = np.abs(pair).max()
        for ix in ((5, 9), (33, 50), (17, 2)):
            direct = PROV.q2(pi_x_field(model, tau, ix), t)[ix]
            assert abs(direct - pair[ix]) < 1e-9 * max(scale, 1.0)


def test_q_pair_two_path_coordinate_symbols(model):
    # branch-cut contamination is envelope-suppressed at small t
    t = 2.0 ** -26
    pair = q_pair_model(model, "X2Xi", t)
    x2 = np.arange(G.n2)[:, None] / G.n2
    for ix in ((5, 9), (33, 50), (48, 20)):
        d2 = ((x2 - ix[0] / G.n2) + 0.5) % 1.0 - 0.5
        f = np.broadcast_to(d2, G.shape) * model.blocks["XI"]
        direct = PROV.q2(f, t)[ix]
        assert abs(direct - pair[ix]) < 1e-5 * np.abs(pair).max()
    pair2 = q_pair_model(model, "IIXiXi", t)
    for ix in ((5, 9), (33, 50)):
        direct = PROV.q2(pi_x_field(model, "IIXiXi", ix), t)[ix]
        # the pairing itself is tiny at this t (homogeneity ~ 1.9); compare
        # at absolute float-noise level relative to the O(1) blocks
        assert abs(direct - pair2[ix]) < 1e-9


def test_q_pair_one_symbol(model):
    pair = q_pair_model(model, "One", 0.25)
    assert np.abs(pair - np.exp(-0.25)).max() < 1e-14
    with pytest.raises(ConfigError):
        q_pair_model(model, "Zeta", 0.25)


def test_gamma_algebra(model):
    rng = np.random.default_rng(3)
    for _ in range(6):
        ix, iy, iz = [tuple(rng.integers(0, 64, 2)) for _ in range(3)]
        Gxy = gamma_matrix(model, ix, iy)
        Gyz = gamma_matrix(model, iy, iz)
        Gxz = gamma_matrix(model, ix, iz)
        assert np.abs(Gxy @ Gyz - Gxz).max() < 1e-10
        assert np.abs(gamma_matrix(model, ix, ix) - np.eye(11)).max() == 0.0


def test_pi_gamma_compatibility(model):
    rng = np.random.default_rng(4)
    for _ in range(4):
        ix, iy = [tuple(rng.integers(0, 64, 2)) for _ in range(2)]
        Gxy = gamma_matrix(model, ix, iy)
        for tau in ("IXi", "IXiXi", "X2", "IIXiXi"):
            j = SYMBOLS.index(tau)
            lhs = np.zeros(G.shape)
            for i2, sym2 in enumerate(SYMBOLS):
                if Gxy[i2, j] != 0.0:
                    lhs = lhs + Gxy[i2, j] * pi_x_field(model, sym2, ix, chart="b")
            rhs = pi_x_field(model, tau, iy, chart="b")
            assert np.abs(lhs - rhs).max() < 1e-10


def test_renormalization_shift(model):
    # shifting Cn by a constant moves the second-order block by exactly that
    m = Mollifier.default(3)
    shifted = build_model(sample_white_noise(G, 2026), m, model.cn + 0.37, PROV)
    diff = model.blocks["PROD"] - shifted.blocks["PROD"]
    assert np.abs(diff - 0.37).max() < 1e-12 * max(1.0, np.abs(model.blocks["PROD"]).max())


def test_model_norm_table(model):
    rep = model_norm(model, 1.1, t_levels=[2.0 ** -j for j in range(18, 27, 2)])
    assert set(rep["pi_norms"]) == {"Xi", "IXiXi", "X2Xi", "X3Xi", "One", "IXi", "X2", "X3"}
    assert all(np.isfinite(v) and v > 0 for v in rep["pi_norms"].values())
    assert rep["gamma_norms"]
    with pytest.raises(ConfigError):
        model_norm(model, 2.5)


def test_model_norm_stabilization_in_n():
    # the noise-level entry saturates in n once the grid resolves it
    t_levels = [2.0 ** -j for j in range(20, 29, 2)]
    norms = {}
    for n in (3, 4, 5):
        m = Mollifier.default(n)
        cn = compute_renorm(COEF, m)
        mod = build_model(sample_white_noise(G, 7), m, cn, PROV)
        rep = model_norm(mod, 1.1, t_levels=t_levels)
        norms[n] = rep["pi_norms"]
    a_xi = [norms[n]["Xi"] for n in (3, 4, 5)]
    assert abs(a_xi[2] / a_xi[1] - 1.0) < 0.35
    # renormalized second-order entry stays bounded while the un-renormalized
    # one keeps growing with the level
    plain = []
    for n in (3, 4, 5):
        m = Mollifier.default(n)
        mod0 = build_model(sample_white_noise(G, 7), m, np.zeros(G.shape), PROV)
        rep0 = model_norm(mod0, 0.0, t_levels=t_levels)
        plain.append(rep0["pi_norms"]["IXiXi"])
    renorm = [norms[n]["IXiXi"] for n in (3, 4, 5)]
    assert plain[2] > plain[0]
    assert max(renorm) / min(renorm) < plain[2] / plain[0] + 1.0


def test_second_order_diagonal_regularity():
    # the renormalized second-order pairing sits near regularity 0- (its
    # divergence is logarithmic), well inside the [-0.45, 0] band
    from spdelab.fitting import fit_loglog
    for n in (5, 6):
        m = Mollifier.default(n)
        cn = compute_renorm(COEF, m)
        mod = build_model(sample_white_noise(G, 2026), m, cn, PROV)
        ts = [2.0 ** (-j) for j in range(16, 31, 2)]
        norms = [float(np.abs(q_pair_model(mod, "IXiXi", t)).max()) for t in ts]
        slope, _, _ = fit_loglog(ts, norms, 1, 1)
        assert -0.45 <= 4.0 * slope <= 0.0


def test_md_norms_zero_and_sharp(model):
    st = PamStructure(0.05)
    times = np.array([0.05, 0.1, 0.15, 0.2])
    zero = ModelledDistribution(times, {"One": np.zeros((4,) + G.shape)}, 1.1, 0.5, st)
    rep = md_norms(zero, model)
    assert rep["triple_norm"] == 0.0
    rng = np.random.default_rng(5)
    f = ModelledDistribution(times, {"One": rng.standard_normal((4,) + G.shape)},
                             1.1, 0.5, st)
    rep = md_norms(f, model)
    assert rep["pair_norm"] <= rep["sharp_norm"] + 1e-12


def test_md_norms_taylor_oracle(model):
    # lift of a smooth profile: the pair norm is controlled by its second
    # derivatives through the Taylor remainder
    st = PamStructure(0.05)
    X2, X3 = G.coords()
    g0 = np.sin(2 * np.pi * X2) * np.cos(2 * np.pi * X3)
    times = np.array([0.1, 0.2, 0.3, 0.4])
    slices = np.stack([np.exp(-tt) * g0 for tt in times])
    spec = np.fft.fft2(slices, axes=(1, 2))
    K2, K3 = G.wavenumbers()
    d2 = np.fft.ifft2(spec * 2j * np.pi * K2, axes=(1, 2)).real
    d3 = np.fft.ifft2(spec * 2j * np.pi * K3, axes=(1, 2)).real
    lift = ModelledDistribution(times, {"One": slices, "X2": d2, "X3": d3},
                                1.9, 1.9, st)
    rep = md_norms(lift, model, space_lags=(1, 2))
    # oracle: |g(y) - g(x) - dg(x).(y-x)| <= 0.5 sup|D^2 g| |y-x|^2 plus the
    # time increment, both evaluated analytically for this profile
    sup_d2g = (2 * np.pi) ** 2 * 2.0
    h = 2.0 / 64
    dtmax = float(times[1] - times[0])
    bound = 0.5 * sup_d2g * h ** 2 + dtmax * np.abs(slices).max() * 1.05
    worst_h = h ** (1.9 - 0.0)
    assert rep["pair_norm_by_symbol"]["One"] <= bound / (h ** 1.9) * 1.5


def test_md_norms_symbol_validation():
    st = PamStructure(0.05)
    with pytest.raises(ConfigError):
        ModelledDistribution(np.array([0.1]), {"X2": np.zeros((1,) + G.shape)},
                             0.5, 0.5, st)
    f = ModelledDistribution(np.array([0.1]), {"IXi": np.zeros((1,) + G.shape)},
                             1.1, 0.5, st)
    with pytest.raises(ConfigError):
        md_norms(f, None)


@pytest.mark.slow
def test_verify_model_limit_small():
    seeds = [derive_seed(12345, i) for i in range(120)]
    rep = verify_model_limit(seeds, range(3, 7),
                             [2.0 ** -4, 2.0 ** -6, 2.0 ** -8], PROV)
    assert rep["renormalized"]["flat"], rep["renormalized"]
    assert rep["unrenormalized"]["grows"], rep["unrenormalized"]
    assert rep["renormalized"]["t_exponent"] >= -0.05 / 4 * 2 - 0.1
    assert rep["passed"]


def test_verify_model_limit_needs_seeds():
    with pytest.raises(ConfigError):
        verify_model_limit([1, 2, 3], range(3, 5), [0.01], PROV)


def test_verify_model_limit_thread_determinism(monkeypatch):
    # SPDE_THREADS parallelizes the seed loop; ordered gathering keeps the
    # reduction identical to the sequential run
    g32 = Grid2.square(32)
    prov = PamProvider(Coefficient.constant(g32, 1.0, 1.0))
    seeds = [derive_seed(5, i) for i in range(100)]
    monkeypatch.setenv("SPDE_THREADS", "1")
    seq = verify_model_limit(seeds, range(2, 4), [2.0 ** -6], prov)
    monkeypatch.setenv("SPDE_THREADS", "2")
    par = verify_model_limit(seeds, range(2, 4), [2.0 ** -6], prov)
    assert seq["renormalized"]["means"] == par["renormalized"]["means"]
    assert seq["unrenormalized"]["means"] == par["unrenormalized"]["means"]
