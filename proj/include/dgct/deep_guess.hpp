#pragma once

#include <cstdio>
#include <memory>
#include <string>

#include "analytic.hpp"
#include "network.hpp"
#include "solvers/irl1.hpp"
#include "solvers/sgp.hpp"

namespace dgct {

enum class MbirModel { tv, tpv };

/// How the initial guess is produced: zeros, FBP, K iterations of an MBIR
/// solver from zero, or a network applied to FBP / MBIR-K.
struct DeepGuessStrategy {
    enum class Kind { zeros, fbp, mbir_k, fbp_net, mbir_k_net };

    Kind kind = Kind::zeros;
    MbirModel model = MbirModel::tv;
    int K = 10;
    std::shared_ptr<const Network> net;
    std::string weights_fingerprint;

    static DeepGuessStrategy zeros() { return {}; }
    static DeepGuessStrategy fbp() { return {Kind::fbp, MbirModel::tv, 10, nullptr, {}}; }
    static DeepGuessStrategy mbir_k(MbirModel m, int K) { return {Kind::mbir_k, m, K, nullptr, {}}; }
    static DeepGuessStrategy fbp_net(std::shared_ptr<const Network> n, std::string fp)
    {
        return {Kind::fbp_net, MbirModel::tv, 0, std::move(n), std::move(fp)};
    }
    static DeepGuessStrategy mbir_k_net(MbirModel m, int K, std::shared_ptr<const Network> n, std::string fp)
    {
        return {Kind::mbir_k_net, m, K, std::move(n), std::move(fp)};
    }
};

inline const char* to_string(DeepGuessStrategy::Kind k)
{
    switch (k) {
    case DeepGuessStrategy::Kind::zeros: return "zeros";
    case DeepGuessStrategy::Kind::fbp: return "fbp";
    case DeepGuessStrategy::Kind::mbir_k: return "mbir-k";
    case DeepGuessStrategy::Kind::fbp_net: return "fbp-net";
    case DeepGuessStrategy::Kind::mbir_k_net: return "mbir-k-net";
    }
    return "?";
}

inline const char* to_string(MbirModel m) { return m == MbirModel::tv ? "tv" : "tpv"; }

struct DeepGuess {
    Image x;
    json provenance;
};

/// FBP needs at least a half scan; shorter ranges have no redundancy weighting.
inline void require_fbp_range(const FanBeamGeometry& g)
{
    detail::require_domain(g.angular_range >= 180.0,
                           "fbp: angular range below 180 degrees is not supported (no short-scan weighting)");
}

/// `cfg` configures the MBIR-K solver (lambda, beta, p, tol, ...); its
/// iteration budget is replaced by K.
inline DeepGuess compute_deep_guess(const DeepGuessStrategy& s, const FanBeamGeometry& g, const Sinogram& y,
                                    const SolverConfig& cfg)
{
    using Kind = DeepGuessStrategy::Kind;
    detail::require_dims(y.n_angles == g.n_angles && y.n_det == g.n_det, "deep guess: sinogram/geometry mismatch");
    json prov{{"strategy", to_string(s.kind)}};

    auto mbir = [&] {
        detail::require_domain(s.K >= 1, "deep guess: K must be >= 1");
        SolverConfig c = cfg;
        c.max_total_iters = s.K;
        prov["model"] = to_string(s.model);
        prov["K"] = s.K;
        const Image zero(g.image_side);
        return s.model == MbirModel::tv ? sgp_tv_solve(g, y, zero, c).x : irl1_tpv_solve(g, y, zero, c).x;
    };
    auto fbp = [&] {
        require_fbp_range(g);
        return fbp_reconstruct(g, y);
    };

    Image coarse;
    switch (s.kind) {
    case Kind::zeros:
        return {Image(g.image_side), prov};
    case Kind::fbp:
        return {fbp(), prov};
    case Kind::mbir_k:
        return {mbir(), prov};
    case Kind::fbp_net:
        coarse = fbp();
        break;
    case Kind::mbir_k_net:
        coarse = mbir();
        break;
    }

    if (!s.net)
        throw Error("deep guess: strategy needs network weights");
    prov["weights_fingerprint"] = s.weights_fingerprint;
    prov["weights_metadata"] = s.net->metadata().to_json();
    const std::string& trained = s.net->metadata().geometry_fingerprint;
    if (!trained.empty() && trained != g.fingerprint()) {
        const std::string msg = "weights trained on geometry " + trained + ", data geometry is " + g.fingerprint();
        std::fprintf(stderr, "warning: %s\n", msg.c_str());
        prov["warning"] = msg;
    }
    return {s.net->apply(coarse), prov};
}

} // namespace dgct
