#pragma once

// Reconstruction runs and benchmark tables shared by the CLI and the
// acceptance suite.

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "dataset.hpp"
#include "deep_guess.hpp"
#include "metrics.hpp"
#include "solvers/chambolle_pock.hpp"
#include "solvers/fista.hpp"
#include "solvers/irl1.hpp"
#include "solvers/sgp.hpp"

namespace dgct {

inline const std::vector<std::string>& known_methods()
{
    static const std::vector<std::string> m{"fbp", "tv-sgp", "wavelet-fista", "tpv-cp"};
    return m;
}

struct MethodOptions {
    std::string method = "tpv-cp";
    SolverConfig cfg;
    RampWindow window = RampWindow::ramlak;
    bool clip_fbp = false;
};

/// One reconstruction. FBP reports zero iterations.
inline SolveResult run_method(const MethodOptions& m, const FanBeamGeometry& g, const Sinogram& y, const Image& x0)
{
    if (m.method == "fbp") {
        require_fbp_range(g);
        detail::Stopwatch clock;
        SolveResult r{fbp_reconstruct(g, y, m.window), {}};
        if (m.clip_fbp)
            vec::project_nonnegative(r.x.span());
        r.report.method = "fbp";
        r.report.stop_reason = StopReason::max_iters;
        r.report.wall_time = clock.seconds();
        return r;
    }
    if (m.method == "tv-sgp")
        return sgp_tv_solve(g, y, x0, m.cfg);
    if (m.method == "wavelet-fista")
        return fista_wavelet_solve(g, y, x0, m.cfg);
    if (m.method == "tpv-cp")
        return irl1_tpv_solve(g, y, x0, m.cfg);
    throw DomainError("unknown method '" + m.method + "'");
}

/// Parsed --init value: zeros | fbp | mbir-k | net:<path>.
struct InitSpec {
    std::string name = "zeros";
    MbirModel model = MbirModel::tv; ///< for mbir-k and for net inputs of kind TV-K / TpV-K
    int K = 10;
    SolverConfig coarse_cfg;         ///< MBIR-K settings
    std::string weights_path;

    bool uses_net() const { return name.rfind("net:", 0) == 0; }
};

struct LoadedNet {
    std::shared_ptr<const Network> net;
    std::string fingerprint;
};

inline LoadedNet load_network(const fs::path& path)
{
    const std::string bytes = detail::read_text(path);
    return {std::make_shared<const Network>(parse_weights(bytes, path.string())), weights_fingerprint(bytes)};
}

/// Builds the Deep Guess strategy for an init spec. For net:<path> the coarse
/// input comes from the container metadata (FBP, TV-K or TpV-K).
inline DeepGuessStrategy make_strategy(const InitSpec& s, const LoadedNet* net)
{
    if (s.name == "zeros")
        return DeepGuessStrategy::zeros();
    if (s.name == "fbp")
        return DeepGuessStrategy::fbp();
    if (s.name == "mbir-k")
        return DeepGuessStrategy::mbir_k(s.model, s.K);
    if (s.uses_net()) {
        if (!net || !net->net)
            throw Error("init " + s.name + ": weights not loaded");
        const auto& meta = net->net->metadata();
        if (meta.input == "FBP")
            return DeepGuessStrategy::fbp_net(net->net, net->fingerprint);
        const MbirModel model = meta.input == "TV-K" ? MbirModel::tv : MbirModel::tpv;
        return DeepGuessStrategy::mbir_k_net(model, meta.K > 0 ? meta.K : s.K, net->net, net->fingerprint);
    }
    throw DomainError("unknown init '" + s.name + "' (expected zeros, fbp, mbir-k or net:<weights>)");
}

/// Initial guess plus the nonnegative start handed to the iterative solvers.
struct PreparedInit {
    DeepGuess dg;
    Image x0;
};

inline PreparedInit prepare_init(const DeepGuessStrategy& s, const InitSpec& spec, const FanBeamGeometry& g,
                                 const Sinogram& y)
{
    PreparedInit p{compute_deep_guess(s, g, y, spec.coarse_cfg), {}};
    p.x0 = p.dg.x;
    vec::project_nonnegative(p.x0.span());
    return p;
}

/// One row of the benchmark table.
struct BenchmarkRow {
    std::string dataset_id, image_id, geometry, method, init;
    double p = 0, lambda = 0, nu = 0;
    double ssim_dg = NAN, re_dg = NAN, ssim_out = 0, re_out = 0;
    int iters = 0;
    std::string stop_reason;
    double wall_time_s = 0;
    json provenance;
};

inline const char* kCsvHeader =
    "dataset_id,image_id,geometry,method,init,p,lambda,nu,ssim_dg,re_dg,ssim_out,re_out,iters,stop_reason,wall_time_s";

namespace detail {

inline std::string fmt_g(double v)
{
    if (std::isnan(v))
        return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fnv_hex(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace detail

/// Short hash of a JSON config (canonical dump).
inline std::string config_hash(const json& j) { return detail::fnv_hex(j.dump()); }

inline std::string csv_line(const BenchmarkRow& r)
{
    using detail::fmt_g;
    std::ostringstream o;
    o << r.dataset_id << ',' << r.image_id << ',' << r.geometry << ',' << r.method << ',' << r.init << ','
      << fmt_g(r.p) << ',' << fmt_g(r.lambda) << ',' << fmt_g(r.nu) << ',' << fmt_g(r.ssim_dg) << ','
      << fmt_g(r.re_dg) << ',' << fmt_g(r.ssim_out) << ',' << fmt_g(r.re_out) << ',' << r.iters << ','
      << r.stop_reason << ',' << fmt_g(r.wall_time_s);
    return o.str();
}

inline json row_to_json(const BenchmarkRow& r)
{
    auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    return {{"dataset_id", r.dataset_id}, {"image_id", r.image_id}, {"geometry", r.geometry},
            {"method", r.method},         {"init", r.init},         {"p", r.p},
            {"lambda", r.lambda},         {"nu", r.nu},             {"ssim_dg", num(r.ssim_dg)},
            {"re_dg", num(r.re_dg)},      {"ssim_out", r.ssim_out}, {"re_out", r.re_out},
            {"iters", r.iters},           {"stop_reason", r.stop_reason}, {"wall_time_s", r.wall_time_s},
            {"provenance", r.provenance}};
}

/// Geometry label used in tables: G_<range>_<angles>.
inline std::string geometry_label(const FanBeamGeometry& g)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "G_%g_%d", g.angular_range, g.n_angles);
    return buf;
}

/// Runs `m` from the given init on one problem and fills a table row.
inline BenchmarkRow run_cell(const MethodOptions& m, const InitSpec& init, const LoadedNet* net,
                             const FanBeamGeometry& g, const Sinogram& y, const Image& gt, double nu)
{
    BenchmarkRow row;
    row.geometry = geometry_label(g);
    row.method = m.method;
    row.init = init.name;
    row.p = m.method == "tpv-cp" ? m.cfg.p : 1.0;
    row.lambda = m.method == "fbp" ? 0.0 : m.cfg.lambda;
    row.nu = nu;
    Image x0(g.image_side);
    if (m.method != "fbp") {
        const PreparedInit p = prepare_init(make_strategy(init, net), init, g, y);
        if (init.name != "zeros") {
            row.ssim_dg = ssim(p.dg.x, gt);
            row.re_dg = relative_error(p.dg.x, gt);
        }
        row.provenance["deep_guess"] = p.dg.provenance;
        x0 = p.x0;
    }
    const SolveResult r = run_method(m, g, y, x0);
    row.ssim_out = ssim(r.x, gt);
    row.re_out = relative_error(r.x, gt);
    row.iters = r.report.iterations_used;
    row.stop_reason = m.method == "fbp" ? "none" : to_string(r.report.stop_reason);
    row.wall_time_s = r.report.wall_time;
    return row;
}

struct Aggregate {
    int n = 0;
    double ssim_mean = 0, ssim_std = 0, re_mean = 0, re_std = 0, iters_mean = 0, iters_std = 0;
};

inline Aggregate aggregate(const std::vector<const BenchmarkRow*>& rows)
{
    Aggregate a;
    a.n = static_cast<int>(rows.size());
    if (a.n == 0)
        return a;
    auto stats = [&](auto get, double& mean, double& sd) {
        double s = 0, s2 = 0;
        for (const auto* r : rows)
            s += get(*r);
        mean = s / a.n;
        for (const auto* r : rows)
            s2 += (get(*r) - mean) * (get(*r) - mean);
        sd = a.n > 1 ? std::sqrt(s2 / (a.n - 1)) : 0.0;
    };
    stats([](const BenchmarkRow& r) { return r.ssim_out; }, a.ssim_mean, a.ssim_std);
    stats([](const BenchmarkRow& r) { return r.re_out; }, a.re_mean, a.re_std);
    stats([](const BenchmarkRow& r) { return double(r.iters); }, a.iters_mean, a.iters_std);
    return a;
}

/// Noise levels of the stability sweep.
inline const std::vector<double>& default_noise_sweep()
{
    static const std::vector<double> v{0.0, 0.005, 0.01, 0.02, 0.03, 0.05};
    return v;
}

} // namespace dgct
