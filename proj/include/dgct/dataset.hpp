#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "analytic.hpp"
#include "io.hpp"
#include "phantom.hpp"
#include "simulate.hpp"
#include "solvers/irl1.hpp"
#include "solvers/sgp.hpp"

namespace dgct {

enum class RisingTargets { none, tv, tpv };

inline const char* to_string(RisingTargets r)
{
    return r == RisingTargets::none ? "none" : (r == RisingTargets::tv ? "tv" : "tpv");
}

inline RisingTargets rising_from_string(const std::string& s)
{
    if (s == "none")
        return RisingTargets::none;
    if (s == "tv")
        return RisingTargets::tv;
    if (s == "tpv")
        return RisingTargets::tpv;
    throw DomainError("rising targets must be none, tv or tpv (got '" + s + "')");
}

struct DatasetOptions {
    std::string dataset_id = "dataset";
    int count = 0;
    int n_train = 0;                ///< items [0, n_train) go to train/, the rest to test/
    FanBeamGeometry geometry;
    PhantomSpec phantom;            ///< seed and side are set per item
    double nu = 0.0;
    std::uint64_t base_seed = 0;    ///< item i uses phantom seed base_seed + i
    int K = 10;                     ///< SGP iterations for coarse_tvK
    SolverConfig coarse_cfg;        ///< TV-K solver settings (lambda = mu, beta)
    RisingTargets rising = RisingTargets::none;
    SolverConfig rising_cfg;        ///< convergent solver for RISING targets
};

inline json phantom_spec_to_json(const PhantomSpec& s)
{
    return {{"side", s.side},
            {"ellipses", {s.min_ellipses, s.max_ellipses}},
            {"lines", {s.min_lines, s.max_lines}},
            {"contrast", {s.contrast_min, s.contrast_max}},
            {"min_abs_contrast", s.min_abs_contrast},
            {"background", s.background},
            {"support_radius", s.support_radius},
            {"axis", {s.axis_min, s.axis_max}},
            {"line_length", {s.line_length_min, s.line_length_max}},
            {"line_width", s.line_width}};
}

/// Noise seed of an item, decorrelated from its phantom seed (splitmix64 step).
inline std::uint64_t noise_seed_for(std::uint64_t phantom_seed)
{
    std::uint64_t z = phantom_seed + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline json report_to_json(const SolverReport& r)
{
    return {{"method", r.method},
            {"iterations_used", r.iterations_used},
            {"stop_reason", to_string(r.stop_reason)},
            {"final_objective", r.objective_trace.empty() ? 0.0 : r.objective_trace.back()},
            {"wall_time_s", r.wall_time}};
}

/// Writes root/{train,test}/{gt,sino,coarse_fbp,coarse_tvK[,target_rising]}/NNNN.f32
/// with sidecars and root/manifest.json. Every byte is fixed by the options.
inline json build_dataset(const fs::path& root, const DatasetOptions& opt)
{
    opt.geometry.validate();
    detail::require_domain(opt.count >= 1, "build_dataset: count must be >= 1");
    detail::require_domain(opt.n_train >= 0 && opt.n_train <= opt.count, "build_dataset: bad train/test split");
    detail::require_domain(opt.nu >= 0.0, "build_dataset: nu must be nonnegative");
    detail::require_domain(opt.K >= 1, "build_dataset: K must be >= 1");
    const auto& g = opt.geometry;
    const bool with_fbp = g.angular_range >= 180.0;

    json items = json::array();
    for (int i = 0; i < opt.count; ++i) {
        const bool train = i < opt.n_train;
        const int index = train ? i : i - opt.n_train;
        const std::string split = train ? "train" : "test";
        char name[16];
        std::snprintf(name, sizeof name, "%04d.f32", index);
        auto rel = [&](const char* kind) { return split + "/" + kind + "/" + name; };

        PhantomSpec ps = opt.phantom;
        ps.side = g.image_side;
        ps.seed = opt.base_seed + static_cast<std::uint64_t>(i);
        const std::uint64_t noise_seed = noise_seed_for(ps.seed);
        const Image gt = generate_phantom(ps);
        const Sinogram y = simulate_sinogram(g, gt, opt.nu, noise_seed);

        json item{{"split", split}, {"index", index}, {"seed", ps.seed}, {"noise_seed", noise_seed}};
        save_image(root / rel("gt"), gt, {{"seed", ps.seed}});
        item["gt"] = rel("gt");
        save_sinogram(root / rel("sino"), y, g, opt.nu, noise_seed);
        item["sino"] = rel("sino");

        // Coarse inputs are computed from the stored f32 sinogram, as a consumer would see it.
        const Sinogram ys = load_sinogram(root / rel("sino")).y;
        if (with_fbp) {
            save_image(root / rel("coarse_fbp"), fbp_reconstruct(g, ys), {{"producer", "fbp"}});
            item["coarse_fbp"] = rel("coarse_fbp");
        } else {
            item["coarse_fbp"] = nullptr;
        }
        SolverConfig kc = opt.coarse_cfg;
        kc.max_total_iters = opt.K;
        const auto coarse = sgp_tv_solve(g, ys, Image(g.image_side), kc);
        save_image(root / rel("coarse_tvK"), coarse.x, {{"producer", "tv-sgp"}, {"K", opt.K}});
        item["coarse_tvK"] = rel("coarse_tvK");

        if (opt.rising != RisingTargets::none) {
            const auto target = opt.rising == RisingTargets::tv
                                    ? sgp_tv_solve(g, ys, Image(g.image_side), opt.rising_cfg)
                                    : irl1_tpv_solve(g, ys, Image(g.image_side), opt.rising_cfg);
            const json rep = report_to_json(target.report);
            save_image(root / rel("target_rising"), target.x, {{"producer", to_string(opt.rising)}, {"report", rep}});
            item["target_rising"] = rel("target_rising");
            item["rising_report"] = rep;
        }
        items.push_back(item);
    }

    json manifest{{"format_version", 1},
                  {"dataset_id", opt.dataset_id},
                  {"geometry", geometry_to_json(g)},
                  {"nu", opt.nu},
                  {"base_seed", opt.base_seed},
                  {"phantom", phantom_spec_to_json(opt.phantom)},
                  {"K", opt.K},
                  {"coarse", {{"method", "tv-sgp"}, {"mu", opt.coarse_cfg.lambda}, {"beta", opt.coarse_cfg.beta}}},
                  {"rising", to_string(opt.rising)},
                  {"splits", {{"train", opt.n_train}, {"test", opt.count - opt.n_train}}},
                  {"items", items}};
    if (opt.rising != RisingTargets::none)
        manifest["rising_solver"] = {{"lambda", opt.rising_cfg.lambda}, {"p", opt.rising_cfg.p},
                                     {"beta", opt.rising_cfg.beta}, {"tol", opt.rising_cfg.tol},
                                     {"max_total_iters", opt.rising_cfg.max_total_iters}};
    write_json(root / "manifest.json", manifest);
    return manifest;
}

inline json load_manifest(const fs::path& root) { return read_json(root / "manifest.json"); }

} // namespace dgct
